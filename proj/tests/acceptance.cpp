// Acceptance gate: one line per criterion, nonzero exit if any fails.
// Everything here is seeded and deterministic for a given build.

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "trajfb/trajfb.hpp"

using namespace trajfb;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

int g_failures = 0;

void report(int idx, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %2d. %s (%s)\n", pass ? "PASS" : "FAIL", idx, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

// ---- 1-3: oracle equivalence and linear-algebra integrity ----

void criterion_occupancy() {
    auto t0 = clock_type::now();
    oracle::CheckResult res = check_occupancy_against_paths();
    double el = seconds_since(t0);
    report(1, "occupancy: forward recursion vs path enumeration, 50 instances",
           res.pass && el < 10.0, fmt("worst |diff| %.3g vs 1e-10, %.2fs", res.lhs, el));
}

void criterion_planning() {
    auto t0 = clock_type::now();
    oracle::CheckResult res = check_planning_against_enumeration();
    double el = seconds_since(t0);
    report(2, "planning: backward induction vs policy enumeration, 20 instances",
           res.pass && el < 30.0, fmt("worst |diff| %.3g vs 1e-10, %.2fs", res.lhs, el));
}

void criterion_gram() {
    auto t0 = clock_type::now();
    oracle::CheckResult res = check_gram_updates_against_direct();
    report(3, "gram integrity: 1000 rank-one updates in dimension 20", res.pass,
           fmt("%s, %.2fs", res.details.c_str(), seconds_since(t0)));
}

// ---- 4: deterministic lemma suite ----

void criterion_lemmas() {
    auto t0 = clock_type::now();
    oracle::CheckResult vd = check_value_difference_suite();
    oracle::CheckResult l1 = check_occupancy_l1_suite();

    CellTrace trace = lemma_run_trace(2000);
    oracle::CheckResult ell = check_elliptical_on_run(trace, 4, 2, 4);
    std::vector<std::vector<int>> counts(trace.dhats.begin(), trace.dhats.end());
    oracle::CheckResult cv = oracle::check_cumulative_visitation(counts, 4, 2, 4);

    bool switches_ok = true;
    std::string sw_detail;
    for (double C : {0.1, 1.0, 10.0}) {
        oracle::CheckResult sb = check_switch_bound_run(C, 2000);
        switches_ok = switches_ok && sb.pass;
        sw_detail += fmt(" C=%g:%ld<=%.1f", C, static_cast<long>(sb.lhs), sb.rhs);
    }
    double el = seconds_since(t0);
    bool pass = vd.pass && l1.pass && ell.pass && cv.pass && switches_ok && el < 120.0;
    report(4, "lemma suite: value difference, L1 bound, potentials, switch bounds", pass,
           fmt("vd %.2g, l1 slack %.3g, pot %.1f<=%.1f, visit %.2f<=%.2f,%s, %.1fs", vd.lhs,
               l1.rhs - l1.lhs, ell.lhs, ell.rhs, cv.lhs, cv.rhs, sw_detail.c_str(), el));
}

// ---- 5: least-squares consistency under a fixed covering policy ----

void criterion_ls_consistency() {
    auto t0 = clock_type::now();
    Mdp m = generate_random_dense(3, 2, 4, 101);

    // Covering policy: uniform over actions in every state, realized as a
    // fresh uniformly drawn action map per episode. A single deterministic
    // map leaves the design covariance nearly singular along one reward
    // contrast, so the ridge prior's bias there never washes out.
    double worst = 0.0;
    for (std::uint64_t seed : {1, 2, 3}) {
        LsEstimator est(6, static_cast<double>(m.H));
        for (long k = 1; k <= 5000; ++k) {
            RngStream p(derive_stream_seed(seed, "ls", k, StreamPurpose::AgentPolicy));
            Policy pi(3, 4);
            for (auto& a : pi.acts) a = p.uniform_int(2);
            RngStream t(derive_stream_seed(seed, "ls", k, StreamPurpose::EnvTransition));
            RngStream w(derive_stream_seed(seed, "ls", k, StreamPurpose::EnvReward));
            Trajectory traj = sample_episode(m, pi, 0, t, w);
            est.update(design_vector(traj.states, traj.actions, 3, 2), traj.v_hat);
        }
        Eigen::VectorXd err = est.point_estimate() -
                              Eigen::Map<const Eigen::VectorXd>(m.mean_rewards.data(), 6);
        worst = std::max(worst, err.cwiseAbs().maxCoeff());
    }
    report(5, "reward recovery: fixed covering policy, K=5000, 3 seeds", worst <= 0.05,
           fmt("worst ||r_hat - r||_inf %.4f vs 0.05, %.1fs", worst, seconds_since(t0)));
}

// ---- 6: optimism frequency of the perturbed planner ----

void criterion_optimism() {
    auto t0 = clock_type::now();
    Mdp m = generate_random_dense(3, 2, 4, 31);
    PlanResult opt = backward_induction(m.P, m.mean_rewards, m.H);
    double v_star = opt.value(0, 0);

    long optimistic = 0, total = 0;
    for (std::uint64_t seed : {1, 2, 3}) {
        AgentConfig cfg;
        cfg.kind = AgentKind::TsKnown;
        TsKnownAgent agent(m.P, m.H, cfg);
        for (long k = 1; k <= 2000; ++k) {
            RngStream a(derive_stream_seed(seed, "opt", k, StreamPurpose::AgentNoise));
            RngStream t(derive_stream_seed(seed, "opt", k, StreamPurpose::EnvTransition));
            RngStream w(derive_stream_seed(seed, "opt", k, StreamPurpose::EnvReward));
            Policy pi = agent.select_policy(k, 0, a);
            if (agent.planning_value() > v_star) ++optimistic;
            ++total;
            Trajectory traj = sample_episode(m, pi, 0, t, w);
            agent.absorb(feedback_from_trajectory(k, traj));
        }
    }
    double frac = static_cast<double>(optimistic) / static_cast<double>(total);
    report(6, "optimism frequency: perturbed value exceeds V*, K=2000 x 3 seeds", frac >= 0.05,
           fmt("fraction %.3f vs 0.05, %.1fs", frac, seconds_since(t0)));
}

// ---- 7: sublinear-regret scaling on the hard chain ----

void criterion_regret_scaling() {
    auto t0 = clock_type::now();
    Mdp m = generate_chain(5, 5, 0.0);
    const AgentKind kinds[] = {AgentKind::UniformRandom, AgentKind::TsKnown, AgentKind::UcbviTs,
                               AgentKind::RsUcbviTs};

    double uniform_final = 0.0;
    bool pass = true;
    std::string detail;
    for (AgentKind kind : kinds) {
        AgentConfig cfg;
        cfg.kind = kind;
        cfg.C = 1.0;
        double final_sum = 0.0, ratio_sum = 0.0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            std::vector<RegretRecord> recs = run_cell(m, cfg, seed, 4000, false);
            final_sum += recs[3999].cum_regret;
            ratio_sum += recs[3999].cum_regret / recs[999].cum_regret;
        }
        double final_mean = final_sum / 10.0, ratio_mean = ratio_sum / 10.0;
        if (kind == AgentKind::UniformRandom) {
            uniform_final = final_mean;
            detail += fmt("uniform %.0f;", final_mean);
        } else {
            bool half = final_mean <= 0.5 * uniform_final;
            bool sublinear = ratio_mean <= 2.5;
            pass = pass && half && sublinear;
            detail += fmt(" %s %.0f ratio %.2f;", agent_kind_name(kind), final_mean, ratio_mean);
        }
    }
    double el = seconds_since(t0);
    pass = pass && el < 600.0;
    report(7, "regret scaling: chain(5,5), K=4000, 10 seeds, <=0.5x uniform and ratio<=2.5",
           pass, fmt("%s %.0fs", detail.c_str(), el));
}

// ---- 8: exact-enumeration optimism vs perturbed planning at toy scale ----

void criterion_oful_parity() {
    auto t0 = clock_type::now();
    Mdp m = generate_random_dense(2, 2, 3, 7);
    double oful_final = 0.0, ts_final = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        AgentConfig cfg;
        cfg.kind = AgentKind::OfulKnown;
        oful_final += run_cell(m, cfg, seed, 1000, false)[999].cum_regret;
        cfg.kind = AgentKind::TsKnown;
        ts_final += run_cell(m, cfg, seed, 1000, false)[999].cum_regret;
    }
    oful_final /= 5.0;
    ts_final /= 5.0;
    double el = seconds_since(t0);
    bool pass = oful_final <= 1.2 * ts_final && el < 300.0;
    report(8, "confidence-bound vs perturbation parity: K=1000, 5 seeds", pass,
           fmt("oful %.1f vs ts %.1f (+20%% = %.1f), %.0fs", oful_final, ts_final,
               1.2 * ts_final, el));
}

// ---- 9: rarely-switching speedup on a wide instance ----

void criterion_timing() {
    auto t0 = clock_type::now();
    Mdp m = generate_random_dense(10, 5, 5, 11);
    AgentConfig rs;
    rs.kind = AgentKind::RsUcbviTs;
    rs.C = 1.0;
    AgentConfig plain = rs;
    plain.kind = AgentKind::UcbviTs;

    auto median_ns = [](const std::vector<RegretRecord>& recs) {
        std::vector<long long> t;
        t.reserve(recs.size());
        for (const RegretRecord& r : recs) t.push_back(r.wall_time_ns);
        std::nth_element(t.begin(), t.begin() + t.size() / 2, t.end());
        return t[t.size() / 2];
    };
    long long rs_med = median_ns(run_cell(m, rs, 5, 500, true));
    long long plain_med = median_ns(run_cell(m, plain, 5, 500, true));
    report(9, "per-episode wall time: rarely-switching < plain on SA=50, K=500",
           rs_med < plain_med,
           fmt("medians %lldns vs %lldns, %.1fs", rs_med, plain_med, seconds_since(t0)));
}

// ---- 10: byte-identical reruns ----

void criterion_reproducibility() {
    auto t0 = clock_type::now();
    nlohmann::json j = nlohmann::json::parse(R"({
        "env": {"generator": "chain", "S": 3, "H": 3, "slip": 0.1},
        "K": 30, "seeds": [1, 2],
        "agents": [
            {"kind": "uniform_random"}, {"kind": "oracle_optimal"}, {"kind": "ts_known"},
            {"kind": "ucbvi_ts"}, {"kind": "rs_ucbvi_ts"}
        ]
    })");
    ExperimentConfig cfg = parse_experiment_config(j);
    std::string a = records_to_csv(run_experiment(cfg));
    std::string b = records_to_csv(run_experiment(cfg, 2));
    report(10, "reproducibility: identical config and seeds give identical bytes",
           !a.empty() && a == b, fmt("%zu bytes compared, %.1fs", a.size(), seconds_since(t0)));
}

} // namespace

int main() {
    criterion_occupancy();
    criterion_planning();
    criterion_gram();
    criterion_lemmas();
    criterion_ls_consistency();
    criterion_optimism();
    criterion_regret_scaling();
    criterion_oful_parity();
    criterion_timing();
    criterion_reproducibility();
    std::printf("%d of 10 criteria passed\n", 10 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
