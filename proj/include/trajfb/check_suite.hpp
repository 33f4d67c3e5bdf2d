#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "trajfb/envs.hpp"
#include "trajfb/harness.hpp"
#include "trajfb/oracles.hpp"

// Self-contained verification suites behind `trajfb check`. The "oracles"
// suite compares the fast implementations against the brute-force references;
// the "lemmas" suite exercises the structural inequalities on freshly
// generated runs. Everything is seeded, so a suite either always passes or
// always fails for a given build.

namespace trajfb {

namespace check_detail {

inline Policy random_policy(int S, int A, int H, RngStream& rng) {
    Policy pi(S, H);
    for (auto& a : pi.acts) a = rng.uniform_int(A);
    return pi;
}

// Kernel near `base`: every row gets bounded noise and is renormalized.
inline Kernel perturbed_kernel(const Kernel& base, double scale, RngStream& rng) {
    Kernel out = base;
    for (int s = 0; s < base.S; ++s)
        for (int a = 0; a < base.A; ++a) {
            double* row = out.row(s, a);
            double sum = 0.0;
            for (int s2 = 0; s2 < base.S; ++s2) {
                row[s2] = std::max(1e-9, row[s2] + scale * (rng.uniform() - 0.5));
                sum += row[s2];
            }
            for (int s2 = 0; s2 < base.S; ++s2) row[s2] /= sum;
        }
    return out;
}

inline std::vector<double> random_rewards(int m, double lo, double hi, RngStream& rng) {
    std::vector<double> r(static_cast<std::size_t>(m));
    for (auto& v : r) v = lo + (hi - lo) * rng.uniform();
    return r;
}

} // namespace check_detail

// Forward occupancy recursion against path enumeration, 50 random instances.
inline oracle::CheckResult check_occupancy_against_paths() {
    RngStream rng(derive_stream_seed(20240501, "occupancy_paths", 0, StreamPurpose::EnvGen));
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        int S = 2 + rng.uniform_int(3), A = 1 + rng.uniform_int(3), H = 1 + rng.uniform_int(4);
        Mdp m = generate_random_dense(S, A, H, rng.raw());
        Policy pi = check_detail::random_policy(S, A, H, rng);
        int s1 = rng.uniform_int(S);
        OccupancyMeasure fast = occupancy_measure(pi, m.P, s1);
        OccupancyMeasure slow = oracle::brute_force_occupancy(pi, m.P, s1);
        for (std::size_t i = 0; i < fast.q.size(); ++i)
            worst = std::max(worst, std::abs(fast.q[i] - slow.q[i]));
        for (std::size_t i = 0; i < fast.d.size(); ++i)
            worst = std::max(worst, std::abs(fast.d[i] - slow.d[i]));
    }
    oracle::CheckResult res;
    res.lhs = worst;
    res.rhs = 1e-10;
    res.pass = worst <= res.rhs;
    res.details = "50 instances, S<=4, A<=3, H<=4";
    return res;
}

// Backward induction against exhaustive policy search, 20 small instances.
inline oracle::CheckResult check_planning_against_enumeration() {
    static const int shapes[][3] = {{2, 2, 2}, {2, 2, 3}, {3, 2, 2}, {2, 3, 2}, {3, 2, 3},
                                    {2, 2, 4}, {4, 2, 2}, {2, 4, 2}, {3, 3, 2}, {2, 3, 3},
                                    {2, 2, 5}, {5, 2, 2}, {3, 2, 4}, {4, 2, 3}, {2, 4, 3},
                                    {3, 4, 2}, {2, 3, 4}, {6, 2, 2}, {2, 2, 6}, {4, 3, 2}};
    RngStream rng(derive_stream_seed(20240501, "planning_enum", 0, StreamPurpose::EnvGen));
    double worst = 0.0;
    for (const auto& sh : shapes) {
        int S = sh[0], A = sh[1], H = sh[2];
        Mdp m = generate_random_dense(S, A, H, rng.raw());
        int s1 = rng.uniform_int(S);
        PlanResult plan = backward_induction(m.P, m.mean_rewards, m.H);
        oracle::EnumeratedBest best =
            oracle::best_policy_by_enumeration(m.P, m.mean_rewards, s1, m.H, 20000);
        worst = std::max(worst, std::abs(plan.value(s1, 0) - best.value));
        // the DP policy itself must attain the enumerated maximum
        OccupancyMeasure occ = oracle::brute_force_occupancy(plan.policy, m.P, s1);
        double v = 0.0;
        for (std::size_t j = 0; j < occ.d.size(); ++j) v += occ.d[j] * m.mean_rewards[j];
        worst = std::max(worst, std::abs(v - best.value));
    }
    oracle::CheckResult res;
    res.lhs = worst;
    res.rhs = 1e-10;
    res.pass = worst <= res.rhs;
    res.details = "20 instances with A^(S*H) <= 1e4";
    return res;
}

// 1000 rank-one updates in dimension 20: incremental inverse vs direct LU
// inverse (max abs), incremental determinant vs direct (relative).
inline oracle::CheckResult check_gram_updates_against_direct() {
    const int m = 20, H = 10;
    RngStream rng(derive_stream_seed(20240501, "gram_direct", 0, StreamPurpose::EnvGen));
    LsEstimator est(m, 2.5);
    for (int k = 0; k < 1000; ++k) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(m);
        int visits = 1 + rng.uniform_int(H);
        for (int t = 0; t < visits; ++t) d(rng.uniform_int(m)) += 1.0;
        est.update(d, rng.uniform() * H);
    }
    Eigen::MatrixXd direct = oracle::direct_inverse(est.gram_b());
    double inv_err = (est.gram_b_inv() - direct).cwiseAbs().maxCoeff();
    double det_direct = oracle::direct_determinant(est.gram_b());
    double det_err = std::abs(est.det_b() - det_direct) / std::abs(det_direct);

    oracle::CheckResult res;
    res.lhs = std::max(inv_err, det_err);
    res.rhs = 1e-8; // determinant tolerance is looser and checked separately
    res.pass = inv_err <= 1e-8 && det_err <= 1e-6;
    res.details = "inverse max-abs " + std::to_string(inv_err) + ", det rel " + std::to_string(det_err);
    return res;
}

// Exact value-difference identity on 100 random model pairs.
inline oracle::CheckResult check_value_difference_suite() {
    RngStream rng(derive_stream_seed(20240501, "value_diff", 0, StreamPurpose::EnvGen));
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        int S = 2 + rng.uniform_int(3), A = 1 + rng.uniform_int(3), H = 1 + rng.uniform_int(4);
        Mdp m1 = generate_random_dense(S, A, H, rng.raw());
        Kernel P2 = (trial % 2 == 0) ? generate_random_dense(S, A, H, rng.raw()).P
                                     : check_detail::perturbed_kernel(m1.P, 0.3, rng);
        std::vector<double> r1 = check_detail::random_rewards(S * A, -1.0, 2.0, rng);
        std::vector<double> r2 = check_detail::random_rewards(S * A, -1.0, 2.0, rng);
        Policy pi = check_detail::random_policy(S, A, H, rng);
        int s1 = rng.uniform_int(S);
        worst = std::max(worst,
                         oracle::check_value_difference(pi, m1.P, r1, P2, r2, s1).lhs);
    }
    oracle::CheckResult res;
    res.lhs = worst;
    res.rhs = 1e-9;
    res.pass = worst <= res.rhs;
    res.details = "100 random model pairs";
    return res;
}

// Occupancy L1 bound on 100 random kernel pairs sharing a policy.
inline oracle::CheckResult check_occupancy_l1_suite() {
    RngStream rng(derive_stream_seed(20240501, "l1_bound", 0, StreamPurpose::EnvGen));
    bool all = true;
    double worst_margin = std::numeric_limits<double>::infinity();
    oracle::CheckResult tightest;
    for (int trial = 0; trial < 100; ++trial) {
        int S = 2 + rng.uniform_int(3), A = 1 + rng.uniform_int(3), H = 1 + rng.uniform_int(4);
        Mdp m1 = generate_random_dense(S, A, H, rng.raw());
        Kernel P2 = (trial % 2 == 0) ? generate_random_dense(S, A, H, rng.raw()).P
                                     : check_detail::perturbed_kernel(m1.P, 0.2, rng);
        Policy pi = check_detail::random_policy(S, A, H, rng);
        int s1 = rng.uniform_int(S);
        oracle::CheckResult one = oracle::check_occupancy_l1_bound(pi, m1.P, P2, s1);
        all = all && one.pass;
        if (one.rhs - one.lhs < worst_margin) {
            worst_margin = one.rhs - one.lhs;
            tightest = one;
        }
    }
    tightest.pass = all;
    tightest.details = "100 random kernel pairs, tightest shown";
    return tightest;
}

// Trace of a real unknown-model run for the potential and visitation bounds.
inline CellTrace lemma_run_trace(long K) {
    Mdp m = generate_chain(4, 4, 0.1);
    AgentConfig acfg;
    acfg.kind = AgentKind::UcbviTs;
    acfg.delta = 0.1;
    CellTrace trace;
    run_cell(m, acfg, 7, K, false, &trace);
    return trace;
}

inline oracle::CheckResult check_elliptical_on_run(const CellTrace& trace, int S, int A, int H) {
    std::vector<Eigen::VectorXd> dhats;
    dhats.reserve(trace.dhats.size());
    for (const auto& counts : trace.dhats) {
        Eigen::VectorXd d(static_cast<Eigen::Index>(counts.size()));
        for (std::size_t j = 0; j < counts.size(); ++j) d(static_cast<Eigen::Index>(j)) = counts[j];
        dhats.push_back(std::move(d));
    }
    return oracle::check_elliptical_potential(dhats, static_cast<double>(H), S, A, H);
}

inline oracle::CheckResult check_switch_bound_run(double C, long K) {
    Mdp m = generate_chain(3, 3, 0.1);
    AgentConfig acfg;
    acfg.kind = AgentKind::RsUcbviTs;
    acfg.delta = 0.1;
    acfg.C = C;
    CellTrace trace;
    run_cell(m, acfg, 11, K, false, &trace);
    long switches = 0;
    for (char c : trace.switched) switches += c;
    return oracle::check_switch_bound(switches, C, K, m.S, m.A, m.H, static_cast<double>(m.H));
}

struct SuiteReport {
    bool pass = true;
    nlohmann::json report = nlohmann::json::object();

    void add(const std::string& name, const oracle::CheckResult& r) {
        report[name] = r.to_json();
        pass = pass && r.pass;
    }
};

inline SuiteReport run_check_suite(const std::string& suite) {
    if (suite != "oracles" && suite != "lemmas" && suite != "all")
        throw ConfigError("unknown check suite: " + suite + " (use oracles, lemmas or all)");
    SuiteReport rep;
    if (suite == "oracles" || suite == "all") {
        rep.add("occupancy_forward_vs_paths", check_occupancy_against_paths());
        rep.add("planning_dp_vs_enumeration", check_planning_against_enumeration());
        rep.add("gram_updates_vs_direct", check_gram_updates_against_direct());
    }
    if (suite == "lemmas" || suite == "all") {
        rep.add("value_difference_identity", check_value_difference_suite());
        rep.add("occupancy_l1_bound", check_occupancy_l1_suite());
        CellTrace trace = lemma_run_trace(2000);
        rep.add("elliptical_potential", check_elliptical_on_run(trace, 4, 2, 4));
        std::vector<std::vector<int>> counts(trace.dhats.begin(), trace.dhats.end());
        rep.add("cumulative_visitation", oracle::check_cumulative_visitation(counts, 4, 2, 4));
        rep.add("switch_bound_C_0.1", check_switch_bound_run(0.1, 2000));
        rep.add("switch_bound_C_1", check_switch_bound_run(1.0, 2000));
        rep.add("switch_bound_C_10", check_switch_bound_run(10.0, 2000));
    }
    return rep;
}

} // namespace trajfb
