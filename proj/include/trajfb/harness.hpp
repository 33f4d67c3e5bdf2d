#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "trajfb/agents.hpp"
#include "trajfb/dp.hpp"
#include "trajfb/envs.hpp"
#include "trajfb/errors.hpp"
#include "trajfb/mdp.hpp"
#include "trajfb/rng.hpp"

namespace trajfb {

// One CSV row. Regret columns are exact quantities from policy evaluation,
// never sampled returns; v_hat is the sampled return the agent saw.
struct RegretRecord {
    std::string agent;
    std::uint64_t seed = 0;
    long episode = 0;
    double v_opt = 0.0;
    double v_pi = 0.0;
    double regret = 0.0;
    double cum_regret = 0.0;
    double v_hat = 0.0;
    int switched = 0;
    long long wall_time_ns = 0;
};

struct ExperimentConfig {
    Mdp mdp;
    std::vector<AgentConfig> agents;
    long K = 0;
    std::vector<std::uint64_t> seeds;
    // Timing is opt-in diagnostics: with it off the wall_time_ns column is 0
    // and repeated runs of the same config are byte-identical.
    bool timing = false;
    std::string out; // optional default output path
};

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
    ExperimentConfig cfg;
    try {
        cfg.mdp = generate_env(j.at("env"));
        cfg.K = j.at("K").get<long>();
        cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        cfg.timing = j.value("timing", false);
        cfg.out = j.value("out", std::string{});

        double delta = j.value("delta", 0.1);
        double lambda = j.value("lambda", 0.0);
        double C = j.value("C", 1.0);

        for (const auto& aj : j.at("agents")) {
            AgentConfig ac;
            ac.kind = agent_kind_from_string(aj.at("kind").get<std::string>());
            ac.name = aj.value("name", std::string{});
            ac.delta = aj.value("delta", delta);
            ac.lambda = aj.value("lambda", lambda);
            ac.C = aj.value("C", C);
            ac.enumeration_cap = aj.value("enumeration_cap", long{1000000});
            if (!(ac.delta > 0.0 && ac.delta < 1.0)) throw InvalidDelta(ac.delta);
            cfg.agents.push_back(std::move(ac));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed experiment config: ") + e.what());
    } catch (const InvalidSpec& e) {
        throw ConfigError(e.what());
    }
    if (cfg.K < 1) throw ConfigError("K must be >= 1");
    if (cfg.seeds.empty()) throw ConfigError("seeds must be non-empty");
    if (cfg.agents.empty()) throw ConfigError("agents must be non-empty");
    for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
        const std::string& n = cfg.agents[i].display_name();
        if (n.find(',') != std::string::npos)
            throw ConfigError("agent name may not contain a comma: " + n);
        for (std::size_t l = 0; l < i; ++l)
            if (cfg.agents[l].display_name() == n)
                throw ConfigError("duplicate agent name '" + n + "'; give duplicates distinct names");
    }
    validate_mdp(cfg.mdp);
    return cfg;
}

// Optional per-episode capture for the structural checks.
struct CellTrace {
    std::vector<std::vector<int>> dhats; // (s,a) visit counts per episode
    std::vector<char> switched;
};

// One (agent, seed) cell; records come back in episode order. All regret
// quantities are exact: V* from planning on the true model once, per-policy
// values from dual-route policy evaluation on the true model.
inline std::vector<RegretRecord> run_cell(const Mdp& mdp, const AgentConfig& acfg,
                                          std::uint64_t seed, long K, bool timing,
                                          CellTrace* trace = nullptr) {
    using clock = std::chrono::steady_clock;
    std::unique_ptr<Agent> agent =
        make_agent(acfg, mdp.S, mdp.A, mdp.H, &mdp.P, &mdp.mean_rewards);
    const std::string& name = agent->name();

    PlanResult opt = backward_induction(mdp.P, mdp.mean_rewards, mdp.H);

    std::vector<RegretRecord> records;
    records.reserve(static_cast<std::size_t>(K));
    double cum = 0.0;
    for (long k = 1; k <= K; ++k) {
        int s1 = mdp.init.state_for_episode(k);
        RngStream agent_rng(derive_stream_seed(seed, name, static_cast<std::uint64_t>(k),
                                               StreamPurpose::AgentNoise));
        RngStream trans_rng(derive_stream_seed(seed, name, static_cast<std::uint64_t>(k),
                                               StreamPurpose::EnvTransition));
        RngStream reward_rng(derive_stream_seed(seed, name, static_cast<std::uint64_t>(k),
                                                StreamPurpose::EnvReward));

        clock::time_point t0 = clock::now();
        Policy pi = agent->select_policy(k, s1, agent_rng);
        clock::time_point t1 = clock::now();

        Trajectory traj = sample_episode(mdp, pi, s1, trans_rng, reward_rng);
        double v_pi = policy_value(pi, mdp.P, mdp.mean_rewards, s1);

        clock::time_point t2 = clock::now();
        bool switched = agent->absorb(feedback_from_trajectory(k, traj));
        clock::time_point t3 = clock::now();

        RegretRecord rec;
        rec.agent = name;
        rec.seed = seed;
        rec.episode = k;
        rec.v_opt = opt.value(s1, 0);
        rec.v_pi = v_pi;
        rec.regret = rec.v_opt - rec.v_pi;
        cum += rec.regret;
        rec.cum_regret = cum;
        rec.v_hat = traj.v_hat;
        rec.switched = switched ? 1 : 0;
        if (timing)
            rec.wall_time_ns =
                std::chrono::duration_cast<std::chrono::nanoseconds>((t1 - t0) + (t3 - t2)).count();
        records.push_back(std::move(rec));

        if (trace) {
            trace->dhats.push_back(traj.d_hat);
            trace->switched.push_back(switched ? 1 : 0);
        }
    }
    return records;
}

// Full grid of (agent, seed) cells. Cells are independent by construction
// (stream seeds depend only on agent name, seed and episode), so the merge
// order, and therefore the output, does not depend on the thread count.
inline std::vector<RegretRecord> run_experiment(const ExperimentConfig& cfg, int threads = 1) {
    struct Cell {
        const AgentConfig* acfg;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (const AgentConfig& a : cfg.agents)
        for (std::uint64_t s : cfg.seeds) cells.push_back({&a, s});

    std::vector<std::vector<RegretRecord>> results(cells.size());
    std::vector<std::exception_ptr> failures(cells.size());

    if (threads <= 1 || cells.size() <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            results[i] = run_cell(cfg.mdp, *cells[i].acfg, cells[i].seed, cfg.K, cfg.timing);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= cells.size()) return;
                try {
                    results[i] = run_cell(cfg.mdp, *cells[i].acfg, cells[i].seed, cfg.K, cfg.timing);
                } catch (...) {
                    failures[i] = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(threads), cells.size());
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
        for (const auto& f : failures)
            if (f) std::rethrow_exception(f);
    }

    std::vector<RegretRecord> all;
    for (auto& r : results)
        for (auto& rec : r) all.push_back(std::move(rec));
    return all;
}

// ---- CSV ----

inline const char* csv_header() {
    return "agent,seed,episode,v_opt,v_pi,regret,cum_regret,v_hat,switched,wall_time_ns";
}

namespace detail {
inline void append_g17(std::string& out, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}
} // namespace detail

inline std::string records_to_csv(const std::vector<RegretRecord>& records) {
    std::string out = csv_header();
    out += '\n';
    for (const RegretRecord& r : records) {
        out += r.agent;
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        out += std::to_string(r.episode);
        out += ',';
        detail::append_g17(out, r.v_opt);
        out += ',';
        detail::append_g17(out, r.v_pi);
        out += ',';
        detail::append_g17(out, r.regret);
        out += ',';
        detail::append_g17(out, r.cum_regret);
        out += ',';
        detail::append_g17(out, r.v_hat);
        out += ',';
        out += std::to_string(r.switched);
        out += ',';
        out += std::to_string(r.wall_time_ns);
        out += '\n';
    }
    return out;
}

inline void write_records_csv(const std::vector<RegretRecord>& records, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + path);
    f << records_to_csv(records);
    if (!f) throw ConfigError("failed writing output file: " + path);
}

inline std::vector<RegretRecord> read_records_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open input file: " + path);
    std::string line;
    if (!std::getline(f, line)) throw EmptyInput("input CSV is empty: " + path);
    if (line != csv_header()) throw ConfigError("unexpected CSV header in " + path);

    std::vector<RegretRecord> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            std::size_t pos = line.find(',', start);
            if (pos == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        if (fields.size() != 10) throw ConfigError("malformed CSV row: " + line);
        RegretRecord r;
        r.agent = fields[0];
        r.seed = std::strtoull(fields[1].c_str(), nullptr, 10);
        r.episode = std::strtol(fields[2].c_str(), nullptr, 10);
        r.v_opt = std::strtod(fields[3].c_str(), nullptr);
        r.v_pi = std::strtod(fields[4].c_str(), nullptr);
        r.regret = std::strtod(fields[5].c_str(), nullptr);
        r.cum_regret = std::strtod(fields[6].c_str(), nullptr);
        r.v_hat = std::strtod(fields[7].c_str(), nullptr);
        r.switched = static_cast<int>(std::strtol(fields[8].c_str(), nullptr, 10));
        r.wall_time_ns = std::strtoll(fields[9].c_str(), nullptr, 10);
        out.push_back(std::move(r));
    }
    if (out.empty()) throw EmptyInput("input CSV has no data rows: " + path);
    return out;
}

// ---- summary statistics ----

// Per agent: final cumulative regret across seeds (mean, sample std), a
// least-squares fit of cum_regret against sqrt(episode) through the origin,
// switch totals, and wall-time stats.
inline nlohmann::json summarize(const std::vector<RegretRecord>& records) {
    if (records.empty()) throw EmptyInput("no records to summarize");

    std::vector<std::string> order;
    std::map<std::string, std::vector<const RegretRecord*>> by_agent;
    for (const RegretRecord& r : records) {
        auto [it, inserted] = by_agent.try_emplace(r.agent);
        if (inserted) order.push_back(r.agent);
        it->second.push_back(&r);
    }

    nlohmann::json out = nlohmann::json::object();
    for (const std::string& name : order) {
        const auto& recs = by_agent[name];

        std::map<std::uint64_t, const RegretRecord*> last_by_seed;
        double fit_num = 0.0, fit_den = 0.0;
        long long switches = 0;
        std::vector<long long> walls;
        walls.reserve(recs.size());
        double wall_sum = 0.0;
        for (const RegretRecord* r : recs) {
            auto& slot = last_by_seed[r->seed];
            if (!slot || r->episode > slot->episode) slot = r;
            fit_num += std::sqrt(static_cast<double>(r->episode)) * r->cum_regret;
            fit_den += static_cast<double>(r->episode);
            switches += r->switched;
            walls.push_back(r->wall_time_ns);
            wall_sum += static_cast<double>(r->wall_time_ns);
        }

        std::vector<double> finals;
        for (const auto& [seed, r] : last_by_seed) finals.push_back(r->cum_regret);
        double mean = 0.0;
        for (double v : finals) mean += v;
        mean /= static_cast<double>(finals.size());
        double var = 0.0;
        if (finals.size() > 1) {
            for (double v : finals) var += (v - mean) * (v - mean);
            var /= static_cast<double>(finals.size() - 1);
        }

        std::nth_element(walls.begin(), walls.begin() + walls.size() / 2, walls.end());
        long long wall_median = walls[walls.size() / 2];

        out[name] = nlohmann::json{
            {"seeds", finals.size()},
            {"episodes", recs.size() / finals.size()},
            {"final_cum_regret_mean", mean},
            {"final_cum_regret_std", std::sqrt(var)},
            {"sqrt_k_fit_coeff", fit_den > 0.0 ? fit_num / fit_den : 0.0},
            {"total_switches", switches},
            {"wall_time_ns_mean", wall_sum / static_cast<double>(recs.size())},
            {"wall_time_ns_median", wall_median}};
    }
    return out;
}

} // namespace trajfb
