#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>

#include "trajfb/check_suite.hpp"
#include "trajfb/harness.hpp"
#include "trajfb/oracles.hpp"

using namespace trajfb;

namespace {

nlohmann::json small_config() {
    return nlohmann::json::parse(R"({
        "env": {"generator": "chain", "S": 3, "H": 3, "slip": 0.1},
        "K": 25,
        "seeds": [1, 2],
        "agents": [
            {"kind": "uniform_random"},
            {"kind": "oracle_optimal"},
            {"kind": "ucbvi_ts"},
            {"kind": "rs_ucbvi_ts"}
        ]
    })");
}

} // namespace

TEST_CASE("csv header is pinned") {
    REQUIRE(csv_header() ==
            std::string("agent,seed,episode,v_opt,v_pi,regret,cum_regret,v_hat,switched,wall_time_ns"));
}

TEST_CASE("experiment config parsing applies defaults and overrides") {
    nlohmann::json j = small_config();
    j["delta"] = 0.05;
    j["lambda"] = 2.0;
    j["agents"][2]["delta"] = 0.2;
    j["agents"][3]["name"] = "rs_tuned";
    j["agents"][3]["C"] = 5.0;
    ExperimentConfig cfg = parse_experiment_config(j);
    REQUIRE(cfg.K == 25);
    REQUIRE(cfg.seeds == std::vector<std::uint64_t>{1, 2});
    REQUIRE(cfg.agents.size() == 4);
    REQUIRE(cfg.agents[0].delta == 0.05);    // global override
    REQUIRE(cfg.agents[0].lambda == 2.0);
    REQUIRE(cfg.agents[2].delta == 0.2);     // agent-level wins
    REQUIRE(cfg.agents[3].display_name() == "rs_tuned");
    REQUIRE(cfg.agents[3].C == 5.0);
    REQUIRE(cfg.mdp.S == 3);
}

TEST_CASE("experiment config rejects malformed input") {
    nlohmann::json j = small_config();
    j.erase("env");
    REQUIRE_THROWS_AS(parse_experiment_config(j), ConfigError);

    j = small_config();
    j["K"] = 0;
    REQUIRE_THROWS_AS(parse_experiment_config(j), ConfigError);

    j = small_config();
    j["seeds"] = nlohmann::json::array();
    REQUIRE_THROWS_AS(parse_experiment_config(j), ConfigError);

    j = small_config();
    j["agents"] = nlohmann::json::array();
    REQUIRE_THROWS_AS(parse_experiment_config(j), ConfigError);

    j = small_config();
    j["agents"][1]["kind"] = "uniform_random"; // duplicate display name
    REQUIRE_THROWS_AS(parse_experiment_config(j), ConfigError);

    j = small_config();
    j["agents"][0]["name"] = "has,comma";
    REQUIRE_THROWS_AS(parse_experiment_config(j), ConfigError);

    j = small_config();
    j["delta"] = 1.5;
    REQUIRE_THROWS_AS(parse_experiment_config(j), InvalidDelta);
}

TEST_CASE("the oracle baseline accrues no regret") {
    Mdp m = generate_chain(4, 4, 0.15);
    AgentConfig cfg;
    cfg.kind = AgentKind::OracleOptimal;
    std::vector<RegretRecord> recs = run_cell(m, cfg, 3, 50, false);
    REQUIRE(recs.size() == 50);
    for (const RegretRecord& r : recs) {
        REQUIRE(std::abs(r.regret) <= 1e-10);
        REQUIRE(std::abs(r.cum_regret) <= 1e-10);
        REQUIRE(r.v_opt == Catch::Approx(r.v_pi).margin(1e-12));
    }
}

TEST_CASE("uniform random regret grows linearly") {
    Mdp m = generate_chain(3, 3, 0.1);
    AgentConfig cfg;
    cfg.kind = AgentKind::UniformRandom;
    double ratio_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        std::vector<RegretRecord> recs = run_cell(m, cfg, seed, 2000, false);
        double at_k = recs[999].cum_regret;
        double at_2k = recs[1999].cum_regret;
        REQUIRE(at_k > 0.0);
        ratio_sum += at_2k / at_k;
    }
    double mean_ratio = ratio_sum / 10.0;
    REQUIRE(mean_ratio >= 1.9);
    REQUIRE(mean_ratio <= 2.1);
}

TEST_CASE("regret records satisfy their accounting invariants") {
    ExperimentConfig cfg = parse_experiment_config(small_config());
    std::vector<RegretRecord> recs = run_experiment(cfg);
    REQUIRE(recs.size() == 4 * 2 * 25);
    double prev_cum = 0.0;
    std::string prev_agent;
    std::uint64_t prev_seed = 0;
    for (const RegretRecord& r : recs) {
        REQUIRE(r.regret >= -1e-10);
        bool same_cell = r.agent == prev_agent && r.seed == prev_seed;
        if (same_cell) REQUIRE(r.cum_regret >= prev_cum - 1e-10);
        REQUIRE((r.switched == 0 || r.switched == 1));
        REQUIRE(r.v_hat >= 0.0);
        REQUIRE(r.v_hat <= 3.0);
        REQUIRE(r.wall_time_ns == 0); // timing off
        prev_cum = r.cum_regret;
        prev_agent = r.agent;
        prev_seed = r.seed;
    }
}

TEST_CASE("records come out agent-major, seed-minor, episode-ordered") {
    ExperimentConfig cfg = parse_experiment_config(small_config());
    std::vector<RegretRecord> recs = run_experiment(cfg);
    std::vector<std::string> agents = {"uniform_random", "oracle_optimal", "ucbvi_ts",
                                       "rs_ucbvi_ts"};
    std::size_t i = 0;
    for (const std::string& a : agents)
        for (std::uint64_t seed : {1, 2})
            for (long k = 1; k <= 25; ++k, ++i) {
                REQUIRE(recs[i].agent == a);
                REQUIRE(recs[i].seed == seed);
                REQUIRE(recs[i].episode == k);
            }
}

TEST_CASE("runs are reproducible byte for byte and thread-count independent") {
    ExperimentConfig cfg = parse_experiment_config(small_config());
    std::string csv1 = records_to_csv(run_experiment(cfg));
    std::string csv2 = records_to_csv(run_experiment(cfg));
    std::string csv3 = records_to_csv(run_experiment(cfg, 3));
    REQUIRE(csv1 == csv2);
    REQUIRE(csv1 == csv3);
}

TEST_CASE("timing mode fills the wall time column") {
    nlohmann::json j = small_config();
    j["timing"] = true;
    j["K"] = 10;
    ExperimentConfig cfg = parse_experiment_config(j);
    std::vector<RegretRecord> recs = run_experiment(cfg);
    long long positive = 0;
    for (const RegretRecord& r : recs) positive += (r.wall_time_ns > 0);
    REQUIRE(positive > 0);
}

TEST_CASE("infeasible enumeration surfaces from a run") {
    nlohmann::json j = nlohmann::json::parse(R"({
        "env": {"generator": "random_dense", "S": 6, "A": 4, "H": 6, "seed": 1},
        "K": 2, "seeds": [1],
        "agents": [{"kind": "oful_known"}]
    })");
    ExperimentConfig cfg = parse_experiment_config(j);
    REQUIRE_THROWS_AS(run_experiment(cfg), EnumerationTooLarge);
}

TEST_CASE("csv round-trips through write and read") {
    ExperimentConfig cfg = parse_experiment_config(small_config());
    std::vector<RegretRecord> recs = run_experiment(cfg);
    std::string path = "harness_roundtrip.csv";
    write_records_csv(recs, path);
    std::vector<RegretRecord> back = read_records_csv(path);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        REQUIRE(back[i].agent == recs[i].agent);
        REQUIRE(back[i].seed == recs[i].seed);
        REQUIRE(back[i].episode == recs[i].episode);
        REQUIRE(back[i].v_opt == recs[i].v_opt);       // %.17g survives exactly
        REQUIRE(back[i].v_pi == recs[i].v_pi);
        REQUIRE(back[i].cum_regret == recs[i].cum_regret);
        REQUIRE(back[i].v_hat == recs[i].v_hat);
        REQUIRE(back[i].switched == recs[i].switched);
    }
    std::remove(path.c_str());

    REQUIRE_THROWS_AS(read_records_csv("no_such_file.csv"), ConfigError);
}

TEST_CASE("csv reader rejects foreign headers and empty files") {
    {
        std::ofstream f("harness_bad.csv");
        f << "a,b,c\n1,2,3\n";
    }
    REQUIRE_THROWS_AS(read_records_csv("harness_bad.csv"), ConfigError);
    {
        std::ofstream f("harness_bad.csv", std::ios::trunc);
    }
    REQUIRE_THROWS_AS(read_records_csv("harness_bad.csv"), EmptyInput);
    {
        std::ofstream f("harness_bad.csv", std::ios::trunc);
        f << csv_header() << "\n";
    }
    REQUIRE_THROWS_AS(read_records_csv("harness_bad.csv"), EmptyInput);
    std::remove("harness_bad.csv");
}

TEST_CASE("the two-state chain with no slip plans to value two") {
    Mdp m = generate_chain(2, 3, 0.0);
    PlanResult plan = backward_induction(m.P, m.mean_rewards, m.H);
    REQUIRE(plan.value(0, 0) == Catch::Approx(2.0).margin(1e-12));
    oracle::EnumeratedBest best = oracle::best_policy_by_enumeration(m.P, m.mean_rewards, 0, 3);
    REQUIRE(best.value == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("random dense generation is deterministic in its seed") {
    Mdp a = generate_random_dense(4, 3, 5, 99);
    Mdp b = generate_random_dense(4, 3, 5, 99);
    Mdp c = generate_random_dense(4, 3, 5, 100);
    REQUIRE(mdp_to_json(a).dump() == mdp_to_json(b).dump());
    REQUIRE(mdp_to_json(a).dump() != mdp_to_json(c).dump());
    for (int s = 0; s < 4; ++s)
        for (int x = 0; x < 3; ++x) REQUIRE(a.P.row_sum(s, x) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("initial-state schedules cycle through the run") {
    Mdp m = generate_random_dense(3, 2, 3, 7);
    m.init = InitRule{false, 0, {0, 2}};
    AgentConfig cfg;
    cfg.kind = AgentKind::OracleOptimal;
    std::vector<RegretRecord> recs = run_cell(m, cfg, 1, 6, false);
    PlanResult plan = backward_induction(m.P, m.mean_rewards, m.H);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        int s1 = (i % 2 == 0) ? 0 : 2;
        REQUIRE(recs[i].v_opt == Catch::Approx(plan.value(s1, 0)).margin(1e-12));
        REQUIRE(std::abs(recs[i].regret) <= 1e-10);
    }
}

TEST_CASE("summary recovers an exact square-root growth coefficient") {
    std::vector<RegretRecord> recs;
    for (long k = 1; k <= 100; ++k) {
        RegretRecord r;
        r.agent = "synthetic";
        r.seed = 1;
        r.episode = k;
        r.cum_regret = 5.0 * std::sqrt(static_cast<double>(k));
        recs.push_back(r);
    }
    nlohmann::json s = summarize(recs);
    REQUIRE(s.at("synthetic").at("sqrt_k_fit_coeff").get<double>() ==
            Catch::Approx(5.0).margin(1e-9));
    REQUIRE(s.at("synthetic").at("final_cum_regret_mean").get<double>() ==
            Catch::Approx(50.0).margin(1e-9));
    REQUIRE(s.at("synthetic").at("seeds").get<int>() == 1);
    REQUIRE(s.at("synthetic").at("episodes").get<int>() == 100);

    REQUIRE_THROWS_AS(summarize({}), EmptyInput);
}

TEST_CASE("summary separates seeds and counts switches") {
    ExperimentConfig cfg = parse_experiment_config(small_config());
    std::vector<RegretRecord> recs = run_experiment(cfg);
    nlohmann::json s = summarize(recs);
    REQUIRE(s.at("oracle_optimal").at("final_cum_regret_mean").get<double>() ==
            Catch::Approx(0.0).margin(1e-9));
    REQUIRE(s.at("oracle_optimal").at("sqrt_k_fit_coeff").get<double>() ==
            Catch::Approx(0.0).margin(1e-9));
    REQUIRE(s.at("oracle_optimal").at("total_switches").get<long>() == 0);
    REQUIRE(s.at("ucbvi_ts").at("total_switches").get<long>() == 2 * 25); // every episode, both seeds
    REQUIRE(s.at("rs_ucbvi_ts").at("total_switches").get<long>() < 2 * 25);
    REQUIRE(s.at("uniform_random").at("seeds").get<int>() == 2);
}

TEST_CASE("a known-model learner beats uniform play on the hard chain") {
    Mdp m = generate_chain(5, 5, 0.0);
    AgentConfig ts;
    ts.kind = AgentKind::TsKnown;
    AgentConfig uni;
    uni.kind = AgentKind::UniformRandom;
    std::vector<RegretRecord> recs;
    for (std::uint64_t seed : {11, 12}) {
        auto a = run_cell(m, ts, seed, 400, false);
        auto b = run_cell(m, uni, seed, 400, false);
        recs.insert(recs.end(), a.begin(), a.end());
        recs.insert(recs.end(), b.begin(), b.end());
    }
    nlohmann::json s = summarize(recs);
    double c_ts = s.at("ts_known").at("sqrt_k_fit_coeff").get<double>();
    double c_uni = s.at("uniform_random").at("sqrt_k_fit_coeff").get<double>();
    REQUIRE(c_ts < c_uni);
}

TEST_CASE("check suites report structured verdicts") {
    SuiteReport rep = run_check_suite("oracles");
    REQUIRE(rep.pass);
    REQUIRE(rep.report.contains("occupancy_forward_vs_paths"));
    REQUIRE(rep.report.contains("planning_dp_vs_enumeration"));
    REQUIRE(rep.report.contains("gram_updates_vs_direct"));
    for (const auto& [name, r] : rep.report.items()) REQUIRE(r.at("pass").get<bool>());
    REQUIRE_THROWS_AS(run_check_suite("bogus"), ConfigError);
}
