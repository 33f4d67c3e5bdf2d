#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "trajfb/errors.hpp"
#include "trajfb/rng.hpp"
#include "trajfb/types.hpp"

namespace trajfb {

// Per-step reward noise around the mean table. Means always live in [0,1].
enum class RewardDist { Bernoulli, ClippedGaussian };

struct RewardNoise {
    RewardDist type = RewardDist::Bernoulli;
    double sigma = 0.1; // only used by ClippedGaussian
};

// Either every episode starts at the same state, or a schedule lists starts
// per episode. A schedule shorter than the run cycles: episode k (1-based)
// starts at schedule[(k-1) % len].
struct InitRule {
    bool fixed = true;
    int s1 = 0;
    std::vector<int> schedule;

    int state_for_episode(long episode) const {
        if (fixed) return s1;
        return schedule[static_cast<std::size_t>((episode - 1) % static_cast<long>(schedule.size()))];
    }
};

struct Mdp {
    int S = 0;
    int A = 0;
    int H = 0;
    Kernel P;
    std::vector<double> mean_rewards; // (s,a), in [0,1]
    RewardNoise noise;
    InitRule init;
};

// Rejects malformed instances before anything downstream touches them.
// Environment kernels must be exactly stochastic; sub-stochastic rows only
// appear in estimated kernels, never in the environment itself.
inline void validate_mdp(const Mdp& m) {
    if (m.S < 1 || m.A < 1 || m.H < 1)
        throw DimensionMismatch("S, A, H must all be >= 1");
    if (m.P.S != m.S || m.P.A != m.A ||
        m.P.p.size() != static_cast<std::size_t>(m.S) * m.A * m.S)
        throw DimensionMismatch("kernel storage does not match S, A");
    if (m.mean_rewards.size() != static_cast<std::size_t>(m.S) * m.A)
        throw DimensionMismatch("reward table size does not match S*A");

    for (int s = 0; s < m.S; ++s)
        for (int a = 0; a < m.A; ++a) {
            double sum = 0.0;
            for (int s2 = 0; s2 < m.S; ++s2) {
                double p = m.P.at(s, a, s2);
                if (p < 0.0 || p > 1.0) throw NonStochasticRow(s, a, p);
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-12) throw NonStochasticRow(s, a, sum);
        }
    for (int s = 0; s < m.S; ++s)
        for (int a = 0; a < m.A; ++a) {
            double r = m.mean_rewards[sa_index(s, a, m.A)];
            if (!(r >= 0.0 && r <= 1.0)) throw RewardOutOfRange(s, a, r);
        }
    if (m.init.fixed) {
        if (m.init.s1 < 0 || m.init.s1 >= m.S)
            throw DimensionMismatch("initial state out of range");
    } else {
        if (m.init.schedule.empty())
            throw DimensionMismatch("initial state schedule is empty");
        for (int s : m.init.schedule)
            if (s < 0 || s >= m.S) throw DimensionMismatch("scheduled initial state out of range");
    }
    if (m.noise.type == RewardDist::ClippedGaussian && m.noise.sigma < 0.0)
        throw DimensionMismatch("reward noise sigma must be >= 0");
}

namespace detail {
inline double draw_reward(const Mdp& m, int s, int a, RngStream& rng) {
    double mean = m.mean_rewards[sa_index(s, a, m.A)];
    if (m.noise.type == RewardDist::Bernoulli) return rng.bernoulli(mean) ? 1.0 : 0.0;
    double v = mean + m.noise.sigma * rng.gaussian();
    return std::clamp(v, 0.0, 1.0);
}
} // namespace detail

// Rolls out one episode. Per-step rewards are summed into v_hat on the spot
// and then forgotten; nothing downstream can get at them.
inline Trajectory sample_episode(const Mdp& m, const Policy& policy, int s1,
                                 RngStream& transition_rng, RngStream& reward_rng) {
    if (policy.S != m.S || policy.H != m.H)
        throw DimensionMismatch("policy shape does not match the environment");
    if (s1 < 0 || s1 >= m.S) throw DimensionMismatch("initial state out of range");

    Trajectory t;
    t.states.reserve(static_cast<std::size_t>(m.H) + 1);
    t.actions.reserve(static_cast<std::size_t>(m.H));
    t.d_hat.assign(static_cast<std::size_t>(m.S) * m.A, 0);

    int s = s1;
    t.states.push_back(s);
    for (int h = 0; h < m.H; ++h) {
        int a = policy.action(s, h);
        t.actions.push_back(a);
        t.d_hat[sa_index(s, a, m.A)] += 1;
        t.v_hat += detail::draw_reward(m, s, a, reward_rng);
        s = transition_rng.categorical(m.P.row(s, a), m.S);
        t.states.push_back(s);
    }
    return t;
}

// ---- JSON ----
// {"S":..,"A":..,"H":..,"P":[[[..]]],"r":[[..]],"reward_dist":{..},"init":{..}}
// P indexed [s][a][s'], r indexed [s][a].

inline nlohmann::json mdp_to_json(const Mdp& m) {
    nlohmann::json P = nlohmann::json::array();
    for (int s = 0; s < m.S; ++s) {
        nlohmann::json per_a = nlohmann::json::array();
        for (int a = 0; a < m.A; ++a) {
            nlohmann::json row = nlohmann::json::array();
            for (int s2 = 0; s2 < m.S; ++s2) row.push_back(m.P.at(s, a, s2));
            per_a.push_back(std::move(row));
        }
        P.push_back(std::move(per_a));
    }
    nlohmann::json r = nlohmann::json::array();
    for (int s = 0; s < m.S; ++s) {
        nlohmann::json row = nlohmann::json::array();
        for (int a = 0; a < m.A; ++a) row.push_back(m.mean_rewards[sa_index(s, a, m.A)]);
        r.push_back(std::move(row));
    }
    nlohmann::json rd;
    if (m.noise.type == RewardDist::Bernoulli) {
        rd = {{"type", "bernoulli"}};
    } else {
        rd = {{"type", "clipped_gaussian"}, {"sigma", m.noise.sigma}};
    }
    nlohmann::json init;
    if (m.init.fixed) {
        init = {{"type", "fixed"}, {"s1", m.init.s1}};
    } else {
        init = {{"type", "schedule"}, {"states", m.init.schedule}};
    }
    return nlohmann::json{{"S", m.S}, {"A", m.A},           {"H", m.H}, {"P", P},
                          {"r", r},   {"reward_dist", rd},  {"init", init}};
}

inline Mdp mdp_from_json(const nlohmann::json& j) {
    Mdp m;
    try {
        m.S = j.at("S").get<int>();
        m.A = j.at("A").get<int>();
        m.H = j.at("H").get<int>();
        if (m.S < 1 || m.A < 1 || m.H < 1) throw ConfigError("S, A, H must all be >= 1");
        m.P = Kernel(m.S, m.A);
        const auto& P = j.at("P");
        if (static_cast<int>(P.size()) != m.S) throw ConfigError("P has wrong first dimension");
        for (int s = 0; s < m.S; ++s) {
            if (static_cast<int>(P.at(s).size()) != m.A) throw ConfigError("P has wrong action dimension");
            for (int a = 0; a < m.A; ++a) {
                const auto& row = P.at(s).at(a);
                if (static_cast<int>(row.size()) != m.S) throw ConfigError("P row has wrong length");
                for (int s2 = 0; s2 < m.S; ++s2) m.P.at(s, a, s2) = row.at(s2).get<double>();
            }
        }
        m.mean_rewards.assign(static_cast<std::size_t>(m.S) * m.A, 0.0);
        const auto& r = j.at("r");
        if (static_cast<int>(r.size()) != m.S) throw ConfigError("r has wrong first dimension");
        for (int s = 0; s < m.S; ++s) {
            if (static_cast<int>(r.at(s).size()) != m.A) throw ConfigError("r row has wrong length");
            for (int a = 0; a < m.A; ++a)
                m.mean_rewards[sa_index(s, a, m.A)] = r.at(s).at(a).get<double>();
        }
        const auto& rd = j.at("reward_dist");
        std::string type = rd.at("type").get<std::string>();
        if (type == "bernoulli") {
            m.noise.type = RewardDist::Bernoulli;
        } else if (type == "clipped_gaussian") {
            m.noise.type = RewardDist::ClippedGaussian;
            m.noise.sigma = rd.at("sigma").get<double>();
        } else {
            throw ConfigError("unknown reward_dist type: " + type);
        }
        const auto& init = j.at("init");
        std::string itype = init.at("type").get<std::string>();
        if (itype == "fixed") {
            m.init.fixed = true;
            m.init.s1 = init.at("s1").get<int>();
        } else if (itype == "schedule") {
            m.init.fixed = false;
            m.init.schedule = init.at("states").get<std::vector<int>>();
        } else {
            throw ConfigError("unknown init type: " + itype);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed MDP JSON: ") + e.what());
    }
    return m;
}

} // namespace trajfb
