#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "trajfb/errors.hpp"
#include "trajfb/mdp.hpp"
#include "trajfb/rng.hpp"

namespace trajfb {

// Dense random instance: every transition row is a flat Dirichlet draw,
// mean rewards are uniform on [0,1]. Fully determined by the seed.
inline Mdp generate_random_dense(int S, int A, int H, std::uint64_t seed) {
    if (S < 1 || A < 1 || H < 1) throw InvalidSpec("random_dense needs S, A, H >= 1");
    Mdp m;
    m.S = S;
    m.A = A;
    m.H = H;
    m.P = Kernel(S, A);
    m.mean_rewards.assign(static_cast<std::size_t>(S) * A, 0.0);

    RngStream rng(derive_stream_seed(seed, "random_dense", 0, StreamPurpose::EnvGen));
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            // Dirichlet(1,...,1) via normalized exponentials
            double sum = 0.0;
            double* row = m.P.row(s, a);
            for (int s2 = 0; s2 < S; ++s2) {
                row[s2] = -std::log1p(-rng.uniform());
                sum += row[s2];
            }
            for (int s2 = 0; s2 < S; ++s2) row[s2] /= sum;
        }
    for (auto& r : m.mean_rewards) r = rng.uniform();
    m.noise = {RewardDist::Bernoulli, 0.0};
    m.init = InitRule{true, 0, {}};
    validate_mdp(m);
    return m;
}

// Chain of S states, two actions. Going right advances one state with
// probability 1-slip and stays put otherwise (the last state just stays);
// going left jumps back to the start. Reward 1 sits at the far right under
// the right action, a trickle of 0.01 at the start under the left action.
inline Mdp generate_chain(int S, int H, double slip) {
    if (S < 2 || H < 1) throw InvalidSpec("chain needs S >= 2, H >= 1");
    if (slip < 0.0 || slip >= 1.0) throw InvalidSpec("chain slip must lie in [0,1)");
    constexpr int LEFT = 0, RIGHT = 1;
    Mdp m;
    m.S = S;
    m.A = 2;
    m.H = H;
    m.P = Kernel(S, 2);
    m.mean_rewards.assign(static_cast<std::size_t>(S) * 2, 0.0);
    for (int s = 0; s < S; ++s) {
        m.P.at(s, LEFT, 0) = 1.0;
        if (s + 1 < S) {
            m.P.at(s, RIGHT, s + 1) = 1.0 - slip;
            m.P.at(s, RIGHT, s) = slip;
        } else {
            m.P.at(s, RIGHT, s) = 1.0;
        }
    }
    m.mean_rewards[sa_index(0, LEFT, 2)] = 0.01;
    m.mean_rewards[sa_index(S - 1, RIGHT, 2)] = 1.0;
    m.noise = {RewardDist::Bernoulli, 0.0};
    m.init = InitRule{true, 0, {}};
    validate_mdp(m);
    return m;
}

// Two square rooms of side n joined by a door between their middle rows.
// Four move actions (up, down, left, right); bumping a wall stays put, and
// any move keeps you in place with probability slip. Reward 1 in the far
// corner of the second room. Start is the first room's top-left corner.
inline Mdp generate_two_room(int n, int H, double slip) {
    if (n < 2 || H < 1) throw InvalidSpec("two_room needs room side >= 2, H >= 1");
    if (slip < 0.0 || slip >= 1.0) throw InvalidSpec("two_room slip must lie in [0,1)");
    const int S = 2 * n * n;
    const int A = 4;
    auto cell = [n](int room, int row, int col) { return room * n * n + row * n + col; };
    const int door_row = n / 2;

    Mdp m;
    m.S = S;
    m.A = A;
    m.H = H;
    m.P = Kernel(S, A);
    m.mean_rewards.assign(static_cast<std::size_t>(S) * A, 0.0);

    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    for (int room = 0; room < 2; ++room)
        for (int row = 0; row < n; ++row)
            for (int col = 0; col < n; ++col) {
                int s = cell(room, row, col);
                for (int a = 0; a < A; ++a) {
                    int nr = row + dr[a], nc = col + dc[a], nroom = room;
                    if (room == 0 && row == door_row && col == n - 1 && a == 3) {
                        nroom = 1;
                        nr = door_row;
                        nc = 0;
                    } else if (room == 1 && row == door_row && col == 0 && a == 2) {
                        nroom = 0;
                        nr = door_row;
                        nc = n - 1;
                    } else if (nr < 0 || nr >= n || nc < 0 || nc >= n) {
                        nr = row;
                        nc = col;
                    }
                    int s2 = cell(nroom, nr, nc);
                    m.P.at(s, a, s2) += 1.0 - slip;
                    m.P.at(s, a, s) += slip;
                }
            }
    int goal = cell(1, n - 1, n - 1);
    for (int a = 0; a < A; ++a) m.mean_rewards[sa_index(goal, a, A)] = 1.0;
    m.noise = {RewardDist::Bernoulli, 0.0};
    m.init = InitRule{true, cell(0, 0, 0), {}};
    validate_mdp(m);
    return m;
}

// Builds an environment from a generator spec like
//   {"generator":"chain","S":5,"H":5,"slip":0.1}
//   {"generator":"random_dense","S":4,"A":3,"H":4,"seed":7}
//   {"generator":"two_room","n":3,"H":8,"slip":0.05}
// or passes through an inline MDP under "mdp".
inline Mdp generate_env(const nlohmann::json& spec) {
    try {
        if (spec.contains("mdp")) {
            Mdp m = mdp_from_json(spec.at("mdp"));
            validate_mdp(m);
            return m;
        }
        std::string g = spec.at("generator").get<std::string>();
        if (g == "random_dense")
            return generate_random_dense(spec.at("S").get<int>(), spec.at("A").get<int>(),
                                         spec.at("H").get<int>(),
                                         spec.value("seed", std::uint64_t{0}));
        if (g == "chain")
            return generate_chain(spec.at("S").get<int>(), spec.at("H").get<int>(),
                                  spec.value("slip", 0.0));
        if (g == "two_room")
            return generate_two_room(spec.at("n").get<int>(), spec.at("H").get<int>(),
                                     spec.value("slip", 0.0));
        throw InvalidSpec("unknown generator: " + g);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSpec(std::string("malformed environment spec: ") + e.what());
    }
}

} // namespace trajfb
