#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "trajfb/errors.hpp"
#include "trajfb/types.hpp"

namespace trajfb {

// Value table for steps 1..H+1 (0-based h = 0..H), v(s, h) flat as values[h*S + s].
// Column H is the terminal zero boundary.
struct PlanResult {
    Policy policy;
    std::vector<double> values;
    int S = 0;
    int H = 0;

    double value(int s, int h) const { return values[static_cast<std::size_t>(h) * S + s]; }
};

namespace detail {
inline void require_dims(const Kernel& kernel, const std::vector<double>& reward) {
    if (kernel.S <= 0 || kernel.A <= 0)
        throw DimensionMismatch("kernel has empty state or action space");
    if (reward.size() != static_cast<std::size_t>(kernel.S) * kernel.A)
        throw DimensionMismatch("reward vector size does not match S*A");
}
} // namespace detail

// Finite-horizon dynamic programming over a possibly sub-stochastic kernel.
// Rewards may have any sign (perturbed and bonus-inflated rewards do).
// Ties at the argmax go to the lowest action index so planning is a pure
// function of its inputs.
inline PlanResult backward_induction(const Kernel& kernel, const std::vector<double>& reward, int H) {
    detail::require_dims(kernel, reward);
    if (H < 1) throw DimensionMismatch("horizon must be >= 1");
    const int S = kernel.S, A = kernel.A;

    PlanResult out;
    out.S = S;
    out.H = H;
    out.policy = Policy(S, H);
    out.values.assign(static_cast<std::size_t>(H + 1) * S, 0.0);

    for (int h = H - 1; h >= 0; --h) {
        const double* next = out.values.data() + static_cast<std::size_t>(h + 1) * S;
        double* cur = out.values.data() + static_cast<std::size_t>(h) * S;
        for (int s = 0; s < S; ++s) {
            int best_a = 0;
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < A; ++a) {
                const double* row = kernel.row(s, a);
                double q = reward[sa_index(s, a, A)];
                for (int s2 = 0; s2 < S; ++s2) q += row[s2] * next[s2];
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            cur[s] = best;
            out.policy.action(s, h) = best_a;
        }
    }
    return out;
}

// Bellman evaluation of a fixed policy; same table layout as backward_induction.
inline std::vector<double> evaluate_policy(const Policy& policy, const Kernel& kernel,
                                           const std::vector<double>& reward) {
    detail::require_dims(kernel, reward);
    if (policy.S != kernel.S) throw DimensionMismatch("policy state count does not match kernel");
    const int S = kernel.S, A = kernel.A, H = policy.H;

    std::vector<double> values(static_cast<std::size_t>(H + 1) * S, 0.0);
    for (int h = H - 1; h >= 0; --h) {
        const double* next = values.data() + static_cast<std::size_t>(h + 1) * S;
        double* cur = values.data() + static_cast<std::size_t>(h) * S;
        for (int s = 0; s < S; ++s) {
            int a = policy.action(s, h);
            const double* row = kernel.row(s, a);
            double q = reward[sa_index(s, a, A)];
            for (int s2 = 0; s2 < S; ++s2) q += row[s2] * next[s2];
            cur[s] = q;
        }
    }
    return values;
}

// Forward recursion for the state-action occupancy of a fixed policy.
inline OccupancyMeasure occupancy_measure(const Policy& policy, const Kernel& kernel, int s1) {
    if (policy.S != kernel.S) throw DimensionMismatch("policy state count does not match kernel");
    if (s1 < 0 || s1 >= kernel.S) throw DimensionMismatch("initial state out of range");
    const int S = kernel.S, A = kernel.A, H = policy.H;

    OccupancyMeasure occ(S, A, H);
    std::vector<double> cur(S, 0.0), nxt(S);
    cur[s1] = 1.0;
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s)
            if (cur[s] != 0.0) occ.q_at(s, policy.action(s, h), h) = cur[s];
        if (h + 1 < H) {
            std::fill(nxt.begin(), nxt.end(), 0.0);
            for (int s = 0; s < S; ++s) {
                if (cur[s] == 0.0) continue;
                const double* row = kernel.row(s, policy.action(s, h));
                for (int s2 = 0; s2 < S; ++s2) nxt[s2] += cur[s] * row[s2];
            }
            cur.swap(nxt);
        }
    }
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            double acc = 0.0;
            for (int h = 0; h < H; ++h) acc += occ.q_at(s, a, h);
            occ.d[sa_index(s, a, A)] = acc;
        }
    return occ;
}

// Exact value of a fixed policy from the initial state. Computed twice, once
// as occupancy · reward and once by Bellman evaluation; the two must agree to
// 1e-10 on every call or something upstream is broken.
inline double policy_value(const Policy& policy, const Kernel& kernel,
                           const std::vector<double>& reward, int s1) {
    detail::require_dims(kernel, reward);
    OccupancyMeasure occ = occupancy_measure(policy, kernel, s1);
    double via_occupancy = 0.0;
    for (std::size_t j = 0; j < occ.d.size(); ++j) via_occupancy += occ.d[j] * reward[j];

    std::vector<double> values = evaluate_policy(policy, kernel, reward);
    double via_bellman = values[s1];

    if (std::abs(via_occupancy - via_bellman) > 1e-10)
        throw Error("policy value disagrees between occupancy and Bellman routes: " +
                    std::to_string(via_occupancy) + " vs " + std::to_string(via_bellman));
    return via_occupancy;
}

} // namespace trajfb
