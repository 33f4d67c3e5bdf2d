#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "trajfb/dp.hpp"
#include "trajfb/errors.hpp"
#include "trajfb/types.hpp"

// Slow reference implementations used to cross-check the fast paths, plus
// empirical checkers for the structural inequalities the algorithms rely on.
// Everything here recomputes from first principles: occupancies come from
// explicit path enumeration, planning from exhaustive policy enumeration,
// inverses and determinants from a fresh LU factorization. None of it shares
// code with the incremental machinery it is meant to validate.

namespace trajfb::oracle {

inline void guard_path_count(int S, int H, long cap) {
    double paths = std::pow(static_cast<double>(S), H);
    if (paths > static_cast<double>(cap))
        throw TooLarge("S^H = " + std::to_string(paths) + " exceeds cap " + std::to_string(cap));
}

// Occupancy by summing over every state path of length H. Rows that leak
// probability mass are completed into an explicit termination sink so each
// path carries its exact probability; without the sink, mass that terminates
// mid-episode would never be credited to the steps it was alive for.
inline OccupancyMeasure brute_force_occupancy(const Policy& policy, const Kernel& kernel, int s1,
                                              long cap = 1000000) {
    const int S = kernel.S, A = kernel.A, H = policy.H;
    if (policy.S != S) throw DimensionMismatch("policy does not match kernel");
    if (s1 < 0 || s1 >= S) throw DimensionMismatch("initial state out of range");
    guard_path_count(S + 1, H, cap);

    const int sink = S;
    std::vector<double> leak(static_cast<std::size_t>(S) * A, 0.0);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
            leak[sa_index(s, a, A)] = std::max(0.0, 1.0 - kernel.row_sum(s, a));

    OccupancyMeasure occ(S, A, H);
    std::vector<int> path(static_cast<std::size_t>(H), 0);
    path[0] = s1;
    // odometer over the tail states (s_2 .. s_H), sink included
    std::vector<int> tail(static_cast<std::size_t>(H > 1 ? H - 1 : 0), 0);
    while (true) {
        for (int h = 1; h < H; ++h) path[h] = tail[h - 1];
        double prob = 1.0;
        for (int h = 0; h + 1 < H && prob != 0.0; ++h) {
            int s = path[h], s2 = path[h + 1];
            if (s == sink) {
                prob *= (s2 == sink) ? 1.0 : 0.0;
            } else {
                int a = policy.action(s, h);
                prob *= (s2 == sink) ? leak[sa_index(s, a, A)] : kernel.at(s, a, s2);
            }
        }
        if (prob != 0.0)
            for (int h = 0; h < H; ++h)
                if (path[h] != sink) occ.q_at(path[h], policy.action(path[h], h), h) += prob;
        int c = static_cast<int>(tail.size()) - 1;
        while (c >= 0) {
            if (++tail[c] <= S) break;
            tail[c] = 0;
            --c;
        }
        if (c < 0) break;
    }
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            double acc = 0.0;
            for (int h = 0; h < H; ++h) acc += occ.q_at(s, a, h);
            occ.d[sa_index(s, a, A)] = acc;
        }
    return occ;
}

// All A^(S*H) deterministic policies in lexicographic order over the
// flattened action table (last cell fastest).
inline std::vector<Policy> enumerate_policies(int S, int A, int H, long cap = 1000000) {
    long long count = 1;
    for (int c = 0; c < S * H; ++c) {
        count *= A;
        if (count > cap)
            throw TooLarge("A^(S*H) exceeds cap " + std::to_string(cap));
    }
    std::vector<Policy> out;
    out.reserve(static_cast<std::size_t>(count));
    Policy pi(S, H);
    while (true) {
        out.push_back(pi);
        int c = S * H - 1;
        while (c >= 0) {
            if (++pi.acts[c] < A) break;
            pi.acts[c] = 0;
            --c;
        }
        if (c < 0) break;
    }
    return out;
}

struct EnumeratedBest {
    double value = 0.0;
    Policy policy;
};

// Planning by exhaustion: evaluate d_pi . reward for every policy, first
// maximizer in enumeration order wins.
inline EnumeratedBest best_policy_by_enumeration(const Kernel& kernel,
                                                 const std::vector<double>& reward, int s1, int H,
                                                 long cap = 1000000) {
    std::vector<Policy> all = enumerate_policies(kernel.S, kernel.A, H, cap);
    EnumeratedBest best;
    bool first = true;
    for (const Policy& pi : all) {
        OccupancyMeasure occ = brute_force_occupancy(pi, kernel, s1, cap);
        double v = 0.0;
        for (std::size_t j = 0; j < occ.d.size(); ++j) v += occ.d[j] * reward[j];
        if (first || v > best.value) {
            best.value = v;
            best.policy = pi;
            first = false;
        }
    }
    return best;
}

inline Eigen::MatrixXd direct_inverse(const Eigen::MatrixXd& M) {
    return Eigen::FullPivLU<Eigen::MatrixXd>(M).inverse();
}

inline double direct_determinant(const Eigen::MatrixXd& M) {
    return Eigen::FullPivLU<Eigen::MatrixXd>(M).determinant();
}

// Outcome of one inequality or identity check. For identities lhs is the
// residual and rhs the tolerance; for bounds lhs/rhs are the two sides.
struct CheckResult {
    bool pass = false;
    double lhs = 0.0;
    double rhs = 0.0;
    std::string details;

    nlohmann::json to_json() const {
        return nlohmann::json{{"pass", pass}, {"lhs", lhs}, {"rhs", rhs}, {"details", details}};
    }
};

// Residual of the exact value-difference identity between two models sharing
// the policy: the value gap must equal the expected model disagreement along
// trajectories of the first model, valued under the second.
inline CheckResult check_value_difference(const Policy& policy, const Kernel& P1,
                                          const std::vector<double>& r1, const Kernel& P2,
                                          const std::vector<double>& r2, int s1,
                                          double tol = 1e-9) {
    const int S = P1.S, A = P1.A, H = policy.H;
    if (P2.S != S || P2.A != A) throw DimensionMismatch("kernels do not share a shape");

    std::vector<double> v1 = evaluate_policy(policy, P1, r1);
    std::vector<double> v2 = evaluate_policy(policy, P2, r2);
    double lhs = v1[s1] - v2[s1];

    OccupancyMeasure occ1 = occupancy_measure(policy, P1, s1);
    double rhs = 0.0;
    for (int h = 0; h < H; ++h) {
        const double* next2 = v2.data() + static_cast<std::size_t>(h + 1) * S;
        for (int s = 0; s < S; ++s) {
            int a = policy.action(s, h);
            double q = occ1.q_at(s, a, h);
            if (q == 0.0) continue;
            double gap = r1[sa_index(s, a, A)] - r2[sa_index(s, a, A)];
            const double* row1 = P1.row(s, a);
            const double* row2 = P2.row(s, a);
            for (int s2 = 0; s2 < S; ++s2) gap += (row1[s2] - row2[s2]) * next2[s2];
            rhs += q * gap;
        }
    }
    CheckResult res;
    res.lhs = std::abs(lhs - rhs);
    res.rhs = tol;
    res.pass = res.lhs <= tol;
    res.details = "value gap " + std::to_string(lhs) + ", expansion " + std::to_string(rhs);
    return res;
}

// L1 distance between the occupancies of one policy under two kernels,
// against H times the expected per-step kernel disagreement under the second.
inline CheckResult check_occupancy_l1_bound(const Policy& policy, const Kernel& P1,
                                            const Kernel& P2, int s1) {
    const int S = P1.S, A = P1.A, H = policy.H;
    OccupancyMeasure occ1 = occupancy_measure(policy, P1, s1);
    OccupancyMeasure occ2 = occupancy_measure(policy, P2, s1);

    double lhs = 0.0;
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) lhs += std::abs(occ1.q_at(s, a, h) - occ2.q_at(s, a, h));

    double expected_gap = 0.0;
    for (int h = 0; h < H; ++h)
        for (int s = 0; s < S; ++s) {
            int a = policy.action(s, h);
            double q = occ2.q_at(s, a, h);
            if (q == 0.0) continue;
            double l1 = 0.0;
            const double* row1 = P1.row(s, a);
            const double* row2 = P2.row(s, a);
            for (int s2 = 0; s2 < S; ++s2) l1 += std::abs(row1[s2] - row2[s2]);
            expected_gap += q * l1;
        }
    CheckResult res;
    res.lhs = lhs;
    res.rhs = H * expected_gap;
    res.pass = lhs <= res.rhs + 1e-12;
    return res;
}

// Sum of A_{k-1}^(-1/2)-norms of the design vectors against the closed-form
// potential bound. The Gram inverse is redone from scratch every episode.
inline CheckResult check_elliptical_potential(const std::vector<Eigen::VectorXd>& dhats,
                                              double lambda, int S, int A, int H) {
    const int m = S * A;
    const long K = static_cast<long>(dhats.size());
    Eigen::MatrixXd gram = Eigen::MatrixXd::Identity(m, m) * lambda;
    double lhs = 0.0;
    for (const Eigen::VectorXd& d : dhats) {
        if (d.size() != m) throw DimensionMismatch("design vector has wrong dimension");
        Eigen::MatrixXd inv = direct_inverse(gram);
        lhs += std::sqrt(std::max(0.0, d.dot(inv * d)));
        gram.noalias() += d * d.transpose();
    }
    double mK = static_cast<double>(m);
    double rhs = std::sqrt(static_cast<double>(H) * H / lambda) *
                 std::sqrt(2.0 * K * mK *
                           std::log(lambda + static_cast<double>(K) * H * H / mK));
    CheckResult res;
    res.lhs = lhs;
    res.rhs = rhs;
    res.pass = lhs <= rhs + 1e-9;
    res.details = "K=" + std::to_string(K);
    return res;
}

// Gram-side switch count against its deterministic ceiling.
inline CheckResult check_switch_bound(long switches, double C, long K, int S, int A, int H,
                                      double lambda) {
    double m = static_cast<double>(S) * A;
    double rhs = (m / std::log(1.0 + C)) *
                 std::log(1.0 + static_cast<double>(K) * H * static_cast<double>(H) / (lambda * m));
    CheckResult res;
    res.lhs = static_cast<double>(switches);
    res.rhs = rhs;
    res.pass = res.lhs <= rhs;
    res.details = "C=" + std::to_string(C) + ", K=" + std::to_string(K);
    return res;
}

// Per-pair harmonic visitation sums against 2 log(n_K v 1); reports the pair
// with the least slack. visit_counts holds one d-hat count vector per episode.
inline CheckResult check_cumulative_visitation(const std::vector<std::vector<int>>& visit_counts,
                                               int S, int A, int H) {
    const std::size_t m = static_cast<std::size_t>(S) * A;
    std::vector<long> n(m, 0);
    std::vector<double> lhs(m, 0.0);
    for (const auto& counts : visit_counts) {
        if (counts.size() != m) throw DimensionMismatch("visit count vector has wrong size");
        for (std::size_t j = 0; j < m; ++j) {
            if (n[j] >= H && counts[j] > 0)
                lhs[j] += static_cast<double>(counts[j]) / static_cast<double>(n[j] > 0 ? n[j] : 1);
            n[j] += counts[j];
        }
    }
    CheckResult res;
    res.pass = true;
    double worst_slack = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
        double rhs = 2.0 * std::log(static_cast<double>(n[j] > 0 ? n[j] : 1));
        if (lhs[j] > rhs + 1e-9) res.pass = false;
        if (rhs - lhs[j] < worst_slack) {
            worst_slack = rhs - lhs[j];
            res.lhs = lhs[j];
            res.rhs = rhs;
            res.details = "tightest pair j=" + std::to_string(j);
        }
    }
    if (visit_counts.empty()) {
        res.lhs = 0.0;
        res.rhs = 0.0;
        res.details = "no episodes";
    }
    return res;
}

} // namespace trajfb::oracle
