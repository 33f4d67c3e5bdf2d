#pragma once

#include <cstdint>
#include <vector>

#include "trajfb/errors.hpp"

namespace trajfb {

// Flat (s,a) index used for reward vectors, visit counts and the regression
// design throughout: j = s*A + a.
inline int sa_index(int s, int a, int A) { return s * A + a; }

// Time-dependent transition-free description lives here so that learning code
// can depend on kernels and trajectories without ever seeing mean rewards.

// P(s' | s, a) stored s-major, then a, then s'. Rows may be sub-stochastic;
// missing mass means the trajectory terminates and collects nothing afterwards.
struct Kernel {
    int S = 0;
    int A = 0;
    std::vector<double> p;

    Kernel() = default;
    Kernel(int S_, int A_) : S(S_), A(A_), p(static_cast<std::size_t>(S_) * A_ * S_, 0.0) {}

    double& at(int s, int a, int s2) { return p[(static_cast<std::size_t>(s) * A + a) * S + s2]; }
    double at(int s, int a, int s2) const { return p[(static_cast<std::size_t>(s) * A + a) * S + s2]; }
    const double* row(int s, int a) const { return p.data() + (static_cast<std::size_t>(s) * A + a) * S; }
    double* row(int s, int a) { return p.data() + (static_cast<std::size_t>(s) * A + a) * S; }

    double row_sum(int s, int a) const {
        const double* r = row(s, a);
        double acc = 0.0;
        for (int s2 = 0; s2 < S; ++s2) acc += r[s2];
        return acc;
    }
};

// Deterministic time-dependent policy: one action per (state, step).
// Steps are 0-based internally; episode indices in records are 1-based.
struct Policy {
    int S = 0;
    int H = 0;
    std::vector<int> acts;

    Policy() = default;
    Policy(int S_, int H_) : S(S_), H(H_), acts(static_cast<std::size_t>(S_) * H_, 0) {}

    int action(int s, int h) const { return acts[static_cast<std::size_t>(s) * H + h]; }
    int& action(int s, int h) { return acts[static_cast<std::size_t>(s) * H + h]; }

    bool operator==(const Policy& o) const { return S == o.S && H == o.H && acts == o.acts; }
};

// q(s,a,h) = Pr[s_h = s, a_h = a] under a fixed policy and kernel,
// d(s,a) = sum_h q(s,a,h). With sub-stochastic kernels the per-step mass
// sums to at most 1 and can only shrink with h.
struct OccupancyMeasure {
    int S = 0;
    int A = 0;
    int H = 0;
    std::vector<double> q; // h-major, then s, then a
    std::vector<double> d; // (s,a)

    OccupancyMeasure() = default;
    OccupancyMeasure(int S_, int A_, int H_)
        : S(S_), A(A_), H(H_),
          q(static_cast<std::size_t>(H_) * S_ * A_, 0.0),
          d(static_cast<std::size_t>(S_) * A_, 0.0) {}

    double& q_at(int s, int a, int h) { return q[(static_cast<std::size_t>(h) * S + s) * A + a]; }
    double q_at(int s, int a, int h) const { return q[(static_cast<std::size_t>(h) * S + s) * A + a]; }
    double d_at(int s, int a) const { return d[static_cast<std::size_t>(s) * A + a]; }

    double step_mass(int h) const {
        double acc = 0.0;
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) acc += q_at(s, a, h);
        return acc;
    }
};

// What one episode leaves behind: the visited states (H+1 of them, the last is
// where the episode ended), the actions taken, the summed reward, and the
// visit counts d̂(s,a). Per-step rewards are summed inside the sampler and
// never stored anywhere.
struct Trajectory {
    std::vector<int> states;
    std::vector<int> actions;
    double v_hat = 0.0;
    std::vector<int> d_hat; // (s,a) visit counts, sums to H

    int horizon() const { return static_cast<int>(actions.size()); }
};

// The slice of a trajectory an agent is allowed to see.
struct EpisodeFeedback {
    long episode = 0; // 1-based
    std::vector<int> states;
    std::vector<int> actions;
    double v_hat = 0.0;
};

inline EpisodeFeedback feedback_from_trajectory(long episode, const Trajectory& t) {
    return EpisodeFeedback{episode, t.states, t.actions, t.v_hat};
}

} // namespace trajfb
