#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "trajfb/dp.hpp"
#include "trajfb/errors.hpp"
#include "trajfb/estimator.hpp"
#include "trajfb/rng.hpp"
#include "trajfb/types.hpp"

// Agents are constructed from (S, A, H), optionally the true transition
// kernel for the known-model variants, and for the oracle baseline the true
// mean rewards. None of them ever holds an environment object, so reward
// means are unreachable from learning code by construction.

namespace trajfb {

enum class AgentKind { OfulKnown, TsKnown, UcbviTs, RsUcbviTs, UniformRandom, OracleOptimal };

inline const char* agent_kind_name(AgentKind k) {
    switch (k) {
        case AgentKind::OfulKnown: return "oful_known";
        case AgentKind::TsKnown: return "ts_known";
        case AgentKind::UcbviTs: return "ucbvi_ts";
        case AgentKind::RsUcbviTs: return "rs_ucbvi_ts";
        case AgentKind::UniformRandom: return "uniform_random";
        case AgentKind::OracleOptimal: return "oracle_optimal";
    }
    return "?";
}

inline AgentKind agent_kind_from_string(const std::string& s) {
    if (s == "oful_known") return AgentKind::OfulKnown;
    if (s == "ts_known") return AgentKind::TsKnown;
    if (s == "ucbvi_ts") return AgentKind::UcbviTs;
    if (s == "rs_ucbvi_ts") return AgentKind::RsUcbviTs;
    if (s == "uniform_random") return AgentKind::UniformRandom;
    if (s == "oracle_optimal") return AgentKind::OracleOptimal;
    throw ConfigError("unknown agent kind: " + s);
}

struct AgentConfig {
    AgentKind kind = AgentKind::TsKnown;
    std::string name;            // CSV identifier; defaults to the kind name
    double delta = 0.1;
    double lambda = 0.0;         // <= 0 means "use the horizon"
    double C = 1.0;              // switch threshold, rarely-switching variant only
    long enumeration_cap = 1000000;

    std::string display_name() const { return name.empty() ? agent_kind_name(kind) : name; }
};

class Agent {
  public:
    virtual ~Agent() = default;

    // episode is 1-based; rng is the per-(agent, seed, episode) stream
    virtual Policy select_policy(long episode, int s1, RngStream& rng) = 0;

    // Returns true when the active Gram side changed while absorbing.
    virtual bool absorb(const EpisodeFeedback& fb) = 0;

    // Value the agent attributed to the policy it just selected, under its own
    // (perturbed / bonus-inflated) model. NaN when the agent has no model.
    virtual double planning_value() const { return std::numeric_limits<double>::quiet_NaN(); }

    const std::string& name() const { return name_; }

  protected:
    explicit Agent(std::string name) : name_(std::move(name)) {}

    void note_select(long episode) {
        if (episode != absorbed_ + 1)
            throw StaleFeedback("selecting episode " + std::to_string(episode) +
                                " but only " + std::to_string(absorbed_) + " episodes absorbed");
        selected_ = episode;
    }

    void note_absorb(const EpisodeFeedback& fb, int S, int A, int H) {
        if (fb.episode != selected_ || fb.episode != absorbed_ + 1)
            throw StaleFeedback("feedback for episode " + std::to_string(fb.episode) +
                                " does not match selection state");
        if (static_cast<int>(fb.actions.size()) != H || fb.states.size() != fb.actions.size() + 1)
            throw DimensionMismatch("feedback trajectory has wrong shape");
        for (std::size_t h = 0; h < fb.actions.size(); ++h) {
            if (fb.states[h] < 0 || fb.states[h] >= S || fb.actions[h] < 0 || fb.actions[h] >= A)
                throw DimensionMismatch("feedback contains out-of-range state or action");
        }
        if (fb.states.back() < 0 || fb.states.back() >= S)
            throw DimensionMismatch("feedback contains out-of-range state");
        absorbed_ = fb.episode;
    }

  private:
    std::string name_;
    long selected_ = 0;
    long absorbed_ = 0;
};

// ---- baselines ----

class UniformRandomAgent final : public Agent {
  public:
    UniformRandomAgent(int S, int A, int H, std::string name)
        : Agent(std::move(name)), S_(S), A_(A), H_(H) {}

    Policy select_policy(long episode, int /*s1*/, RngStream& rng) override {
        note_select(episode);
        Policy pi(S_, H_);
        for (int s = 0; s < S_; ++s)
            for (int h = 0; h < H_; ++h) pi.action(s, h) = rng.uniform_int(A_);
        return pi;
    }

    bool absorb(const EpisodeFeedback& fb) override {
        note_absorb(fb, S_, A_, H_);
        return false;
    }

  private:
    int S_, A_, H_;
};

class OracleOptimalAgent final : public Agent {
  public:
    OracleOptimalAgent(const Kernel& P, const std::vector<double>& mean_rewards, int H,
                       std::string name)
        : Agent(std::move(name)), S_(P.S), A_(P.A), H_(H),
          plan_(backward_induction(P, mean_rewards, H)) {}

    Policy select_policy(long episode, int s1, RngStream& /*rng*/) override {
        note_select(episode);
        value_ = plan_.value(s1, 0);
        return plan_.policy;
    }

    bool absorb(const EpisodeFeedback& fb) override {
        note_absorb(fb, S_, A_, H_);
        return false;
    }

    double planning_value() const override { return value_; }

  private:
    int S_, A_, H_;
    PlanResult plan_;
    double value_ = std::numeric_limits<double>::quiet_NaN();
};

// ---- known-model optimistic enumeration ----

class OfulKnownAgent final : public Agent {
  public:
    OfulKnownAgent(const Kernel& P, int H, const AgentConfig& cfg)
        : Agent(cfg.display_name()), P_(P), S_(P.S), A_(P.A), H_(H), delta_(cfg.delta),
          lambda_(cfg.lambda > 0.0 ? cfg.lambda : static_cast<double>(H)),
          est_(S_ * A_, lambda_) {
        // A^(S*H) deterministic policies; refuse instances past the cap
        long long count = 1;
        for (int c = 0; c < S_ * H_; ++c) {
            count *= A_;
            if (count > cfg.enumeration_cap)
                throw EnumerationTooLarge("policy enumeration needs more than " +
                                          std::to_string(cfg.enumeration_cap) + " entries");
        }
        policies_.reserve(static_cast<std::size_t>(count));
        Policy pi(S_, H_);
        // odometer over the flattened (s-major, step-minor) action table,
        // last cell fastest; this order defines tie-breaking
        while (true) {
            policies_.push_back(pi);
            int c = S_ * H_ - 1;
            while (c >= 0) {
                if (++pi.acts[c] < A_) break;
                pi.acts[c] = 0;
                --c;
            }
            if (c < 0) break;
        }
    }

    Policy select_policy(long episode, int s1, RngStream& /*rng*/) override {
        note_select(episode);
        const Eigen::MatrixXd& D = occupancies_for(s1);
        Eigen::VectorXd r_hat = est_.point_estimate();
        double l = confidence_radius(est_.k(), S_, A_, H_, lambda_, delta_);
        Eigen::VectorXd quad =
            (D * est_.gram_a_inv()).cwiseProduct(D).rowwise().sum().cwiseMax(0.0).cwiseSqrt();
        Eigen::VectorXd obj = D * r_hat + l * quad;
        Eigen::Index best = 0;
        double best_v = obj(0);
        for (Eigen::Index i = 1; i < obj.size(); ++i)
            if (obj(i) > best_v) {
                best_v = obj(i);
                best = i;
            }
        value_ = best_v;
        return policies_[static_cast<std::size_t>(best)];
    }

    bool absorb(const EpisodeFeedback& fb) override {
        note_absorb(fb, S_, A_, H_);
        est_.update(design_vector(fb.states, fb.actions, S_, A_), fb.v_hat);
        return true;
    }

    double planning_value() const override { return value_; }
    const LsEstimator& estimator() const { return est_; }
    std::size_t policy_count() const { return policies_.size(); }

  private:
    const Eigen::MatrixXd& occupancies_for(int s1) {
        auto it = occ_.find(s1);
        if (it != occ_.end()) return it->second;
        Eigen::MatrixXd D(static_cast<Eigen::Index>(policies_.size()),
                          static_cast<Eigen::Index>(S_) * A_);
        for (std::size_t i = 0; i < policies_.size(); ++i) {
            OccupancyMeasure m = occupancy_measure(policies_[i], P_, s1);
            for (int j = 0; j < S_ * A_; ++j) D(static_cast<Eigen::Index>(i), j) = m.d[j];
        }
        return occ_.emplace(s1, std::move(D)).first->second;
    }

    Kernel P_;
    int S_, A_, H_;
    double delta_, lambda_;
    LsEstimator est_;
    std::vector<Policy> policies_;
    std::map<int, Eigen::MatrixXd> occ_; // per initial state
    double value_ = std::numeric_limits<double>::quiet_NaN();
};

// ---- known-model posterior perturbation ----

class TsKnownAgent final : public Agent {
  public:
    TsKnownAgent(const Kernel& P, int H, const AgentConfig& cfg)
        : Agent(cfg.display_name()), P_(P), S_(P.S), A_(P.A), H_(H), delta_(cfg.delta),
          lambda_(cfg.lambda > 0.0 ? cfg.lambda : static_cast<double>(H)),
          est_(S_ * A_, lambda_) {}

    Policy select_policy(long episode, int s1, RngStream& rng) override {
        note_select(episode);
        double v = noise_scale(episode, S_, A_, H_, delta_);
        Eigen::VectorXd r_tilde = est_.point_estimate() + sample_perturbation(est_, v, rng, &factor_);
        std::vector<double> r(r_tilde.data(), r_tilde.data() + r_tilde.size());
        PlanResult plan = backward_induction(P_, r, H_);
        value_ = plan.value(s1, 0);
        return plan.policy;
    }

    bool absorb(const EpisodeFeedback& fb) override {
        note_absorb(fb, S_, A_, H_);
        est_.update(design_vector(fb.states, fb.actions, S_, A_), fb.v_hat);
        return true;
    }

    double planning_value() const override { return value_; }
    const LsEstimator& estimator() const { return est_; }

  private:
    Kernel P_;
    int S_, A_, H_;
    double delta_, lambda_;
    LsEstimator est_;
    PerturbationFactor factor_;
    double value_ = std::numeric_limits<double>::quiet_NaN();
};

// ---- unknown-model variants ----
//
// Plan on the empirical kernel with perturbed rewards plus a per-pair count
// bonus. Perturbed rewards are used as-is, without clipping. The plain variant
// refreshes the Gram side every episode; the rarely-switching one plans off a
// stale side and adopts the shadow only when the determinant gate fires after
// absorbing an episode.

class UcbviTsAgent : public Agent {
  public:
    UcbviTsAgent(int S, int A, int H, const AgentConfig& cfg, bool rarely_switching)
        : Agent(cfg.display_name()), S_(S), A_(A), H_(H), delta_(cfg.delta),
          C_(cfg.C), rarely_switching_(rarely_switching),
          lambda_(cfg.lambda > 0.0 ? cfg.lambda : static_cast<double>(H)),
          est_(S * A, lambda_, /*auto_mirror=*/!rarely_switching), counts_(S, A) {}

    Policy select_policy(long episode, int s1, RngStream& rng) override {
        note_select(episode);
        Kernel P_bar = transition_estimate(counts_);
        double v = noise_scale(episode, S_, A_, H_, delta_);
        Eigen::VectorXd r_tilde = est_.point_estimate() + sample_perturbation(est_, v, rng, &factor_);
        std::vector<double> bonus = exploration_bonus(counts_, episode, H_, delta_);
        std::vector<double> r(r_tilde.data(), r_tilde.data() + r_tilde.size());
        for (std::size_t j = 0; j < r.size(); ++j) r[j] += bonus[j];
        PlanResult plan = backward_induction(P_bar, r, H_);
        value_ = plan.value(s1, 0);
        return plan.policy;
    }

    bool absorb(const EpisodeFeedback& fb) override {
        note_absorb(fb, S_, A_, H_);
        counts_.absorb(fb.states, fb.actions);
        est_.update(design_vector(fb.states, fb.actions, S_, A_), fb.v_hat);
        if (rarely_switching_) return est_.maybe_switch(C_);
        return true;
    }

    double planning_value() const override { return value_; }
    const LsEstimator& estimator() const { return est_; }
    const CountTable& counts() const { return counts_; }

  private:
    int S_, A_, H_;
    double delta_, C_;
    bool rarely_switching_;
    double lambda_;
    LsEstimator est_;
    CountTable counts_;
    PerturbationFactor factor_;
    double value_ = std::numeric_limits<double>::quiet_NaN();
};

inline std::unique_ptr<Agent> make_agent(const AgentConfig& cfg, int S, int A, int H,
                                         const Kernel* known_kernel,
                                         const std::vector<double>* true_mean_rewards) {
    switch (cfg.kind) {
        case AgentKind::UniformRandom:
            return std::make_unique<UniformRandomAgent>(S, A, H, cfg.display_name());
        case AgentKind::OracleOptimal:
            if (!known_kernel || !true_mean_rewards)
                throw ConfigError("oracle baseline needs the true kernel and rewards");
            return std::make_unique<OracleOptimalAgent>(*known_kernel, *true_mean_rewards, H,
                                                        cfg.display_name());
        case AgentKind::OfulKnown:
            if (!known_kernel) throw ConfigError("oful_known needs the true kernel");
            return std::make_unique<OfulKnownAgent>(*known_kernel, H, cfg);
        case AgentKind::TsKnown:
            if (!known_kernel) throw ConfigError("ts_known needs the true kernel");
            return std::make_unique<TsKnownAgent>(*known_kernel, H, cfg);
        case AgentKind::UcbviTs:
            return std::make_unique<UcbviTsAgent>(S, A, H, cfg, false);
        case AgentKind::RsUcbviTs:
            return std::make_unique<UcbviTsAgent>(S, A, H, cfg, true);
    }
    throw ConfigError("unhandled agent kind");
}

} // namespace trajfb
