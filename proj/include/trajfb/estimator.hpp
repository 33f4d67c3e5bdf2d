#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "trajfb/errors.hpp"
#include "trajfb/rng.hpp"
#include "trajfb/types.hpp"

namespace trajfb {

// ---- closed-form schedules ----
// Natural logs throughout. The user-facing delta is plugged in exactly where
// the expressions say delta/10; it is never split further.

// Reward confidence radius after k absorbed episodes (k = 0 before any data).
inline double confidence_radius(long k, int S, int A, int H, double lambda, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidDelta(delta);
    if (!(lambda > 0.0)) throw InvalidLambda(lambda);
    if (k < 0) throw InvalidK(k);
    double m = static_cast<double>(S) * A;
    double arg = (1.0 + static_cast<double>(k) * H * static_cast<double>(H) / lambda) * 10.0 / delta;
    return std::sqrt(0.25 * m * H * std::log(arg)) + std::sqrt(lambda * m);
}

// Scale of the planning perturbation in episode k (1-based).
inline double noise_scale(long k, int S, int A, int H, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidDelta(delta);
    if (k < 1) throw InvalidK(k);
    double arg = static_cast<double>(k) * H * static_cast<double>(H) * 10.0 / delta;
    return std::sqrt(9.0 * static_cast<double>(S) * A * H * std::log(std::max(arg, 1.0)));
}

// Per-pair optimistic transition bonus in episode k, given n visits to the pair.
inline double exploration_bonus_value(long k, long n, int S, int A, int H, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidDelta(delta);
    if (k < 1) throw InvalidK(k);
    double kd = static_cast<double>(k);
    double arg = 40.0 * S * A * H * static_cast<double>(H) * kd * kd * kd / delta;
    double denom = static_cast<double>(n > 0 ? n : 1);
    return std::sqrt(static_cast<double>(H) * H * std::log(std::max(arg, 1.0)) / denom);
}

// ---- regularized least squares over episode visit counts ----
//
// Regression dimension is m = S*A; the design vector of an episode is its
// visit-count vector d̂ and the response is the episode return V̂.
//
// Two copies of the Gram state are kept. The shadow side (B, B_inv, det_B, Z)
// absorbs every episode through a Sherman-Morrison rank-one update plus the
// matrix-determinant identity. The active side (A, A_inv, det_A, Y) is what
// estimates and noise covariances read. Plain agents mirror the shadow into
// the active side after every update; the rarely-switching agent only copies
// it over when the determinant ratio clears its threshold.
class LsEstimator {
  public:
    LsEstimator() = default;

    LsEstimator(int m, double lambda, bool auto_mirror = true)
        : m_(m), lambda_(lambda), auto_mirror_(auto_mirror) {
        if (!(lambda > 0.0)) throw InvalidLambda(lambda);
        if (m < 1) throw DimensionMismatch("regression dimension must be >= 1");
        B_ = Eigen::MatrixXd::Identity(m, m) * lambda;
        B_inv_ = Eigen::MatrixXd::Identity(m, m) / lambda;
        det_B_ = std::pow(lambda, m);
        Z_ = Eigen::VectorXd::Zero(m);
        A_ = B_;
        A_inv_ = B_inv_;
        det_A_ = det_B_;
        Y_ = Z_;
    }

    // Absorb one episode. d is the visit-count vector (entries sum to at most
    // the horizon), v_hat the observed return.
    void update(const Eigen::VectorXd& d, double v_hat) {
        if (d.size() != m_) throw DimensionMismatch("design vector has wrong dimension");
        Eigen::VectorXd u = B_inv_ * d;
        double denom = 1.0 + d.dot(u);
        det_B_ *= denom; // matrix-determinant identity, uses the pre-update inverse
        B_inv_.noalias() -= (u * u.transpose()) / denom;
        B_inv_ = ((B_inv_ + B_inv_.transpose()) * 0.5).eval(); // keep exactly symmetric
        B_.noalias() += d * d.transpose();
        Z_.noalias() += d * v_hat;
        ++k_;
        if (auto_mirror_) mirror();
    }

    // Copy the shadow side over the active side.
    void mirror() {
        A_ = B_;
        A_inv_ = B_inv_;
        det_A_ = det_B_;
        Y_ = Z_;
        ++a_version_;
    }

    // Determinant gate: adopt the shadow side iff det B > (1+C) det A.
    bool maybe_switch(double C) {
        if (det_B_ > (1.0 + C) * det_A_) {
            mirror();
            return true;
        }
        return false;
    }

    // Ridge estimate read off the active side.
    Eigen::VectorXd point_estimate() const { return A_inv_ * Y_; }

    int dim() const { return m_; }
    double lambda() const { return lambda_; }
    long k() const { return k_; }
    long a_version() const { return a_version_; }
    double det_a() const { return det_A_; }
    double det_b() const { return det_B_; }
    const Eigen::MatrixXd& gram_a() const { return A_; }
    const Eigen::MatrixXd& gram_a_inv() const { return A_inv_; }
    const Eigen::MatrixXd& gram_b() const { return B_; }
    const Eigen::MatrixXd& gram_b_inv() const { return B_inv_; }
    const Eigen::VectorXd& y() const { return Y_; }
    const Eigen::VectorXd& z() const { return Z_; }

    nlohmann::json to_json() const;
    static LsEstimator from_json(const nlohmann::json& j);

  private:
    int m_ = 0;
    double lambda_ = 1.0;
    bool auto_mirror_ = true;
    long k_ = 0;
    long a_version_ = 0;
    Eigen::MatrixXd A_, A_inv_, B_, B_inv_;
    Eigen::VectorXd Y_, Z_;
    double det_A_ = 1.0, det_B_ = 1.0;
};

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, int m) {
    Eigen::MatrixXd M(m, m);
    if (static_cast<int>(j.size()) != m) throw ConfigError("matrix has wrong row count");
    for (int i = 0; i < m; ++i) {
        if (static_cast<int>(j.at(i).size()) != m) throw ConfigError("matrix row has wrong length");
        for (int c = 0; c < m; ++c) M(i, c) = j.at(i).at(c).get<double>();
    }
    return M;
}

} // namespace detail

inline nlohmann::json LsEstimator::to_json() const {
    return nlohmann::json{{"lambda", lambda_},
                          {"k", k_},
                          {"auto_mirror", auto_mirror_},
                          {"A", detail::matrix_to_json(A_)},
                          {"Y", std::vector<double>(Y_.data(), Y_.data() + Y_.size())},
                          {"det", det_A_},
                          {"B", detail::matrix_to_json(B_)},
                          {"Z", std::vector<double>(Z_.data(), Z_.data() + Z_.size())},
                          {"det_B", det_B_}};
}

// Inverses are rebuilt by direct inversion on load; only the Gram matrices,
// responses, determinants and counters are stored.
inline LsEstimator LsEstimator::from_json(const nlohmann::json& j) {
    try {
        double lambda = j.at("lambda").get<double>();
        const auto& Aj = j.at("A");
        int m = static_cast<int>(Aj.size());
        LsEstimator est(m, lambda, j.at("auto_mirror").get<bool>());
        est.k_ = j.at("k").get<long>();
        est.A_ = detail::matrix_from_json(Aj, m);
        est.B_ = detail::matrix_from_json(j.at("B"), m);
        est.det_A_ = j.at("det").get<double>();
        est.det_B_ = j.at("det_B").get<double>();
        auto yv = j.at("Y").get<std::vector<double>>();
        auto zv = j.at("Z").get<std::vector<double>>();
        if (static_cast<int>(yv.size()) != m || static_cast<int>(zv.size()) != m)
            throw ConfigError("response vector has wrong length");
        est.Y_ = Eigen::Map<const Eigen::VectorXd>(yv.data(), m);
        est.Z_ = Eigen::Map<const Eigen::VectorXd>(zv.data(), m);
        est.A_inv_ = est.A_.inverse();
        est.A_inv_ = ((est.A_inv_ + est.A_inv_.transpose()) * 0.5).eval();
        est.B_inv_ = est.B_.inverse();
        est.B_inv_ = ((est.B_inv_ + est.B_inv_.transpose()) * 0.5).eval();
        return est;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed estimator JSON: ") + e.what());
    }
}

// Symmetric PSD square root via spectral decomposition. The result does not
// depend on the eigenvalue ordering; tiny negative eigenvalues from roundoff
// are clamped to zero, anything clearly negative is an error.
inline Eigen::MatrixXd spectral_sqrt_psd(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success)
        throw FactorizationFailure("eigendecomposition did not converge");
    Eigen::VectorXd ev = es.eigenvalues();
    double top = std::max(1.0, ev.cwiseAbs().maxCoeff());
    Eigen::VectorXd root(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -1e-10 * top)
            throw FactorizationFailure("matrix is not positive semi-definite, eigenvalue " +
                                       std::to_string(ev(i)));
        root(i) = std::sqrt(std::max(ev(i), 0.0));
    }
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

// Caches the noise factor keyed on the active-side version, so agents that
// rarely refresh the active side also rarely pay for an eigendecomposition.
class PerturbationFactor {
  public:
    const Eigen::MatrixXd& factor_for(const LsEstimator& est) {
        if (version_ != est.a_version()) {
            F_ = spectral_sqrt_psd(est.gram_a_inv());
            version_ = est.a_version();
        }
        return F_;
    }

  private:
    long version_ = -2;
    Eigen::MatrixXd F_;
};

// Draw xi ~ N(0, v^2 * A_inv) off the active side. Always consumes exactly
// dim() gaussians so the stream layout does not depend on v.
inline Eigen::VectorXd sample_perturbation(const LsEstimator& est, double v, RngStream& rng,
                                           PerturbationFactor* cache = nullptr) {
    Eigen::VectorXd z(est.dim());
    for (int i = 0; i < est.dim(); ++i) z(i) = rng.gaussian();
    if (cache) return v * (cache->factor_for(est) * z);
    Eigen::MatrixXd F = spectral_sqrt_psd(est.gram_a_inv());
    return v * (F * z);
}

// ---- visit and transition counts ----

class CountTable {
  public:
    CountTable() = default;
    CountTable(int S, int A)
        : S_(S), A_(A), n_(static_cast<std::size_t>(S) * A, 0),
          trans_(static_cast<std::size_t>(S) * A * S, 0) {}

    // states has one more entry than actions; the trailing state only feeds
    // the transition counts.
    void absorb(const std::vector<int>& states, const std::vector<int>& actions) {
        if (states.size() != actions.size() + 1)
            throw DimensionMismatch("states must be one longer than actions");
        for (std::size_t h = 0; h < actions.size(); ++h) {
            int s = states[h], a = actions[h], s2 = states[h + 1];
            n_[sa_index(s, a, A_)] += 1;
            trans_[(static_cast<std::size_t>(s) * A_ + a) * S_ + s2] += 1;
        }
    }

    long n(int s, int a) const { return n_[sa_index(s, a, A_)]; }
    long transitions(int s, int a, int s2) const {
        return trans_[(static_cast<std::size_t>(s) * A_ + a) * S_ + s2];
    }
    int S() const { return S_; }
    int A() const { return A_; }

  private:
    int S_ = 0, A_ = 0;
    std::vector<long> n_;
    std::vector<long> trans_;
};

// Empirical kernel. Unvisited pairs keep an all-zero row, which downstream
// planning treats as termination.
inline Kernel transition_estimate(const CountTable& counts) {
    Kernel P(counts.S(), counts.A());
    for (int s = 0; s < counts.S(); ++s)
        for (int a = 0; a < counts.A(); ++a) {
            long n = counts.n(s, a);
            if (n == 0) continue;
            for (int s2 = 0; s2 < counts.S(); ++s2)
                P.at(s, a, s2) = static_cast<double>(counts.transitions(s, a, s2)) / static_cast<double>(n);
        }
    return P;
}

inline std::vector<double> exploration_bonus(const CountTable& counts, long k, int H, double delta) {
    std::vector<double> b(static_cast<std::size_t>(counts.S()) * counts.A());
    for (int s = 0; s < counts.S(); ++s)
        for (int a = 0; a < counts.A(); ++a)
            b[sa_index(s, a, counts.A())] =
                exploration_bonus_value(k, counts.n(s, a), counts.S(), counts.A(), H, delta);
    return b;
}

// Visit-count vector of one episode as a regression design vector.
inline Eigen::VectorXd design_vector(const std::vector<int>& states, const std::vector<int>& actions,
                                     int S, int A) {
    if (states.size() != actions.size() + 1)
        throw DimensionMismatch("states must be one longer than actions");
    Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S) * A);
    for (std::size_t h = 0; h < actions.size(); ++h) d(sa_index(states[h], actions[h], A)) += 1.0;
    return d;
}

} // namespace trajfb
