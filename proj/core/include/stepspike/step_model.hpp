#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "stepspike/calendar.hpp"
#include "stepspike/curve.hpp"

namespace stepspike {

/// Factor a correlation (or covariance) matrix as lambda * lambda^T.
///
/// Tolerates positive semidefinite input: the result is lower triangular up to
/// a column permutation that moves the zero columns of a rank-deficient input
/// to the end. Throws std::invalid_argument for non-symmetric input or an
/// eigenvalue below -1e-8.
Eigen::MatrixXd decompose_correlation(const Eigen::MatrixXd& rho);

/// Realized stopped Brownian values W_j(t ^ x_i) of the step factors.
class StepFactorState {
public:
    StepFactorState() = default;
    explicit StepFactorState(std::size_t n) : n_(n), w_(n * n, 0.0) {}

    double time() const { return t_; }
    std::size_t size() const { return n_; }
    /// W_j(t ^ x_i), frozen once t >= x_i.
    double stopped(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }

private:
    friend class StepModel;
    double t_ = 0.0;
    std::size_t n_ = 0;
    std::vector<double> w_;  // row i = stopping date x_i, column j = factor
};

/// Target-rate component: one correlated factor per FOMC date. Forward rates
/// diffuse until the FOMC date preceding their maturity; the short rate is
/// piecewise constant in its stochastic part and jumps at every x_i.
class StepModel {
public:
    StepModel(JumpSchedule schedule, std::vector<double> xi, Eigen::MatrixXd rho,
              PiecewiseFlatCurve initial_forward);

    const JumpSchedule& schedule() const { return schedule_; }
    std::size_t factor_count() const { return xi_.size(); }
    std::span<const double> xi() const { return xi_; }
    const Eigen::MatrixXd& rho() const { return rho_; }
    const Eigen::MatrixXd& lambda() const { return lambda_; }
    const PiecewiseFlatCurve& initial_forward() const { return f0_; }
    bool deterministic() const;

    StepFactorState initial_state() const { return StepFactorState(factor_count()); }

    /// f^P(t,T) under the spot risk-neutral measure; requires state.time() == t.
    double forward_rate(const StepFactorState& state, double t, double T) const;
    /// r^P(t); the state must hold frozen values for every x_i <= t.
    double short_rate(const StepFactorState& state, double t) const;
    /// B^P(t,T) in closed form; requires state.time() == t.
    double bond_price(const StepFactorState& state, double t, double T) const;
    double log_bond_price(const StepFactorState& state, double t, double T) const;

    /// E_t[r^P(s)] with t = state.time() <= s.
    double expected_short_rate(const StepFactorState& state, double s) const;
    /// \int_0^t r^P(u) du along the realized path, exact.
    double integrated_short_rate(const StepFactorState& state, double t) const;

    /// HJM drift of f^P(t,T), written with rho directly.
    double forward_drift(double t, double T) const;
    /// Same drift written with the independent-factor loadings lambda.
    double forward_drift_lambda_form(double t, double T) const;
    /// Deterministic short-rate term net of f^P(0,t).
    double short_rate_drift(double t) const;
    /// Stochastic short-rate term sum_i xi_i 1(t >= x_i) Z_i(x_i).
    double short_rate_stochastic(const StepFactorState& state, double t) const;
    /// Z_i(t ^ x_i) = sum_j lambda_ij W_j(t ^ x_i).
    double correlated_factor(const StepFactorState& state, std::size_t i) const;

    /// Advance all factors by dt with caller-supplied standard normals.
    /// The step may end on, but not cross, a schedule date.
    StepFactorState evolve(const StepFactorState& state, double dt,
                           std::span<const double> normals) const;

private:
    void check_state(const StepFactorState& state) const;
    void check_frozen(const StepFactorState& state, double t) const;

    JumpSchedule schedule_;
    std::vector<double> xi_;
    Eigen::MatrixXd rho_;
    Eigen::MatrixXd lambda_;
    Eigen::MatrixXd coupling_;  // xi_q xi_i rho_qi
    PiecewiseFlatCurve f0_;
};

}  // namespace stepspike
