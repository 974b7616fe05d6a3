#include "stepspike/step_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stepspike {

namespace {

constexpr double kTimeEps = 1e-12;
constexpr double kSymmetryTol = 1e-12;
constexpr double kNegativeEigenTol = 1e-8;

/// \int_0^u 1(s >= x_hi) (s - x_i) ds.
double ramp_integral(double u, double x_hi, double x_i) {
    if (u < x_hi) return 0.0;
    return u * (u / 2.0 - x_i) - x_hi * (x_hi / 2.0 - x_i);
}

}  // namespace

Eigen::MatrixXd decompose_correlation(const Eigen::MatrixXd& rho) {
    const Eigen::Index n = rho.rows();
    if (rho.cols() != n) throw std::invalid_argument("correlation matrix must be square");
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!std::isfinite(rho(i, j))) throw std::invalid_argument("non-finite correlation entry");
            if (std::abs(rho(i, j) - rho(j, i)) > kSymmetryTol) {
                throw std::invalid_argument("correlation matrix is not symmetric");
            }
        }
    }
    if (n == 0) return Eigen::MatrixXd(0, 0);

    Eigen::MatrixXd a = 0.5 * (rho + rho.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
    const Eigen::VectorXd values = eig.eigenvalues();
    if (values.minCoeff() < -kNegativeEigenTol) {
        throw std::invalid_argument("correlation matrix is not positive semidefinite");
    }
    if (values.minCoeff() < 0.0) {
        const Eigen::VectorXd clipped = values.cwiseMax(0.0);
        a = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    }

    // Semidefinite Cholesky: a vanishing pivot yields a zero column.
    const double pivot_tol = 1e-12 * std::max(1.0, a.diagonal().cwiseAbs().maxCoeff());
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (d <= pivot_tol) continue;
        const double pivot = std::sqrt(d);
        l(j, j) = pivot;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / pivot;
        }
    }

    // Columns are interchangeable (independent factors): push zero ones last.
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
    Eigen::Index next = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (l.col(j).cwiseAbs().maxCoeff() > 0.0) out.col(next++) = l.col(j);
    }
    return out;
}

StepModel::StepModel(JumpSchedule schedule, std::vector<double> xi, Eigen::MatrixXd rho,
                     PiecewiseFlatCurve initial_forward)
    : schedule_(std::move(schedule)),
      xi_(std::move(xi)),
      rho_(std::move(rho)),
      f0_(std::move(initial_forward)) {
    const std::size_t n = schedule_.size();
    if (schedule_.kind() != JumpSchedule::Kind::step) {
        throw std::invalid_argument("step model requires a step schedule");
    }
    if (xi_.size() != n) throw std::invalid_argument("need one volatility per FOMC date");
    for (double v : xi_) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("FOMC factor volatilities must be finite and >= 0");
        }
    }
    if (static_cast<std::size_t>(rho_.rows()) != n || static_cast<std::size_t>(rho_.cols()) != n) {
        throw std::invalid_argument("correlation matrix size must match the FOMC schedule");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(rho_(i, i) - 1.0) > kSymmetryTol) {
            throw std::invalid_argument("correlation matrix must have a unit diagonal");
        }
    }
    lambda_ = decompose_correlation(rho_);
    coupling_.resize(n, n);
    for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t i = 0; i < n; ++i) coupling_(q, i) = xi_[q] * xi_[i] * rho_(q, i);
    }
}

bool StepModel::deterministic() const {
    return std::all_of(xi_.begin(), xi_.end(), [](double v) { return v == 0.0; });
}

void StepModel::check_state(const StepFactorState& state) const {
    if (state.size() != factor_count()) {
        throw std::invalid_argument("step state does not match the model schedule");
    }
}

void StepModel::check_frozen(const StepFactorState& state, double t) const {
    check_state(state);
    const auto times = schedule_.times();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it != times.begin() && state.time() < *(it - 1) - kTimeEps) {
        throw std::invalid_argument("step state lacks the frozen factor values required at t");
    }
}

double StepModel::correlated_factor(const StepFactorState& state, std::size_t i) const {
    double z = 0.0;
    for (std::size_t j = 0; j < factor_count(); ++j) z += lambda_(i, j) * state.stopped(i, j);
    return z;
}

double StepModel::forward_drift(double t, double T) const {
    const auto x = schedule_.times();
    const std::size_t n = x.size();
    double sum = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t i = 0; i < n; ++i) {
            const double x_hi = x[std::max(q, i)];
            if (T < x_hi) continue;
            sum += coupling_(q, i) * (T - x[i]) * std::min({t, x[q], x[i]});
        }
    }
    return sum;
}

double StepModel::forward_drift_lambda_form(double t, double T) const {
    const auto x = schedule_.times();
    const std::size_t n = x.size();
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t q = 0; q < n; ++q) {
            for (std::size_t i = 0; i < n; ++i) {
                const double x_hi = x[std::max(q, i)];
                if (T < x_hi) continue;
                sum += xi_[q] * xi_[i] * lambda_(q, j) * lambda_(i, j) * (T - x[i]) *
                       std::min({t, x[q], x[i]});
            }
        }
    }
    return sum;
}

double StepModel::short_rate_drift(double t) const {
    const auto x = schedule_.times();
    const std::size_t n = x.size();
    double sum = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t i = 0; i < n; ++i) {
            if (t < x[std::max(q, i)]) continue;
            sum += coupling_(q, i) * (t - x[i]) * std::min(x[q], x[i]);
        }
    }
    return sum;
}

double StepModel::short_rate_stochastic(const StepFactorState& state, double t) const {
    const auto x = schedule_.times();
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size() && t >= x[i]; ++i) {
        sum += xi_[i] * correlated_factor(state, i);
    }
    return sum;
}

double StepModel::forward_rate(const StepFactorState& state, double t, double T) const {
    check_state(state);
    if (t > T) throw std::invalid_argument("forward rate requires t <= T");
    if (std::abs(state.time() - t) > kTimeEps) {
        throw std::invalid_argument("step state time does not match t");
    }
    const auto x = schedule_.times();
    double stochastic = 0.0;
    for (std::size_t i = 0; i < x.size() && T >= x[i]; ++i) {
        stochastic += xi_[i] * correlated_factor(state, i);
    }
    return f0_(T) + forward_drift(t, T) + stochastic;
}

double StepModel::short_rate(const StepFactorState& state, double t) const {
    check_frozen(state, t);
    return f0_(t) + short_rate_drift(t) + short_rate_stochastic(state, t);
}

double StepModel::expected_short_rate(const StepFactorState& state, double s) const {
    check_state(state);
    if (s < state.time() - kTimeEps) {
        throw std::invalid_argument("expected short rate requires s >= t");
    }
    return f0_(s) + short_rate_drift(s) + short_rate_stochastic(state, s);
}

double StepModel::log_bond_price(const StepFactorState& state, double t, double T) const {
    check_state(state);
    if (t > T) throw std::invalid_argument("bond price requires t <= T");
    if (std::abs(state.time() - t) > kTimeEps) {
        throw std::invalid_argument("step state time does not match t");
    }
    const auto x = schedule_.times();
    const std::size_t n = x.size();

    double a = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t i = 0; i < n; ++i) {
            const double stop = std::min({t, x[q], x[i]});
            if (stop <= 0.0 || coupling_(q, i) == 0.0) continue;
            const double x_hi = x[std::max(q, i)];
            const double i1 = ramp_integral(T, x_hi, x[i]);
            const double i2 = ramp_integral(t, x_hi, x[i]);
            a -= coupling_(q, i) * stop * (i1 - i2);
        }
    }

    double b = 0.0;
    for (std::size_t i = 0; i < n && T >= x[i]; ++i) {
        if (xi_[i] == 0.0) continue;
        b -= xi_[i] * correlated_factor(state, i) * (T - std::max(t, x[i]));
    }
    return -f0_.integral(t, T) + a + b;
}

double StepModel::bond_price(const StepFactorState& state, double t, double T) const {
    return std::exp(log_bond_price(state, t, T));
}

double StepModel::integrated_short_rate(const StepFactorState& state, double t) const {
    check_frozen(state, t);
    if (t < 0.0) throw std::invalid_argument("integration horizon must be >= 0");
    const auto x = schedule_.times();
    const std::size_t n = x.size();
    double drift = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
        for (std::size_t i = 0; i < n; ++i) {
            if (coupling_(q, i) == 0.0) continue;
            drift += coupling_(q, i) * std::min(x[q], x[i]) *
                     ramp_integral(t, x[std::max(q, i)], x[i]);
        }
    }
    double stochastic = 0.0;
    for (std::size_t i = 0; i < n && t >= x[i]; ++i) {
        if (xi_[i] == 0.0) continue;
        stochastic += xi_[i] * correlated_factor(state, i) * (t - x[i]);
    }
    return f0_.integral(0.0, t) + drift + stochastic;
}

StepFactorState StepModel::evolve(const StepFactorState& state, double dt,
                                  std::span<const double> normals) const {
    check_state(state);
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
    const std::size_t n = factor_count();
    if (normals.size() != n) throw std::invalid_argument("need one normal draw per step factor");
    for (double z : normals) {
        if (!std::isfinite(z)) throw std::invalid_argument("non-finite normal draw");
    }
    const auto x = schedule_.times();
    double t_new = state.time() + dt;
    for (double xi : x) {
        if (std::abs(t_new - xi) <= kTimeEps) t_new = xi;
        if (xi > state.time() + kTimeEps && xi < t_new - kTimeEps) {
            throw std::invalid_argument("step crosses an FOMC date; split the step at x_i");
        }
    }

    StepFactorState next = state;
    next.t_ = t_new;
    const double scale = std::sqrt(t_new - state.time());
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i] < t_new) continue;  // stopped before this step
        for (std::size_t j = 0; j < n; ++j) next.w_[i * n + j] += scale * normals[j];
    }
    return next;
}

}  // namespace stepspike
