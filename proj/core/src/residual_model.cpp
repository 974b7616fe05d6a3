#include "stepspike/residual_model.hpp"

#include <cmath>
#include <stdexcept>

namespace stepspike {

VasicekModel::VasicekModel(VasicekParams params) : p_(params) {
    if (!(p_.beta > 0.0) || !std::isfinite(p_.beta)) {
        throw std::invalid_argument("Vasicek mean reversion must be > 0");
    }
    if (!(p_.sigma_v >= 0.0) || !std::isfinite(p_.sigma_v)) {
        throw std::invalid_argument("Vasicek volatility must be >= 0");
    }
    if (!std::isfinite(p_.theta) || !std::isfinite(p_.r0)) {
        throw std::invalid_argument("Vasicek parameters must be finite");
    }
}

double VasicekModel::short_rate(double t, double convolution) const {
    if (t < 0.0) throw std::invalid_argument("time must be >= 0");
    const double decay = std::exp(-p_.beta * t);
    return decay * p_.r0 + (1.0 - decay) * long_run_mean() + convolution;
}

double VasicekModel::expected_rate(double r_t, double t, double s) const {
    if (s < t) throw std::invalid_argument("expected rate requires t <= s");
    const double decay = std::exp(-p_.beta * (s - t));
    return decay * r_t + (1.0 - decay) * long_run_mean();
}

double VasicekModel::conditional_variance(double dt) const {
    return p_.sigma_v * p_.sigma_v * -std::expm1(-2.0 * p_.beta * dt) / (2.0 * p_.beta);
}

double VasicekModel::log_bond_price(double t, double T, double r_t) const {
    if (t > T) throw std::invalid_argument("bond price requires t <= T");
    const double tau = T - t;
    const double beta = p_.beta;
    const double s2 = p_.sigma_v * p_.sigma_v;
    const double b = -std::expm1(-beta * tau) / beta;
    const double a = (long_run_mean() - s2 / (2.0 * beta * beta)) * (b - tau) - s2 * b * b / (4.0 * beta);
    return a - b * r_t;
}

double VasicekModel::bond_price(double t, double T, double r_t) const {
    return std::exp(log_bond_price(t, T, r_t));
}

double VasicekModel::forward_rate(double t, double T, double r_t) const {
    if (t > T) throw std::invalid_argument("forward rate requires t <= T");
    const double beta = p_.beta;
    const double decay = std::exp(-beta * (T - t));
    const double one_minus = -std::expm1(-beta * (T - t));
    const double s2 = p_.sigma_v * p_.sigma_v;
    return r_t * decay + long_run_mean() * one_minus - s2 / (2.0 * beta * beta) * one_minus * one_minus;
}

double VasicekModel::evolve(double r_t, double dt, double normal) const {
    if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(r_t) || !std::isfinite(normal)) {
        throw std::invalid_argument("Vasicek step needs finite inputs and dt > 0");
    }
    const double decay = std::exp(-p_.beta * dt);
    return decay * r_t + (1.0 - decay) * long_run_mean() + std::sqrt(conditional_variance(dt)) * normal;
}

VasicekModel::Transition VasicekModel::evolve_with_integral(double r_t, double dt, double normal_rate,
                                                            double normal_integral) const {
    if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(r_t) || !std::isfinite(normal_rate) ||
        !std::isfinite(normal_integral)) {
        throw std::invalid_argument("Vasicek step needs finite inputs and dt > 0");
    }
    const double beta = p_.beta;
    const double mu = long_run_mean();
    const double e1 = -std::expm1(-beta * dt);        // 1 - e^{-beta dt}
    const double e2 = -std::expm1(-2.0 * beta * dt);  // 1 - e^{-2 beta dt}
    const double x = r_t - mu;

    const double mean_rate = mu + x * (1.0 - e1);
    const double mean_integral = mu * dt + x * e1 / beta;
    const double s2 = p_.sigma_v * p_.sigma_v;
    if (s2 == 0.0) return {mean_rate, mean_integral};

    const double var_rate = s2 * e2 / (2.0 * beta);
    const double var_integral = s2 / (beta * beta) * (dt - 2.0 * e1 / beta + e2 / (2.0 * beta));
    const double cov = s2 / (2.0 * beta * beta) * e1 * e1;

    const double sd_rate = std::sqrt(var_rate);
    const double loading = cov / sd_rate;
    const double residual_var = std::max(var_integral - loading * loading, 0.0);
    return {mean_rate + sd_rate * normal_rate,
            mean_integral + loading * normal_rate + std::sqrt(residual_var) * normal_integral};
}

ResidualModel::ResidualModel(bool constant, double spread, VasicekParams params)
    : constant_(constant), spread_(spread), vasicek_(params) {}

ResidualModel ResidualModel::constant_spread(double spread) {
    if (!std::isfinite(spread)) throw std::invalid_argument("spread must be finite");
    return ResidualModel(true, spread, VasicekParams{});
}

ResidualModel ResidualModel::vasicek(VasicekParams params) {
    return ResidualModel(false, 0.0, params);
}

const VasicekModel& ResidualModel::vasicek() const {
    if (constant_) throw std::logic_error("residual is a constant spread");
    return vasicek_;
}

double ResidualModel::expected_rate(double r_t, double t, double s) const {
    return constant_ ? spread_ : vasicek_.expected_rate(r_t, t, s);
}

double ResidualModel::forward_rate(double t, double T, double r_t) const {
    if (t > T) throw std::invalid_argument("forward rate requires t <= T");
    return constant_ ? spread_ : vasicek_.forward_rate(t, T, r_t);
}

double ResidualModel::log_bond_price(double t, double T, double r_t) const {
    if (t > T) throw std::invalid_argument("bond price requires t <= T");
    return constant_ ? -spread_ * (T - t) : vasicek_.log_bond_price(t, T, r_t);
}

double ResidualModel::bond_price(double t, double T, double r_t) const {
    return std::exp(log_bond_price(t, T, r_t));
}

VasicekModel::Transition ResidualModel::evolve_with_integral(double r_t, double dt, double normal_rate,
                                                             double normal_integral) const {
    if (constant_) return {spread_, spread_ * dt};
    return vasicek_.evolve_with_integral(r_t, dt, normal_rate, normal_integral);
}

}  // namespace stepspike
