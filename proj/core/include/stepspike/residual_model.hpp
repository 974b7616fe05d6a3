#pragma once

namespace stepspike {

struct VasicekParams {
    double theta = 0.0;    // drift level, rate per year
    double beta = 1.0;     // mean-reversion speed, 1/year
    double sigma_v = 0.0;  // volatility, rate per sqrt(year)
    double r0 = 0.0;       // initial residual level
};

/// Mean-reverting Gaussian residual dr = (theta - beta r) dt + sigma dW.
class VasicekModel {
public:
    explicit VasicekModel(VasicekParams params);

    const VasicekParams& params() const { return p_; }
    double long_run_mean() const { return p_.theta / p_.beta; }

    /// r(t) = e^{-beta t} r0 + (1 - e^{-beta t}) theta/beta + convolution, where
    /// `convolution` is the realized sigma \int_0^t e^{-beta(t-s)} dW(s).
    double short_rate(double t, double convolution) const;
    /// E[r(s) | r(t) = r_t].
    double expected_rate(double r_t, double t, double s) const;
    double conditional_variance(double dt) const;

    /// Affine zero-coupon price exp(A(tau) - b(tau) r_t), tau = T - t.
    double bond_price(double t, double T, double r_t) const;
    double log_bond_price(double t, double T, double r_t) const;
    double forward_rate(double t, double T, double r_t) const;

    /// Exact transition of r over dt.
    double evolve(double r_t, double dt, double normal) const;

    struct Transition {
        double rate;      // r(t + dt)
        double integral;  // \int_t^{t+dt} r(s) ds
    };
    /// Exact joint transition of (r, \int r) driven by two independent normals.
    Transition evolve_with_integral(double r_t, double dt, double normal_rate,
                                    double normal_integral) const;

private:
    VasicekParams p_;
};

/// Residual component of the composite model: either a Vasicek process or the
/// zero-volatility constant spread used in calibration.
class ResidualModel {
public:
    static ResidualModel constant_spread(double spread);
    static ResidualModel vasicek(VasicekParams params);

    bool is_constant() const { return constant_; }
    double spread() const { return spread_; }
    const VasicekModel& vasicek() const;
    bool deterministic() const { return constant_ || vasicek_.params().sigma_v == 0.0; }

    double initial_rate() const { return constant_ ? spread_ : vasicek_.params().r0; }
    double expected_rate(double r_t, double t, double s) const;
    double forward_rate(double t, double T, double r_t) const;
    double bond_price(double t, double T, double r_t) const;
    double log_bond_price(double t, double T, double r_t) const;
    VasicekModel::Transition evolve_with_integral(double r_t, double dt, double normal_rate,
                                                  double normal_integral) const;

private:
    ResidualModel(bool constant, double spread, VasicekParams params);

    bool constant_;
    double spread_;
    VasicekModel vasicek_;
};

}  // namespace stepspike
