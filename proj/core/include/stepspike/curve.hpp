#pragma once

#include <span>
#include <vector>

namespace stepspike {

/// Right-continuous step function of model time.
///
/// `levels[0]` applies on (-inf, breaks[0]), `levels[k]` on [breaks[k-1], breaks[k])
/// and the last level on [breaks.back(), +inf). A flat curve has no breaks.
class PiecewiseFlatCurve {
public:
    PiecewiseFlatCurve() : levels_{0.0} {}
    PiecewiseFlatCurve(std::vector<double> breaks, std::vector<double> levels);

    static PiecewiseFlatCurve flat(double level) { return PiecewiseFlatCurve({}, {level}); }

    double operator()(double t) const { return levels_[interval_index(t)]; }

    /// Index of the interval containing `t`.
    std::size_t interval_index(double t) const;

    /// Exact integral over [a, b] by interval overlap. Throws if a > b.
    double integral(double a, double b) const;

    std::span<const double> breaks() const { return breaks_; }
    std::span<const double> levels() const { return levels_; }

    /// Pointwise sum; the result carries the union of both break sets.
    PiecewiseFlatCurve operator+(const PiecewiseFlatCurve& other) const;
    PiecewiseFlatCurve shifted(double spread) const;

private:
    std::vector<double> breaks_;
    std::vector<double> levels_;
};

/// Exact \int_a^b f(s) ds for a step curve.
inline double integrate_curve(const PiecewiseFlatCurve& curve, double a, double b) {
    return curve.integral(a, b);
}

}  // namespace stepspike
