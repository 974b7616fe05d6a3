#include "stepspike/curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stepspike {

PiecewiseFlatCurve::PiecewiseFlatCurve(std::vector<double> breaks, std::vector<double> levels)
    : breaks_(std::move(breaks)), levels_(std::move(levels)) {
    if (levels_.size() != breaks_.size() + 1) {
        throw std::invalid_argument("step curve needs exactly one more level than breaks");
    }
    for (std::size_t i = 0; i < breaks_.size(); ++i) {
        if (!std::isfinite(breaks_[i]) || (i > 0 && !(breaks_[i] > breaks_[i - 1]))) {
            throw std::invalid_argument("step curve breaks must be finite and strictly increasing");
        }
    }
    for (double l : levels_) {
        if (!std::isfinite(l)) throw std::invalid_argument("step curve levels must be finite");
    }
}

std::size_t PiecewiseFlatCurve::interval_index(double t) const {
    return static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), t) -
                                    breaks_.begin());
}

double PiecewiseFlatCurve::integral(double a, double b) const {
    if (a > b) throw std::invalid_argument("integral bounds reversed (a > b)");
    std::size_t k = interval_index(a);
    const std::size_t last = interval_index(b);
    if (k == last) return levels_[k] * (b - a);
    double sum = levels_[k] * (breaks_[k] - a);
    for (++k; k < last; ++k) sum += levels_[k] * (breaks_[k] - breaks_[k - 1]);
    sum += levels_[last] * (b - breaks_[last - 1]);
    return sum;
}

PiecewiseFlatCurve PiecewiseFlatCurve::operator+(const PiecewiseFlatCurve& other) const {
    std::vector<double> merged;
    merged.reserve(breaks_.size() + other.breaks_.size());
    std::set_union(breaks_.begin(), breaks_.end(), other.breaks_.begin(), other.breaks_.end(),
                   std::back_inserter(merged));
    std::vector<double> levels;
    levels.reserve(merged.size() + 1);
    // Left of the first break both curves sit on their first level.
    levels.push_back(levels_.front() + other.levels_.front());
    for (double b : merged) levels.push_back((*this)(b) + other(b));
    return PiecewiseFlatCurve(std::move(merged), std::move(levels));
}

PiecewiseFlatCurve PiecewiseFlatCurve::shifted(double spread) const {
    std::vector<double> levels = levels_;
    for (double& l : levels) l += spread;
    return PiecewiseFlatCurve(breaks_, std::move(levels));
}

}  // namespace stepspike
