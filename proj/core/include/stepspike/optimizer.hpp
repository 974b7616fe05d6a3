#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace stepspike {

/// Lexicographic objective: the banded error first, plain squared error second.
struct Score {
    double primary = 0.0;
    double secondary = 0.0;
};

/// True when `a` is strictly better than `b`.
bool lexicographically_better(const Score& a, const Score& b);

/// Least-squares problem with a dead band around each residual.
///
/// `evaluate` writes model-minus-market residuals for a candidate. The primary
/// score is sum((|r_m| - h_m)^+)^2, the secondary sum(r_m^2).
struct BandedProblem {
    std::size_t dimension = 0;
    std::size_t residual_count = 0;
    std::function<void(std::span<const double> x, std::span<double> residuals)> evaluate;
    std::vector<double> tolerance;
    std::vector<double> lower;
    std::vector<double> upper;
};

Score banded_score(std::span<const double> residuals, std::span<const double> tolerance);

struct OptimizerOptions {
    std::uint64_t seed = 1;
    std::size_t population = 0;  // 0 selects max(15 * dimension, 40)
    std::size_t max_iters = 400;
    std::size_t stall_generations = 60;
    double differential_weight = 0.7;
    double crossover = 0.9;
    unsigned threads = 1;
};

struct OptimizerResult {
    std::vector<double> x;
    Score score;
    std::size_t iterations = 0;
    std::size_t evaluations = 0;
};

/// Bounded differential evolution (rand/1/bin) from `initial`, then a
/// pattern-search polish and damped Gauss-Newton refinement. Every accepted
/// move improves the lexicographic score, and results do not depend on the
/// thread count.
OptimizerResult minimize_banded(const BandedProblem& problem, std::span<const double> initial,
                                const OptimizerOptions& options = {});

}  // namespace stepspike
