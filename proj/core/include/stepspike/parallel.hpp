#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>

namespace stepspike {

/// Counter-based uniform stream: splitmix64 keyed by (seed, path, stream).
/// Streams are independent of evaluation order, so results do not depend on
/// how paths are spread across threads.
class CounterRng {
public:
    using result_type = std::uint64_t;

    CounterRng(std::uint64_t seed, std::uint64_t path, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

private:
    std::uint64_t state_;
};

/// Standard normal draws from one counter stream.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t path, std::uint64_t stream, bool negate = false)
        : rng_(seed, path, stream), sign_(negate ? -1.0 : 1.0) {}

    double operator()() { return sign_ * dist_(rng_); }

private:
    CounterRng rng_;
    std::normal_distribution<double> dist_;
    double sign_;
};

/// Resolve a requested thread count; 0 means hardware concurrency.
unsigned resolve_threads(unsigned requested);

/// Run body(begin, end) over contiguous blocks of [0, count).
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// Pairwise summation in a fixed order.
double pairwise_sum(std::span<const double> values);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean and its standard error, reduced deterministically.
McEstimate mc_estimate(std::span<const double> samples);

}  // namespace stepspike
