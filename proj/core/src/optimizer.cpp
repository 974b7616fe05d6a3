#include "stepspike/optimizer.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "stepspike/parallel.hpp"

namespace stepspike {

bool lexicographically_better(const Score& a, const Score& b) {
    if (a.primary != b.primary) return a.primary < b.primary;
    return a.secondary < b.secondary;
}

Score banded_score(std::span<const double> residuals, std::span<const double> tolerance) {
    if (residuals.size() != tolerance.size()) throw std::invalid_argument("one tolerance per residual required");
    Score s;
    for (std::size_t m = 0; m < residuals.size(); ++m) {
        const double r = residuals[m];
        if (!std::isfinite(r)) throw std::domain_error("non-finite model price");
        const double e = std::max(std::abs(r) - tolerance[m], 0.0);
        s.primary += e * e;
        s.secondary += r * r;
    }
    return s;
}

namespace {

class Evaluator {
public:
    explicit Evaluator(const BandedProblem& p) : p_(p) {}

    Score score(std::span<const double> x) const {
        std::vector<double> r(p_.residual_count);
        p_.evaluate(x, r);
        return banded_score(r, p_.tolerance);
    }

    std::vector<double> residuals(std::span<const double> x) const {
        std::vector<double> r(p_.residual_count);
        p_.evaluate(x, r);
        return r;
    }

    double clamp(std::size_t j, double v) const { return std::clamp(v, p_.lower[j], p_.upper[j]); }

    const BandedProblem& problem() const { return p_; }

private:
    const BandedProblem& p_;
};

void validate(const BandedProblem& p, std::span<const double> initial) {
    if (p.dimension == 0) throw std::invalid_argument("optimizer needs at least one unknown");
    if (!p.evaluate) throw std::invalid_argument("optimizer needs a residual function");
    if (p.lower.size() != p.dimension || p.upper.size() != p.dimension || initial.size() != p.dimension) {
        throw std::invalid_argument("bounds and initial point must match the dimension");
    }
    if (p.tolerance.size() != p.residual_count) throw std::invalid_argument("one tolerance per residual required");
    for (std::size_t j = 0; j < p.dimension; ++j) {
        if (!std::isfinite(p.lower[j]) || !std::isfinite(p.upper[j]) || p.lower[j] > p.upper[j]) {
            throw std::invalid_argument("bounds must be finite with lower <= upper");
        }
    }
}

struct Candidate {
    std::vector<double> x;
    Score score;
};

void differential_evolution(const Evaluator& ev, const OptimizerOptions& opt, Candidate& best,
                            OptimizerResult& out) {
    const auto& p = ev.problem();
    const std::size_t d = p.dimension;
    const std::size_t np = std::max<std::size_t>(opt.population ? opt.population : std::max<std::size_t>(15 * d, 40), 4);
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<Candidate> pop(np);
    pop[0].x = best.x;
    for (std::size_t i = 1; i < np; ++i) {
        pop[i].x.resize(d);
        for (std::size_t j = 0; j < d; ++j) pop[i].x[j] = p.lower[j] + unit(rng) * (p.upper[j] - p.lower[j]);
    }
    auto evaluate_all = [&](std::vector<Candidate>& cs) {
        parallel_for(cs.size(), opt.threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) cs[i].score = ev.score(cs[i].x);
        });
        out.evaluations += cs.size();
    };
    evaluate_all(pop);
    auto best_of = [&]() {
        std::size_t k = 0;
        for (std::size_t i = 1; i < np; ++i) {
            if (lexicographically_better(pop[i].score, pop[k].score)) k = i;
        }
        return k;
    };
    best = pop[best_of()];

    std::size_t stall = 0;
    std::vector<Candidate> trials(np);
    std::uniform_int_distribution<std::size_t> pick(0, np - 1);
    std::uniform_int_distribution<std::size_t> pick_dim(0, d - 1);
    for (std::size_t gen = 0; gen < opt.max_iters; ++gen) {
        if (best.score.primary == 0.0 && stall >= 10) break;
        for (std::size_t i = 0; i < np; ++i) {
            std::size_t a, b, c;
            do { a = pick(rng); } while (a == i);
            do { b = pick(rng); } while (b == i || b == a);
            do { c = pick(rng); } while (c == i || c == a || c == b);
            const std::size_t jr = pick_dim(rng);
            auto& tx = trials[i].x;
            tx = pop[i].x;
            for (std::size_t j = 0; j < d; ++j) {
                const double u = unit(rng);
                if (j != jr && u >= opt.crossover) continue;
                double v = pop[a].x[j] + opt.differential_weight * (pop[b].x[j] - pop[c].x[j]);
                if (v < p.lower[j]) v = p.lower[j] + unit(rng) * (pop[i].x[j] - p.lower[j]);
                if (v > p.upper[j]) v = p.upper[j] - unit(rng) * (p.upper[j] - pop[i].x[j]);
                tx[j] = ev.clamp(j, v);
            }
        }
        evaluate_all(trials);
        for (std::size_t i = 0; i < np; ++i) {
            if (!lexicographically_better(pop[i].score, trials[i].score)) std::swap(pop[i], trials[i]);
        }
        const Candidate& g = pop[best_of()];
        ++out.iterations;
        if (lexicographically_better(g.score, best.score)) {
            const bool big = g.score.primary < best.score.primary * (1.0 - 1e-9) ||
                             g.score.secondary < best.score.secondary * (1.0 - 1e-9);
            best = g;
            stall = big ? 0 : stall + 1;
        } else {
            ++stall;
        }
        if (stall >= opt.stall_generations) break;
    }
}

void pattern_search(const Evaluator& ev, Candidate& best, OptimizerResult& out) {
    const auto& p = ev.problem();
    std::vector<double> step(p.dimension);
    for (std::size_t j = 0; j < p.dimension; ++j) step[j] = std::max((p.upper[j] - p.lower[j]) * 1e-3, 1e-12);
    for (int sweep = 0; sweep < 200; ++sweep) {
        bool improved = false;
        for (std::size_t j = 0; j < p.dimension; ++j) {
            for (double dir : {1.0, -1.0}) {
                Candidate trial = best;
                trial.x[j] = ev.clamp(j, best.x[j] + dir * step[j]);
                if (trial.x[j] == best.x[j]) continue;
                trial.score = ev.score(trial.x);
                ++out.evaluations;
                if (lexicographically_better(trial.score, best.score)) {
                    best = std::move(trial);
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) {
            bool all_small = true;
            for (double& s : step) {
                s *= 0.5;
                all_small = all_small && s < 1e-11;
            }
            if (all_small) break;
        }
    }
}

/// Damped Gauss-Newton on either the banded residuals or the raw residuals.
void gauss_newton(const Evaluator& ev, Candidate& best, OptimizerResult& out, bool banded) {
    const auto& p = ev.problem();
    const std::size_t d = p.dimension;
    const std::size_t m = p.residual_count;
    auto transform = [&](const std::vector<double>& r) {
        Eigen::VectorXd v(m);
        for (std::size_t k = 0; k < m; ++k) {
            if (banded) {
                const double e = std::max(std::abs(r[k]) - p.tolerance[k], 0.0);
                v[k] = r[k] >= 0 ? e : -e;
            } else {
                v[k] = r[k];
            }
        }
        return v;
    };
    double mu = 1e-6;
    for (int iter = 0; iter < 60; ++iter) {
        const auto r0 = ev.residuals(best.x);
        const Eigen::VectorXd v0 = transform(r0);
        if (v0.squaredNorm() == 0.0) return;
        Eigen::MatrixXd jac(m, d);
        for (std::size_t j = 0; j < d; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(best.x[j]));
            std::vector<double> xh = best.x;
            double step = h;
            xh[j] = best.x[j] + h;
            if (xh[j] > p.upper[j]) {
                xh[j] = best.x[j] - h;
                step = -h;
            }
            const Eigen::VectorXd v1 = transform(ev.residuals(xh));
            jac.col(static_cast<Eigen::Index>(j)) = (v1 - v0) / step;
        }
        out.evaluations += d + 1;
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd g = jac.transpose() * v0;
        bool accepted = false;
        for (int tries = 0; tries < 12; ++tries) {
            Eigen::MatrixXd a = jtj;
            for (std::size_t j = 0; j < d; ++j) {
                const auto jj = static_cast<Eigen::Index>(j);
                a(jj, jj) += mu * (jtj(jj, jj) + 1e-12);
            }
            const Eigen::VectorXd delta = a.ldlt().solve(-g);
            Candidate trial = best;
            for (std::size_t j = 0; j < d; ++j) trial.x[j] = ev.clamp(j, best.x[j] + delta[static_cast<Eigen::Index>(j)]);
            trial.score = ev.score(trial.x);
            ++out.evaluations;
            if (lexicographically_better(trial.score, best.score)) {
                const bool tiny = (delta.norm() < 1e-14);
                best = std::move(trial);
                mu = std::max(mu * 0.1, 1e-12);
                accepted = !tiny;
                break;
            }
            mu *= 10.0;
        }
        if (!accepted) return;
    }
}

}  // namespace

OptimizerResult minimize_banded(const BandedProblem& problem, std::span<const double> initial,
                                const OptimizerOptions& options) {
    validate(problem, initial);
    Evaluator ev(problem);
    OptimizerResult out;
    Candidate best;
    best.x.assign(initial.begin(), initial.end());
    for (std::size_t j = 0; j < problem.dimension; ++j) best.x[j] = ev.clamp(j, best.x[j]);
    best.score = ev.score(best.x);
    ++out.evaluations;

    differential_evolution(ev, options, best, out);
    gauss_newton(ev, best, out, true);
    pattern_search(ev, best, out);
    gauss_newton(ev, best, out, false);
    gauss_newton(ev, best, out, true);
    gauss_newton(ev, best, out, false);

    out.x = std::move(best.x);
    out.score = best.score;
    return out;
}

}  // namespace stepspike
