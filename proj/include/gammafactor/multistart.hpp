#pragma once

// Seeded multistart projected-gradient ascent over products of l_p unit
// spheres or balls. Used only to produce lower bounds on suprema: the value
// returned is always the objective evaluated at the returned point.

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>
#include <vector>

#include "gammafactor/errors.hpp"
#include "gammafactor/numerics.hpp"
#include "gammafactor/spaces.hpp"

namespace gammafactor {

struct SearchBlock {
    SpaceSpec space;
    bool sphere = true;  // false: the closed unit ball
};

using SearchPoint = std::vector<Vector>;
using Objective = std::function<double(const SearchPoint&)>;

struct SearchResult {
    SearchPoint point;
    double value = -std::numeric_limits<double>::infinity();
    int best_restart = -1;  // index of the winning start (initial points first)
};

struct MultistartOptions {
    int restarts = 8;
    int threads = 1;
    std::vector<SearchPoint> initial;  // evaluated before the random restarts
};

namespace detail {

inline std::string format_point(const SearchPoint& x) {
    std::ostringstream os;
    os.precision(17);
    os << '[';
    for (std::size_t b = 0; b < x.size(); ++b) {
        if (b) os << ", ";
        os << '(';
        for (std::size_t i = 0; i < x[b].size(); ++i) os << (i ? ", " : "") << x[b][i];
        os << ')';
    }
    os << ']';
    return os.str();
}

inline void project(const std::vector<SearchBlock>& blocks, SearchPoint& x) {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const double n = lp_norm(blocks[b].space.p, x[b]);
        if (n == 0.0) {
            if (blocks[b].sphere) {
                std::fill(x[b].begin(), x[b].end(), 0.0);
                x[b][0] = 1.0;
            }
            continue;
        }
        if (blocks[b].sphere || n > 1.0)
            for (double& v : x[b]) v /= n;
    }
}

inline SearchPoint random_point(const std::vector<SearchBlock>& blocks, SeededRng& rng) {
    SearchPoint x(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        x[b] = rng.normal_vector(blocks[b].space.dim);
        const double n = lp_norm(blocks[b].space.p, x[b]);
        double radius = 1.0;
        if (!blocks[b].sphere) radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(blocks[b].space.dim));
        if (n > 0.0)
            for (double& v : x[b]) v *= radius / n;
    }
    project(blocks, x);
    return x;
}

inline double checked(const Objective& f, const SearchPoint& x) {
    const double v = f(x);
    if (!std::isfinite(v)) throw SearchError("multistart_maximize: objective is not finite at " + format_point(x));
    return v;
}

// Projected gradient ascent with central-difference gradients and a
// backtracking step; stops on stagnation or after tol.local_iterations.
inline SearchResult local_ascent(const Objective& f, const std::vector<SearchBlock>& blocks, SearchPoint x,
                                 const Tolerances& tol) {
    project(blocks, x);
    double fx = checked(f, x);
    double step = 1.0;
    const double h = tol.gradient_step;

    for (int it = 0; it < tol.local_iterations; ++it) {
        SearchPoint g(x.size());
        double gnorm = 0.0;
        for (std::size_t b = 0; b < x.size(); ++b) {
            g[b].assign(x[b].size(), 0.0);
            for (std::size_t i = 0; i < x[b].size(); ++i) {
                SearchPoint xp = x, xm = x;
                xp[b][i] += h;
                xm[b][i] -= h;
                g[b][i] = (checked(f, xp) - checked(f, xm)) / (2.0 * h);
                gnorm += g[b][i] * g[b][i];
            }
        }
        gnorm = std::sqrt(gnorm);
        if (gnorm == 0.0) break;

        double t = std::min(1.0, 2.0 * step);
        bool improved = false;
        SearchPoint candidate;
        double fc = fx;
        while (t > 1e-12) {
            candidate = x;
            for (std::size_t b = 0; b < x.size(); ++b)
                for (std::size_t i = 0; i < x[b].size(); ++i) candidate[b][i] += t * g[b][i] / gnorm;
            project(blocks, candidate);
            fc = checked(f, candidate);
            if (fc > fx) {
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if (!improved) break;
        const double gain = fc - fx;
        x = std::move(candidate);
        fx = fc;
        step = t;
        if (gain <= 1e-15 * (1.0 + std::abs(fx))) break;
    }
    return SearchResult{std::move(x), fx, -1};
}

}  // namespace detail

// Maximizes `objective` over the product of the blocks. Start k (after the
// caller's initial points) draws from rng.derive(k), so the result for a
// given seed is reproducible and non-decreasing in the number of restarts.
inline SearchResult multistart_maximize(const Objective& objective, const std::vector<SearchBlock>& blocks,
                                        const MultistartOptions& options, const SeededRng& rng,
                                        const Tolerances& tol = default_tolerances()) {
    if (options.restarts < 1 && options.initial.empty())
        throw InputError("multistart_maximize: restarts must be >= 1");
    if (blocks.empty()) throw InputError("multistart_maximize: empty domain");

    const std::size_t n_init = options.initial.size();
    const std::size_t total = n_init + static_cast<std::size_t>(std::max(0, options.restarts));
    std::vector<SearchResult> results(total);

    auto run_one = [&](std::size_t k) {
        SearchPoint start;
        if (k < n_init) {
            start = options.initial[k];
            if (start.size() != blocks.size()) throw InputError("multistart_maximize: initial point has wrong arity");
        } else {
            SeededRng child = rng.derive(k - n_init);
            start = detail::random_point(blocks, child);
        }
        results[k] = detail::local_ascent(objective, blocks, std::move(start), tol);
        results[k].best_restart = static_cast<int>(k);
    };

    const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(total)));
    if (threads == 1) {
        for (std::size_t k = 0; k < total; ++k) run_one(k);
    } else {
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t]() {
                try {
                    for (std::size_t k = static_cast<std::size_t>(t); k < total; k += static_cast<std::size_t>(threads))
                        run_one(k);
                } catch (...) {
                    errors[static_cast<std::size_t>(t)] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    SearchResult best = results.front();
    for (std::size_t k = 1; k < total; ++k)
        if (results[k].value > best.value) best = results[k];
    return best;
}

}  // namespace gammafactor
