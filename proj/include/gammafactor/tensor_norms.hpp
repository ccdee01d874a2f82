#pragma once

// Certified two-sided bounds for the injective norm eps and the projective
// norm pi on finite tensor products of l_p spaces.
//
// Exact routes:
//   - order 1: the norm of the single factor;
//   - two Euclidean factors: spectral norm (eps) and nuclear norm (pi);
//   - eps with a factor whose dual ball is a polytope (p in {1, inf}):
//     enumeration of that ball's vertices, recursively;
//   - pi with an l_1 factor: l_1 (x)_pi X = l_1(X), i.e. the sum of the pi
//     norms of the slices along that factor.
// Otherwise eps is bounded above by flattening spectral norms scaled by the
// l_q -> l_2 embedding constants, pi above by explicit decompositions, and
// both below by explicit witnesses (dual functionals or norming points).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gammafactor/errors.hpp"
#include "gammafactor/multistart.hpp"
#include "gammafactor/numerics.hpp"
#include "gammafactor/spaces.hpp"
#include "gammafactor/tensor.hpp"

namespace gammafactor {

inline constexpr std::uint64_t kDefaultSeed = 0x6A09E667F3BCC908ULL;

struct Bound {
    double value = 0.0;
    Provenance cert;
    bool exact = false;
};

namespace detail {

inline std::vector<SpaceSpec> dual_spaces(const std::vector<SpaceSpec>& spaces) {
    std::vector<SpaceSpec> out;
    for (const auto& s : spaces) out.push_back(dual_space(s));
    return out;
}

inline DenseTensor reshape(const Vector& data, const std::vector<SpaceSpec>& spaces) { return DenseTensor(spaces, data); }

// All bipartitions {S, S^c} of the modes with 0 in S and S^c nonempty.
inline std::vector<std::vector<bool>> bipartitions(std::size_t n) {
    std::vector<std::vector<bool>> out;
    if (n < 2) return out;
    const std::size_t count = std::size_t{1} << (n - 1);
    for (std::size_t mask = 0; mask + 1 < count; ++mask) {
        std::vector<bool> rows(n, false);
        rows[0] = true;
        for (std::size_t k = 1; k < n; ++k) rows[k] = (mask >> (k - 1)) & 1U;
        out.push_back(std::move(rows));
    }
    return out;
}

// Number of vertex combinations the recursive eps enumeration would visit,
// saturating at `cap + 1`.
inline std::size_t enumeration_cost(const std::vector<SpaceSpec>& spaces, std::size_t cap) {
    std::vector<std::size_t> counts;
    bool has_smooth = false;
    for (const auto& s : spaces) {
        if (s.p.is_polyhedral()) counts.push_back(half_vertex_count(s));
        else has_smooth = true;
    }
    if (counts.empty()) return cap + 1;
    std::sort(counts.begin(), counts.end());
    if (!has_smooth) counts.pop_back();  // the last mode is evaluated by its norm
    std::size_t total = 1;
    for (auto c : counts) {
        if (c > cap || total > cap / std::max<std::size_t>(c, 1)) return cap + 1;
        total *= c;
    }
    return total;
}

inline bool enumeration_exact_leaf(const std::vector<SpaceSpec>& spaces) {
    std::size_t smooth = 0;
    for (const auto& s : spaces)
        if (!s.p.is_polyhedral()) ++smooth;
    if (smooth == 0) return true;
    if (smooth == 1) return true;  // ends in an order-1 norm
    if (smooth == 2) {
        for (const auto& s : spaces)
            if (!s.p.is_polyhedral() && !s.is_euclidean()) return false;
        return true;  // ends in a Euclidean spectral norm
    }
    return false;
}

// eps upper bound without any search. Exact when the structure allows.
inline Bound injective_upper_impl(const DenseTensor& u, const Tolerances& tol) {
    const std::size_t n = u.order();
    if (u.is_zero()) return Bound{0.0, Provenance{"zero", "zero tensor", {}, {}}, true};

    if (n == 1) {
        const Vector x = dual_ball_argmax(dual_space(u.spaces()[0]), u.coeffs());
        return Bound{norm(u.spaces()[0], u.coeffs()), Provenance{"norm", "order-1 tensor", {x}, {}}, true};
    }

    if (n == 2 && u.spaces()[0].is_euclidean() && u.spaces()[1].is_euclidean()) {
        const SvdResult s = svd(u.flatten({true, false}), tol);
        return Bound{s.sigma[0], Provenance{"svd-spectral", "largest singular value", {s.u.column(0), s.v.column(0)}, {}},
                     true};
    }

    const bool has_poly = std::any_of(u.spaces().begin(), u.spaces().end(), [](const SpaceSpec& s) { return s.p.is_polyhedral(); });
    if (has_poly && enumeration_exact_leaf(u.spaces()) &&
        enumeration_cost(u.spaces(), tol.max_vertex_combinations) <= tol.max_vertex_combinations) {
        // Enumerate the polyhedral mode with the fewest half-vertices.
        std::size_t mode = n;
        for (std::size_t k = 0; k < n; ++k) {
            if (!u.spaces()[k].p.is_polyhedral()) continue;
            if (mode == n || half_vertex_count(u.spaces()[k]) < half_vertex_count(u.spaces()[mode])) mode = k;
        }
        // Sup over the dual ball of X_mode; its vertices are those of l_{q}.
        const auto vertices = half_ball_vertices(dual_space(u.spaces()[mode]), tol);
        Bound best{-1.0, {}, true};
        Vector best_vertex;
        for (const auto& v : vertices) {
            Bound child = injective_upper_impl(u.contract(mode, v), tol);
            if (child.value > best.value) {
                best = std::move(child);
                best_vertex = v;
            }
        }
        Provenance cert{"vertex-enumeration", "mode " + std::to_string(mode), {best_vertex}, {best.cert}};
        return Bound{best.value, std::move(cert), best.exact};
    }

    // Flattening route: ||x*||_2 <= c_k ||x*||_{q_k} on each dual ball.
    double constant = 1.0;
    for (const auto& s : u.spaces()) constant *= embedding_to_l2(dual_space(s));
    double best = std::numeric_limits<double>::infinity();
    std::string best_split;
    for (const auto& rows : bipartitions(n)) {
        const double sigma = spectral_norm(u.flatten(rows), tol);
        if (sigma < best) {
            best = sigma;
            best_split.clear();
            for (bool r : rows) best_split += r ? 'R' : 'C';
        }
    }
    Provenance cert{"flattening", "split " + best_split + ", embedding constant " + std::to_string(constant), {}, {}};
    return Bound{best * constant, std::move(cert), false};
}

struct AlternatingResult {
    double value = 0.0;
    std::vector<Vector> functionals;
};

// Alternating maximization of <u, x_1* (x) ... (x) x_n*> over the dual unit
// balls; each step maximizes the linear form in one functional exactly.
inline AlternatingResult alternating_injective(const DenseTensor& u, std::vector<Vector> xs, int max_sweeps = 200) {
    const std::size_t n = u.order();
    std::vector<SpaceSpec> duals = dual_spaces(u.spaces());
    double value = -std::numeric_limits<double>::infinity();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double current = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const Vector c = u.contract_all_but(k, xs);
            xs[k] = dual_ball_argmax(duals[k], c);
            current = dot(c, xs[k]);
        }
        if (current <= value + 1e-15 * (1.0 + std::abs(value))) {
            value = std::max(value, current);
            break;
        }
        value = current;
    }
    // Pull every functional into its ball before the certified evaluation.
    for (std::size_t k = 0; k < n; ++k) {
        const double nk = norm(duals[k], xs[k]);
        if (nk > 1.0)
            for (double& v : xs[k]) v /= nk;
    }
    return AlternatingResult{std::abs(u.contract_all(xs)), std::move(xs)};
}

inline std::vector<Vector> random_functionals(const DenseTensor& u, SeededRng& rng) {
    std::vector<Vector> xs;
    for (const auto& s : u.spaces()) {
        const SpaceSpec d = dual_space(s);
        Vector x = rng.normal_vector(d.dim);
        const double nx = norm(d, x);
        if (nx > 0.0)
            for (double& v : x) v /= nx;
        xs.push_back(std::move(x));
    }
    return xs;
}

// Starting functionals from the leading left singular vector of each unfolding.
inline std::vector<Vector> spectral_functionals(const DenseTensor& u, const Tolerances& tol) {
    std::vector<Vector> xs;
    for (std::size_t k = 0; k < u.order(); ++k) {
        const SpaceSpec d = dual_space(u.spaces()[k]);
        Vector x = svd(u.unfold(k), tol).u.column(0);
        const double nx = norm(d, x);
        if (nx > 0.0)
            for (double& v : x) v /= nx;
        xs.push_back(std::move(x));
    }
    return xs;
}

}  // namespace detail

// Certified upper bound on eps(u) (no search).
inline Bound injective_norm_upper(const DenseTensor& u, const Tolerances& tol = default_tolerances()) {
    return detail::injective_upper_impl(u, tol);
}

// Certified lower bound on eps(u) by multistart alternating maximization.
inline Bound injective_norm_lower(const DenseTensor& u, int budget, std::uint64_t seed = kDefaultSeed,
                                  const Tolerances& tol = default_tolerances()) {
    if (budget <= 0) throw InputError("injective_norm_lower: budget must be positive");
    if (u.is_zero()) return Bound{0.0, Provenance{"zero", "zero tensor", {}, {}}, true};
    SeededRng rng(seed);
    detail::AlternatingResult best = detail::alternating_injective(u, detail::spectral_functionals(u, tol));
    for (int r = 0; r < budget; ++r) {
        SeededRng child = rng.derive(static_cast<std::uint64_t>(r));
        auto res = detail::alternating_injective(u, detail::random_functionals(u, child));
        if (res.value > best.value) best = std::move(res);
    }
    return Bound{best.value, Provenance{"alternating-dual-ball", "norming functionals", best.functionals, {}}, false};
}

inline NormInterval injective_norm_bounds(const DenseTensor& u, int budget, std::uint64_t seed = kDefaultSeed,
                                          const Tolerances& tol = default_tolerances()) {
    if (budget <= 0) throw InputError("injective_norm_bounds: budget must be positive");
    Bound up = injective_norm_upper(u, tol);
    if (up.exact) {
        NormInterval iv = exact_interval(up.value, up.cert);
        return iv;
    }
    Bound lo = injective_norm_lower(u, budget, seed, tol);
    NormInterval iv;
    iv.lower = std::min(lo.value, up.value);
    iv.upper = up.value;
    iv.lower_certificate = std::move(lo.cert);
    iv.upper_certificate = std::move(up.cert);
    return iv;
}

// ---------------------------------------------------------------------------
// Decompositions (upper bounds for pi)
// ---------------------------------------------------------------------------

namespace detail {

// Exact decomposition by a chain of SVDs: unfold mode 0, recurse on the
// right singular vectors.
inline Decomposition svd_decompose(const DenseTensor& u, const Tolerances& tol) {
    Decomposition out;
    if (u.is_zero()) return out;
    if (u.order() == 1) {
        out.push_back(DecomposablePoint{{u.coeffs()}});
        return out;
    }
    const SvdResult s = svd(u.unfold(0), tol);
    std::vector<SpaceSpec> rest(u.spaces().begin() + 1, u.spaces().end());
    for (std::size_t k = 0; k < s.sigma.size(); ++k) {
        if (s.sigma[k] == 0.0) continue;
        Vector b = s.v.column(k);
        for (double& x : b) x *= s.sigma[k];
        const DenseTensor sub(rest, b);
        for (auto& term : svd_decompose(sub, tol)) {
            DecomposablePoint t;
            t.factors.push_back(s.u.column(k));
            for (auto& f : term.factors) t.factors.push_back(std::move(f));
            out.push_back(std::move(t));
        }
    }
    return out;
}

// Decomposition along fibers of `mode`: basis vectors in every other slot.
inline Decomposition fiber_decompose(const DenseTensor& u, std::size_t mode) {
    Decomposition out;
    const std::size_t n = u.order();
    const std::size_t dm = u.shape()[mode];
    for (std::size_t flat = 0; flat < u.size(); ++flat) {
        const auto idx = u.unravel(flat);
        if (idx[mode] != 0) continue;
        Vector fiber(dm);
        bool nonzero = false;
        auto j = idx;
        for (std::size_t i = 0; i < dm; ++i) {
            j[mode] = i;
            fiber[i] = u.at(j);
            nonzero = nonzero || fiber[i] != 0.0;
        }
        if (!nonzero) continue;
        DecomposablePoint t;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == mode) {
                t.factors.push_back(fiber);
            } else {
                Vector e(u.shape()[k], 0.0);
                e[idx[k]] = 1.0;
                t.factors.push_back(std::move(e));
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

inline double fiber_cost(const DenseTensor& u, std::size_t mode) {
    return decomposition_cost(u.spaces(), fiber_decompose(u, mode));
}

// pi upper bound for a (tiny) residual via its cheapest fiber decomposition.
inline double residual_bound(const DenseTensor& r) {
    if (r.is_zero()) return 0.0;
    if (r.order() == 1) return norm(r.spaces()[0], r.coeffs());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < r.order(); ++m) best = std::min(best, fiber_cost(r, m));
    return best;
}

// Cost of a decomposition plus the pi bound of whatever it misses.
inline double certified_cost(const DenseTensor& u, const Decomposition& d) {
    DenseTensor r = u - assemble_decomposition(u.spaces(), d);
    return decomposition_cost(u.spaces(), d) + residual_bound(r);
}

inline void balance_terms(const std::vector<SpaceSpec>& spaces, Decomposition& d) {
    const std::size_t n = spaces.size();
    Decomposition kept;
    for (auto& t : d) {
        std::vector<double> norms(n);
        double logsum = 0.0;
        bool zero = false;
        for (std::size_t k = 0; k < n; ++k) {
            norms[k] = norm(spaces[k], t.factors[k]);
            if (norms[k] == 0.0) zero = true;
            else logsum += std::log(norms[k]);
        }
        if (zero) continue;
        const double target = std::exp(logsum / static_cast<double>(n));
        for (std::size_t k = 0; k < n; ++k)
            for (double& v : t.factors[k]) v *= target / norms[k];
        kept.push_back(std::move(t));
    }
    d = std::move(kept);
}

// Pseudo-inverse of a symmetric positive semidefinite matrix.
inline Matrix psd_pinv(const SymmetricMatrix& g, const Tolerances& tol) {
    const EigenDecomposition e = jacobi_eigh(g, tol);
    const std::size_t n = g.dim();
    const double cutoff = 1e-12 * std::max(e.values.front(), 0.0);
    Matrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        if (e.values[k] <= cutoff || e.values[k] <= 0.0) continue;
        const double inv = 1.0 / e.values[k];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out(i, j) += inv * e.vectors(i, k) * e.vectors(j, k);
    }
    return out;
}

// Reweighted least-norm sweeps: with all but one mode fixed the constraint
// sum_j x_j^k (x) w_j = u is linear in the mode-k factors, and
// min sum_j omega_j ||x_j^k||^2 under it has a closed form. The weights
// omega_j = prod_{l != k} ||x_j^l|| / ||x_j^k|| majorize the target cost.
inline Decomposition refine_decomposition(const DenseTensor& u, Decomposition d, int sweeps, const Tolerances& tol) {
    const auto& spaces = u.spaces();
    const std::size_t n = u.order();
    if (d.empty() || n < 2) return d;
    balance_terms(spaces, d);
    Decomposition best = d;
    double best_cost = certified_cost(u, d);
    const double scale = std::max(u.frobenius(), 1e-300);

    for (int sweep = 0; sweep < sweeps && !d.empty(); ++sweep) {
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t r = d.size();
            std::vector<SpaceSpec> others;
            for (std::size_t l = 0; l < n; ++l)
                if (l != k) others.push_back(spaces[l]);
            const std::size_t cols = u.size() / u.shape()[k];
            // W: cols x r, column j = vec of the other factors of term j.
            Matrix w(cols, r);
            Vector omega_inv(r);
            for (std::size_t j = 0; j < r; ++j) {
                DecomposablePoint rest;
                double c = 1.0;
                for (std::size_t l = 0; l < n; ++l)
                    if (l != k) {
                        rest.factors.push_back(d[j].factors[l]);
                        c *= norm(spaces[l], d[j].factors[l]);
                    }
                const DenseTensor wt = to_dense(others, rest);
                for (std::size_t i = 0; i < cols; ++i) w(i, j) = wt[i];
                const double xk = std::max(norm2(d[j].factors[k]), 1e-12 * scale);
                omega_inv[j] = c > 0.0 ? xk / c : 0.0;
            }
            SymmetricMatrix g(cols);
            for (std::size_t a = 0; a < cols; ++a)
                for (std::size_t b = a; b < cols; ++b) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < r; ++j) s += w(a, j) * omega_inv[j] * w(b, j);
                    g.set(a, b, s);
                }
            const Matrix ginv = psd_pinv(g, tol);
            const Matrix uk = u.unfold(k);
            const Matrix lambda = uk * ginv;  // d_k x cols
            for (std::size_t j = 0; j < r; ++j) {
                Vector x(u.shape()[k], 0.0);
                for (std::size_t i = 0; i < u.shape()[k]; ++i) {
                    double s = 0.0;
                    for (std::size_t a = 0; a < cols; ++a) s += lambda(i, a) * w(a, j);
                    x[i] = s * omega_inv[j];
                }
                d[j].factors[k] = std::move(x);
            }
            balance_terms(spaces, d);
        }
        const double cost = certified_cost(u, d);
        if (cost < best_cost) {
            const double gain = best_cost - cost;
            best_cost = cost;
            best = d;
            if (gain <= 1e-13 * best_cost) break;
        }
    }
    return best;
}

// Best Euclidean rank-one approximation (alternating power iteration).
inline DecomposablePoint best_rank_one(const DenseTensor& r, int restarts, SeededRng& rng, const Tolerances& tol) {
    std::vector<SpaceSpec> eu;
    for (const auto& s : r.spaces()) eu.push_back(SpaceSpec::euclidean(s.dim));
    const DenseTensor re = r.with_spaces(eu);
    AlternatingResult best = alternating_injective(re, spectral_functionals(re, tol));
    for (int i = 0; i < restarts; ++i) {
        auto res = alternating_injective(re, random_functionals(re, rng));
        if (res.value > best.value) best = std::move(res);
    }
    DecomposablePoint t{best.functionals};
    const double lambda = re.contract_all(best.functionals);
    for (double& v : t.factors[0]) v *= lambda;
    return t;
}

}  // namespace detail

// Certified pi upper bound from explicit decompositions, refined locally.
// `hints` are extra starting decompositions (their cost is certified too).
inline Bound projective_decomposition_upper(const DenseTensor& u, int budget, std::uint64_t seed,
                                            const std::vector<Decomposition>& hints = {}, bool greedy = true,
                                            const Tolerances& tol = default_tolerances()) {
    const std::size_t n = u.order();
    Decomposition best;
    double best_cost = std::numeric_limits<double>::infinity();
    std::string best_route;
    auto consider = [&](Decomposition d, const std::string& route) {
        const double c = detail::certified_cost(u, d);
        if (c < best_cost) {
            best_cost = c;
            best = std::move(d);
            best_route = route;
        }
    };
    const int sweeps = 40;

    for (std::size_t m = 0; m < n; ++m) consider(detail::fiber_decompose(u, m), "fiber-decomposition");
    consider(detail::refine_decomposition(u, detail::svd_decompose(u, tol), sweeps, tol), "svd-chain+refine");
    for (const auto& h : hints) consider(detail::refine_decomposition(u, h, sweeps, tol), "hint+refine");

    if (greedy) {
        std::size_t cap = 0;
        for (const auto& s : u.spaces()) cap = std::max(cap, s.dim);
        cap *= 2;
        SeededRng rng(seed);
        DenseTensor residual = u;
        Decomposition peeled;
        const double stop = 1e-14 * u.frobenius();
        const int restarts = std::max(1, std::min(budget, 4));
        for (std::size_t rank = 1; rank <= cap; ++rank) {
            DecomposablePoint t = detail::best_rank_one(residual, restarts, rng, tol);
            residual -= to_dense(u.spaces(), t);
            peeled.push_back(std::move(t));
            Decomposition full = peeled;
            for (auto& extra : detail::svd_decompose(residual, tol)) full.push_back(std::move(extra));
            consider(detail::refine_decomposition(u, std::move(full), sweeps, tol), "greedy-peel+refine");
            if (residual.frobenius() <= stop) break;
        }
    }

    Provenance cert{"decomposition", best_route + ", " + std::to_string(best.size()) + " terms", {}, {}};
    for (const auto& t : best)
        for (const auto& f : t.factors) cert.vectors.push_back(f);
    return Bound{best_cost, std::move(cert), false};
}

// Certified pi lower bound <phi, u> / eps_ub(phi) over explicit dual tensors.
inline Bound projective_dual_lower(const DenseTensor& u, int budget, std::uint64_t seed,
                                   const Tolerances& tol = default_tolerances()) {
    const std::vector<SpaceSpec> duals = detail::dual_spaces(u.spaces());
    auto ratio = [&](const Vector& phi) {
        const DenseTensor f(duals, phi);
        const double e = injective_norm_upper(f, tol).value;
        if (e <= 0.0) return 0.0;
        return dot(phi, u.coeffs()) / e;
    };

    std::vector<Vector> candidates;
    candidates.push_back(u.coeffs());
    Vector signs(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) signs[i] = u[i] > 0 ? 1.0 : (u[i] < 0 ? -1.0 : 0.0);
    candidates.push_back(signs);
    for (const auto& rows : detail::bipartitions(u.order())) {
        // phi = U V^T of the flattening, mapped back to tensor layout.
        const Matrix m = u.flatten(rows);
        const SvdResult s = svd(m, tol);
        Matrix uv(m.rows(), m.cols());
        for (std::size_t k = 0; k < s.sigma.size(); ++k) {
            if (s.sigma[k] <= 1e-14 * s.sigma[0]) continue;
            for (std::size_t i = 0; i < m.rows(); ++i)
                for (std::size_t j = 0; j < m.cols(); ++j) uv(i, j) += s.u(i, k) * s.v(j, k);
        }
        Vector phi(u.size());
        std::vector<std::size_t> rmodes, cmodes;
        for (std::size_t k = 0; k < u.order(); ++k) (rows[k] ? rmodes : cmodes).push_back(k);
        for (std::size_t flat = 0; flat < u.size(); ++flat) {
            const auto idx = u.unravel(flat);
            std::size_t r = 0, c = 0;
            for (auto k : rmodes) r = r * u.shape()[k] + idx[k];
            for (auto k : cmodes) c = c * u.shape()[k] + idx[k];
            phi[flat] = uv(r, c);
        }
        candidates.push_back(std::move(phi));
    }

    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < candidates.size(); ++i) scored.emplace_back(ratio(candidates[i]), i);
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

    MultistartOptions opts;
    opts.restarts = std::max(0, std::min(budget, tol.max_dual_restarts) - 1);
    for (std::size_t i = 0; i < std::min<std::size_t>(2, scored.size()); ++i) {
        Vector start = candidates[scored[i].second];
        const double ns = norm2(start);
        if (ns > 0.0)
            for (double& v : start) v /= ns;
        opts.initial.push_back({start});
    }
    Tolerances local = tol;
    local.local_iterations = std::min(tol.local_iterations, 40);
    const std::vector<SearchBlock> blocks{SearchBlock{SpaceSpec::euclidean(u.size()), true}};
    const SearchResult res = multistart_maximize([&](const SearchPoint& x) { return ratio(x[0]); }, blocks, opts,
                                                 SeededRng(seed), local);

    // Recompute the certified value at the winner.
    Vector phi = res.point[0];
    double value = ratio(phi);
    if (scored.front().first > value) {
        phi = candidates[scored.front().second];
        value = scored.front().first;
    }
    const DenseTensor f(duals, phi);
    Provenance cert{"dual-functional", "<phi,u> / eps_ub(phi)", {phi}, {injective_norm_upper(f, tol).cert}};
    return Bound{std::max(0.0, value), std::move(cert), false};
}

// Bounds on pi(u).
inline NormInterval projective_norm_bounds(const DenseTensor& u, int budget, std::uint64_t seed = kDefaultSeed,
                                           const Tolerances& tol = default_tolerances()) {
    if (budget <= 0) throw InputError("projective_norm_bounds: budget must be positive");
    const std::size_t n = u.order();
    if (u.is_zero()) return exact_interval(0.0, Provenance{"zero", "zero tensor", {}, {}});
    if (n == 1) return exact_interval(norm(u.spaces()[0], u.coeffs()), Provenance{"norm", "order-1 tensor", {}, {}});

    for (std::size_t k = 0; k < n; ++k) {
        if (!u.spaces()[k].p.is_one()) continue;
        NormInterval sum;
        sum.upper = 0.0;
        sum.lower_certificate = Provenance{"l1-slice-sum", "mode " + std::to_string(k), {}, {}};
        sum.upper_certificate = sum.lower_certificate;
        for (std::size_t i = 0; i < u.shape()[k]; ++i) {
            const NormInterval part = projective_norm_bounds(u.slice(k, i), budget, SeededRng::mix(seed + i), tol);
            sum.lower += part.lower;
            sum.upper += part.upper;
            sum.lower_certificate.parts.push_back(part.lower_certificate);
            sum.upper_certificate.parts.push_back(part.upper_certificate);
        }
        return sum;
    }

    if (n == 2 && u.spaces()[0].is_euclidean() && u.spaces()[1].is_euclidean()) {
        const SvdResult s = svd(u.flatten({true, false}), tol);
        double nuc = 0.0;
        Provenance cert{"svd-nuclear", "sum of singular values", {}, {}};
        for (std::size_t k = 0; k < s.sigma.size(); ++k) {
            nuc += s.sigma[k];
            if (s.sigma[k] > 0.0) {
                cert.vectors.push_back(scaled(s.u.column(k), s.sigma[k]));
                cert.vectors.push_back(s.v.column(k));
            }
        }
        return exact_interval(nuc, std::move(cert));
    }

    Bound up = projective_decomposition_upper(u, budget, seed, {}, true, tol);
    Bound lo = projective_dual_lower(u, budget, SeededRng::mix(seed ^ 0x5bd1e995ULL), tol);
    // pi >= eps; exact on decomposable tensors.
    Bound el = injective_norm_lower(u, std::min(budget, 8), seed, tol);
    if (el.value > lo.value) {
        el.cert.detail = "pi >= eps: " + el.cert.detail;
        lo = std::move(el);
    }
    NormInterval iv;
    iv.lower = std::min(lo.value, up.value);
    iv.upper = up.value;
    iv.lower_certificate = std::move(lo.cert);
    iv.upper_certificate = std::move(up.cert);
    return iv;
}

// ---------------------------------------------------------------------------
// pi distance between decomposable points
// ---------------------------------------------------------------------------

namespace detail {

// x^1..x^n - z^1..z^n = sum_k z^1 .. z^{k-1} (x^k - z^k) x^{k+1} .. x^n.
inline Decomposition telescope(const DecomposablePoint& p, const DecomposablePoint& q) {
    Decomposition out;
    const std::size_t n = p.order();
    for (std::size_t k = 0; k < n; ++k) {
        DecomposablePoint t;
        for (std::size_t l = 0; l < n; ++l) {
            if (l < k) t.factors.push_back(q.factors[l]);
            else if (l == k) t.factors.push_back(axpy(-1.0, q.factors[l], p.factors[l]));
            else t.factors.push_back(p.factors[l]);
        }
        out.push_back(std::move(t));
    }
    return out;
}

inline Decomposition two_term(const DecomposablePoint& p, const DecomposablePoint& q) {
    DecomposablePoint mq = q;
    for (double& v : mq.factors[0]) v = -v;
    return {p, mq};
}

inline void check_pair(const std::vector<SpaceSpec>& spaces, const DecomposablePoint& p, const DecomposablePoint& q) {
    check_point(spaces, p);
    check_point(spaces, q);
}

}  // namespace detail

// Certified upper bound on pi(p - q) without global search: exact routes
// when available, else the best of the telescope, the two-term split and a
// local refinement of both.
inline Bound pi_distance_upper(const std::vector<SpaceSpec>& spaces, const DecomposablePoint& p,
                               const DecomposablePoint& q, const Tolerances& tol = default_tolerances()) {
    detail::check_pair(spaces, p, q);
    const DenseTensor u = to_dense(spaces, p) - to_dense(spaces, q);
    if (u.is_zero()) return Bound{0.0, Provenance{"zero", "p = q", {}, {}}, true};
    const std::size_t n = spaces.size();

    const Decomposition tele = detail::telescope(p, q);
    const Decomposition two = detail::two_term(p, q);
    const double tele_cost = decomposition_cost(spaces, tele);
    const double two_cost = decomposition_cost(spaces, two);
    Bound best{std::min(tele_cost, two_cost),
               Provenance{tele_cost <= two_cost ? "telescope" : "two-term", "explicit decomposition", {}, {}}, false};

    const bool has_l1 = std::any_of(spaces.begin(), spaces.end(), [](const SpaceSpec& s) { return s.p.is_one(); });
    const bool euclid2 = n == 2 && spaces[0].is_euclidean() && spaces[1].is_euclidean();
    if (n == 1 || euclid2 || has_l1) {
        const NormInterval iv = projective_norm_bounds(u, 1, kDefaultSeed, tol);
        if (iv.upper < best.value) best = Bound{iv.upper, iv.upper_certificate, iv.lower == iv.upper};
        return best;
    }
    const Bound refined = projective_decomposition_upper(u, 1, kDefaultSeed, {tele, two}, false, tol);
    if (refined.value < best.value) best = refined;
    return best;
}

inline NormInterval pi_distance_bounds(const std::vector<SpaceSpec>& spaces, const DecomposablePoint& p,
                                       const DecomposablePoint& q, int budget, std::uint64_t seed = kDefaultSeed,
                                       const Tolerances& tol = default_tolerances()) {
    if (budget <= 0) throw InputError("pi_distance_bounds: budget must be positive");
    detail::check_pair(spaces, p, q);
    const DenseTensor u = to_dense(spaces, p) - to_dense(spaces, q);
    NormInterval iv = projective_norm_bounds(u, budget, seed, tol);
    const Decomposition tele = detail::telescope(p, q);
    const double tele_cost = decomposition_cost(spaces, tele);
    if (tele_cost < iv.upper) {
        iv.upper = tele_cost;
        iv.upper_certificate = Provenance{"telescope", "sum of n elementary differences", {}, {}};
        for (const auto& t : tele)
            for (const auto& f : t.factors) iv.upper_certificate.vectors.push_back(f);
    }
    iv.lower = std::min(iv.lower, iv.upper);
    return iv;
}

}  // namespace gammafactor
