#pragma once

// n-homogeneous polynomials P(x) = T_P(x, ..., x) with symmetric
// coefficients, the symmetric projective norm pi_{n,s}, and the polynomial
// version of the Kwapien certificate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gammafactor/certificates.hpp"
#include "gammafactor/errors.hpp"
#include "gammafactor/multistart.hpp"
#include "gammafactor/numerics.hpp"
#include "gammafactor/operators.hpp"
#include "gammafactor/tensor.hpp"
#include "gammafactor/tensor_norms.hpp"

namespace gammafactor {

namespace detail {

// Sorted multi-index of the first n entries: the orbit key.
inline std::vector<std::size_t> orbit_key(std::vector<std::size_t> idx, std::size_t n) {
    std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n));
    return idx;
}

// Symmetrizes the first n slots of a coefficient array whose first n slots
// share one dimension. Orbits whose entries already agree keep them exactly.
inline DenseTensor symmetrize_slots(const DenseTensor& c, std::size_t n) {
    std::map<std::vector<std::size_t>, std::vector<std::size_t>> orbits;
    for (std::size_t flat = 0; flat < c.size(); ++flat) orbits[orbit_key(c.unravel(flat), n)].push_back(flat);
    DenseTensor out = c;
    for (const auto& [key, members] : orbits) {
        const double first = c[members.front()];
        bool equal = true;
        double sum = 0.0;
        for (auto f : members) {
            equal = equal && c[f] == first;
            sum += c[f];
        }
        const double v = equal ? first : sum / static_cast<double>(members.size());
        for (auto f : members) out[f] = v;
    }
    return out;
}

inline double asymmetry(const DenseTensor& c, std::size_t n) {
    const DenseTensor s = symmetrize_slots(c, n);
    double m = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) m = std::max(m, std::abs(c[i] - s[i]));
    return m;
}

}  // namespace detail

class HomogeneousPolynomial {
public:
    HomogeneousPolynomial() = default;

    // coeffs: shape (dim_X, ..., dim_X, dim_Y) with `degree` domain slots;
    // symmetrized on construction.
    HomogeneousPolynomial(std::size_t degree, SpaceSpec space, SpaceSpec codomain, Vector coeffs)
        : degree_(degree), space_(space), codomain_(codomain) {
        if (degree_ == 0) throw InputError("HomogeneousPolynomial: degree must be >= 1");
        std::vector<SpaceSpec> all(degree_, space_);
        all.push_back(codomain_);
        coeffs_ = detail::symmetrize_slots(DenseTensor(std::move(all), std::move(coeffs)), degree_);
    }

    std::size_t degree() const { return degree_; }
    const SpaceSpec& space() const { return space_; }
    const SpaceSpec& codomain() const { return codomain_; }
    const DenseTensor& coeffs() const { return coeffs_; }
    bool is_zero() const { return coeffs_.is_zero(); }

    friend bool operator==(const HomogeneousPolynomial& a, const HomogeneousPolynomial& b) {
        return a.degree_ == b.degree_ && a.space_ == b.space_ && a.codomain_ == b.codomain_ &&
               a.coeffs_.coeffs() == b.coeffs_.coeffs();
    }

private:
    std::size_t degree_ = 1;
    SpaceSpec space_;
    SpaceSpec codomain_;
    DenseTensor coeffs_;
};

inline Vector evaluate_poly(const HomogeneousPolynomial& p, const Vector& x) {
    if (x.size() != p.space().dim) throw InputError("evaluate_poly: argument has wrong length");
    std::vector<Vector> vs(p.degree(), x);
    vs.emplace_back();
    return p.coeffs().contract_all_but(p.degree(), vs);
}

inline MultilinearOperator associated_operator(const HomogeneousPolynomial& p) {
    return MultilinearOperator(std::vector<SpaceSpec>(p.degree(), p.space()), p.codomain(), p.coeffs().coeffs());
}

inline HomogeneousPolynomial symmetrize(const MultilinearOperator& t) {
    for (const auto& s : t.domain())
        if (!(s == t.domain().front())) throw InputError("symmetrize: all domain factors must be the same space");
    if (t.codomain().is_tensor()) throw InputError("symmetrize: tensor codomains are not supported for polynomials");
    return HomogeneousPolynomial(t.arity(), t.domain().front(), t.codomain().space(), t.coeffs().coeffs());
}

// x^{(x) n}
inline DenseTensor symmetric_power(const SpaceSpec& s, const Vector& x, std::size_t n) {
    return to_dense(std::vector<SpaceSpec>(n, s), DecomposablePoint{std::vector<Vector>(n, x)});
}

// ---------------------------------------------------------------------------
// Symmetric projective norm
// ---------------------------------------------------------------------------

struct SymmetricTerm {
    double lambda = 0.0;
    Vector v;
};
using SymmetricDecomposition = std::vector<SymmetricTerm>;

namespace detail {

inline void check_symmetric(const DenseTensor& w) {
    const SpaceSpec& s = w.spaces().front();
    for (const auto& f : w.spaces())
        if (!(f == s)) throw InputError("symmetric tensor: all factors must be the same space");
    const double scale = std::max(1.0, w.frobenius());
    if (asymmetry(w, w.order()) > 1e-12 * scale) throw InputError("symmetric tensor: coefficients are not symmetric");
}

inline double sym_cost(const SpaceSpec& s, std::size_t n, const SymmetricDecomposition& d) {
    double c = 0.0;
    for (const auto& t : d) c += std::abs(t.lambda) * std::pow(norm(s, t.v), static_cast<double>(n));
    return c;
}

inline DenseTensor sym_assemble(const SpaceSpec& s, std::size_t n, const SymmetricDecomposition& d) {
    DenseTensor out = DenseTensor::zeros(std::vector<SpaceSpec>(n, s));
    for (const auto& t : d) {
        if (t.lambda == 0.0) continue;
        out += t.lambda * symmetric_power(s, t.v, n);
    }
    return out;
}

// Sym(x_1 (x) ... (x) x_n) = 1/(2^n n!) sum_eps (prod eps) (sum eps_i x_i)^{(x) n};
// eps and -eps give the same term, so eps_1 = +1 with doubled weight.
// Factors are first rescaled to a common Euclidean norm, which leaves
// Sym(x_1 (x) ... (x) x_n) unchanged.
inline SymmetricDecomposition polarize(DecomposablePoint t) {
    const std::size_t n = t.order();
    SymmetricDecomposition out;
    double logsum = 0.0;
    for (const auto& f : t.factors) {
        const double nf = norm2(f);
        if (nf == 0.0) return out;
        logsum += std::log(nf);
    }
    const double target = std::exp(logsum / static_cast<double>(n));
    for (auto& f : t.factors) {
        const double nf = norm2(f);
        for (double& x : f) x *= target / nf;
    }
    double fact = 1.0;
    for (std::size_t k = 2; k <= n; ++k) fact *= static_cast<double>(k);
    const double w = 2.0 / (std::ldexp(1.0, static_cast<int>(n)) * fact);
    const std::size_t count = std::size_t{1} << (n - 1);
    for (std::size_t mask = 0; mask < count; ++mask) {
        double sign = 1.0;
        Vector v = t.factors[0];
        for (std::size_t k = 1; k < n; ++k) {
            const double e = (mask >> (k - 1)) & 1U ? -1.0 : 1.0;
            sign *= e;
            for (std::size_t i = 0; i < v.size(); ++i) v[i] += e * t.factors[k][i];
        }
        out.push_back(SymmetricTerm{sign * w, std::move(v)});
    }
    return out;
}

// A symmetric decomposition of a symmetric w from any plain decomposition.
inline SymmetricDecomposition polarize_all(const Decomposition& d) {
    SymmetricDecomposition out;
    for (const auto& t : d)
        for (auto& s : polarize(t)) out.push_back(std::move(s));
    return out;
}

// Symmetric power iteration for the best lambda v^{(x) n}.
inline SymmetricTerm best_symmetric_rank_one(const DenseTensor& r, SeededRng& rng, int restarts, const Tolerances& tol) {
    const std::size_t n = r.order();
    const std::size_t d = r.shape()[0];
    std::vector<SpaceSpec> eu(n, SpaceSpec::euclidean(d));
    const DenseTensor re = r.with_spaces(eu);
    std::vector<Vector> starts;
    starts.push_back(svd(re.unfold(0), tol).u.column(0));
    for (int i = 0; i < restarts; ++i) starts.push_back(rng.normal_vector(d));
    SymmetricTerm best;
    double best_abs = -1.0;
    for (auto v : starts) {
        double nv = norm2(v);
        if (nv == 0.0) continue;
        for (double& x : v) x /= nv;
        double lambda = 0.0;
        for (int it = 0; it < 200; ++it) {
            std::vector<Vector> vs(n, v);
            Vector g = re.contract_all_but(0, vs);
            lambda = dot(g, v);
            // Shifted iteration keeps convergence for either sign of lambda.
            const double shift = lambda < 0.0 ? -1.0 : 1.0;
            const double ng = norm2(g);
            if (ng == 0.0) break;
            Vector next = scaled(g, shift / ng);
            const double change = norm2(axpy(-1.0, v, next));
            v = std::move(next);
            if (change < 1e-13) break;
        }
        std::vector<Vector> vs(n, v);
        lambda = re.contract_all(vs);
        if (std::abs(lambda) > best_abs) {
            best_abs = std::abs(lambda);
            best = SymmetricTerm{lambda, v};
        }
    }
    return best;
}

// Weighted l_1 minimization over a dictionary of symmetric powers:
// min sum_k c_k |lambda_k| subject to sum_k lambda_k v_k^{(x) n} = w, by
// iteratively reweighted least squares.
inline SymmetricDecomposition basis_pursuit(const DenseTensor& w, const std::vector<Vector>& atoms, SymmetricDecomposition init,
                                            const Tolerances& tol, int iterations = 60) {
    const SpaceSpec s = w.spaces().front();
    const std::size_t n = w.order();
    const std::size_t k = atoms.size();
    if (k == 0) return init;
    std::vector<Vector> cols;
    std::vector<double> cost(k);
    for (std::size_t j = 0; j < k; ++j) {
        cols.push_back(symmetric_power(s, atoms[j], n).coeffs());
        cost[j] = std::pow(norm(s, atoms[j]), static_cast<double>(n));
    }
    std::vector<double> lambda(k, 0.0);
    for (std::size_t j = 0; j < std::min(k, init.size()); ++j) lambda[j] = init[j].lambda;
    const double scale = std::max(w.frobenius(), 1e-300);
    const std::size_t dim = w.size();
    SymmetricDecomposition best = init;
    double best_cost = sym_cost(s, n, init) + 0.0;
    for (int it = 0; it < iterations; ++it) {
        // weights omega_j^{-1} = |lambda_j| / c_j (floored)
        std::vector<double> winv(k);
        for (std::size_t j = 0; j < k; ++j)
            winv[j] = cost[j] > 0.0 ? std::max(std::abs(lambda[j]), 1e-10 * scale) / cost[j] : 0.0;
        SymmetricMatrix g(dim);
        for (std::size_t a = 0; a < dim; ++a)
            for (std::size_t b = a; b < dim; ++b) {
                double v = 0.0;
                for (std::size_t j = 0; j < k; ++j) v += cols[j][a] * winv[j] * cols[j][b];
                g.set(a, b, v);
            }
        const Matrix gi = psd_pinv(g, tol);
        const Vector mu = gi * std::span<const double>(w.coeffs());
        for (std::size_t j = 0; j < k; ++j) lambda[j] = winv[j] * dot(cols[j], mu);
        SymmetricDecomposition d;
        for (std::size_t j = 0; j < k; ++j)
            if (lambda[j] != 0.0) d.push_back(SymmetricTerm{lambda[j], atoms[j]});
        const DenseTensor r = w - sym_assemble(s, n, d);
        if (r.frobenius() > 1e-10 * scale) continue;  // infeasible iterate
        const double c = sym_cost(s, n, d);
        if (c < best_cost) {
            best_cost = c;
            best = std::move(d);
        }
    }
    return best;
}

// Levenberg-Marquardt fit of w by sum_k sigma_k v_k^{(x) n} at fixed rank,
// starting from `init`; sigma_k = sign(lambda_k) and |lambda_k| is absorbed
// into v_k. Returns the fitted terms (the residual is certified separately).
inline SymmetricDecomposition symmetric_fit(const DenseTensor& w, const SymmetricDecomposition& init, const Tolerances& tol,
                                            int iterations = 100) {
    const std::size_t n = w.order();
    const std::size_t d = w.shape()[0];
    const std::size_t r = init.size();
    const std::vector<SpaceSpec> eu(n, SpaceSpec::euclidean(d));
    if (r == 0) return init;
    std::vector<double> sigma(r);
    std::vector<Vector> v(r);
    for (std::size_t k = 0; k < r; ++k) {
        sigma[k] = init[k].lambda < 0.0 ? -1.0 : 1.0;
        const double a = std::pow(std::abs(init[k].lambda), 1.0 / static_cast<double>(n));
        v[k] = scaled(init[k].v, a);
        // Odd powers carry the sign themselves.
        if (n % 2 == 1 && sigma[k] < 0.0) {
            for (double& x : v[k]) x = -x;
            sigma[k] = 1.0;
        }
    }
    auto model = [&](const std::vector<Vector>& vs) {
        DenseTensor m = DenseTensor::zeros(eu);
        for (std::size_t k = 0; k < r; ++k) m += sigma[k] * to_dense(eu, DecomposablePoint{std::vector<Vector>(n, vs[k])});
        return m;
    };
    const DenseTensor we = w.with_spaces(eu);
    DenseTensor res = we - model(v);
    double err = res.frobenius();
    double mu = 1e-3 * std::max(1.0, we.frobenius());
    const std::size_t np = r * d;
    for (int it = 0; it < iterations && err > 1e-15 * we.frobenius(); ++it) {
        // Jacobian columns: d/dv_k[i] of sigma_k v_k^{(x) n}.
        std::vector<Vector> jac(np);
        for (std::size_t k = 0; k < r; ++k)
            for (std::size_t i = 0; i < d; ++i) {
                DenseTensor col = DenseTensor::zeros(eu);
                Vector e(d, 0.0);
                e[i] = 1.0;
                for (std::size_t slot = 0; slot < n; ++slot) {
                    std::vector<Vector> f(n, v[k]);
                    f[slot] = e;
                    col += to_dense(eu, DecomposablePoint{f});
                }
                col *= sigma[k];
                jac[k * d + i] = col.coeffs();
            }
        Vector g(np);
        for (std::size_t a = 0; a < np; ++a) g[a] = dot(jac[a], res.coeffs());
        Matrix jtj(np, np);
        for (std::size_t a = 0; a < np; ++a)
            for (std::size_t b = a; b < np; ++b) jtj(a, b) = jtj(b, a) = dot(jac[a], jac[b]);
        bool accepted = false;
        for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
            SymmetricMatrix h(jtj);
            for (std::size_t a = 0; a < np; ++a) h.add(a, a, mu);
            const Vector step = psd_pinv(h, tol) * std::span<const double>(g);
            std::vector<Vector> trial = v;
            for (std::size_t k = 0; k < r; ++k)
                for (std::size_t i = 0; i < d; ++i) trial[k][i] += step[k * d + i];
            DenseTensor tres = we - model(trial);
            const double terr = tres.frobenius();
            if (terr < err) {
                v = std::move(trial);
                res = std::move(tres);
                err = terr;
                mu = std::max(mu * 0.3, 1e-15);
                accepted = true;
            } else {
                mu *= 10.0;
            }
        }
        if (!accepted) break;
    }
    SymmetricDecomposition out;
    for (std::size_t k = 0; k < r; ++k) {
        const double nv = norm2(v[k]);
        if (nv == 0.0) continue;
        out.push_back(SymmetricTerm{sigma[k] * std::pow(nv, static_cast<double>(n)), scaled(v[k], 1.0 / nv)});
    }
    return out;
}

// Cost of a symmetric decomposition plus the polarized bound of the residual.
inline double certified_sym_cost(const DenseTensor& w, const SymmetricDecomposition& d) {
    const SpaceSpec s = w.spaces().front();
    const std::size_t n = w.order();
    DenseTensor r = w - sym_assemble(s, n, d);
    double extra = 0.0;
    if (!r.is_zero()) {
        r = symmetrize_slots(r, n);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t m = 0; m < n; ++m) best = std::min(best, sym_cost(s, n, polarize_all(fiber_decompose(r, m))));
        extra = best;
    }
    return sym_cost(s, n, d) + extra;
}

}  // namespace detail

// Certified upper bound on pi_{n,s}(w) for a symmetric w.
inline Bound sym_projective_upper(const DenseTensor& w, int budget, std::uint64_t seed = kDefaultSeed,
                                  const Tolerances& tol = default_tolerances()) {
    detail::check_symmetric(w);
    const std::size_t n = w.order();
    const SpaceSpec s = w.spaces().front();
    if (w.is_zero()) return Bound{0.0, Provenance{"zero", "zero tensor", {}, {}}, true};
    if (n == 1) return Bound{norm(s, w.coeffs()), Provenance{"norm", "order-1 tensor", {}, {}}, true};

    SymmetricDecomposition best;
    double best_cost = std::numeric_limits<double>::infinity();
    std::string route;
    auto consider = [&](SymmetricDecomposition d, const std::string& r) {
        const double c = detail::certified_sym_cost(w, d);
        if (c < best_cost) {
            best_cost = c;
            best = std::move(d);
            route = r;
        }
    };

    if (n == 2) {
        const EigenDecomposition e = jacobi_eigh(SymmetricMatrix(w.flatten({true, false})), tol);
        SymmetricDecomposition d;
        for (std::size_t k = 0; k < e.values.size(); ++k)
            if (e.values[k] != 0.0) d.push_back(SymmetricTerm{e.values[k], e.vectors.column(k)});
        consider(std::move(d), "eigendecomposition");
    }
    for (std::size_t m = 0; m < std::min<std::size_t>(n, 1); ++m)
        consider(detail::polarize_all(detail::fiber_decompose(w, m)), "polarized-fibers");

    // Greedy symmetric peeling with polarization completion.
    SeededRng rng(seed);
    DenseTensor residual = w;
    SymmetricDecomposition peeled;
    const std::size_t cap = s.dim + 2;
    const int restarts = std::max(1, std::min(budget, 4));
    std::vector<Vector> atoms;
    for (std::size_t rank = 1; rank <= cap; ++rank) {
        SymmetricTerm t = detail::best_symmetric_rank_one(residual, rng, restarts, tol);
        if (t.lambda == 0.0) break;
        residual -= t.lambda * symmetric_power(s, t.v, n);
        residual = detail::symmetrize_slots(residual, n);
        peeled.push_back(t);
        atoms.push_back(t.v);
        SymmetricDecomposition full = peeled;
        for (auto& extra : detail::polarize_all(detail::svd_decompose(residual, tol))) full.push_back(std::move(extra));
        consider(full, "symmetric-peel");
        const SymmetricDecomposition fitted = detail::symmetric_fit(w, peeled, tol);
        for (const auto& t : fitted) atoms.push_back(t.v);
        consider(fitted, "symmetric-fit");
        if (residual.frobenius() <= 1e-14 * w.frobenius()) break;
    }

    // l_1 refinement over the dictionary of peeled and polarization atoms.
    if (n >= 3 || !s.is_euclidean()) {
        SymmetricDecomposition init = best;
        std::vector<Vector> dict;
        for (const auto& t : init) dict.push_back(t.v);
        for (const auto& a : atoms) dict.push_back(a);
        for (std::size_t i = 0; i < s.dim; ++i) {
            Vector e(s.dim, 0.0);
            e[i] = 1.0;
            dict.push_back(e);
        }
        consider(detail::basis_pursuit(w, dict, init, tol), "symmetric-peel+l1");
    }

    Provenance cert{"symmetric-decomposition", route + ", " + std::to_string(best.size()) + " terms", {}, {}};
    // Each vector is (lambda, v_1, ..., v_d).
    for (const auto& t : best) {
        Vector row{t.lambda};
        row.insert(row.end(), t.v.begin(), t.v.end());
        cert.vectors.push_back(std::move(row));
    }
    return Bound{best_cost, std::move(cert), false};
}

// pi <= pi_{n,s}, so the plain projective lower bound is a valid lower side.
inline NormInterval sym_projective_bounds(const DenseTensor& w, int budget, std::uint64_t seed = kDefaultSeed,
                                          const Tolerances& tol = default_tolerances()) {
    if (budget <= 0) throw InputError("sym_projective_bounds: budget must be positive");
    detail::check_symmetric(w);
    if (w.is_zero()) return exact_interval(0.0, Provenance{"zero", "zero tensor", {}, {}});
    const Bound up = sym_projective_upper(w, budget, seed, tol);
    const NormInterval plain = projective_norm_bounds(w, budget, seed, tol);
    NormInterval iv;
    iv.lower = std::min(plain.lower, up.value);
    iv.upper = up.value;
    iv.lower_certificate = plain.lower_certificate;
    iv.upper_certificate = up.cert;
    return iv;
}

// ---------------------------------------------------------------------------
// Polynomial Kwapien certificate
// ---------------------------------------------------------------------------

struct VectorPair {
    Vector first;
    Vector second;
};

struct PolyWitness {
    std::vector<VectorPair> xz;
    std::vector<VectorPair> st;
};

namespace detail {

// Monomial-basis vectorization with weights sqrt(N_alpha), N_alpha the
// orbit size: <sym_vec(phi), sym_vec(u)> equals the full coefficient
// pairing for symmetric phi, u.
inline Vector sym_vec(const DenseTensor& u) {
    const std::size_t n = u.order();
    std::map<std::vector<std::size_t>, std::pair<double, std::size_t>> orbits;
    for (std::size_t flat = 0; flat < u.size(); ++flat) {
        auto key = orbit_key(u.unravel(flat), n);
        auto& e = orbits[key];
        if (e.second == 0) e.first = u[flat];
        e.second += 1;
    }
    Vector out;
    out.reserve(orbits.size());
    for (const auto& [key, e] : orbits) out.push_back(std::sqrt(static_cast<double>(e.second)) * e.first);
    return out;
}

inline Vector power_difference_vec(const SpaceSpec& s, std::size_t n, const VectorPair& pr) {
    return sym_vec(symmetric_power(s, pr.first, n) - symmetric_power(s, pr.second, n));
}

}  // namespace detail

// The scalar n-homogeneous polynomials are exactly the symmetric
// coefficient tensors, so domination is a PSD comparison of Grams of the
// sym-vectors of x^{(x) n} - z^{(x) n}.
inline DominationResult check_poly_domination(const SpaceSpec& s, std::size_t n, const PolyWitness& w,
                                              double psd_tol = default_tolerances().psd,
                                              const Tolerances& tol = default_tolerances()) {
    if (w.st.empty()) throw InputError("PolyWitness: st pairs must be nonempty");
    for (const auto* fam : {&w.xz, &w.st})
        for (const auto& pr : *fam)
            if (pr.first.size() != s.dim || pr.second.size() != s.dim || !all_finite(pr.first) || !all_finite(pr.second))
                throw InputError("PolyWitness: vector does not match " + s.to_string());
    std::vector<Vector> dx, ds;
    for (const auto& pr : w.xz) dx.push_back(detail::power_difference_vec(s, n, pr));
    for (const auto& pr : w.st) ds.push_back(detail::power_difference_vec(s, n, pr));
    const std::size_t dim = ds.front().size();
    SymmetricMatrix diff(dim);
    double trace = 0.0;
    for (const auto& d : ds) trace += dot(d, d);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i; j < dim; ++j) {
            double v = 0.0;
            for (const auto& d : ds) v += d[i] * d[j];
            for (const auto& d : dx) v -= d[i] * d[j];
            diff.set(i, j, v);
        }
    DominationResult r;
    r.min_eig = min_eigenvalue(diff, tol);
    r.threshold = psd_tol * (1.0 + trace);
    r.accepted = r.min_eig >= -r.threshold;
    return r;
}

inline GammaCertificate poly_lower_bound(const HomogeneousPolynomial& p, const PolyWitness& w, int budget = 2,
                                         const Tolerances& tol = default_tolerances()) {
    const std::size_t n = p.degree();
    const DominationResult dom = check_poly_domination(p.space(), n, w, tol.psd, tol);
    if (!dom.accepted) throw RefusedError("poly_lower_bound: domination rejected (min eigenvalue " + short_number(dom.min_eig) +
                                           " below -" + short_number(dom.threshold) + ")");
    double num = 0.0;
    for (const auto& pr : w.xz) {
        const double v = norm(p.codomain(), axpy(-1.0, evaluate_poly(p, pr.second), evaluate_poly(p, pr.first)));
        num += v * v;
    }
    double den = 0.0;
    for (const auto& pr : w.st) {
        const DenseTensor d = symmetric_power(p.space(), pr.first, n) - symmetric_power(p.space(), pr.second, n);
        const double v = sym_projective_upper(d, budget, kDefaultSeed, tol).value;
        den += v * v;
    }
    if (den <= 0.0) throw RefusedError("poly_lower_bound: zero denominator");
    GammaCertificate c;
    c.kind = CertificateKind::witness_lower;
    c.value = std::sqrt(num / den);
    c.detail = "polynomial Kwapien witness";
    c.numbers = {{"numerator_sq", num}, {"denominator_sq", den}, {"min_eig", dom.min_eig}, {"psd_threshold", dom.threshold}};
    return c;
}

struct PolyWitnessResult {
    PolyWitness witness;
    GammaCertificate cert;
};

namespace detail {

inline double poly_pair_ratio(const HomogeneousPolynomial& p, const VectorPair& pr, const Tolerances& tol) {
    const std::size_t n = p.degree();
    const SpaceSpec& s = p.space();
    double den;
    if (n == 2 && s.is_euclidean()) {
        const DenseTensor d = symmetric_power(s, pr.first, 2) - symmetric_power(s, pr.second, 2);
        den = nuclear_norm(d.flatten({true, false}), tol);
    } else {
        den = std::pow(norm(s, pr.first), static_cast<double>(n)) + std::pow(norm(s, pr.second), static_cast<double>(n));
    }
    if (!(den > 0.0)) return 0.0;
    return norm(p.codomain(), axpy(-1.0, evaluate_poly(p, pr.second), evaluate_poly(p, pr.first))) / den;
}

}  // namespace detail

// Equality witnesses: the norming point (x*, 0) and screened random pairs,
// polished locally.
inline PolyWitnessResult search_poly_witness(const HomogeneousPolynomial& p, std::uint64_t seed, int budget,
                                             const Tolerances& tol = default_tolerances()) {
    if (budget < 1) throw InputError("search_poly_witness: budget must be >= 1");
    const SpaceSpec& s = p.space();
    const SeededRng root(seed);
    std::vector<VectorPair> starts;

    // Norming point of P: maximize ||P(x)|| on the unit sphere.
    {
        const std::vector<SearchBlock> blocks{SearchBlock{s, true}};
        MultistartOptions opts;
        opts.restarts = std::max(1, std::min(budget, 16));
        Vector e(s.dim, 0.0);
        e[0] = 1.0;
        opts.initial.push_back({e});
        const SearchResult r = multistart_maximize(
            [&](const SearchPoint& x) { return norm(p.codomain(), evaluate_poly(p, x[0])); }, blocks, opts, root.derive(0), tol);
        starts.push_back(VectorPair{r.point[0], Vector(s.dim, 0.0)});
    }

    std::vector<std::pair<double, VectorPair>> screened;
    for (int k = 0; k < budget; ++k) {
        SeededRng rng = root.derive(static_cast<std::uint64_t>(k) + 1);
        VectorPair pr{scaled(detail::sphere_vector(s, rng), detail::log_uniform_scale(rng)),
                      scaled(detail::sphere_vector(s, rng), detail::log_uniform_scale(rng))};
        if (k % 2 == 1) pr.second.assign(s.dim, 0.0);
        screened.emplace_back(detail::poly_pair_ratio(p, pr, tol), std::move(pr));
    }
    std::stable_sort(screened.begin(), screened.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; i < std::min<std::size_t>(3, screened.size()); ++i) starts.push_back(screened[i].second);

    std::vector<PolyWitness> candidates;
    const std::vector<SearchBlock> blocks{SearchBlock{s, false}, SearchBlock{s, false}};
    Tolerances local = tol;
    local.local_iterations = std::min(tol.local_iterations, 100);
    for (const auto& st : starts) {
        candidates.push_back(PolyWitness{{st}, {st}});
        if (p.is_zero()) continue;
        const double m = std::max(norm(s, st.first), norm(s, st.second));
        MultistartOptions opts;
        opts.restarts = 0;
        opts.initial = {{scaled(st.first, m > 0 ? 1.0 / m : 1.0), scaled(st.second, m > 0 ? 1.0 / m : 1.0)}};
        const SearchResult r = multistart_maximize(
            [&](const SearchPoint& x) { return detail::poly_pair_ratio(p, VectorPair{x[0], x[1]}, tol); }, blocks, opts,
            SeededRng(1), local);
        const VectorPair best{r.point[0], r.point[1]};
        candidates.push_back(PolyWitness{{best}, {best}});
    }

    PolyWitnessResult out;
    double best = -1.0;
    for (const auto& c : candidates) {
        GammaCertificate cert;
        try {
            cert = poly_lower_bound(p, c, 2, tol);
        } catch (const RefusedError&) {
            continue;
        }
        if (cert.value > best) {
            best = cert.value;
            out = PolyWitnessResult{c, std::move(cert)};
        }
    }
    if (best < 0.0) throw SearchError("search_poly_witness: no candidate witness was accepted");
    return out;
}

struct PolyInterval {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    GammaCertificate lower_cert;
    CertifiedInterval operator_interval;
    PolyWitness witness;
};

// lower: best polynomial witness; upper: Gamma(T_P) (Gamma(P) <= Gamma(T_P)).
inline PolyInterval poly_gamma_interval(const HomogeneousPolynomial& p, std::uint64_t seed, int budget,
                                        const WitnessSearchOptions& options = {},
                                        const Tolerances& tol = default_tolerances()) {
    PolyInterval iv;
    PolyWitnessResult w = search_poly_witness(p, seed, budget, tol);
    iv.lower = w.cert.value;
    iv.lower_cert = std::move(w.cert);
    iv.witness = std::move(w.witness);
    iv.operator_interval = gamma_interval(associated_operator(p), seed, budget, options, tol);
    iv.upper = iv.operator_interval.upper;
    if (std::isfinite(iv.upper) && iv.lower > iv.upper + 1e-9 * (1.0 + iv.upper))
        throw InconsistencyError("poly_gamma_interval: lower exceeds upper");
    return iv;
}

// z -> S(P(R z)).
inline HomogeneousPolynomial compose_polynomial(const std::optional<MultilinearOperator>& s, const HomogeneousPolynomial& p,
                                                const std::optional<MultilinearOperator>& r) {
    MultilinearOperator t = associated_operator(p);
    if (r) t = precompose_linear(t, std::vector<MultilinearOperator>(p.degree(), *r));
    if (s) t = postcompose_linear(*s, t);
    return symmetrize(t);
}

}  // namespace gammafactor
