#pragma once

// Multilinear operators T: X_1 x ... x X_n -> Y stored as coefficient arrays
// of shape (dim_1, ..., dim_n, dim_Y), with their Sigma-operator view and
// the constructions used by the ideal properties.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gammafactor/errors.hpp"
#include "gammafactor/numerics.hpp"
#include "gammafactor/spaces.hpp"
#include "gammafactor/tensor.hpp"
#include "gammafactor/tensor_norms.hpp"

namespace gammafactor {

enum class CrossNorm { pi, eps, l2 };

inline std::string to_string(CrossNorm c) {
    switch (c) {
        case CrossNorm::pi: return "pi";
        case CrossNorm::eps: return "eps";
        case CrossNorm::l2: return "l2";
    }
    return "?";
}

inline CrossNorm cross_norm_from_string(const std::string& s) {
    if (s == "pi") return CrossNorm::pi;
    if (s == "eps") return CrossNorm::eps;
    if (s == "l2") return CrossNorm::l2;
    throw InputError("unknown crossnorm tag '" + s + "' (expected pi, eps or l2)");
}

// Y is either an l_p space or a tensor product Z_1 (x) ... (x) Z_m carrying
// one of the crossnorms; the latter is stored by its coefficient space.
class Codomain {
public:
    Codomain() = default;
    Codomain(SpaceSpec s) : space_(s) {}  // NOLINT: implicit by design
    static Codomain tensor(std::vector<SpaceSpec> factors, CrossNorm norm) {
        if (factors.empty()) throw InputError("Codomain: tensor codomain needs at least one factor");
        if (norm == CrossNorm::l2)
            for (const auto& f : factors)
                if (!f.is_euclidean()) throw InputError("Codomain: l2 crossnorm needs Euclidean factors, got " + f.to_string());
        Codomain c;
        c.is_tensor_ = true;
        c.factors_ = std::move(factors);
        c.norm_ = norm;
        std::size_t d = 1;
        for (const auto& f : c.factors_) d *= f.dim;
        c.space_ = SpaceSpec::euclidean(d);
        return c;
    }

    bool is_tensor() const { return is_tensor_; }
    std::size_t dim() const { return space_.dim; }
    // The l_p space itself, or the Euclidean coefficient space of a tensor codomain.
    const SpaceSpec& space() const { return space_; }
    const std::vector<SpaceSpec>& factors() const { return factors_; }
    CrossNorm cross_norm() const { return norm_; }

    // Y is a Hilbert space in its given norm.
    bool is_hilbert() const {
        if (!is_tensor_) return space_.is_euclidean();
        if (norm_ == CrossNorm::l2) return true;
        // A single factor carries its own norm under every crossnorm.
        return factors_.size() == 1 && factors_[0].is_euclidean();
    }

    std::string to_string() const {
        if (!is_tensor_) return space_.to_string();
        std::string s;
        for (std::size_t k = 0; k < factors_.size(); ++k) s += (k ? " (x) " : "") + factors_[k].to_string();
        return s + " [" + gammafactor::to_string(norm_) + "]";
    }

    friend bool operator==(const Codomain& a, const Codomain& b) {
        if (a.is_tensor_ != b.is_tensor_) return false;
        if (!a.is_tensor_) return a.space_ == b.space_;
        return a.factors_ == b.factors_ && a.norm_ == b.norm_;
    }

private:
    bool is_tensor_ = false;
    SpaceSpec space_;
    std::vector<SpaceSpec> factors_;
    CrossNorm norm_ = CrossNorm::pi;
};

class MultilinearOperator {
public:
    MultilinearOperator() = default;

    // coeffs: row-major array of shape (dim_1, ..., dim_n, dim_Y).
    MultilinearOperator(std::vector<SpaceSpec> domain, Codomain codomain, Vector coeffs)
        : domain_(std::move(domain)), codomain_(std::move(codomain)) {
        if (domain_.empty()) throw InputError("MultilinearOperator: domain must have at least one factor");
        std::vector<SpaceSpec> all = domain_;
        all.push_back(codomain_.space());
        coeffs_ = DenseTensor(std::move(all), std::move(coeffs));
    }

    static MultilinearOperator zero(std::vector<SpaceSpec> domain, Codomain codomain) {
        std::size_t n = codomain.dim();
        for (const auto& s : domain) n *= s.dim;
        return MultilinearOperator(std::move(domain), std::move(codomain), Vector(n, 0.0));
    }

    std::size_t arity() const { return domain_.size(); }
    const std::vector<SpaceSpec>& domain() const { return domain_; }
    const Codomain& codomain() const { return codomain_; }
    const DenseTensor& coeffs() const { return coeffs_; }
    bool is_zero() const { return coeffs_.is_zero(); }
    bool is_linear() const { return domain_.size() == 1; }
    bool is_scalar() const { return !codomain_.is_tensor() && codomain_.dim() == 1; }

    // Factors T_i when this operator was built as (x) o (T_1, ..., T_n).
    const std::vector<MultilinearOperator>& product_factors() const { return product_factors_; }
    void set_product_factors(std::vector<MultilinearOperator> f) { product_factors_ = std::move(f); }

    // Coefficients with the domain slots relabelled X_i^* and Y kept: the
    // tensor whose injective norm is ||T|| for an l_p codomain.
    DenseTensor as_dual_tensor(const SpaceSpec& last) const {
        std::vector<SpaceSpec> s;
        for (const auto& d : domain_) s.push_back(dual_space(d));
        s.push_back(last);
        return coeffs_.with_spaces(std::move(s));
    }

private:
    std::vector<SpaceSpec> domain_;
    Codomain codomain_;
    DenseTensor coeffs_;
    std::vector<MultilinearOperator> product_factors_;
};

inline Vector evaluate(const MultilinearOperator& t, const std::vector<Vector>& xs) {
    if (xs.size() != t.arity())
        throw InputError("evaluate: " + std::to_string(xs.size()) + " arguments for arity " + std::to_string(t.arity()));
    for (std::size_t k = 0; k < xs.size(); ++k)
        if (xs[k].size() != t.domain()[k].dim)
            throw InputError("evaluate: argument " + std::to_string(k) + " has length " + std::to_string(xs[k].size()) +
                             ", expected " + std::to_string(t.domain()[k].dim));
    std::vector<Vector> vs = xs;
    vs.emplace_back();
    return t.coeffs().contract_all_but(t.arity(), vs);
}

inline Vector evaluate(const MultilinearOperator& t, const DecomposablePoint& p) { return evaluate(t, p.factors); }

// The linearization T~ applied to an arbitrary tensor u in X_1 (x) ... (x) X_n.
inline Vector sigma_apply(const MultilinearOperator& t, const DenseTensor& u) {
    if (u.spaces() != t.domain()) throw InputError("sigma_apply: tensor factor spaces differ from the operator domain");
    const std::size_t m = t.codomain().dim();
    Vector y(m, 0.0);
    const Vector& c = t.coeffs().coeffs();
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double w = u[i];
        if (w == 0.0) continue;
        for (std::size_t j = 0; j < m; ++j) y[j] += w * c[i * m + j];
    }
    return y;
}

// Norm of a codomain vector; two-sided when Y is a tensor product.
inline NormInterval codomain_norm_bounds(const Codomain& y, const Vector& v, int budget = 4,
                                         std::uint64_t seed = kDefaultSeed, const Tolerances& tol = default_tolerances()) {
    if (v.size() != y.dim()) throw InputError("codomain_norm_bounds: length mismatch for " + y.to_string());
    if (!y.is_tensor()) return exact_interval(norm(y.space(), v), Provenance{"norm", y.space().to_string(), {}, {}});
    const DenseTensor u(y.factors(), v);
    switch (y.cross_norm()) {
        case CrossNorm::l2: return exact_interval(u.frobenius(), Provenance{"frobenius", "Hilbert crossnorm", {}, {}});
        case CrossNorm::eps: return injective_norm_bounds(u, budget, seed, tol);
        case CrossNorm::pi: return projective_norm_bounds(u, budget, seed, tol);
    }
    throw InputError("codomain_norm_bounds: unknown crossnorm");
}

// Certified upper bound only (no search); used inside loops.
inline double codomain_norm_upper(const Codomain& y, const Vector& v, const Tolerances& tol = default_tolerances()) {
    if (!y.is_tensor()) return norm(y.space(), v);
    const DenseTensor u(y.factors(), v);
    switch (y.cross_norm()) {
        case CrossNorm::l2: return u.frobenius();
        case CrossNorm::eps: return injective_norm_upper(u, tol).value;
        case CrossNorm::pi: {
            double best = 0.0;
            for (double x : v) best += std::abs(x);
            if (u.order() == 1) return std::min(best, norm(u.spaces()[0], v));
            return std::min(best, detail::residual_bound(u));
        }
    }
    return std::numeric_limits<double>::infinity();
}

// Certified lower bound only (cheap); used for witness numerators.
inline double codomain_norm_lower(const Codomain& y, const Vector& v, int budget = 2,
                                  std::uint64_t seed = kDefaultSeed, const Tolerances& tol = default_tolerances()) {
    if (!y.is_tensor() || y.cross_norm() == CrossNorm::l2) return codomain_norm_upper(y, v, tol);
    return codomain_norm_bounds(y, v, budget, seed, tol).lower;
}

inline double hs_norm(const MultilinearOperator& t) {
    for (const auto& s : t.domain())
        if (!s.is_euclidean()) throw UnsupportedError("hs_norm: domain factor " + s.to_string() + " is not Euclidean");
    if (!t.codomain().is_hilbert()) throw UnsupportedError("hs_norm: codomain " + t.codomain().to_string() + " is not Euclidean");
    return t.coeffs().frobenius();
}

namespace detail {

inline NormInterval product_norm(const MultilinearOperator& t, int budget, std::uint64_t seed, const Tolerances& tol);

// T = sum_k phi_k y_k from an SVD of the (Y, domain) unfolding, so
// ||T|| <= sum_k ||phi_k|| ||y_k||_Y plus the entrywise l_1 of the residual.
inline Bound column_route_upper(const MultilinearOperator& t, const Tolerances& tol) {
    const std::size_t m = t.codomain().dim();
    const SvdResult s = svd(t.coeffs().unfold(t.arity()), tol);
    std::vector<SpaceSpec> duals;
    for (const auto& d : t.domain()) duals.push_back(dual_space(d));
    Vector resid = t.coeffs().coeffs();
    double total = 0.0;
    Provenance cert{"rank-one-columns", "sum of ||phi_k|| ||y_k|| plus l_1 residual", {}, {}};
    for (std::size_t k = 0; k < s.sigma.size(); ++k) {
        if (s.sigma[k] == 0.0) continue;
        Vector phi = s.v.column(k);
        for (double& x : phi) x *= s.sigma[k];
        const Vector yk = s.u.column(k);
        Bound b = injective_norm_upper(DenseTensor(duals, phi), tol);
        total += b.value * norm(t.codomain().space(), yk);
        cert.parts.push_back(std::move(b.cert));
        for (std::size_t a = 0; a < phi.size(); ++a)
            for (std::size_t j = 0; j < m; ++j) resid[a * m + j] -= phi[a] * yk[j];
    }
    double r = 0.0;
    for (double x : resid) r += std::abs(x);
    return Bound{total + r, std::move(cert), false};
}

}  // namespace detail

// ||T|| = sup ||T(x^1, ..., x^n)|| over the unit balls.
//
// For an l_p codomain (and for the eps and l2 crossnorms) this is the
// injective norm of the coefficients in X_1^* (x) ... (x) X_n^* (x) Y, so
// every eps route applies. For a pi-tagged codomain the value is squeezed
// between the eps version (below) and the l_1 or Frobenius comparisons
// (above), unless the operator is a product of linear maps, where
// ||T|| = prod ||T_i|| because pi is a crossnorm.
inline NormInterval operator_norm_bounds(const MultilinearOperator& t, int budget, std::uint64_t seed = kDefaultSeed,
                                         const Tolerances& tol = default_tolerances()) {
    if (budget <= 0) throw InputError("operator_norm_bounds: budget must be positive");
    if (t.is_zero()) return exact_interval(0.0, Provenance{"zero", "zero operator", {}, {}});
    const Codomain& y = t.codomain();
    if (!y.is_tensor()) {
        NormInterval iv = injective_norm_bounds(t.as_dual_tensor(y.space()), budget, seed, tol);
        if (y.dim() > 1 && iv.upper > iv.lower) {
            Bound cols = detail::column_route_upper(t, tol);
            if (cols.value < iv.upper) {
                iv.upper = cols.value;
                iv.upper_certificate = std::move(cols.cert);
            }
        }
        return iv;
    }

    if (!t.product_factors().empty() && y.cross_norm() != CrossNorm::l2) return detail::product_norm(t, budget, seed, tol);

    // Coefficients over X_1^* .. X_n^* Z_1 .. Z_m.
    std::vector<SpaceSpec> spaces;
    for (const auto& d : t.domain()) spaces.push_back(dual_space(d));
    if (y.cross_norm() == CrossNorm::l2) {
        spaces.push_back(y.space());
        return injective_norm_bounds(t.coeffs().with_spaces(spaces), budget, seed, tol);
    }
    for (const auto& f : y.factors()) spaces.push_back(f);
    const DenseTensor expanded(spaces, t.coeffs().coeffs());
    NormInterval eps = injective_norm_bounds(expanded, budget, seed, tol);
    if (y.cross_norm() == CrossNorm::eps) return eps;

    // pi: eps <= pi <= l_1 (entrywise) and, with Euclidean factors,
    // pi <= sqrt(min flattening size) * Frobenius.
    std::vector<SpaceSpec> s1(t.domain().size());
    for (std::size_t k = 0; k < t.domain().size(); ++k) s1[k] = dual_space(t.domain()[k]);
    std::vector<SpaceSpec> s2 = s1;
    s1.push_back(SpaceSpec::l1(y.dim()));
    s2.push_back(SpaceSpec::euclidean(y.dim()));
    NormInterval iv;
    iv.lower = eps.lower;
    iv.lower_certificate = eps.lower_certificate;
    const Bound via_l1 = injective_norm_upper(t.coeffs().with_spaces(s1), tol);
    iv.upper = via_l1.value;
    iv.upper_certificate = Provenance{"pi-le-l1", "codomain compared with l_1 of coefficients", {}, {via_l1.cert}};
    const bool euclid = std::all_of(y.factors().begin(), y.factors().end(), [](const SpaceSpec& f) { return f.is_euclidean(); });
    if (euclid) {
        std::size_t rank = y.dim();
        std::size_t rows = 1;
        for (std::size_t k = 0; k + 1 < y.factors().size(); ++k) {
            rows *= y.factors()[k].dim;
            rank = std::min(rank, std::min(rows, y.dim() / rows));
        }
        if (y.factors().size() == 1) rank = 1;
        const Bound via_f = injective_norm_upper(t.coeffs().with_spaces(s2), tol);
        const double c = std::sqrt(static_cast<double>(rank)) * via_f.value;
        if (c < iv.upper) {
            iv.upper = c;
            iv.upper_certificate = Provenance{"pi-le-sqrt-rank-frobenius", "rank cap " + std::to_string(rank), {}, {via_f.cert}};
        }
    }
    iv.lower = std::min(iv.lower, iv.upper);
    return iv;
}

namespace detail {

inline NormInterval product_norm(const MultilinearOperator& t, int budget, std::uint64_t seed, const Tolerances& tol) {
    NormInterval iv;
    iv.lower = 1.0;
    iv.upper = 1.0;
    iv.lower_certificate = Provenance{"product-of-linear", "prod ||T_i||", {}, {}};
    iv.upper_certificate = iv.lower_certificate;
    for (std::size_t k = 0; k < t.product_factors().size(); ++k) {
        const NormInterval f = operator_norm_bounds(t.product_factors()[k], budget, SeededRng::mix(seed + k), tol);
        iv.lower *= f.lower;
        iv.upper *= f.upper;
        iv.lower_certificate.parts.push_back(f.lower_certificate);
        iv.upper_certificate.parts.push_back(f.upper_certificate);
    }
    return iv;
}

}  // namespace detail

// Fixes the slots in `fixed` and returns the operator in the remaining ones.
inline MultilinearOperator fix_coordinates(const MultilinearOperator& t, const std::map<std::size_t, Vector>& fixed) {
    if (fixed.size() >= t.arity()) throw InputError("fix_coordinates: all coordinates fixed; use evaluate instead");
    for (const auto& [k, v] : fixed) {
        if (k >= t.arity()) throw InputError("fix_coordinates: slot " + std::to_string(k) + " out of range");
        if (v.size() != t.domain()[k].dim)
            throw InputError("fix_coordinates: vector for slot " + std::to_string(k) + " has wrong length");
        if (!all_finite(v)) throw InputError("fix_coordinates: non-finite vector");
    }
    DenseTensor c = t.coeffs();
    // Contract from the highest slot down so lower indices stay valid.
    for (auto it = fixed.rbegin(); it != fixed.rend(); ++it) c = c.contract(it->first, it->second);
    std::vector<SpaceSpec> dom;
    for (std::size_t k = 0; k < t.arity(); ++k)
        if (!fixed.count(k)) dom.push_back(t.domain()[k]);
    return MultilinearOperator(std::move(dom), t.codomain(), c.coeffs());
}

// phi(x^1, ..., x^n) * y for a scalar-valued phi.
inline MultilinearOperator rank_one(const MultilinearOperator& phi, const Codomain& y_space, const Vector& y) {
    if (!phi.is_scalar()) throw InputError("rank_one: phi must be scalar-valued");
    if (y.size() != y_space.dim()) throw InputError("rank_one: y has wrong length for " + y_space.to_string());
    if (!all_finite(y)) throw InputError("rank_one: non-finite y");
    const Vector& f = phi.coeffs().coeffs();
    Vector c;
    c.reserve(f.size() * y.size());
    for (double a : f)
        for (double b : y) c.push_back(a * b);
    return MultilinearOperator(phi.domain(), y_space, std::move(c));
}

// A linear map X -> Y from its matrix (rows index Y, columns index X).
inline MultilinearOperator linear_from_matrix(const Matrix& m, const SpaceSpec& x, const Codomain& y) {
    if (m.cols() != x.dim || m.rows() != y.dim()) throw InputError("linear_from_matrix: matrix shape does not match spaces");
    return MultilinearOperator({x}, y, m.transposed().data());
}

// Matrix of a linear operator (rows index Y).
inline Matrix matrix_of(const MultilinearOperator& t) {
    if (!t.is_linear()) throw InputError("matrix_of: operator is not linear");
    return t.coeffs().flatten({true, false}).transposed();
}

// (x^1, ..., x^n) -> T_1 x^1 (x) ... (x) T_n x^n into Y_1 (x) ... (x) Y_n.
inline MultilinearOperator product_of_linear(const std::vector<MultilinearOperator>& ts, CrossNorm tag = CrossNorm::pi) {
    if (ts.empty()) throw InputError("product_of_linear: no factors");
    std::vector<SpaceSpec> dom, cod;
    for (const auto& t : ts) {
        if (!t.is_linear()) throw InputError("product_of_linear: every factor must be linear");
        if (t.codomain().is_tensor()) throw InputError("product_of_linear: factor codomains must be l_p spaces");
        dom.push_back(t.domain()[0]);
        cod.push_back(t.codomain().space());
    }
    const Codomain y = Codomain::tensor(cod, tag);
    // coeff[i_1..i_n, (j_1..j_n)] = prod_k T_k[i_k, j_k]
    std::vector<SpaceSpec> interleaved;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        interleaved.push_back(dom[k]);
        interleaved.push_back(cod[k]);
    }
    MultilinearOperator out = MultilinearOperator::zero(dom, y);
    DenseTensor c = out.coeffs();
    const std::size_t n = ts.size();
    std::vector<std::size_t> cdims(n);
    for (std::size_t k = 0; k < n; ++k) cdims[k] = cod[k].dim;
    for (std::size_t flat = 0; flat < c.size(); ++flat) {
        const auto idx = c.unravel(flat);
        std::size_t j = idx[n];
        double v = 1.0;
        for (std::size_t k = n; k-- > 0;) {
            const std::size_t jk = j % cdims[k];
            j /= cdims[k];
            v *= ts[k].coeffs().at({idx[k], jk});
            if (v == 0.0) break;
        }
        c[flat] = v;
    }
    out = MultilinearOperator(dom, y, c.coeffs());
    out.set_product_factors(ts);
    return out;
}

// z -> T(R_1 z^1, ..., R_n z^n) with linear R_i: Z_i -> X_i.
inline MultilinearOperator precompose_linear(const MultilinearOperator& t, const std::vector<MultilinearOperator>& rs) {
    if (rs.size() != t.arity()) throw InputError("precompose_linear: need one linear map per slot");
    DenseTensor c = t.coeffs();
    std::vector<SpaceSpec> dom;
    for (std::size_t k = 0; k < rs.size(); ++k) {
        const auto& r = rs[k];
        if (!r.is_linear() || r.codomain().is_tensor() || r.codomain().dim() != t.domain()[k].dim)
            throw InputError("precompose_linear: map " + std::to_string(k) + " does not land in " + t.domain()[k].to_string());
        dom.push_back(r.domain()[0]);
    }
    // Replace slot k by sum_i R_k[z, i] C[.., i, ..].
    for (std::size_t k = 0; k < rs.size(); ++k) {
        const Matrix rk = matrix_of(rs[k]);  // dim X_k x dim Z_k
        std::vector<SpaceSpec> sp = c.spaces();
        sp[k] = dom[k];
        DenseTensor next = DenseTensor::zeros(sp);
        for (std::size_t flat = 0; flat < next.size(); ++flat) {
            auto idx = next.unravel(flat);
            const std::size_t z = idx[k];
            double s = 0.0;
            for (std::size_t i = 0; i < rk.rows(); ++i) {
                idx[k] = i;
                s += rk(i, z) * c.at(idx);
            }
            next[flat] = s;
        }
        c = std::move(next);
    }
    return MultilinearOperator(std::move(dom), t.codomain(), c.coeffs());
}

// S o T with linear S: Y -> W.
inline MultilinearOperator postcompose_linear(const MultilinearOperator& s, const MultilinearOperator& t) {
    if (!s.is_linear() || s.domain()[0].dim != t.codomain().dim())
        throw InputError("postcompose_linear: S does not act on " + t.codomain().to_string());
    const Matrix sm = matrix_of(s);  // dim W x dim Y
    const std::size_t m = t.codomain().dim(), w = s.codomain().dim();
    const std::size_t outer = t.coeffs().size() / m;
    Vector c(outer * w, 0.0);
    const Vector& tc = t.coeffs().coeffs();
    for (std::size_t a = 0; a < outer; ++a)
        for (std::size_t j = 0; j < w; ++j) {
            double v = 0.0;
            for (std::size_t i = 0; i < m; ++i) v += sm(j, i) * tc[a * m + i];
            c[a * w + j] = v;
        }
    return MultilinearOperator(t.domain(), s.codomain(), std::move(c));
}

// <x, y> on l_2^d x l_2^d.
inline MultilinearOperator inner_product_operator(std::size_t d) {
    Vector c(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) c[i * d + i] = 1.0;
    return MultilinearOperator({SpaceSpec::euclidean(d), SpaceSpec::euclidean(d)}, SpaceSpec::scalar(), std::move(c));
}

inline MultilinearOperator identity_operator(const SpaceSpec& x, const std::optional<SpaceSpec>& y = std::nullopt) {
    return linear_from_matrix(Matrix::identity(x.dim), x, y.value_or(x));
}

// The canonical map (x^1, ..., x^n) -> x^1 (x) ... (x) x^n.
inline MultilinearOperator canonical_tensor_map(const std::vector<SpaceSpec>& spaces, CrossNorm tag = CrossNorm::pi) {
    std::vector<MultilinearOperator> ids;
    for (const auto& s : spaces) ids.push_back(identity_operator(s));
    return product_of_linear(ids, tag);
}

}  // namespace gammafactor
