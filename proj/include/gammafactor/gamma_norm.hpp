#pragma once

// The tensor norm gamma on X_1 (x) ... (x) X_n (x) Y: upper bounds from
// dominated representations u = sum (p_i - q_i) (x) y_i, lower bounds from
// elementary functionals phi (x) y* and from operators with a known Gamma
// upper bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
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

struct GammaTerm {
    DecomposablePoint p;
    DecomposablePoint q;
    Vector y;
};

struct GammaRepresentation {
    std::vector<SpaceSpec> spaces;  // X_1 .. X_n
    Codomain codomain;              // Y
    std::vector<GammaTerm> terms;
    std::vector<PointPair> dominators;

    // Pads the shorter of terms/dominators with zero entries.
    void pad() {
        const DecomposablePoint zero = DecomposablePoint::zero(spaces);
        while (dominators.size() < terms.size()) dominators.push_back(PointPair{zero, zero});
        while (terms.size() < dominators.size()) terms.push_back(GammaTerm{zero, zero, Vector(codomain.dim(), 0.0)});
    }

    void validate() const {
        if (terms.empty()) throw InputError("GammaRepresentation: no terms");
        if (terms.size() != dominators.size()) throw InputError("GammaRepresentation: term and dominator counts differ");
        for (std::size_t i = 0; i < terms.size(); ++i) {
            check_point(spaces, terms[i].p);
            check_point(spaces, terms[i].q);
            if (terms[i].y.size() != codomain.dim())
                throw InputError("GammaRepresentation: y of term " + std::to_string(i) + " has wrong length");
            if (!all_finite(terms[i].y)) throw InputError("GammaRepresentation: non-finite y");
            check_point(spaces, dominators[i].first);
            check_point(spaces, dominators[i].second);
        }
    }

    KwapienWitness witness() const {
        KwapienWitness w;
        w.spaces = spaces;
        for (const auto& t : terms) w.xz.push_back(PointPair{t.p, t.q});
        w.st = dominators;
        return w;
    }

    std::vector<SpaceSpec> full_spaces() const {
        std::vector<SpaceSpec> s = spaces;
        s.push_back(codomain.space());
        return s;
    }
};

// Coefficients of sum (p_i - q_i) (x) y_i.
inline DenseTensor assemble(const GammaRepresentation& rep) {
    rep.validate();
    DenseTensor u = DenseTensor::zeros(rep.full_spaces());
    for (const auto& t : rep.terms) {
        const DenseTensor d = to_dense(rep.spaces, t.p) - to_dense(rep.spaces, t.q);
        const std::size_t m = t.y.size();
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (d[i] == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) u[i * m + j] += d[i] * t.y[j];
        }
    }
    return u;
}

struct GammaBound {
    double value = 0.0;
    std::string route;
    std::vector<std::pair<std::string, double>> numbers;
    std::vector<Provenance> certificates;
};

// (sum pi_ub(a_i - b_i)^2)^{1/2} (sum ||y_i||^2)^{1/2}. When every term is
// dominated by its own pair, each term may be rescaled independently
// ((lambda p, lambda q, y / lambda) against (lambda a, lambda b)); the best
// rescaling turns the product of block norms into sum_i A_i B_i.
inline GammaBound gamma_upper(const GammaRepresentation& rep, int budget = 4, const Tolerances& tol = default_tolerances()) {
    rep.validate();
    (void)budget;
    const DominationResult dom = check_domination(rep.witness(), tol.psd, tol);
    if (!dom.accepted) throw RefusedError("gamma_upper: representation is not dominated");
    const std::size_t m = rep.terms.size();
    std::vector<double> a(m), b(m);
    double sa = 0.0, sb = 0.0;
    bool termwise = true;
    for (std::size_t i = 0; i < m; ++i) {
        a[i] = pi_distance_upper(rep.spaces, rep.dominators[i].first, rep.dominators[i].second, tol).value;
        b[i] = codomain_norm_upper(rep.codomain, rep.terms[i].y, tol);
        sa += a[i] * a[i];
        sb += b[i] * b[i];
        if (termwise) {
            KwapienWitness single;
            single.spaces = rep.spaces;
            single.xz = {PointPair{rep.terms[i].p, rep.terms[i].q}};
            single.st = {rep.dominators[i]};
            termwise = check_domination(single, tol.psd, tol).accepted;
        }
    }
    GammaBound g;
    g.value = std::sqrt(sa) * std::sqrt(sb);
    g.route = "block-product";
    g.numbers = {{"pi_block_norm", std::sqrt(sa)}, {"y_block_norm", std::sqrt(sb)}, {"min_eig", dom.min_eig}};
    if (termwise) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += a[i] * b[i];
        if (s < g.value) {
            g.value = s;
            g.route = "termwise-rebalanced";
            g.numbers.push_back({"rebalanced_sum", s});
        }
    }
    return g;
}

// Greedy splitter: decompose u in X_1 (x) ... (x) X_n (x) Y into rank-one
// terms x^1 .. x^n y, each an equality-dominated term (p, 0, y). The
// decomposition residual is appended through its fiber decomposition.
inline GammaRepresentation greedy_representation(const DenseTensor& u, const std::vector<SpaceSpec>& spaces,
                                                 const Codomain& codomain, int budget, std::uint64_t seed = kDefaultSeed,
                                                 const Tolerances& tol = default_tolerances()) {
    std::vector<SpaceSpec> full = spaces;
    full.push_back(codomain.space());
    if (u.spaces().size() != full.size() || u.shape() != DenseTensor::zeros(full).shape())
        throw InputError("greedy_representation: tensor shape does not match X (x) Y");
    const DenseTensor uu = u.with_spaces(full);
    GammaRepresentation rep;
    rep.spaces = spaces;
    rep.codomain = codomain;
    const std::size_t n = spaces.size();
    auto push = [&](const DecomposablePoint& t) {
        GammaTerm term;
        for (std::size_t k = 0; k < n; ++k) term.p.factors.push_back(t.factors[k]);
        term.q = DecomposablePoint::zero(spaces);
        term.y = t.factors[n];
        rep.dominators.push_back(PointPair{term.p, term.q});
        rep.terms.push_back(std::move(term));
    };
    if (!uu.is_zero()) {
        const Bound b = projective_decomposition_upper(uu, budget, seed, {}, true, tol);
        // Decomposition factors were flattened term by term into the certificate.
        const std::size_t per = n + 1;
        Decomposition d;
        for (std::size_t i = 0; i + per <= b.cert.vectors.size(); i += per) {
            DecomposablePoint t;
            for (std::size_t k = 0; k < per; ++k) t.factors.push_back(b.cert.vectors[i + k]);
            d.push_back(std::move(t));
        }
        const DenseTensor r = uu - assemble_decomposition(full, d);
        for (auto& t : d) push(t);
        if (!r.is_zero()) {
            std::size_t best = 0;
            double cost = std::numeric_limits<double>::infinity();
            for (std::size_t m = 0; m < r.order(); ++m) {
                const double c = detail::fiber_cost(r, m);
                if (c < cost) {
                    cost = c;
                    best = m;
                }
            }
            for (auto& t : detail::fiber_decompose(r, best)) push(t);
        }
    }
    if (rep.terms.empty()) {
        const DecomposablePoint zero = DecomposablePoint::zero(spaces);
        rep.terms.push_back(GammaTerm{zero, zero, Vector(codomain.dim(), 0.0)});
        rep.dominators.push_back(PointPair{zero, zero});
    }
    return rep;
}

namespace detail {

// Upper bound on the dual norm of y* in Y*.
inline double dual_codomain_norm_upper(const Codomain& y, const Vector& v, const Tolerances& tol) {
    if (!y.is_tensor()) return norm(dual_space(y.space()), v);
    const DenseTensor u(dual_spaces(y.factors()), v);
    switch (y.cross_norm()) {
        case CrossNorm::l2: return u.frobenius();
        case CrossNorm::pi: return injective_norm_upper(u, tol).value;  // (pi)^* = eps on duals
        case CrossNorm::eps: return u.order() == 1 ? norm(u.spaces()[0], v) : residual_bound(u);  // (eps)^* = pi on duals
    }
    return std::numeric_limits<double>::infinity();
}

// Contract the Y slot of u with y*.
inline DenseTensor contract_codomain(const DenseTensor& u, const std::vector<SpaceSpec>& spaces, const Vector& ystar) {
    std::vector<SpaceSpec> full = spaces;
    full.push_back(SpaceSpec::euclidean(ystar.size()));
    return u.with_spaces(full).contract(spaces.size(), ystar);
}

// Quick certified pi lower bound of w from closed-form dual candidates.
inline double quick_pi_lower(const DenseTensor& w, const Tolerances& tol) {
    if (w.is_zero()) return 0.0;
    if (w.order() == 1) return norm(w.spaces()[0], w.coeffs());
    const std::vector<SpaceSpec> duals = dual_spaces(w.spaces());
    auto ratio = [&](const Vector& phi) {
        const double e = injective_norm_upper(DenseTensor(duals, phi), tol).value;
        return e > 0.0 ? std::abs(dot(phi, w.coeffs())) / e : 0.0;
    };
    double best = ratio(w.coeffs());
    Vector signs(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) signs[i] = w[i] > 0 ? 1.0 : (w[i] < 0 ? -1.0 : 0.0);
    best = std::max(best, ratio(signs));
    return best;
}

}  // namespace detail

// sup over (phi, y*) of |<phi (x) y*, u>| / (||phi||_ub ||y*||); for a fixed
// y* the sup over phi is a pi lower bound of the contraction u(., y*).
inline GammaBound gamma_lower_elementary(const DenseTensor& u, const std::vector<SpaceSpec>& spaces,
                                         const Codomain& codomain, int budget, std::uint64_t seed = kDefaultSeed,
                                         const Tolerances& tol = default_tolerances()) {
    if (budget <= 0) throw InputError("gamma_lower_elementary: budget must be positive");
    GammaBound g;
    g.route = "elementary-functional";
    if (u.is_zero()) return g;
    const std::size_t m = codomain.dim();
    if (u.size() % m != 0 || u.size() / m != DenseTensor::zeros(spaces).size())
        throw InputError("gamma_lower_elementary: tensor shape does not match X (x) Y");

    auto objective = [&](const Vector& ystar) {
        const double ny = detail::dual_codomain_norm_upper(codomain, ystar, tol);
        if (!(ny > 0.0)) return 0.0;
        return detail::quick_pi_lower(detail::contract_codomain(u, spaces, ystar), tol) / ny;
    };

    // Candidates: basis vectors and the leading singular vectors of the Y unfolding.
    std::vector<Vector> cands;
    for (std::size_t j = 0; j < m; ++j) {
        Vector e(m, 0.0);
        e[j] = 1.0;
        cands.push_back(std::move(e));
    }
    std::vector<SpaceSpec> full = spaces;
    full.push_back(SpaceSpec::euclidean(m));
    const SvdResult s = svd(u.with_spaces(full).unfold(spaces.size()), tol);
    for (std::size_t k = 0; k < std::min<std::size_t>(s.sigma.size(), 3); ++k) cands.push_back(s.u.column(k));

    MultistartOptions opts;
    opts.restarts = std::max(0, std::min(budget, 8) - 1);
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < cands.size(); ++i) scored.emplace_back(objective(cands[i]), i);
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; i < std::min<std::size_t>(2, scored.size()); ++i) opts.initial.push_back({cands[scored[i].second]});
    Tolerances local = tol;
    local.local_iterations = std::min(tol.local_iterations, 50);
    const std::vector<SearchBlock> blocks{SearchBlock{SpaceSpec::euclidean(m), true}};
    const SearchResult r =
        multistart_maximize([&](const SearchPoint& x) { return objective(x[0]); }, blocks, opts, SeededRng(seed), local);
    Vector ystar = r.point[0];
    if (scored.front().first > objective(ystar)) ystar = cands[scored.front().second];

    // Final certified value with the full dual search on the contraction.
    const double ny = detail::dual_codomain_norm_upper(codomain, ystar, tol);
    const DenseTensor w = detail::contract_codomain(u, spaces, ystar);
    const double quick = detail::quick_pi_lower(w, tol);
    double pil = quick;
    Provenance cert{"quick-dual", "phi = u(., y*) or its sign pattern", {}, {}};
    if (w.order() >= 2) {
        const NormInterval iv = projective_norm_bounds(w, budget, seed, tol);
        if (iv.lower > pil) {
            pil = iv.lower;
            cert = iv.lower_certificate;
        }
    } else {
        pil = norm(w.spaces()[0], w.coeffs());
    }
    g.value = ny > 0.0 ? pil / ny : 0.0;
    g.numbers = {{"pi_lower_of_contraction", pil}, {"ystar_dual_norm_upper", ny}};
    cert.vectors.push_back(ystar);
    g.certificates.push_back(std::move(cert));
    return g;
}

// |phi_T(u)| / Gamma_ub(T) for T: X_1 x ... x X_n -> Y*, where phi_T(u) is
// the full coefficient pairing of T with u.
inline GammaBound gamma_lower_via_operator(const DenseTensor& u, const MultilinearOperator& t, double gamma_ub) {
    if (u.size() != t.coeffs().size()) throw InputError("gamma_lower_via_operator: tensor and operator shapes differ");
    const double pairing = dot(u.coeffs(), t.coeffs().coeffs());
    GammaBound g;
    g.route = "operator-duality";
    g.numbers = {{"pairing", pairing}, {"gamma_upper_of_T", gamma_ub}};
    if (pairing == 0.0) return g;
    if (!(gamma_ub > 0.0))
        throw InconsistencyError("gamma_lower_via_operator: nonzero pairing with an operator whose Gamma upper bound is 0");
    g.value = std::abs(pairing) / gamma_ub;
    return g;
}

struct GammaInterval {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    GammaBound lower_bound;
    GammaBound upper_bound;
    GammaRepresentation representation;
};

// Elementary lower bound and greedy-splitter upper bound.
inline GammaInterval gamma_bounds(const DenseTensor& u, const std::vector<SpaceSpec>& spaces, const Codomain& codomain,
                                  int budget, std::uint64_t seed = kDefaultSeed, const Tolerances& tol = default_tolerances()) {
    GammaInterval iv;
    iv.representation = greedy_representation(u, spaces, codomain, budget, seed, tol);
    iv.upper_bound = gamma_upper(iv.representation, budget, tol);
    iv.upper = iv.upper_bound.value;
    iv.lower_bound = gamma_lower_elementary(u, spaces, codomain, budget, seed, tol);
    iv.lower = iv.lower_bound.value;
    if (iv.lower > iv.upper + 1e-9 * (1.0 + iv.upper))
        throw InconsistencyError("gamma_bounds: lower " + short_number(iv.lower) + " exceeds upper " + short_number(iv.upper));
    return iv;
}

}  // namespace gammafactor
