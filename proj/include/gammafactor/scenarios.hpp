#pragma once

// Demo presets: small self-checking scenarios. Each returns its results and
// a list of inequality checks; nothing here throws on a failed check.

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gammafactor/certificates.hpp"
#include "gammafactor/gamma_norm.hpp"
#include "gammafactor/json_io.hpp"
#include "gammafactor/polynomials.hpp"

namespace gammafactor::scenarios {

struct Check {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;  // pass iff lhs <= rhs; slack is already folded into rhs
    bool pass = false;
};

struct Outcome {
    Json results = Json::object();
    std::vector<Check> checks;

    void le(std::string name, double lhs, double rhs) {
        checks.push_back(Check{std::move(name), lhs, rhs, lhs <= rhs});
    }
    bool passed() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
    }
};

struct Context {
    std::uint64_t seed = kDefaultSeed;
    int budget = 64;
    Tolerances tol = default_tolerances();
    WitnessSearchOptions options{};
};

inline Vector random_vector(std::size_t n, SeededRng& rng) { return rng.normal_vector(n); }

inline MultilinearOperator random_operator(const std::vector<SpaceSpec>& domain, const Codomain& y, SeededRng& rng) {
    std::size_t n = y.dim();
    for (const auto& s : domain) n *= s.dim;
    return MultilinearOperator(domain, y, rng.normal_vector(n));
}

inline DecomposablePoint random_point(const std::vector<SpaceSpec>& spaces, SeededRng& rng) {
    DecomposablePoint p;
    for (const auto& s : spaces) p.factors.push_back(rng.normal_vector(s.dim));
    return p;
}

inline std::string case_name(const std::string& what, std::size_t k) { return what + "[" + std::to_string(k) + "]"; }

// T(x, y) = <x, y> on l_2^2.
inline Outcome inner_product(const Context& c) {
    Outcome o;
    const CertifiedInterval iv = gamma_interval(inner_product_operator(2), c.seed, c.budget, c.options, c.tol);
    o.results["gamma"] = io::certified_interval_json(iv);
    o.le("1 - 1e-6 <= Gamma lower", 1.0 - 1e-6, iv.lower);
    o.le("Gamma upper <= sqrt(2) + 1e-6", iv.upper, std::sqrt(2.0) + 1e-6);
    o.le("Gamma lower <= Gamma upper", iv.lower, iv.upper + 1e-6);
    return o;
}

// (x) : l_2^2 x ... x l_2^2 -> pi tensor product, n = 2, 3.
inline Outcome canonical_tensor(const Context& c) {
    Outcome o;
    for (std::size_t n = 2; n <= 3; ++n) {
        std::vector<SpaceSpec> spaces;
        for (std::size_t k = 0; k < n; ++k) spaces.push_back(SpaceSpec::euclidean(2));
        const CertifiedInterval iv = gamma_interval(canonical_tensor_map(spaces), c.seed, c.budget, c.options, c.tol);
        const std::string key = "n=" + std::to_string(n);
        o.results[key] = io::certified_interval_json(iv);
        o.le(key + ": 1 - 1e-6 <= Gamma lower", 1.0 - 1e-6, iv.lower);
        o.le(key + ": Gamma upper <= 2^(n-1) + 1e-6", iv.upper, std::ldexp(1.0, static_cast<int>(n) - 1) + 1e-6);
    }
    return o;
}

// Gamma(T) <= ||T||_HS for Euclidean operators.
inline Outcome hilbert_schmidt(const Context& c) {
    Outcome o;
    SeededRng rng(c.seed);
    Json cases = Json::array();
    for (std::size_t k = 0; k < 5; ++k) {
        const std::size_t d1 = 2 + rng.index(2), d2 = 2 + rng.index(2);
        const MultilinearOperator t = random_operator({SpaceSpec::euclidean(d1), SpaceSpec::euclidean(d2)},
                                                      SpaceSpec::euclidean(2), rng);
        const CertifiedInterval iv = gamma_interval(t, SeededRng::mix(c.seed + k), c.budget, c.options, c.tol);
        const double hs = hs_norm(t);
        Json j;
        j["hs_norm"] = io::num(hs);
        j["gamma"] = io::certified_interval_json(iv);
        cases.push_back(j);
        o.le(case_name("Gamma upper <= ||T||_HS", k), iv.upper, hs + 1e-9 * (1.0 + hs));
        o.le(case_name("Gamma lower <= ||T||_HS", k), iv.lower, hs + 1e-6);
    }
    o.results["cases"] = cases;
    return o;
}

// Gamma(S f_T (R_1, R_2)) <= ||R|| Gamma(T) ||S||.
inline Outcome ideal(const Context& c) {
    Outcome o;
    SeededRng rng(c.seed);
    Json cases = Json::array();
    const SpaceSpec e2 = SpaceSpec::euclidean(2);
    for (std::size_t k = 0; k < 4; ++k) {
        const MultilinearOperator t = random_operator({e2, e2}, e2, rng);
        const std::vector<MultilinearOperator> rs{random_operator({e2}, e2, rng), random_operator({e2}, e2, rng)};
        const MultilinearOperator s = random_operator({e2}, e2, rng);
        const MultilinearOperator composed = postcompose_linear(s, precompose_linear(t, rs));
        const std::uint64_t seed = SeededRng::mix(c.seed + k);
        const CertifiedInterval inner = gamma_interval(t, seed, c.budget, c.options, c.tol);
        const GammaCertificate up = upper_bound_composition(rs, inner, s, c.budget, CrossNorm::pi, seed, c.tol);
        const WitnessSearchResult lo = search_witness(composed, seed, c.budget, c.options, c.tol);
        Json j;
        j["witness_lower"] = io::certificate_json(lo.cert);
        j["composition_upper"] = io::certificate_json(up);
        cases.push_back(j);
        o.le(case_name("witness lower <= composition upper", k), lo.cert.value, up.value + 1e-6);
    }
    o.results["cases"] = cases;
    return o;
}

// Soundness of accepted witnesses: sum ||f_A(x) - f_A(z)||^2 <= sum ||f_A(s) - f_A(t)||^2
// for random A into l_2^m.
inline double soundness_gap(const KwapienWitness& w, const MultilinearOperator& a) {
    double lhs = 0.0, rhs = 0.0;
    for (const auto& pr : w.xz) {
        const Vector d = axpy(-1.0, evaluate(a, pr.second), evaluate(a, pr.first));
        lhs += dot(d, d);
    }
    for (const auto& pr : w.st) {
        const Vector d = axpy(-1.0, evaluate(a, pr.second), evaluate(a, pr.first));
        rhs += dot(d, d);
    }
    return lhs - rhs;
}

// ||A~||_F^2 (1 + tr G_st): the scale of the soundness slack.
inline double soundness_scale(const KwapienWitness& w, const MultilinearOperator& a) {
    double tr = 0.0;
    for (const auto& pr : w.st) {
        const Vector d = pair_difference(w.spaces, pr);
        tr += dot(d, d);
    }
    const double f = a.coeffs().frobenius();
    return f * f * (1.0 + tr);
}

inline Outcome kwapien(const Context& c) {
    Outcome o;
    SeededRng rng(c.seed);
    const SpaceSpec e2 = SpaceSpec::euclidean(2);
    const std::vector<SpaceSpec> spaces{e2, e2};
    std::vector<std::pair<std::string, KwapienWitness>> ws;
    {
        std::vector<PointPair> prs;
        for (int i = 0; i < 3; ++i) prs.push_back(PointPair{random_point(spaces, rng), random_point(spaces, rng)});
        ws.push_back({"equality", KwapienWitness::equality(spaces, prs)});
        KwapienWitness wide = KwapienWitness::equality(spaces, prs);
        for (auto& pr : wide.st) {
            pr.first.factors[0] = scaled(pr.first.factors[0], 1.5);
            pr.second.factors[0] = scaled(pr.second.factors[0], 1.5);
        }
        ws.push_back({"scaled", wide});
        KwapienWitness shrunk = KwapienWitness::equality(spaces, prs);
        for (auto& pr : shrunk.xz) {
            pr.first.factors[1] = scaled(pr.first.factors[1], 0.8);
            pr.second.factors[1] = scaled(pr.second.factors[1], 0.8);
        }
        ws.push_back({"shrunk", shrunk});
    }
    Json cases = Json::array();
    for (const auto& [label, w] : ws) {
        const DominationResult dom = check_domination(w, c.tol.psd, c.tol);
        Json j;
        j["witness"] = label;
        j["accepted"] = dom.accepted;
        j["min_eig"] = io::num(dom.min_eig);
        cases.push_back(j);
        o.le(label + ": -min_eig <= psd threshold", -dom.min_eig, dom.threshold);
        if (!dom.accepted) continue;
        for (std::size_t k = 0; k < 3; ++k) {
            const MultilinearOperator a = random_operator(spaces, SpaceSpec::euclidean(2), rng);
            o.le(case_name(label + ": sum|A(x)-A(z)|^2 - sum|A(s)-A(t)|^2 <= 1e-9 scale", k), soundness_gap(w, a),
                 1e-9 * soundness_scale(w, a));
        }
        const MultilinearOperator t = random_operator(spaces, SpaceSpec::euclidean(2), rng);
        const GammaCertificate lo = lower_bound_from_witness(t, w, 4, c.tol);
        const CertifiedInterval iv = gamma_interval(t, c.seed, c.budget, c.options, c.tol);
        o.le(label + ": witness lower <= Gamma upper", lo.value, iv.upper + 1e-6);
    }
    o.results["witnesses"] = cases;
    return o;
}

// |phi_T(u)| <= Gamma_ub(T) gamma_ub(u).
inline Outcome duality(const Context& c) {
    Outcome o;
    SeededRng rng(c.seed);
    const SpaceSpec e2 = SpaceSpec::euclidean(2);
    Json cases = Json::array();
    for (std::size_t k = 0; k < 4; ++k) {
        const MultilinearOperator t = random_operator({e2, e2}, e2, rng);
        const DenseTensor u({e2, e2, e2}, rng.normal_vector(8));
        const std::uint64_t seed = SeededRng::mix(c.seed + k);
        const CertifiedInterval gt = gamma_interval(t, seed, c.budget, c.options, c.tol);
        const GammaInterval gu = gamma_bounds(u, {e2, e2}, Codomain(e2), c.budget, seed, c.tol);
        const double pairing = dot(u.coeffs(), t.coeffs().coeffs());
        const double scale = 1.0 + t.coeffs().frobenius() * u.frobenius();
        Json j;
        j["pairing"] = io::num(pairing);
        j["Gamma_upper"] = io::num(gt.upper);
        j["gamma_upper"] = io::num(gu.upper);
        j["gamma_lower"] = io::num(gu.lower);
        cases.push_back(j);
        o.le(case_name("|pairing| <= Gamma_ub(T) gamma_ub(u)", k), std::abs(pairing), gt.upper * gu.upper + 1e-6 * scale);
        const GammaBound via = gamma_lower_via_operator(u, t, gt.upper);
        o.le(case_name("|pairing| / Gamma_ub(T) <= gamma_ub(u)", k), via.value, gu.upper + 1e-6 * scale);
    }
    o.results["cases"] = cases;
    return o;
}

// P(x) = x_1^2 - x_2^2 on l_2^2.
inline Outcome polynomial(const Context& c) {
    Outcome o;
    const HomogeneousPolynomial p(2, SpaceSpec::euclidean(2), SpaceSpec::euclidean(1), Vector{1.0, 0.0, 0.0, -1.0});
    const PolyInterval iv = poly_gamma_interval(p, c.seed, c.budget, c.options, c.tol);
    Json j;
    j["lower"] = io::num(iv.lower);
    j["upper"] = io::num(iv.upper);
    j["lower_certificate"] = io::certificate_json(iv.lower_cert);
    j["upper_certificate"] =
        iv.operator_interval.upper_cert ? io::certificate_json(*iv.operator_interval.upper_cert) : Json(nullptr);
    j["witness"] = io::poly_witness_json(iv.witness);
    j["operator_gamma"] = io::certified_interval_json(iv.operator_interval);
    o.results["polynomial_gamma"] = j;
    o.le("1 - 1e-6 <= poly lower", 1.0 - 1e-6, iv.lower);
    o.le("poly lower <= Gamma(T_P) upper", iv.lower, iv.upper + 1e-6);
    return o;
}

// eps <= Hilbert crossnorm <= pi on random Euclidean tensors.
inline Outcome sandwich(const Context& c) {
    Outcome o;
    SeededRng rng(c.seed);
    Json cases = Json::array();
    for (std::size_t k = 0; k < 6; ++k) {
        const std::size_t d = 2 + k % 2;
        const SpaceSpec e = SpaceSpec::euclidean(d);
        const DenseTensor u({e, e}, rng.normal_vector(d * d));
        const Matrix m = u.flatten({true, false});
        const double spec = spectral_norm(m, c.tol), nuc = nuclear_norm(m, c.tol), hs = hilbert_crossnorm(u);
        const NormInterval eps = injective_norm_bounds(u, c.budget, SeededRng::mix(c.seed + k), c.tol);
        const NormInterval pi = projective_norm_bounds(u, c.budget, SeededRng::mix(c.seed + k), c.tol);
        Json j;
        j["injective"] = io::interval_json(eps);
        j["hilbert"] = io::num(hs);
        j["projective"] = io::interval_json(pi);
        cases.push_back(j);
        o.le(case_name("spectral <= Frobenius", k), spec, hs + 1e-9);
        o.le(case_name("Frobenius <= nuclear", k), hs, nuc + 1e-9);
        o.le(case_name("eps upper <= Frobenius", k), eps.upper, hs + 1e-9);
        o.le(case_name("Frobenius <= pi lower", k), hs, pi.lower + 1e-9);
    }
    o.results["cases"] = cases;
    return o;
}

// pi(p - q) <= 2 eps(p - q) for decomposable pairs at n = 2.
inline Outcome metric_equivalence(const Context& c) {
    Outcome o;
    SeededRng rng(c.seed);
    const SpaceSpec e3 = SpaceSpec::euclidean(3);
    const std::vector<SpaceSpec> spaces{e3, e3};
    Json cases = Json::array();
    for (std::size_t k = 0; k < 8; ++k) {
        const DecomposablePoint p = random_point(spaces, rng), q = random_point(spaces, rng);
        const Matrix m = (to_dense(spaces, p) - to_dense(spaces, q)).flatten({true, false});
        const double nuc = nuclear_norm(m, c.tol), spec = spectral_norm(m, c.tol);
        Json j;
        j["nuclear"] = io::num(nuc);
        j["spectral"] = io::num(spec);
        cases.push_back(j);
        o.le(case_name("pi(p-q) <= 2 eps(p-q)", k), nuc, 2.0 * spec + 1e-9);
    }
    o.results["cases"] = cases;
    return o;
}

// u = (e1 (x) e1 - e2 (x) e2) (x) y with ||y|| = 1: gamma(u) = 2.
inline Outcome gamma_exact(const Context& c) {
    Outcome o;
    const SpaceSpec e2 = SpaceSpec::euclidean(2);
    const std::vector<SpaceSpec> spaces{e2, e2};
    const Vector y{0.6, 0.8};
    GammaRepresentation rep;
    rep.spaces = spaces;
    rep.codomain = Codomain(e2);
    const DecomposablePoint p{{{1.0, 0.0}, {1.0, 0.0}}}, q{{{0.0, 1.0}, {0.0, 1.0}}};
    rep.terms = {GammaTerm{p, q, y}};
    rep.dominators = {PointPair{p, q}};
    const DenseTensor u = assemble(rep);
    const GammaBound up = gamma_upper(rep, c.budget, c.tol);
    const GammaBound lo = gamma_lower_elementary(u, spaces, rep.codomain, c.budget, c.seed, c.tol);
    o.results["gamma_upper"] = io::gamma_bound_json(up);
    o.results["gamma_lower"] = io::gamma_bound_json(lo);
    o.le("2 - 1e-6 <= gamma lower", 2.0 - 1e-6, lo.value);
    o.le("gamma upper <= 2 + 1e-6", up.value, 2.0 + 1e-6);
    return o;
}

inline const std::map<std::string, std::function<Outcome(const Context&)>>& presets() {
    static const std::map<std::string, std::function<Outcome(const Context&)>> p{
        {"inner-product", inner_product},
        {"canonical-tensor", canonical_tensor},
        {"hilbert-schmidt", hilbert_schmidt},
        {"ideal", ideal},
        {"kwapien", kwapien},
        {"duality", duality},
        {"polynomial", polynomial},
        {"sandwich", sandwich},
        {"metric-equivalence", metric_equivalence},
        {"gamma-exact", gamma_exact},
    };
    return p;
}

}  // namespace gammafactor::scenarios
