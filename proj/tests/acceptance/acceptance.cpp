// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "../oracles.hpp"

using namespace gammafactor;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

// Collects the first few violations of a criterion.
struct Tally {
    long cases = 0;
    long failures = 0;
    std::ostringstream first;

    void check(bool ok, const std::string& what) {
        ++cases;
        if (ok) return;
        if (failures++ < 3) first << " [" << what << "]";
    }
    Verdict verdict() const {
        std::ostringstream os;
        os << cases << " checks, " << failures << " failed" << first.str();
        return Verdict{failures == 0, os.str()};
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

MultilinearOperator random_operator(const std::vector<SpaceSpec>& dom, const Codomain& y, oracle::Gen& g) {
    std::size_t n = y.dim();
    for (const auto& s : dom) n *= s.dim;
    return MultilinearOperator(dom, y, g.vec(n));
}

std::vector<SpaceSpec> euclidean_dims(std::size_t n, oracle::Gen& g) {
    std::vector<SpaceSpec> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back(SpaceSpec::euclidean(g.pick(2, 3)));
    return out;
}

DecomposablePoint random_point(const std::vector<SpaceSpec>& sp, oracle::Gen& g) {
    DecomposablePoint p;
    for (const auto& s : sp) p.factors.push_back(g.vec(s.dim));
    return p;
}

PointPair random_pair(const std::vector<SpaceSpec>& sp, oracle::Gen& g) { return {random_point(sp, g), random_point(sp, g)}; }

Vector e(std::size_t d, std::size_t k) {
    Vector v(d, 0.0);
    v[k] = 1.0;
    return v;
}

// ---------------------------------------------------------------------------

Verdict ac1() {
    oracle::Gen g(1001);
    Tally t;
    const std::vector<SpaceSpec> sp{SpaceSpec::euclidean(3), SpaceSpec::euclidean(3)};
    for (int k = 0; k < 100; ++k) {
        const DenseTensor u(sp, g.vec(9));
        const double nuc = oracle::nuclear(oracle::matrix2(u)), sig = oracle::spectral(oracle::matrix2(u));
        const auto pi = projective_norm_bounds(u, 200, 5000 + k);
        const auto eps = injective_norm_bounds(u, 200, 6000 + k);
        t.check(pi.lower <= nuc * (1.0 + 1e-6) && pi.lower >= nuc * (1.0 - 1e-6),
                "pi lower " + fmt(pi.lower) + " vs nuclear " + fmt(nuc));
        t.check(pi.upper <= nuc * 1.05 && pi.upper >= nuc * (1.0 - 1e-9), "pi upper " + fmt(pi.upper) + " vs nuclear " + fmt(nuc));
        t.check(std::abs(eps.lower - sig) <= 1e-6, "eps lower " + fmt(eps.lower) + " vs sigma_max " + fmt(sig));
    }
    return t.verdict();
}

Verdict ac2() {
    oracle::Gen g(1002);
    Tally t;
    for (std::size_t d : {2u, 3u}) {
        const std::vector<SpaceSpec> sp{SpaceSpec::euclidean(d), SpaceSpec::euclidean(d)};
        for (int k = 0; k < 1000; ++k) {
            const DenseTensor u(sp, g.vec(d * d));
            const double eps = injective_norm_bounds(u, 1).upper;
            const double fro = hilbert_crossnorm(u);
            const double pi = projective_norm_bounds(u, 1).lower;
            t.check(eps <= fro + 1e-9 && fro <= pi + 1e-9, fmt(eps) + " <= " + fmt(fro) + " <= " + fmt(pi));
            const Matrix m = oracle::matrix2(u);
            t.check(oracle::spectral(m) <= fro + 1e-9 && fro <= oracle::nuclear(m) + 1e-9, "oracle sandwich");
        }
    }
    return t.verdict();
}

Verdict ac3() {
    oracle::Gen g(1003);
    Tally t;
    for (int k = 0; k < 1000; ++k) {
        const std::vector<SpaceSpec> sp{SpaceSpec::euclidean(g.pick(2, 3)), SpaceSpec::euclidean(g.pick(2, 3))};
        const auto p = random_point(sp, g), q = random_point(sp, g);
        const DenseTensor d = to_dense(sp, p) - to_dense(sp, q);
        const double pi = pi_distance_bounds(sp, p, q, 1).upper;
        const double eps = injective_norm_bounds(d, 1).lower;
        t.check(pi <= 2.0 * eps + 1e-9, "pi " + fmt(pi) + " vs 2 eps " + fmt(2.0 * eps));
        const Matrix m = oracle::matrix2(d);
        t.check(oracle::nuclear(m) <= 2.0 * oracle::spectral(m) + 1e-9, "oracle rank-2 bound");
    }
    return t.verdict();
}

// Dominated witnesses: equality, st scaled by lambda >= 1, perturbed st
// pairs kept only when check_domination accepts them, and xz padded with an
// extra st pair.
KwapienWitness dominated_witness(int kind, const std::vector<SpaceSpec>& sp, oracle::Gen& g) {
    std::vector<PointPair> pairs;
    for (std::size_t i = 0; i < g.pick(1, 3); ++i) pairs.push_back(random_pair(sp, g));
    KwapienWitness w = KwapienWitness::equality(sp, pairs);
    switch (kind) {
        case 0: break;
        case 1: {
            const double lambda = 1.0 + 2.0 * std::abs(g.normal());
            for (auto& pr : w.st) {
                for (double& x : pr.first.factors[0]) x *= lambda;
                for (double& x : pr.second.factors[0]) x *= lambda;
            }
            break;
        }
        case 2: {
            for (int attempt = 0; attempt < 50; ++attempt) {
                KwapienWitness v = w;
                for (auto& pr : v.st) {
                    for (auto* pt : {&pr.first, &pr.second})
                        for (auto& f : pt->factors)
                            for (double& x : f) x = 1.2 * x + 0.05 * g.normal();
                }
                if (check_domination(v).accepted) return v;
            }
            w.st.push_back(random_pair(sp, g));
            break;
        }
        default: w.st.push_back(random_pair(sp, g)); break;
    }
    return w;
}

double sum_sq(const MultilinearOperator& a, const std::vector<PointPair>& pairs) {
    double s = 0.0;
    for (const auto& pr : pairs) {
        const Vector d = axpy(-1.0, evaluate(a, pr.second), evaluate(a, pr.first));
        s += dot(d, d);
    }
    return s;
}

Verdict ac4() {
    oracle::Gen g(1004);
    Tally t;
    int accepted = 0;
    for (int k = 0; k < 200; ++k) {
        const std::vector<SpaceSpec> sp = euclidean_dims(2 + k % 2, g);
        const KwapienWitness w = dominated_witness(k % 4, sp, g);
        const bool ok = check_domination(w).accepted;
        t.check(ok, "witness " + std::to_string(k) + " not accepted");
        if (!ok) continue;
        ++accepted;
        const Matrix gst = gram_matrix(sp, w.st).matrix();
        double tr = 0.0;
        for (std::size_t i = 0; i < gst.rows(); ++i) tr += gst(i, i);
        for (int a = 0; a < 20; ++a) {
            const auto op = random_operator(sp, SpaceSpec::euclidean(g.pick(1, 3)), g);
            const double scale = op.coeffs().frobenius() * op.coeffs().frobenius() * (1.0 + tr);
            const double lhs = sum_sq(op, w.xz), rhs = sum_sq(op, w.st);
            t.check(lhs <= rhs + 1e-9 * scale, fmt(lhs) + " > " + fmt(rhs));
        }
    }
    Verdict v = t.verdict();
    v.detail += ", " + std::to_string(accepted) + " witnesses";
    return v;
}

Verdict ac5() {
    oracle::Gen g(1005);
    Tally t;
    for (int k = 0; k < 50; ++k) {
        const std::vector<SpaceSpec> sp = euclidean_dims(2 + k % 2, g);
        const auto op = random_operator(sp, SpaceSpec::euclidean(g.pick(1, 3)), g);
        const std::uint64_t seed = 7000 + static_cast<std::uint64_t>(k);
        const auto iv = gamma_interval(op, seed, 500);
        const auto nb = operator_norm_bounds(op, 500, seed);
        t.check(iv.lower <= iv.upper + 1e-6, "lower " + fmt(iv.lower) + " > upper " + fmt(iv.upper));
        t.check(iv.lower >= nb.lower - 1e-6, "lower " + fmt(iv.lower) + " < norm lower " + fmt(nb.lower));
    }
    return t.verdict();
}

Verdict ac6() {
    const auto iv = gamma_interval(inner_product_operator(2), 1, 64);
    const bool ok = iv.lower >= 1.0 - 1e-6 && iv.upper <= std::sqrt(2.0) + 1e-6 && iv.lower <= iv.upper;
    return Verdict{ok, "[" + fmt(iv.lower) + ", " + fmt(iv.upper) + "]"};
}

Verdict ac7() {
    oracle::Gen g(1007);
    Tally t;
    for (int k = 0; k < 100; ++k) {
        const std::vector<SpaceSpec> sp = euclidean_dims(2, g);
        const SpaceSpec y = SpaceSpec::euclidean(g.pick(1, 3));
        const auto op = random_operator(sp, dual_space(y), g);
        std::vector<SpaceSpec> full = sp;
        full.push_back(y);
        std::size_t size = 1;
        for (const auto& s : full) size *= s.dim;
        const DenseTensor u(full, g.vec(size));
        const std::uint64_t seed = 8000 + static_cast<std::uint64_t>(k);
        const double gam = gamma_interval(op, seed, 32).upper;
        const double gu = gamma_bounds(u, sp, y, 8, seed).upper;
        const double pairing = std::abs(dot(u.coeffs(), op.coeffs().coeffs()));
        const double scale = 1.0 + gam * gu;
        t.check(pairing <= gam * gu + 1e-6 * scale, fmt(pairing) + " > " + fmt(gam) + " * " + fmt(gu));
    }
    return t.verdict();
}

Verdict ac8() {
    const SpaceSpec l2 = SpaceSpec::euclidean(2);
    const Vector y{0.6, 0.8};
    GammaRepresentation rep{{l2, l2}, l2, {GammaTerm{{{e(2, 0), e(2, 0)}}, {{e(2, 1), e(2, 1)}}, y}}, {}};
    rep.pad();
    rep.dominators[0] = PointPair{rep.terms[0].p, rep.terms[0].q};
    const double up = gamma_upper(rep).value;
    const double lo = gamma_lower_elementary(assemble(rep), rep.spaces, rep.codomain, 16).value;
    return Verdict{lo >= 2.0 - 1e-6 && up <= 2.0 + 1e-6, "[" + fmt(lo) + ", " + fmt(up) + "]"};
}

Verdict ac9() {
    oracle::Gen g(1009);
    Tally t;
    for (int k = 0; k < 50; ++k) {
        const std::size_t n = 2;
        std::vector<SpaceSpec> mid, outer;
        std::vector<MultilinearOperator> rs;
        for (std::size_t i = 0; i < n; ++i) {
            mid.push_back(SpaceSpec::euclidean(g.pick(2, 3)));
            outer.push_back(k % 3 == 0 ? SpaceSpec::linf(g.pick(2, 3)) : SpaceSpec::euclidean(g.pick(2, 3)));
            rs.push_back(linear_from_matrix(Matrix(mid[i].dim, outer[i].dim, g.vec(mid[i].dim * outer[i].dim)), outer[i], mid[i]));
        }
        const SpaceSpec ys = SpaceSpec::euclidean(g.pick(1, 3)), ws = SpaceSpec::euclidean(g.pick(1, 3));
        const auto inner = random_operator(mid, ys, g);
        const auto s = linear_from_matrix(Matrix(ws.dim, ys.dim, g.vec(ws.dim * ys.dim)), ys, ws);
        const auto chain = postcompose_linear(s, precompose_linear(inner, rs));
        const std::uint64_t seed = 9000 + static_cast<std::uint64_t>(k);
        const auto iv = gamma_interval(inner, seed, 32);
        const double ub = upper_bound_composition(rs, iv, s, 16, CrossNorm::pi, seed).value;
        const double lo = search_witness(chain, seed, 64).cert.value;
        t.check(lo <= ub + 1e-6, "witness " + fmt(lo) + " > composition " + fmt(ub));
    }
    return t.verdict();
}

Verdict ac10() {
    Tally t;
    const SpaceSpec l2 = SpaceSpec::euclidean(2);
    const HomogeneousPolynomial p(2, l2, SpaceSpec::scalar(), {1.0, 0.0, 0.0, -1.0});
    const auto iv = poly_gamma_interval(p, 1, 64);
    t.check(iv.lower >= 1.0 - 1e-6, "x1^2 - x2^2 lower " + fmt(iv.lower));
    oracle::Gen g(1010);
    for (int k = 0; k < 30; ++k) {
        const SpaceSpec x = SpaceSpec::euclidean(g.pick(2, 3));
        const SpaceSpec y = SpaceSpec::euclidean(g.pick(1, 2));
        const HomogeneousPolynomial q(2, x, y, g.vec(x.dim * x.dim * y.dim));
        const std::uint64_t seed = 10000 + static_cast<std::uint64_t>(k);
        const auto pi = poly_gamma_interval(q, seed, 32);
        const auto op = gamma_interval(associated_operator(q), seed + 1, 32);
        t.check(pi.lower <= op.upper + 1e-6, "poly lower " + fmt(pi.lower) + " > operator upper " + fmt(op.upper));
    }
    return t.verdict();
}

struct Proc {
    int code = -1;
    std::string out;
};

Proc run_cli(const std::string& args) {
    const std::string cmd = std::string("cd ") + GAMMAFACTOR_SOURCE_DIR + "/tests/data && " + GAMMAFACTOR_CLI + " " + args +
                            " 2>/dev/null";
    Proc p;
    FILE* f = popen(cmd.c_str(), "r");
    if (!f) return p;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, f)) > 0) p.out.append(buf, n);
    const int status = pclose(f);
    p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return p;
}

Verdict ac11() {
    const std::vector<std::string> jobs{
        "norms -i tensor_l2.json",
        "norms -i tensor_mixed.json",
        "norms -i pair.json",
        "norms -i operator_l1.json",
        "certify -i operator_inner.json",
        "certify -i operator_zero.json -i witness_equality.json",
        "certify -i operator_inner.json -i witness_rejected.json",
        "certify -i operator_tensor.json --seed 5",
        "certify -i operator_l1.json --budget 32",
        "search-witness -i operator_inner.json",
        "gamma -i representation.json",
        "gamma -i gamma_tensor.json -i operator_zero.json",
        "poly -i polynomial.json -i poly_witness.json",
        "certify -i bad_coeffs.json",
        "demo inner-product",
        "demo canonical-tensor",
        "demo hilbert-schmidt",
        "demo ideal",
        "demo kwapien",
        "demo duality",
        "demo polynomial",
        "demo sandwich",
        "demo metric-equivalence",
        "demo gamma-exact",
        "demo kwapien --format table",
    };
    Tally t;
    for (const auto& j : jobs) {
        const Proc a = run_cli(j), b = run_cli(j);
        t.check(!a.out.empty() && a.out == b.out && a.code == b.code, j);
    }
    return t.verdict();
}

}  // namespace

int main() {
    const std::vector<std::tuple<std::string, double, std::function<Verdict()>>> criteria{
        {"AC1", 30, ac1}, {"AC2", 5, ac2},  {"AC3", 5, ac3},   {"AC4", 30, ac4}, {"AC5", 60, ac5}, {"AC6", 5, ac6},
        {"AC7", 30, ac7}, {"AC8", 5, ac8},  {"AC9", 30, ac9},  {"AC10", 30, ac10}, {"AC11", 10, ac11},
    };
    int failed = 0;
    for (const auto& [name, limit, fn] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& ex) {
            v = Verdict{false, std::string("exception: ") + ex.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < limit;
        const bool pass = v.pass && in_time;
        failed += !pass;
        std::printf("%s %s (%.2f s of %.0f s) %s%s\n", pass ? "PASS" : "FAIL", name.c_str(), secs, limit, v.detail.c_str(),
                    in_time ? "" : " [time limit exceeded]");
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
