#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace gammafactor;

namespace {

const SpaceSpec kL2 = SpaceSpec::euclidean(2);

Vector e(std::size_t d, std::size_t k) {
    Vector v(d, 0.0);
    v[k] = 1.0;
    return v;
}

DecomposablePoint pt(std::vector<Vector> f) { return DecomposablePoint{std::move(f)}; }

MultilinearOperator random_operator(const std::vector<SpaceSpec>& dom, const Codomain& y, oracle::Gen& g) {
    std::size_t n = y.dim();
    for (const auto& s : dom) n *= s.dim;
    return MultilinearOperator(dom, y, g.vec(n));
}

PointPair random_pair(const std::vector<SpaceSpec>& dom, oracle::Gen& g) {
    PointPair pr;
    for (const auto& s : dom) {
        pr.first.factors.push_back(g.vec(s.dim));
        pr.second.factors.push_back(g.vec(s.dim));
    }
    return pr;
}

PointPair scale_pair(PointPair pr, double lambda) {
    for (double& x : pr.first.factors[0]) x *= lambda;
    for (double& x : pr.second.factors[0]) x *= lambda;
    return pr;
}

double sum_sq(const MultilinearOperator& a, const std::vector<PointPair>& pairs) {
    double s = 0.0;
    for (const auto& pr : pairs) {
        const Vector d = axpy(-1.0, evaluate(a, pr.second), evaluate(a, pr.first));
        s += dot(d, d);
    }
    return s;
}

// Dominated witnesses of three shapes: equality, st scaled up, and a
// shared-factor family whose st differences are an orthogonal mix of the xz
// differences.
std::vector<KwapienWitness> accepted_witnesses(const std::vector<SpaceSpec>& dom, oracle::Gen& g) {
    std::vector<KwapienWitness> out;
    std::vector<PointPair> pairs{random_pair(dom, g), random_pair(dom, g), random_pair(dom, g)};
    out.push_back(KwapienWitness::equality(dom, pairs));
    KwapienWitness up = KwapienWitness::equality(dom, pairs);
    for (auto& pr : up.st) pr = scale_pair(pr, 1.7);
    out.push_back(up);
    DecomposablePoint base;
    for (const auto& s : dom) base.factors.push_back(g.vec(s.dim));
    std::vector<Vector> diffs{g.vec(dom[0].dim), g.vec(dom[0].dim)};
    const double c = std::cos(0.7), s = std::sin(0.7);
    Matrix u(2, 2);
    u(0, 0) = c;
    u(0, 1) = -s;
    u(1, 0) = s;
    u(1, 1) = c;
    out.push_back(detail::rotated_witness(dom, base, 0, diffs, u));
    return out;
}

}  // namespace

TEST(GramMatrix, Examples) {
    const std::vector<SpaceSpec> dom{kL2, kL2};
    const auto p = pt({e(2, 0), e(2, 1)});
    EXPECT_EQ(gram_matrix(dom, {{p, p}}).matrix().frobenius(), 0.0);
    const auto z = DecomposablePoint::zero(dom);
    const auto m = gram_matrix(dom, {{pt({e(2, 0), e(2, 0)}), z}}).matrix();
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(m(i, j), i == 0 && j == 0 ? 1.0 : 0.0);
    EXPECT_THROW(gram_matrix(dom, {}), InputError);
}

TEST(GramMatrix, PsdByConstruction) {
    oracle::Gen g(41);
    const std::vector<SpaceSpec> dom{kL2, SpaceSpec::l1(3)};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<PointPair> pairs;
        for (std::size_t k = 0; k < 1 + g.pick(0, 6); ++k) pairs.push_back(random_pair(dom, g));
        const Matrix m = gram_matrix(dom, pairs).matrix();
        EXPECT_GE(oracle::eigenvalues(m).back(), -1e-12);
        EXPECT_GE(min_eigenvalue(gram_matrix(dom, pairs)), -1e-12);
    }
}

TEST(Domination, Examples) {
    oracle::Gen g(42);
    const std::vector<SpaceSpec> dom{kL2, kL2};
    const std::vector<PointPair> pairs{random_pair(dom, g), random_pair(dom, g)};
    const auto eq = check_domination(KwapienWitness::equality(dom, pairs));
    EXPECT_TRUE(eq.accepted);
    EXPECT_NEAR(eq.min_eig, 0.0, 1e-12);

    KwapienWitness up = KwapienWitness::equality(dom, pairs);
    for (auto& pr : up.st) pr = scale_pair(pr, 2.0);
    EXPECT_TRUE(check_domination(up).accepted);

    KwapienWitness down = KwapienWitness::equality(dom, pairs);
    for (auto& pr : down.xz) pr = scale_pair(pr, 2.0);
    EXPECT_FALSE(check_domination(down).accepted);

    KwapienWitness empty{dom, pairs, {}};
    EXPECT_THROW(check_domination(empty), InputError);
}

TEST(Domination, ScaleCoherent) {
    oracle::Gen g(43);
    const std::vector<SpaceSpec> dom{kL2, SpaceSpec(3, 3.0)};
    for (int trial = 0; trial < 10; ++trial)
        for (auto w : accepted_witnesses(dom, g)) {
            ASSERT_TRUE(check_domination(w).accepted);
            for (double lambda : {1.0, 1.5, 4.0, 100.0}) {
                KwapienWitness v = w;
                for (auto& pr : v.st) pr = scale_pair(pr, lambda);
                EXPECT_TRUE(check_domination(v).accepted) << "lambda " << lambda;
            }
        }
}

TEST(Domination, SoundAgainstRandomOperators) {
    oracle::Gen g(44);
    const std::vector<SpaceSpec> dom{kL2, SpaceSpec::linf(2)};
    for (int trial = 0; trial < 10; ++trial)
        for (const auto& w : accepted_witnesses(dom, g)) {
            for (int k = 0; k < 5; ++k) {
                const auto a = random_operator(dom, SpaceSpec::euclidean(3), g);
                double tr = 0.0;
                const Matrix gst = gram_matrix(dom, w.st).matrix();
                for (std::size_t i = 0; i < gst.rows(); ++i) tr += gst(i, i);
                const double scale = a.coeffs().frobenius() * a.coeffs().frobenius() * (1.0 + tr);
                EXPECT_LE(sum_sq(a, w.xz), sum_sq(a, w.st) + 1e-9 * scale);
            }
        }
}

TEST(WitnessLower, Examples) {
    const auto g = inner_product_operator(2);
    const std::vector<SpaceSpec> dom{kL2, kL2};
    const PointPair pr{pt({e(2, 0), e(2, 0)}), pt({e(2, 0), e(2, 1)})};
    const auto c = lower_bound_from_witness(g, KwapienWitness::equality(dom, {pr}));
    EXPECT_EQ(c.kind, CertificateKind::witness_lower);
    EXPECT_NEAR(c.value, 1.0 / std::sqrt(2.0), 1e-9);

    const PointPair swap{pt({e(2, 0), e(2, 0)}), pt({e(2, 1), e(2, 0)})};
    EXPECT_NEAR(lower_bound_from_witness(g, KwapienWitness::equality(dom, {swap})).value, 1.0 / std::sqrt(2.0), 1e-9);

    const PointPair same_value{pt({e(2, 0), e(2, 0)}), pt({e(2, 1), e(2, 1)})};
    EXPECT_NEAR(lower_bound_from_witness(g, KwapienWitness::equality(dom, {same_value})).value, 0.0, 1e-12);

    const auto zero = MultilinearOperator::zero(dom, SpaceSpec::scalar());
    EXPECT_EQ(lower_bound_from_witness(zero, KwapienWitness::equality(dom, {pr})).value, 0.0);
}

TEST(WitnessLower, Refusals) {
    const auto g = inner_product_operator(2);
    const std::vector<SpaceSpec> dom{kL2, kL2};
    const PointPair pr{pt({e(2, 0), e(2, 0)}), pt({e(2, 0), e(2, 1)})};
    KwapienWitness bad = KwapienWitness::equality(dom, {pr});
    bad.xz[0] = scale_pair(pr, 2.0);
    EXPECT_THROW(lower_bound_from_witness(g, bad), RefusedError);
    const PointPair flat{pt({e(2, 0), e(2, 0)}), pt({e(2, 0), e(2, 0)})};
    EXPECT_THROW(lower_bound_from_witness(g, KwapienWitness::equality(dom, {flat})), RefusedError);
    KwapienWitness other = KwapienWitness::equality({kL2, SpaceSpec::l1(2)}, {pr});
    EXPECT_THROW(lower_bound_from_witness(g, other), InputError);
}

TEST(UpperRoutes, HilbertSchmidt) {
    const auto g = inner_product_operator(2);
    EXPECT_NEAR(upper_bound_hs(g).value, std::sqrt(2.0), 1e-15);
    EXPECT_EQ(upper_bound_hs(MultilinearOperator::zero({kL2}, kL2)).value, 0.0);
    EXPECT_NEAR(upper_bound_hs(rank_one(g, kL2, e(2, 0))).value, std::sqrt(2.0), 1e-15);
    EXPECT_THROW(upper_bound_hs(MultilinearOperator::zero({SpaceSpec::l1(2)}, kL2)), RefusedError);
}

TEST(UpperRoutes, HilbertDomain) {
    EXPECT_NEAR(upper_bound_hilbert_domain(inner_product_operator(2), 8).value, 2.0, 1e-9);
    EXPECT_NEAR(upper_bound_hilbert_domain(canonical_tensor_map({kL2, kL2}), 8).value, 2.0, 1e-9);
    EXPECT_EQ(upper_bound_hilbert_domain(MultilinearOperator::zero({kL2, kL2}, kL2), 8).value, 0.0);
    EXPECT_THROW(upper_bound_hilbert_domain(MultilinearOperator::zero({SpaceSpec::linf(2)}, kL2), 8), RefusedError);
}

TEST(UpperRoutes, RankOne) {
    const auto g = inner_product_operator(2);
    EXPECT_NEAR(upper_bound_rank_one(g, kL2, e(2, 0), 8).value, 1.0, 1e-9);
    EXPECT_EQ(upper_bound_rank_one(g, kL2, Vector{0.0, 0.0}, 8).value, 0.0);
    const auto zero = MultilinearOperator::zero({kL2, kL2}, SpaceSpec::scalar());
    EXPECT_EQ(upper_bound_rank_one(zero, kL2, e(2, 1), 8).value, 0.0);
    EXPECT_THROW(upper_bound_rank_one(rank_one(g, kL2, e(2, 0)), kL2, e(2, 0), 8), InputError);
}

TEST(UpperRoutes, Composition) {
    oracle::Gen g(45);
    const std::vector<SpaceSpec> dom{kL2, kL2};
    const auto t = random_operator(dom, SpaceSpec::euclidean(2), g);
    const CertifiedInterval inner = gamma_interval(t, 3, 16);
    ASSERT_TRUE(inner.upper_finite());
    const std::vector<MultilinearOperator> ids{identity_operator(kL2), identity_operator(kL2)};
    EXPECT_NEAR(upper_bound_composition(ids, inner, identity_operator(kL2), 8).value, inner.upper, 1e-9 * inner.upper);
    EXPECT_NEAR(upper_bound_composition(ids, inner, std::nullopt, 8).value, inner.upper, 1e-9 * inner.upper);
    const auto s0 = linear_from_matrix(Matrix(2, 2), kL2, kL2);
    EXPECT_EQ(upper_bound_composition(ids, inner, s0, 8).value, 0.0);
    for (double c : {0.5, -2.0, 3.0}) {
        const auto sc = linear_from_matrix(Matrix(2, 2, Vector{c, 0.0, 0.0, c}), kL2, kL2);
        EXPECT_NEAR(upper_bound_composition(ids, inner, sc, 8).value, std::abs(c) * inner.upper, 1e-9 * inner.upper);
        EXPECT_NEAR(upper_bound_composition({sc, ids[1]}, inner, std::nullopt, 8).value, std::abs(c) * inner.upper,
                    1e-9 * inner.upper);
    }
    EXPECT_NEAR(upper_bound_composition(ids, inner, std::nullopt, 8, CrossNorm::eps).value, 2.0 * inner.upper,
                1e-9 * inner.upper);
    CertifiedInterval open;
    EXPECT_THROW(upper_bound_composition(ids, open, std::nullopt, 8), RefusedError);
}

TEST(UpperRoutes, CompositionDominatesSearchedWitness) {
    oracle::Gen g(46);
    const std::vector<SpaceSpec> dom{kL2, kL2};
    for (int trial = 0; trial < 3; ++trial) {
        const auto t = random_operator(dom, SpaceSpec::euclidean(2), g);
        const auto r1 = linear_from_matrix(Matrix(2, 2, g.vec(4)), kL2, kL2);
        const auto r2 = linear_from_matrix(Matrix(2, 2, g.vec(4)), kL2, kL2);
        const auto s = linear_from_matrix(Matrix(3, 2, g.vec(6)), kL2, SpaceSpec::euclidean(3));
        const auto chain = postcompose_linear(s, precompose_linear(t, {r1, r2}));
        const CertifiedInterval inner = gamma_interval(t, 5, 16);
        const double ub = upper_bound_composition({r1, r2}, inner, s, 8).value;
        EXPECT_LE(search_witness(chain, 9, 32).cert.value, ub * (1.0 + 1e-9));
    }
}

TEST(UpperRoutes, Routing) {
    const auto g = inner_product_operator(2);
    EXPECT_NEAR(upper_bound_routing(g, 8).value, upper_bound_hilbert_domain(g, 8).value, 1e-12);
    const MultilinearOperator linf({SpaceSpec::linf(2)}, kL2, Matrix::identity(2).data());
    const auto c = upper_bound_routing(linf, 8);
    EXPECT_NEAR(c.number("embedding_constant"), std::sqrt(2.0), 1e-15);
    const MultilinearOperator l1({SpaceSpec::l1(3)}, kL2, Vector(6, 0.5));
    EXPECT_EQ(upper_bound_routing(l1, 8).number("embedding_constant"), 1.0);
    EXPECT_TRUE(verify_embedding_constant(SpaceSpec(4, 3.0)));
    EXPECT_NEAR(brute_force_embedding_to_l2(SpaceSpec::linf(2)), std::sqrt(2.0), 1e-9);
}

TEST(SearchWitness, InnerProductReachesOne) {
    const auto g = inner_product_operator(2);
    const auto r = search_witness(g, 1, 500);
    EXPECT_GE(r.cert.value, 1.0 - 1e-6);
    ASSERT_TRUE(r.cert.witness.has_value());
    EXPECT_NEAR(lower_bound_from_witness(g, *r.cert.witness).value, r.cert.value, 1e-9);
}

TEST(SearchWitness, ZeroAndRankOne) {
    const std::vector<SpaceSpec> dom{kL2, kL2};
    EXPECT_EQ(search_witness(MultilinearOperator::zero(dom, kL2), 1, 32).cert.value, 0.0);
    const auto r = rank_one(inner_product_operator(2), kL2, e(2, 0));
    EXPECT_LE(search_witness(r, 2, 64).cert.value, 1.0 + 1e-6);
}

TEST(SearchWitness, DeterministicAndThreadIndependent) {
    oracle::Gen g(47);
    const auto t = random_operator({kL2, SpaceSpec(3, 3.0)}, SpaceSpec::euclidean(2), g);
    const auto a = search_witness(t, 11, 24);
    const auto b = search_witness(t, 11, 24);
    WitnessSearchOptions opts;
    opts.threads = 3;
    const auto c = search_witness(t, 11, 24, opts);
    EXPECT_EQ(a.cert.value, b.cert.value);
    EXPECT_EQ(a.cert.value, c.cert.value);
    EXPECT_EQ(pair_difference(t.domain(), a.witness.xz[0]),
              pair_difference(t.domain(), c.witness.xz[0]));
}

TEST(GammaInterval, Examples) {
    const auto g = gamma_interval(inner_product_operator(2), 1, 32);
    EXPECT_GE(g.lower, 1.0 - 1e-9);
    EXPECT_LE(g.upper, std::sqrt(2.0) + 1e-9);

    const auto z = gamma_interval(MultilinearOperator::zero({kL2, kL2}, kL2), 1, 8);
    EXPECT_EQ(z.lower, 0.0);
    EXPECT_EQ(z.upper, 0.0);

    const auto t = gamma_interval(canonical_tensor_map({kL2, kL2}), 1, 32);
    EXPECT_GE(t.lower, 1.0 - 1e-9);
    EXPECT_LE(t.upper, 2.0 + 1e-9);
    EXPECT_THROW(gamma_interval(inner_product_operator(2), 1, 0), InputError);
}

TEST(GammaInterval, ConsistentAndAboveOperatorNorm) {
    oracle::Gen g(48);
    const std::vector<std::vector<SpaceSpec>> doms{{kL2, kL2}, {SpaceSpec::linf(2), kL2}, {SpaceSpec::l1(2), SpaceSpec(2, 3.0)}};
    const std::vector<Codomain> cods{SpaceSpec::euclidean(2), SpaceSpec::l1(2), SpaceSpec::linf(3)};
    int k = 0;
    for (const auto& dom : doms)
        for (const auto& y : cods) {
            const auto t = random_operator(dom, y, g);
            const auto iv = gamma_interval(t, 20 + k, 16);
            EXPECT_TRUE(iv.consistent());
            const auto nb = operator_norm_bounds(t, 8, 30 + k);
            if (iv.upper_finite()) {
                EXPECT_LE(nb.lower, iv.upper + 1e-9 * (1.0 + iv.upper));
            }
            for (const auto& c : iv.candidates) EXPECT_GE(c.value, iv.upper);
            ++k;
        }
}

TEST(GammaInterval, CoordinateFixing) {
    oracle::Gen g(49);
    for (int trial = 0; trial < 4; ++trial) {
        const std::vector<SpaceSpec> dom{kL2, SpaceSpec::linf(2), kL2};
        const auto t = random_operator(dom, SpaceSpec::euclidean(2), g);
        const auto full = gamma_interval(t, 40 + trial, 16);
        ASSERT_TRUE(full.upper_finite());
        const Vector v = g.vec(2);
        const auto fixed = gamma_interval(fix_coordinates(t, {{2, v}}), 50 + trial, 16);
        EXPECT_LE(fixed.lower, full.upper * norm2(v) * (1.0 + 1e-9) + 1e-9);
    }
}

TEST(GammaInterval, ThreadCountIndependent) {
    oracle::Gen g(50);
    const auto t = random_operator({kL2, SpaceSpec::l1(2)}, SpaceSpec::euclidean(2), g);
    WitnessSearchOptions opts;
    const auto a = gamma_interval(t, 7, 16, opts);
    opts.threads = 4;
    const auto b = gamma_interval(t, 7, 16, opts);
    EXPECT_EQ(a.lower, b.lower);
    EXPECT_EQ(a.upper, b.upper);
}
