#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace gammafactor;

namespace {

MultilinearOperator random_operator(const std::vector<SpaceSpec>& dom, const Codomain& y, oracle::Gen& g) {
    std::size_t n = y.dim();
    for (const auto& s : dom) n *= s.dim;
    return MultilinearOperator(dom, y, g.vec(n));
}

Matrix diag(const Vector& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Vector e(std::size_t d, std::size_t k) {
    Vector v(d, 0.0);
    v[k] = 1.0;
    return v;
}

void expect_near(const Vector& a, const Vector& b, double tol) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol);
}

}  // namespace

TEST(Evaluate, InnerProduct) {
    const auto g = inner_product_operator(2);
    EXPECT_EQ(evaluate(g, {e(2, 0), e(2, 0)})[0], 1.0);
    EXPECT_EQ(evaluate(g, {e(2, 0), e(2, 1)})[0], 0.0);
    EXPECT_EQ(evaluate(g, {Vector{0.0, 0.0}, Vector{3.0, 4.0}})[0], 0.0);
    EXPECT_THROW(evaluate(g, {e(2, 0)}), InputError);
    EXPECT_THROW(evaluate(g, {e(2, 0), Vector{1.0}}), InputError);
}

TEST(Evaluate, Multilinearity) {
    oracle::Gen g(31);
    const std::vector<SpaceSpec> dom{SpaceSpec::euclidean(2), SpaceSpec(3, 3.0), SpaceSpec::l1(2)};
    const auto t = random_operator(dom, SpaceSpec::euclidean(2), g);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Vector> xs;
        for (const auto& s : dom) xs.push_back(g.vec(s.dim));
        const Vector base = evaluate(t, xs);
        for (std::size_t k = 0; k < dom.size(); ++k) {
            auto doubled = xs;
            for (double& v : doubled[k]) v *= 2.0;
            expect_near(evaluate(t, doubled), scaled(base, 2.0), 1e-12 * (1.0 + norm2(base)));
            const Vector w = g.vec(dom[k].dim);
            auto sum = xs, other = xs;
            sum[k] = axpy(1.0, w, xs[k]);
            other[k] = w;
            expect_near(evaluate(t, sum), axpy(1.0, evaluate(t, other), base), 1e-12 * (1.0 + norm2(base)));
        }
    }
}

TEST(SigmaApply, UniversalProperty) {
    oracle::Gen g(32);
    const std::vector<SpaceSpec> dom{SpaceSpec::euclidean(2), SpaceSpec::linf(3)};
    const auto t = random_operator(dom, SpaceSpec::euclidean(3), g);
    for (int trial = 0; trial < 20; ++trial) {
        const DecomposablePoint p{{g.vec(2), g.vec(3)}}, q{{g.vec(2), g.vec(3)}};
        expect_near(sigma_apply(t, to_dense(dom, p)), evaluate(t, p), 1e-12);
        const DenseTensor d(dom, axpy(-1.0, to_dense(dom, q).coeffs(), to_dense(dom, p).coeffs()));
        expect_near(sigma_apply(t, d), axpy(-1.0, evaluate(t, q), evaluate(t, p)), 1e-12);
    }
    expect_near(sigma_apply(t, DenseTensor::zeros(dom)), Vector(3, 0.0), 0.0);
    EXPECT_THROW(sigma_apply(t, DenseTensor::zeros({SpaceSpec::euclidean(2), SpaceSpec::euclidean(3)})), InputError);
}

TEST(OperatorNorm, Examples) {
    const auto g = inner_product_operator(2);
    const auto iv = operator_norm_bounds(g, 8);
    EXPECT_NEAR(iv.lower, 1.0, 1e-9);
    EXPECT_NEAR(iv.upper, 1.0, 1e-9);

    const MultilinearOperator ginf({SpaceSpec::linf(2), SpaceSpec::linf(2)}, SpaceSpec::scalar(), g.coeffs().coeffs());
    const auto jv = operator_norm_bounds(ginf, 8);
    EXPECT_NEAR(jv.lower, 2.0, 1e-9);
    EXPECT_NEAR(jv.upper, 2.0, 1e-9);

    const auto z = operator_norm_bounds(MultilinearOperator::zero({SpaceSpec::euclidean(2)}, SpaceSpec::euclidean(2)), 4);
    EXPECT_EQ(z.lower, 0.0);
    EXPECT_EQ(z.upper, 0.0);
    EXPECT_THROW(operator_norm_bounds(g, 0), InputError);
}

TEST(OperatorNorm, BracketsSampledValueAndHs) {
    oracle::Gen g(33);
    for (int trial = 0; trial < 8; ++trial) {
        const std::vector<SpaceSpec> dom{SpaceSpec::euclidean(2), SpaceSpec::euclidean(3)};
        const auto t = random_operator(dom, SpaceSpec::euclidean(2), g);
        const auto iv = operator_norm_bounds(t, 8, 100 + trial);
        EXPECT_LE(iv.lower, iv.upper + 1e-9);
        EXPECT_LE(oracle::operator_norm_sampled(t, g, 2000), iv.upper * (1.0 + 1e-9));
        EXPECT_LE(iv.upper, hs_norm(t) + 1e-9);
    }
    for (int trial = 0; trial < 6; ++trial) {
        const std::vector<SpaceSpec> dom{SpaceSpec(2, 3.0), SpaceSpec::l1(3)};
        const auto t = random_operator(dom, SpaceSpec(2, 1.5), g);
        const auto iv = operator_norm_bounds(t, 8, 200 + trial);
        EXPECT_LE(iv.lower, iv.upper + 1e-9);
        EXPECT_LE(oracle::operator_norm_sampled(t, g, 2000), iv.upper * (1.0 + 1e-9));
    }
}

TEST(OperatorNorm, ProductOfLinearIsCrossnorm) {
    const SpaceSpec l2 = SpaceSpec::euclidean(2);
    const auto t = product_of_linear({linear_from_matrix(diag({1.0, 2.0}), l2, l2), linear_from_matrix(diag({3.0, 1.0}), l2, l2)});
    const auto iv = operator_norm_bounds(t, 8);
    EXPECT_NEAR(iv.lower, 6.0, 1e-9);
    EXPECT_NEAR(iv.upper, 6.0, 1e-9);
}

TEST(HsNorm, Examples) {
    EXPECT_NEAR(hs_norm(inner_product_operator(2)), std::sqrt(2.0), 1e-15);
    EXPECT_EQ(hs_norm(MultilinearOperator::zero({SpaceSpec::euclidean(2)}, SpaceSpec::euclidean(1))), 0.0);
    const MultilinearOperator bad({SpaceSpec::linf(2)}, SpaceSpec::euclidean(1), Vector{1.0, 1.0});
    EXPECT_THROW(hs_norm(bad), UnsupportedError);
}

TEST(HsNorm, RankOneFactorizes) {
    oracle::Gen g(34);
    for (int trial = 0; trial < 10; ++trial) {
        const std::vector<SpaceSpec> dom{SpaceSpec::euclidean(2), SpaceSpec::euclidean(3)};
        const auto phi = random_operator(dom, SpaceSpec::scalar(), g);
        const Vector y = g.vec(3);
        const auto r = rank_one(phi, SpaceSpec::euclidean(3), y);
        EXPECT_NEAR(hs_norm(r), phi.coeffs().frobenius() * norm2(y), 1e-12);
    }
}

TEST(FixCoordinates, Examples) {
    const auto g = inner_product_operator(2);
    const auto f = fix_coordinates(g, {{1, e(2, 0)}});
    ASSERT_TRUE(f.is_linear());
    EXPECT_EQ(evaluate(f, {Vector{0.3, -5.0}})[0], 0.3);
    EXPECT_TRUE(fix_coordinates(g, {{0, Vector{0.0, 0.0}}}).is_zero());
    EXPECT_THROW(fix_coordinates(g, {{0, e(2, 0)}, {1, e(2, 1)}}), InputError);
    EXPECT_THROW(fix_coordinates(g, {{2, e(2, 0)}}), InputError);
    EXPECT_THROW(fix_coordinates(g, {{0, Vector{1.0}}}), InputError);
}

TEST(FixCoordinates, ContractionOracle) {
    oracle::Gen g(35);
    const std::vector<SpaceSpec> dom{SpaceSpec::euclidean(2), SpaceSpec::l1(3), SpaceSpec::linf(2)};
    const auto t = random_operator(dom, SpaceSpec::euclidean(2), g);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector a = g.vec(2), b = g.vec(3), c = g.vec(2);
        const Vector full = evaluate(t, {a, b, c});
        expect_near(evaluate(fix_coordinates(t, {{2, c}}), {a, b}), full, 1e-12);
        expect_near(evaluate(fix_coordinates(t, {{1, b}}), {a, c}), full, 1e-12);
        expect_near(evaluate(fix_coordinates(t, {{0, a}, {2, c}}), {b}), full, 1e-12);
    }
}

TEST(RankOne, Examples) {
    const auto g = inner_product_operator(2);
    const auto r = rank_one(g, SpaceSpec::euclidean(2), e(2, 0));
    EXPECT_EQ(r.coeffs().coeffs(), (Vector{1, 0, 0, 0, 0, 0, 1, 0}));
    EXPECT_TRUE(rank_one(g, SpaceSpec::euclidean(2), Vector{0.0, 0.0}).is_zero());
    EXPECT_THROW(rank_one(r, SpaceSpec::euclidean(2), e(2, 0)), InputError);
    EXPECT_THROW(rank_one(g, SpaceSpec::euclidean(2), Vector{1.0}), InputError);
}

TEST(RankOne, Submultiplicative) {
    oracle::Gen g(36);
    for (int trial = 0; trial < 8; ++trial) {
        const std::vector<SpaceSpec> dom{SpaceSpec(2, 3.0), SpaceSpec::euclidean(2)};
        const auto phi = random_operator(dom, SpaceSpec::scalar(), g);
        const SpaceSpec ys(3, 1.5);
        const Vector y = g.vec(3);
        const auto r = rank_one(phi, ys, y);
        const double phi_ub = operator_norm_bounds(phi, 8, 7).upper;
        EXPECT_LE(operator_norm_bounds(r, 8, 7).upper, phi_ub * norm(ys, y) * (1.0 + 1e-9) + 1e-12);
        std::vector<Vector> xs{g.vec(2), g.vec(2)};
        expect_near(evaluate(r, xs), scaled(y, evaluate(phi, xs)[0]), 1e-12);
    }
}

TEST(ProductOfLinear, Examples) {
    const SpaceSpec l2 = SpaceSpec::euclidean(2);
    const auto t = canonical_tensor_map({l2, l2});
    EXPECT_EQ(t.codomain().dim(), 4u);
    expect_near(evaluate(t, {Vector{1.0, 2.0}, Vector{3.0, -1.0}}), Vector{3.0, -1.0, 6.0, -2.0}, 0.0);

    const auto d = linear_from_matrix(diag({1.0, 2.0}), l2, l2);
    const auto p = product_of_linear({d, d});
    expect_near(evaluate(p, {e(2, 1), e(2, 1)}), Vector{0.0, 0.0, 0.0, 4.0}, 0.0);

    const auto z = linear_from_matrix(Matrix(2, 2), l2, l2);
    EXPECT_TRUE(product_of_linear({d, z}).is_zero());
    EXPECT_THROW(product_of_linear({}), InputError);
    EXPECT_THROW(product_of_linear({inner_product_operator(2)}), InputError);
}

TEST(ProductOfLinear, PointwiseOracle) {
    oracle::Gen g(37);
    const SpaceSpec a(2, 3.0), b = SpaceSpec::l1(3), c = SpaceSpec::euclidean(2);
    const auto t1 = linear_from_matrix(Matrix(3, 2, g.vec(6)), a, b);
    const auto t2 = linear_from_matrix(Matrix(2, 3, g.vec(6)), b, c);
    const auto p = product_of_linear({t1, t2}, CrossNorm::eps);
    EXPECT_EQ(p.codomain().cross_norm(), CrossNorm::eps);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x = g.vec(2), y = g.vec(3);
        expect_near(evaluate(p, {x, y}), oracle::outer({evaluate(t1, {x}), evaluate(t2, {y})}), 1e-12);
    }
}

TEST(Compose, Identities) {
    oracle::Gen g(38);
    const std::vector<SpaceSpec> dom{SpaceSpec::euclidean(2), SpaceSpec::l1(3)};
    const auto t = random_operator(dom, SpaceSpec::euclidean(2), g);
    const auto same = precompose_linear(t, {identity_operator(dom[0]), identity_operator(dom[1])});
    expect_near(same.coeffs().coeffs(), t.coeffs().coeffs(), 0.0);
    const auto post = postcompose_linear(identity_operator(SpaceSpec::euclidean(2)), t);
    expect_near(post.coeffs().coeffs(), t.coeffs().coeffs(), 0.0);
    const auto s0 = linear_from_matrix(Matrix(3, 2), SpaceSpec::euclidean(2), SpaceSpec::euclidean(3));
    EXPECT_TRUE(postcompose_linear(s0, t).is_zero());
    EXPECT_THROW(precompose_linear(t, {identity_operator(dom[0])}), InputError);
    EXPECT_THROW(postcompose_linear(identity_operator(SpaceSpec::euclidean(3)), t), InputError);
}

TEST(Compose, PointwiseOracle) {
    oracle::Gen g(39);
    const std::vector<SpaceSpec> dom{SpaceSpec::euclidean(2), SpaceSpec(3, 3.0)};
    const auto t = random_operator(dom, SpaceSpec::euclidean(2), g);
    const SpaceSpec z1 = SpaceSpec::l1(3), z2 = SpaceSpec::linf(2);
    const auto r1 = linear_from_matrix(Matrix(2, 3, g.vec(6)), z1, dom[0]);
    const auto r2 = linear_from_matrix(Matrix(3, 2, g.vec(6)), z2, dom[1]);
    const auto s = linear_from_matrix(Matrix(4, 2, g.vec(8)), SpaceSpec::euclidean(2), SpaceSpec(4, 1.5));
    const auto chain = postcompose_linear(s, precompose_linear(t, {r1, r2}));
    EXPECT_EQ(chain.domain()[0], z1);
    EXPECT_EQ(chain.domain()[1], z2);
    for (int trial = 0; trial < 100; ++trial) {
        const Vector a = g.vec(3), b = g.vec(2);
        const Vector direct = evaluate(s, {evaluate(t, {evaluate(r1, {a}), evaluate(r2, {b})})});
        expect_near(evaluate(chain, {a, b}), direct, 1e-12 * (1.0 + norm2(direct)));
    }
}

TEST(LinearFromMatrix, RoundTrip) {
    oracle::Gen g(40);
    const Matrix m(3, 2, g.vec(6));
    const auto t = linear_from_matrix(m, SpaceSpec::euclidean(2), SpaceSpec::euclidean(3));
    const Matrix back = matrix_of(t);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(back(i, j), m(i, j));
    const Vector x = g.vec(2);
    expect_near(evaluate(t, {x}), m * x, 1e-14);
    EXPECT_THROW(linear_from_matrix(m, SpaceSpec::euclidean(3), SpaceSpec::euclidean(3)), InputError);
}
