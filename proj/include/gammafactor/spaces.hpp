#pragma once

// Finite-dimensional l_p spaces: descriptors, norms, duality and the
// polyhedral unit-ball vertex sets used by exact enumeration routes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gammafactor/errors.hpp"
#include "gammafactor/numerics.hpp"

namespace gammafactor {

// Exponent p in [1, inf], stored as a reduced fraction num/den or as infinity
// so that the dual exponent p/(p-1) is exact.
class Exponent {
public:
    static Exponent infinity() {
        Exponent e;
        e.infinite_ = true;
        e.num_ = 1;
        e.den_ = 0;
        return e;
    }
    static Exponent rational(std::int64_t num, std::int64_t den) {
        if (den <= 0 || num < den) throw InputError("Exponent: p must be a fraction >= 1");
        const std::int64_t g = std::gcd(num, den);
        Exponent e;
        e.num_ = num / g;
        e.den_ = den / g;
        return e;
    }
    // Recovers a fraction from a floating value by continued fractions.
    static Exponent from_double(double p) {
        if (std::isinf(p) && p > 0) return infinity();
        if (!std::isfinite(p) || p < 1.0) throw InputError("Exponent: p must be >= 1 or infinity");
        std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
        double x = p;
        for (int it = 0; it < 40; ++it) {
            const double a = std::floor(x);
            if (a > 1e12) break;
            const auto ai = static_cast<std::int64_t>(a);
            const std::int64_t h2 = ai * h1 + h0;
            const std::int64_t k2 = ai * k1 + k0;
            if (k2 > 1000000000LL) break;
            h0 = h1;
            h1 = h2;
            k0 = k1;
            k1 = k2;
            if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - p) <= 1e-13 * p) break;
            const double frac = x - a;
            if (frac <= 0.0) break;
            x = 1.0 / frac;
        }
        return rational(h1, k1);
    }

    bool is_infinite() const { return infinite_; }
    bool is_one() const { return !infinite_ && num_ == den_; }
    bool is_two() const { return !infinite_ && num_ == 2 * den_; }
    // p in {1, inf}: the unit ball is a polytope.
    bool is_polyhedral() const { return infinite_ || num_ == den_; }
    std::int64_t numerator() const { return num_; }
    std::int64_t denominator() const { return den_; }

    double value() const {
        return infinite_ ? std::numeric_limits<double>::infinity()
                         : static_cast<double>(num_) / static_cast<double>(den_);
    }
    // 1/p, exactly 0 for p = inf.
    double reciprocal() const { return infinite_ ? 0.0 : static_cast<double>(den_) / static_cast<double>(num_); }

    Exponent dual() const {
        if (infinite_) return rational(1, 1);
        if (num_ == den_) return infinity();
        return rational(num_, num_ - den_);
    }

    std::string to_string() const {
        if (infinite_) return "inf";
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend bool operator==(const Exponent& a, const Exponent& b) {
        if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
        return a.num_ == b.num_ && a.den_ == b.den_;
    }

private:
    bool infinite_ = false;
    std::int64_t num_ = 2;
    std::int64_t den_ = 1;
};

// The space l_p^dim over the reals.
struct SpaceSpec {
    std::size_t dim = 1;
    Exponent p;

    SpaceSpec() = default;
    SpaceSpec(std::size_t d, Exponent e) : dim(d), p(e) {
        if (dim == 0) throw InputError("SpaceSpec: dim must be >= 1");
    }
    SpaceSpec(std::size_t d, double pv) : SpaceSpec(d, Exponent::from_double(pv)) {}

    static SpaceSpec euclidean(std::size_t d) { return SpaceSpec(d, Exponent::rational(2, 1)); }
    static SpaceSpec l1(std::size_t d) { return SpaceSpec(d, Exponent::rational(1, 1)); }
    static SpaceSpec linf(std::size_t d) { return SpaceSpec(d, Exponent::infinity()); }
    static SpaceSpec scalar() { return euclidean(1); }

    bool is_euclidean() const { return p.is_two(); }

    std::string to_string() const { return "l_" + p.to_string() + "^" + std::to_string(dim); }

    friend bool operator==(const SpaceSpec& a, const SpaceSpec& b) { return a.dim == b.dim && a.p == b.p; }
};

inline SpaceSpec dual_space(const SpaceSpec& s) { return SpaceSpec(s.dim, s.p.dual()); }

// l_p norm of raw coordinates (no length check).
inline double lp_norm(const Exponent& p, std::span<const double> v) {
    if (p.is_infinite()) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    if (p.is_one()) {
        double s = 0.0;
        for (double x : v) s += std::abs(x);
        return s;
    }
    if (p.is_two()) return norm2(v);
    double scale = 0.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return 0.0;
    const double pv = p.value();
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x) / scale, pv);
    return scale * std::pow(s, 1.0 / pv);
}

inline double norm(const SpaceSpec& space, std::span<const double> v) {
    if (v.size() != space.dim)
        throw InputError("norm: vector length " + std::to_string(v.size()) + " does not match " + space.to_string());
    return lp_norm(space.p, v);
}

// A point x of the unit ball of `ball` maximizing <c, x>. The maximum equals
// the dual norm of c.
inline Vector dual_ball_argmax(const SpaceSpec& ball, std::span<const double> c) {
    if (c.size() != ball.dim) throw InputError("dual_ball_argmax: length mismatch");
    Vector x(c.size(), 0.0);
    if (ball.p.is_infinite()) {
        for (std::size_t k = 0; k < c.size(); ++k) x[k] = c[k] < 0.0 ? -1.0 : 1.0;
        return x;
    }
    if (ball.p.is_one()) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < c.size(); ++k)
            if (std::abs(c[k]) > std::abs(c[best])) best = k;
        if (c[best] != 0.0) x[best] = c[best] < 0.0 ? -1.0 : 1.0;
        return x;
    }
    const Exponent q = ball.p.dual();
    const double cq = lp_norm(q, c);
    if (cq == 0.0) return x;
    if (ball.p.is_two()) {
        for (std::size_t k = 0; k < c.size(); ++k) x[k] = c[k] / cq;
        return x;
    }
    const double qv = q.value();
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double mag = std::pow(std::abs(c[k]) / cq, qv - 1.0);
        x[k] = c[k] < 0.0 ? -mag : mag;
    }
    return x;
}

// Vertices of a polyhedral unit ball: {+-e_k} for p = 1, all sign vectors
// for p = inf.
inline std::vector<Vector> unit_ball_vertices(const SpaceSpec& space, const Tolerances& tol = default_tolerances()) {
    std::vector<Vector> out;
    const std::size_t d = space.dim;
    if (space.p.is_one()) {
        for (std::size_t k = 0; k < d; ++k) {
            for (double s : {1.0, -1.0}) {
                Vector v(d, 0.0);
                v[k] = s;
                out.push_back(std::move(v));
            }
        }
        return out;
    }
    if (space.p.is_infinite()) {
        if (d > static_cast<std::size_t>(tol.max_vertex_dim))
            throw BudgetError("unit_ball_vertices: l_inf^" + std::to_string(d) + " has too many vertices");
        const std::size_t count = std::size_t{1} << d;
        for (std::size_t mask = 0; mask < count; ++mask) {
            Vector v(d);
            for (std::size_t k = 0; k < d; ++k) v[k] = (mask >> k) & 1U ? -1.0 : 1.0;
            out.push_back(std::move(v));
        }
        return out;
    }
    throw UnsupportedError("unit_ball_vertices: " + space.to_string() + " is not polyhedral");
}

// One vertex from each antipodal pair {v, -v}. Enough whenever the objective
// is invariant under v -> -v (absolute values of multilinear forms).
inline std::vector<Vector> half_ball_vertices(const SpaceSpec& space, const Tolerances& tol = default_tolerances()) {
    std::vector<Vector> all = unit_ball_vertices(space, tol);
    std::vector<Vector> out;
    for (auto& v : all) {
        const auto first = std::find_if(v.begin(), v.end(), [](double x) { return x != 0.0; });
        if (first != v.end() && *first > 0.0) out.push_back(std::move(v));
    }
    return out;
}

inline std::size_t half_vertex_count(const SpaceSpec& space) {
    if (space.p.is_one()) return space.dim;
    if (space.p.is_infinite()) return space.dim >= 63 ? std::numeric_limits<std::size_t>::max() : (std::size_t{1} << (space.dim - 1));
    return std::numeric_limits<std::size_t>::max();
}

// ||Id: l_p^d -> l_2^d|| = max(1, d^{1/2 - 1/p}).
inline double embedding_to_l2(const SpaceSpec& s) {
    return std::max(1.0, std::pow(static_cast<double>(s.dim), 0.5 - s.p.reciprocal()));
}

// ||Id: l_2^d -> l_p^d|| = max(1, d^{1/p - 1/2}).
inline double embedding_from_l2(const SpaceSpec& s) {
    return std::max(1.0, std::pow(static_cast<double>(s.dim), s.p.reciprocal() - 0.5));
}

}  // namespace gammafactor
