#pragma once

// Reference computations for the tests. Everything here is independent of
// the library's own numerics: linear algebra goes through Eigen, the rest
// is brute force.

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

#include "gammafactor/gammafactor.hpp"

namespace oracle {

using gammafactor::Matrix;
using gammafactor::Vector;

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(i, j);
    return e;
}

inline Eigen::VectorXd singular_values(const Matrix& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> s(to_eigen(m));
    return s.singularValues();
}

inline double spectral(const Matrix& m) {
    const auto s = singular_values(m);
    return s.size() ? s(0) : 0.0;
}

inline double nuclear(const Matrix& m) { return singular_values(m).sum(); }

// Descending eigenvalues of a symmetric matrix.
inline std::vector<double> eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(m));
    std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(v.rbegin(), v.rend());
    return v;
}

// Coefficient matrix of a two-slot tensor (rows: first slot).
inline Matrix matrix2(const gammafactor::DenseTensor& u) { return u.flatten({true, false}); }

// Outer product of the factors, row-major.
inline Vector outer(const std::vector<Vector>& factors) {
    Vector out{1.0};
    for (const auto& f : factors) {
        Vector next;
        next.reserve(out.size() * f.size());
        for (double a : out)
            for (double b : f) next.push_back(a * b);
        out = std::move(next);
    }
    return out;
}

// Plain std::mt19937_64 stream for test data, separate from SeededRng.
struct Gen {
    std::mt19937_64 eng;
    std::normal_distribution<double> nd{0.0, 1.0};
    explicit Gen(std::uint64_t seed) : eng(seed) {}
    double normal() { return nd(eng); }
    Vector vec(std::size_t n) {
        Vector v(n);
        for (double& x : v) x = normal();
        return v;
    }
    std::size_t pick(std::size_t lo, std::size_t hi) {
        return lo + std::uniform_int_distribution<std::size_t>(0, hi - lo)(eng);
    }
};

// max ||x||_2 over the l_p unit sphere by dense sampling plus sign patterns.
inline double embedding_constant_bruteforce(std::size_t d, double p, Gen& g, int samples = 20000) {
    auto lp = [&](const Vector& v) {
        if (std::isinf(p)) {
            double m = 0.0;
            for (double x : v) m = std::max(m, std::abs(x));
            return m;
        }
        double s = 0.0;
        for (double x : v) s += std::pow(std::abs(x), p);
        return std::pow(s, 1.0 / p);
    };
    auto ratio = [&](const Vector& v) {
        const double n = lp(v);
        double s = 0.0;
        for (double x : v) s += x * x;
        return n > 0 ? std::sqrt(s) / n : 0.0;
    };
    double best = 0.0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
        Vector v(d);
        for (std::size_t k = 0; k < d; ++k) v[k] = (mask >> k) & 1U ? -1.0 : 1.0;
        best = std::max(best, ratio(v));
    }
    for (std::size_t k = 0; k < d; ++k) {
        Vector v(d, 0.0);
        v[k] = 1.0;
        best = std::max(best, ratio(v));
    }
    for (int s = 0; s < samples; ++s) best = std::max(best, ratio(g.vec(d)));
    return best;
}

// Best lower bound on ||T|| for an operator with l_p domains by sampling
// the unit spheres (any sample is a valid lower bound).
inline double operator_norm_sampled(const gammafactor::MultilinearOperator& t, Gen& g, int samples) {
    double best = 0.0;
    for (int s = 0; s < samples; ++s) {
        std::vector<Vector> xs;
        for (const auto& sp : t.domain()) {
            Vector v = g.vec(sp.dim);
            const double n = gammafactor::norm(sp, v);
            for (double& x : v) x /= n;
            xs.push_back(v);
        }
        const Vector y = gammafactor::evaluate(t, xs);
        best = std::max(best, gammafactor::codomain_norm_lower(t.codomain(), y));
    }
    return best;
}

}  // namespace oracle
