#pragma once

// Dense real linear algebra kernels: symmetric eigensolver (cyclic Jacobi),
// thin SVD (one-sided Jacobi) and a portable seeded random stream.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gammafactor/errors.hpp"

namespace gammafactor {

using Vector = std::vector<double>;

// Short form of a double for diagnostics (%.6g).
inline std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Every numeric tolerance and search limit used by the library. The defaults
// are the module constants; callers override individual fields.
struct Tolerances {
    double eig_offdiag = 1e-14;          // Jacobi stop: off-diagonal mass relative to ||S||_F
    int eig_max_sweeps = 64;
    double svd_orthogonality = 1e-15;    // one-sided Jacobi column orthogonality
    int svd_max_sweeps = 64;
    double gradient_step = 1e-6;         // central-difference step
    int local_iterations = 200;          // projected ascent iterations per restart
    double psd = 1e-8;                   // domination check, relative to 1 + trace
    double interval = 1e-9;              // lower <= upper slack, relative to 1 + upper
    std::size_t max_vertex_combinations = std::size_t{1} << 20;
    int max_dual_restarts = 8;           // random restarts for dual-functional searches
    int max_vertex_dim = 16;             // l_inf unit ball enumeration limit
    int max_embedding_check_dim = 8;     // brute-force embedding-constant verification limit
};

inline const Tolerances& default_tolerances() {
    static const Tolerances tol{};
    return tol;
}

// ---------------------------------------------------------------------------
// Small vector helpers
// ---------------------------------------------------------------------------

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) {
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    if (scale == 0.0 || !std::isfinite(scale)) return scale;
    double s = 0.0;
    for (double v : a) {
        const double t = v / scale;
        s += t * t;
    }
    return scale * std::sqrt(s);
}

inline bool all_finite(std::span<const double> a) {
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

inline Vector axpy(double alpha, std::span<const double> x, std::span<const double> y) {
    Vector out(y.begin(), y.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += alpha * x[i];
    return out;
}

inline Vector scaled(std::span<const double> x, double alpha) {
    Vector out(x.begin(), x.end());
    for (double& v : out) v *= alpha;
    return out;
}

// ---------------------------------------------------------------------------
// Dense matrices
// ---------------------------------------------------------------------------

// Row-major dense matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, Vector data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) throw InputError("Matrix: data size does not match shape");
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    const Vector& data() const { return data_; }
    Vector& data() { return data_; }

    Vector column(std::size_t j) const {
        Vector c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }
    Vector row(std::size_t i) const {
        return Vector(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                      data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    double frobenius() const { return norm2(data_); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

inline Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw InputError("Matrix product: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline Vector operator*(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw InputError("Matrix-vector product: dimension mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

// Symmetric matrix; the stored entries are exactly symmetric because the
// constructor replaces M by (M + M^T) / 2.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(std::size_t dim) : m_(dim, dim) {}
    explicit SymmetricMatrix(const Matrix& m) : m_(m.rows(), m.cols()) {
        if (m.rows() != m.cols()) throw InputError("SymmetricMatrix: matrix is not square");
        const std::size_t n = m.rows();
        for (std::size_t i = 0; i < n; ++i) {
            m_(i, i) = m(i, i);
            for (std::size_t j = i + 1; j < n; ++j) {
                const double v = 0.5 * (m(i, j) + m(j, i));
                m_(i, j) = v;
                m_(j, i) = v;
            }
        }
    }

    std::size_t dim() const { return m_.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }
    // Writes both (i,j) and (j,i).
    void set(std::size_t i, std::size_t j, double v) {
        m_(i, j) = v;
        m_(j, i) = v;
    }
    void add(std::size_t i, std::size_t j, double v) {
        m_(i, j) += v;
        if (i != j) m_(j, i) += v;
    }
    const Matrix& matrix() const { return m_; }

    double trace() const {
        double t = 0.0;
        for (std::size_t i = 0; i < dim(); ++i) t += m_(i, i);
        return t;
    }

    SymmetricMatrix operator-(const SymmetricMatrix& o) const {
        if (o.dim() != dim()) throw InputError("SymmetricMatrix: dimension mismatch");
        SymmetricMatrix r(dim());
        for (std::size_t k = 0; k < m_.data().size(); ++k) r.m_.data()[k] = m_.data()[k] - o.m_.data()[k];
        return r;
    }

private:
    Matrix m_;
};

struct EigenDecomposition {
    Vector values;   // descending
    Matrix vectors;  // column k pairs with values[k]
    int sweeps = 0;
};

// Cyclic Jacobi sweeps until the off-diagonal Frobenius mass drops below
// tol.eig_offdiag * ||S||_F or tol.eig_max_sweeps sweeps have run.
inline EigenDecomposition jacobi_eigh(const SymmetricMatrix& s, const Tolerances& tol = default_tolerances()) {
    const std::size_t n = s.dim();
    if (n == 0) throw InputError("jacobi_eigh: dimension must be at least 1");
    if (!all_finite(s.matrix().data())) throw InputError("jacobi_eigh: non-finite entry");

    Matrix a = s.matrix();
    Matrix v = Matrix::identity(n);
    const double fro = a.frobenius();

    auto off_mass = [&]() {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) off += a(i, j) * a(i, j);
        return std::sqrt(off);
    };

    int sweep = 0;
    for (; sweep < tol.eig_max_sweeps; ++sweep) {
        if (off_mass() <= tol.eig_offdiag * fro) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 0.5 / theta;
                } else {
                    t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenDecomposition out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    out.sweeps = sweep;
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

inline double min_eigenvalue(const SymmetricMatrix& s, const Tolerances& tol = default_tolerances()) {
    return jacobi_eigh(s, tol).values.back();
}

struct SvdResult {
    Matrix u;        // rows x k, orthonormal columns
    Vector sigma;    // k = min(rows, cols), descending, >= 0
    Matrix v;        // cols x k, orthonormal columns
};

namespace detail {

// One-sided (Hestenes) Jacobi on a matrix with rows >= cols.
inline SvdResult svd_tall(const Matrix& a, const Tolerances& tol) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    Matrix w = a;
    Matrix v = Matrix::identity(n);

    for (int sweep = 0; sweep < tol.svd_max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t k = 0; k < m; ++k) {
                    alpha += w(k, i) * w(k, i);
                    beta += w(k, j) * w(k, j);
                    gamma += w(k, i) * w(k, j);
                }
                if (alpha == 0.0 || beta == 0.0) continue;
                if (std::abs(gamma) <= tol.svd_orthogonality * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t k = 0; k < m; ++k) {
                    const double wi = w(k, i);
                    const double wj = w(k, j);
                    w(k, i) = c * wi - s * wj;
                    w(k, j) = s * wi + c * wj;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vi = v(k, i);
                    const double vj = v(k, j);
                    v(k, i) = c * vi - s * vj;
                    v(k, j) = s * vi + c * vj;
                }
            }
        }
        if (!rotated) break;
    }

    Vector norms(n);
    for (std::size_t j = 0; j < n; ++j) norms[j] = norm2(w.column(j));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

    SvdResult out{Matrix(m, n), Vector(n), Matrix(n, n)};
    std::vector<std::size_t> empty_columns;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        out.sigma[k] = norms[j];
        for (std::size_t r = 0; r < n; ++r) out.v(r, k) = v(r, j);
        if (norms[j] > 0.0) {
            for (std::size_t r = 0; r < m; ++r) out.u(r, k) = w(r, j) / norms[j];
        } else {
            empty_columns.push_back(k);
        }
    }

    // Complete U with unit vectors orthogonal to the columns already present.
    std::size_t candidate = 0;
    for (std::size_t k : empty_columns) {
        while (candidate < m) {
            Vector e(m, 0.0);
            e[candidate++] = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t c = 0; c < n; ++c) {
                    if (c == k) continue;
                    const Vector col = out.u.column(c);
                    const double proj = dot(col, e);
                    for (std::size_t r = 0; r < m; ++r) e[r] -= proj * col[r];
                }
            }
            const double ne = norm2(e);
            if (ne > 0.5) {
                for (std::size_t r = 0; r < m; ++r) out.u(r, k) = e[r] / ne;
                break;
            }
        }
    }
    return out;
}

}  // namespace detail

// Thin singular value decomposition A = U diag(sigma) V^T.
inline SvdResult svd(const Matrix& a, const Tolerances& tol = default_tolerances()) {
    if (a.rows() == 0 || a.cols() == 0) throw InputError("svd: empty matrix");
    if (!all_finite(a.data())) throw InputError("svd: non-finite entry");
    if (a.rows() >= a.cols()) return detail::svd_tall(a, tol);
    SvdResult t = detail::svd_tall(a.transposed(), tol);
    return SvdResult{std::move(t.v), std::move(t.sigma), std::move(t.u)};
}

inline double spectral_norm(const Matrix& a, const Tolerances& tol = default_tolerances()) {
    return svd(a, tol).sigma.front();
}

inline double nuclear_norm(const Matrix& a, const Tolerances& tol = default_tolerances()) {
    const Vector s = svd(a, tol).sigma;
    return std::accumulate(s.begin(), s.end(), 0.0);
}

// ---------------------------------------------------------------------------
// Seeded random stream
// ---------------------------------------------------------------------------

// Deterministic random stream. Raw bits come from std::mt19937_64, whose
// output sequence is fixed by the C++ standard; uniform and normal variates
// are derived here (53-bit mantissa fill, Box-Muller) instead of through the
// implementation-defined std:: distributions.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::size_t index(std::size_t n) {
        return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    Vector normal_vector(std::size_t n) {
        Vector v(n);
        for (double& x : v) x = normal();
        return v;
    }

    // Independent child stream k; depends only on (seed, k).
    SeededRng derive(std::uint64_t k) const { return SeededRng(mix(seed_ + 0x9E3779B97F4A7C15ULL * (k + 1))); }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace gammafactor
