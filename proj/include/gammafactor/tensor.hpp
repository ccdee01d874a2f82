#pragma once

// Dense coefficient tensors on X_1 (x) ... (x) X_n, decomposable points,
// and the provenance records attached to every certified bound.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "gammafactor/errors.hpp"
#include "gammafactor/numerics.hpp"
#include "gammafactor/spaces.hpp"

namespace gammafactor {

// Row-major coefficient array over an ordered list of factor spaces; the
// last index varies fastest.
class DenseTensor {
public:
    DenseTensor() = default;

    DenseTensor(std::vector<SpaceSpec> spaces, Vector coeffs) : spaces_(std::move(spaces)), coeffs_(std::move(coeffs)) {
        if (spaces_.empty()) throw InputError("DenseTensor: at least one factor space is required");
        init_shape();
        if (coeffs_.size() != size_)
            throw InputError("DenseTensor: " + std::to_string(coeffs_.size()) + " coefficients for shape of size " +
                             std::to_string(size_));
        if (!all_finite(coeffs_)) throw InputError("DenseTensor: non-finite coefficient");
    }

    static DenseTensor zeros(std::vector<SpaceSpec> spaces) {
        std::size_t n = 1;
        for (const auto& s : spaces) n *= s.dim;
        return DenseTensor(std::move(spaces), Vector(n, 0.0));
    }

    std::size_t order() const { return spaces_.size(); }
    std::size_t size() const { return size_; }
    const std::vector<SpaceSpec>& spaces() const { return spaces_; }
    const std::vector<std::size_t>& shape() const { return shape_; }
    const std::vector<std::size_t>& strides() const { return strides_; }
    const Vector& coeffs() const { return coeffs_; }
    Vector& coeffs() { return coeffs_; }
    double operator[](std::size_t flat) const { return coeffs_[flat]; }
    double& operator[](std::size_t flat) { return coeffs_[flat]; }

    double at(const std::vector<std::size_t>& idx) const { return coeffs_[offset(idx)]; }
    double& at(const std::vector<std::size_t>& idx) { return coeffs_[offset(idx)]; }

    std::size_t offset(const std::vector<std::size_t>& idx) const {
        std::size_t off = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) off += idx[k] * strides_[k];
        return off;
    }

    std::vector<std::size_t> unravel(std::size_t flat) const {
        std::vector<std::size_t> idx(order());
        for (std::size_t k = 0; k < order(); ++k) {
            idx[k] = flat / strides_[k];
            flat %= strides_[k];
        }
        return idx;
    }

    bool is_zero() const {
        return std::all_of(coeffs_.begin(), coeffs_.end(), [](double v) { return v == 0.0; });
    }

    double frobenius() const { return norm2(coeffs_); }

    DenseTensor with_spaces(std::vector<SpaceSpec> spaces) const {
        DenseTensor t(std::move(spaces), coeffs_);
        if (t.shape_ != shape_) throw InputError("DenseTensor::with_spaces: shape differs");
        return t;
    }

    DenseTensor& operator+=(const DenseTensor& o) {
        check_same(o);
        for (std::size_t i = 0; i < size_; ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    DenseTensor& operator-=(const DenseTensor& o) {
        check_same(o);
        for (std::size_t i = 0; i < size_; ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }
    DenseTensor& operator*=(double a) {
        for (double& v : coeffs_) v *= a;
        return *this;
    }
    friend DenseTensor operator+(DenseTensor a, const DenseTensor& b) { return a += b; }
    friend DenseTensor operator-(DenseTensor a, const DenseTensor& b) { return a -= b; }
    friend DenseTensor operator*(double s, DenseTensor a) { return a *= s; }

    // Matrix whose rows run over the modes flagged in `row_modes` (in mode
    // order) and whose columns run over the remaining modes.
    Matrix flatten(const std::vector<bool>& row_modes) const {
        std::vector<std::size_t> rmodes, cmodes;
        for (std::size_t k = 0; k < order(); ++k) (row_modes[k] ? rmodes : cmodes).push_back(k);
        std::size_t rows = 1, cols = 1;
        for (auto k : rmodes) rows *= shape_[k];
        for (auto k : cmodes) cols *= shape_[k];
        Matrix m(rows, cols);
        for (std::size_t flat = 0; flat < size_; ++flat) {
            const auto idx = unravel(flat);
            std::size_t r = 0, c = 0;
            for (auto k : rmodes) r = r * shape_[k] + idx[k];
            for (auto k : cmodes) c = c * shape_[k] + idx[k];
            m(r, c) = coeffs_[flat];
        }
        return m;
    }

    // Mode-k unfolding: shape_[k] x (size / shape_[k]), other modes in order.
    Matrix unfold(std::size_t mode) const {
        std::vector<bool> rows(order(), false);
        rows[mode] = true;
        return flatten(rows);
    }

    // Sub-tensor with index `i` fixed in `mode` (order >= 2).
    DenseTensor slice(std::size_t mode, std::size_t i) const {
        if (order() < 2) throw InputError("DenseTensor::slice: order must be >= 2");
        std::vector<SpaceSpec> rest;
        for (std::size_t k = 0; k < order(); ++k)
            if (k != mode) rest.push_back(spaces_[k]);
        DenseTensor out = zeros(rest);
        std::size_t j = 0;
        for (std::size_t flat = 0; flat < size_; ++flat) {
            if (unravel(flat)[mode] == i) out.coeffs_[j++] = coeffs_[flat];
        }
        return out;
    }

    // Contracts `mode` against v; the result has order n - 1 (n >= 2).
    DenseTensor contract(std::size_t mode, std::span<const double> v) const {
        if (order() < 2) throw InputError("DenseTensor::contract: order must be >= 2");
        if (v.size() != shape_[mode]) throw InputError("DenseTensor::contract: length mismatch");
        std::vector<SpaceSpec> rest;
        for (std::size_t k = 0; k < order(); ++k)
            if (k != mode) rest.push_back(spaces_[k]);
        DenseTensor out = zeros(rest);
        const std::size_t outer = size_ / (shape_[mode] * strides_[mode]);
        const std::size_t inner = strides_[mode];
        for (std::size_t a = 0; a < outer; ++a)
            for (std::size_t i = 0; i < shape_[mode]; ++i) {
                const double w = v[i];
                if (w == 0.0) continue;
                const std::size_t base = (a * shape_[mode] + i) * inner;
                for (std::size_t b = 0; b < inner; ++b) out.coeffs_[a * inner + b] += w * coeffs_[base + b];
            }
        return out;
    }

    // Contracts every mode except `keep`; returns a vector of length dim(keep).
    Vector contract_all_but(std::size_t keep, const std::vector<Vector>& vs) const {
        Vector out(shape_[keep], 0.0);
        for (std::size_t flat = 0; flat < size_; ++flat) {
            const double c = coeffs_[flat];
            if (c == 0.0) continue;
            std::size_t rem = flat;
            double w = c;
            std::size_t ik = 0;
            for (std::size_t k = 0; k < order(); ++k) {
                const std::size_t i = rem / strides_[k];
                rem %= strides_[k];
                if (k == keep) ik = i;
                else w *= vs[k][i];
            }
            out[ik] += w;
        }
        return out;
    }

    double contract_all(const std::vector<Vector>& vs) const {
        const Vector last = contract_all_but(order() - 1, vs);
        return dot(last, vs.back());
    }

private:
    void init_shape() {
        shape_.resize(spaces_.size());
        strides_.resize(spaces_.size());
        size_ = 1;
        for (std::size_t k = spaces_.size(); k-- > 0;) {
            shape_[k] = spaces_[k].dim;
            strides_[k] = size_;
            size_ *= shape_[k];
        }
    }
    void check_same(const DenseTensor& o) const {
        if (o.shape_ != shape_) throw InputError("DenseTensor: shape mismatch");
    }

    std::vector<SpaceSpec> spaces_;
    std::vector<std::size_t> shape_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
    Vector coeffs_;
};

// x^1 (x) ... (x) x^n as its list of factors.
struct DecomposablePoint {
    std::vector<Vector> factors;

    std::size_t order() const { return factors.size(); }

    static DecomposablePoint zero(const std::vector<SpaceSpec>& spaces) {
        DecomposablePoint p;
        for (const auto& s : spaces) p.factors.emplace_back(s.dim, 0.0);
        return p;
    }
};

inline void check_point(const std::vector<SpaceSpec>& spaces, const DecomposablePoint& p) {
    if (p.factors.size() != spaces.size())
        throw InputError("DecomposablePoint: " + std::to_string(p.factors.size()) + " factors for " +
                         std::to_string(spaces.size()) + " spaces");
    for (std::size_t k = 0; k < spaces.size(); ++k) {
        if (p.factors[k].size() != spaces[k].dim)
            throw InputError("DecomposablePoint: factor " + std::to_string(k) + " has length " +
                             std::to_string(p.factors[k].size()) + ", expected " + std::to_string(spaces[k].dim));
        if (!all_finite(p.factors[k])) throw InputError("DecomposablePoint: non-finite coordinate");
    }
}

// Product of the factor norms; equals pi(p) = eps(p) for every crossnorm.
inline double point_norm(const std::vector<SpaceSpec>& spaces, const DecomposablePoint& p) {
    double prod = 1.0;
    for (std::size_t k = 0; k < spaces.size(); ++k) prod *= norm(spaces[k], p.factors[k]);
    return prod;
}

inline DenseTensor to_dense(const std::vector<SpaceSpec>& spaces, const DecomposablePoint& p) {
    check_point(spaces, p);
    Vector coeffs{1.0};
    for (const auto& f : p.factors) {
        Vector next;
        next.reserve(coeffs.size() * f.size());
        for (double a : coeffs)
            for (double b : f) next.push_back(a * b);
        coeffs = std::move(next);
    }
    return DenseTensor(spaces, std::move(coeffs));
}

// Audit trail for one side of a certified bound.
struct Provenance {
    std::string route;               // e.g. "svd-spectral", "vertex-enumeration"
    std::string detail;
    std::vector<Vector> vectors;     // witness functionals or decomposition factors
    std::vector<Provenance> parts;   // sub-certificates of composite routes
};

struct NormInterval {
    double lower = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    Provenance lower_certificate;
    Provenance upper_certificate;

    bool upper_finite() const { return std::isfinite(upper); }
    bool consistent(double tol = 1e-9) const { return !upper_finite() || lower <= upper + tol * (1.0 + upper); }
};

inline NormInterval exact_interval(double value, Provenance cert) {
    NormInterval iv;
    iv.lower = value;
    iv.upper = value;
    iv.lower_certificate = cert;
    iv.upper_certificate = std::move(cert);
    return iv;
}

// Euclidean Hilbert tensor norm: Frobenius norm of the coefficients.
inline double hilbert_crossnorm(const DenseTensor& u) {
    for (const auto& s : u.spaces())
        if (!s.is_euclidean())
            throw UnsupportedError("hilbert_crossnorm: factor " + s.to_string() + " is not Euclidean");
    return u.frobenius();
}

// One rank-one term x^1 (x) ... (x) x^n of a decomposition.
using RankOneTerm = DecomposablePoint;
using Decomposition = std::vector<RankOneTerm>;

inline double decomposition_cost(const std::vector<SpaceSpec>& spaces, const Decomposition& d) {
    double s = 0.0;
    for (const auto& t : d) s += point_norm(spaces, t);
    return s;
}

inline DenseTensor assemble_decomposition(const std::vector<SpaceSpec>& spaces, const Decomposition& d) {
    DenseTensor u = DenseTensor::zeros(spaces);
    for (const auto& t : d) u += to_dense(spaces, t);
    return u;
}

}  // namespace gammafactor
