// Dense complex matrix kernels: storage, arithmetic, Kronecker product,
// adjoint, trace, commutator. Row-major, std::complex<double> scalars.

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmargin {

using cxd = std::complex<double>;

inline bool is_finite(cxd z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

class ComplexMatrix {
  public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, cxd{0.0, 0.0}) {}
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cxd> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_)
            throw std::invalid_argument("ComplexMatrix: entry count does not match shape");
        for (cxd z : data_)
            if (!is_finite(z))
                throw std::invalid_argument("ComplexMatrix: non-finite entry");
    }

    // Row-of-rows initializer, mainly for tests and fixtures.
    ComplexMatrix(std::initializer_list<std::initializer_list<cxd>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_)
                throw std::invalid_argument("ComplexMatrix: ragged initializer");
            for (cxd z : r) data_.push_back(z);
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    cxd& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    cxd operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<cxd>& data() const { return data_; }
    std::vector<cxd>& data() { return data_; }

    static ComplexMatrix identity(std::size_t d) {
        ComplexMatrix m(d, d);
        for (std::size_t i = 0; i < d; ++i) m(i, i) = 1.0;
        return m;
    }

    static ComplexMatrix zero(std::size_t rows, std::size_t cols) {
        return ComplexMatrix(rows, cols);
    }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        require_same_shape(o, "operator+=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        require_same_shape(o, "operator-=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    ComplexMatrix& operator*=(cxd s) {
        for (cxd& z : data_) z *= s;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, cxd s) { return a *= s; }
    friend ComplexMatrix operator*(cxd s, ComplexMatrix a) { return a *= s; }

    double max_abs() const {
        double m = 0.0;
        for (cxd z : data_) m = std::max(m, std::abs(z));
        return m;
    }

  private:
    void require_same_shape(const ComplexMatrix& o, const char* op) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument(std::string("ComplexMatrix: shape mismatch in ") + op);
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cxd> data_;
};

// Kronecker product; composite index (i1,i2) -> i1*r2 + i2.
inline ComplexMatrix kron(const ComplexMatrix& m1, const ComplexMatrix& m2) {
    ComplexMatrix out(m1.rows() * m2.rows(), m1.cols() * m2.cols());
    for (std::size_t i1 = 0; i1 < m1.rows(); ++i1)
        for (std::size_t j1 = 0; j1 < m1.cols(); ++j1) {
            const cxd a = m1(i1, j1);
            if (a == cxd{0.0, 0.0}) continue;
            for (std::size_t i2 = 0; i2 < m2.rows(); ++i2)
                for (std::size_t j2 = 0; j2 < m2.cols(); ++j2)
                    out(i1 * m2.rows() + i2, j1 * m2.cols() + j2) = a * m2(i2, j2);
        }
    return out;
}

// Conjugate transpose.
inline ComplexMatrix dagger(const ComplexMatrix& m) {
    ComplexMatrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            out(j, i) = std::conj(m(i, j));
    return out;
}

inline ComplexMatrix matmul(const ComplexMatrix& m1, const ComplexMatrix& m2) {
    if (m1.cols() != m2.rows())
        throw std::invalid_argument("matmul: inner dimensions differ");
    ComplexMatrix out(m1.rows(), m2.cols());
    for (std::size_t i = 0; i < m1.rows(); ++i)
        for (std::size_t k = 0; k < m1.cols(); ++k) {
            const cxd a = m1(i, k);
            if (a == cxd{0.0, 0.0}) continue;
            for (std::size_t j = 0; j < m2.cols(); ++j)
                out(i, j) += a * m2(k, j);
        }
    return out;
}

inline cxd trace(const ComplexMatrix& m) {
    if (!m.square()) throw std::invalid_argument("trace: matrix is not square");
    cxd t{0.0, 0.0};
    for (std::size_t i = 0; i < m.rows(); ++i) t += m(i, i);
    return t;
}

inline ComplexMatrix commutator(const ComplexMatrix& m1, const ComplexMatrix& m2) {
    if (!m1.square() || !m2.square() || m1.rows() != m2.rows())
        throw std::invalid_argument("commutator: operands must be square and same shape");
    return matmul(m1, m2) - matmul(m2, m1);
}

// Entrywise max-abs deviation; shapes must match.
inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k)
        m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    return m;
}

inline double hermiticity_residual(const ComplexMatrix& m) {
    return max_abs_diff(m, dagger(m));
}

}  // namespace qmargin
