// Density operators and kets on factored Hilbert spaces: construction,
// validation, Ginibre random generation, canonical fixtures.

#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qmargin/complex_matrix.hpp"
#include "qmargin/linalg.hpp"
#include "qmargin/rng.hpp"

namespace qmargin {

struct TensorFactorization {
    std::vector<std::size_t> dims;  // each >= 2, slots 0..k-1

    TensorFactorization() = default;
    TensorFactorization(std::initializer_list<std::size_t> d) : dims(d) { check(); }
    explicit TensorFactorization(std::vector<std::size_t> d) : dims(std::move(d)) { check(); }

    std::size_t total_dim() const {
        return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
    }
    std::size_t slots() const { return dims.size(); }

  private:
    void check() const {
        for (std::size_t d : dims)
            if (d < 2) throw std::invalid_argument("TensorFactorization: subsystem dims must be >= 2");
    }
};

struct Ket {
    TensorFactorization factorization;
    ComplexMatrix vector;  // column, unit norm

    Ket(TensorFactorization fact, ComplexMatrix vec)
        : factorization(std::move(fact)), vector(std::move(vec)) {
        if (vector.cols() != 1 || vector.rows() != factorization.total_dim())
            throw std::invalid_argument("Ket: vector shape does not match factorization");
        double n2 = 0.0;
        for (cxd z : vector.data()) n2 += std::norm(z);
        if (std::abs(std::sqrt(n2) - 1.0) > kDefaultTol)
            throw std::invalid_argument("Ket: vector is not unit-norm");
    }
};

struct DensityOperator {
    TensorFactorization factorization;
    ComplexMatrix matrix;  // square, dim = product of factorization dims

    DensityOperator(TensorFactorization fact, ComplexMatrix m)
        : factorization(std::move(fact)), matrix(std::move(m)) {
        if (!matrix.square() || matrix.rows() != factorization.total_dim())
            throw std::invalid_argument("DensityOperator: matrix shape does not match factorization");
    }

    std::size_t dim() const { return matrix.rows(); }

    double purity() const { return trace(matmul(matrix, matrix)).real(); }
};

struct ValidationReport {
    bool hermitian = false;
    bool psd = false;
    bool unit_trace = false;
    double hermiticity_residual = 0.0;
    double min_eigenvalue = 0.0;
    double trace_residual = 0.0;

    bool pass() const { return hermitian && psd && unit_trace; }
};

inline ValidationReport validate_density(const DensityOperator& rho, double tol = kDefaultTol) {
    ValidationReport rep;
    rep.hermiticity_residual = hermiticity_residual(rho.matrix);
    rep.hermitian = rep.hermiticity_residual <= tol;
    rep.trace_residual = std::abs(trace(rho.matrix) - cxd{1.0, 0.0});
    rep.unit_trace = rep.trace_residual <= tol;
    if (rep.hermitian) {
        // Symmetrize before Jacobi so tiny residuals cannot trip its input check.
        ComplexMatrix h = rho.matrix;
        h += dagger(rho.matrix);
        h *= cxd{0.5, 0.0};
        const auto sd = hermitian_eig(h, tol);
        rep.min_eigenvalue = sd.eigenvalues.back();
        rep.psd = rep.min_eigenvalue >= -tol;
    }
    return rep;
}

inline DensityOperator from_pure(const Ket& k) {
    const std::size_t d = k.vector.rows();
    ComplexMatrix m(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            m(i, j) = k.vector(i, 0) * std::conj(k.vector(j, 0));
    return DensityOperator(k.factorization, std::move(m));
}

inline DensityOperator product_state(const DensityOperator& rho_a, const DensityOperator& rho_b) {
    std::vector<std::size_t> dims = rho_a.factorization.dims;
    dims.insert(dims.end(), rho_b.factorization.dims.begin(), rho_b.factorization.dims.end());
    return DensityOperator(TensorFactorization(std::move(dims)), kron(rho_a.matrix, rho_b.matrix));
}

// Ginibre construction G G^dag / Tr(G G^dag); full rank with probability 1.
inline DensityOperator random_density(std::size_t dim, std::uint64_t seed) {
    if (dim < 2) throw std::invalid_argument("random_density: dim must be >= 2");
    SplitMix64 rng(seed);
    ComplexMatrix g(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            g(i, j) = rng.next_complex_gaussian();
    ComplexMatrix m = matmul(g, dagger(g));
    const double tr = trace(m).real();
    m *= cxd{1.0 / tr, 0.0};
    return DensityOperator(TensorFactorization({dim}), std::move(m));
}

// Same as random_density but annotated with a multipartite factorization.
inline DensityOperator random_density(const TensorFactorization& fact, std::uint64_t seed) {
    DensityOperator rho = random_density(fact.total_dim(), seed);
    return DensityOperator(fact, rho.matrix);
}

// Canonical fixtures.
inline Ket ket_basis(std::size_t dim, std::size_t idx) {
    ComplexMatrix v(dim, 1);
    v(idx, 0) = 1.0;
    return Ket(TensorFactorization({dim}), std::move(v));
}

inline Ket ket_zero() { return ket_basis(2, 0); }
inline Ket ket_one() { return ket_basis(2, 1); }

inline Ket ket_plus() {
    const double r = 1.0 / std::sqrt(2.0);
    return Ket(TensorFactorization({2}), ComplexMatrix(2, 1, {cxd{r, 0}, cxd{r, 0}}));
}

inline Ket ket_minus() {
    const double r = 1.0 / std::sqrt(2.0);
    return Ket(TensorFactorization({2}), ComplexMatrix(2, 1, {cxd{r, 0}, cxd{-r, 0}}));
}

inline Ket bell_phi_plus_ket() {
    const double r = 1.0 / std::sqrt(2.0);
    ComplexMatrix v(4, 1);
    v(0, 0) = r;
    v(3, 0) = r;
    return Ket(TensorFactorization({2, 2}), std::move(v));
}

inline DensityOperator bell_phi_plus() { return from_pure(bell_phi_plus_ket()); }

}  // namespace qmargin
