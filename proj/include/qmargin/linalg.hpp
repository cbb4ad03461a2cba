// Hermitian eigendecomposition (cyclic Jacobi) and basis predicates.

#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qmargin/complex_matrix.hpp"

namespace qmargin {

inline constexpr double kDefaultTol = 1e-10;

struct SpectralDecomposition {
    std::vector<double> eigenvalues;        // descending
    std::vector<ComplexMatrix> eigenvectors; // unit-norm columns, same order
};

// |<v_i|v_j> - delta_ij| <= tol for all pairs.
inline bool check_orthonormal(const std::vector<ComplexMatrix>& basis, double tol = kDefaultTol) {
    for (std::size_t i = 0; i < basis.size(); ++i) {
        if (basis[i].cols() != 1 || basis[i].rows() != basis[0].rows())
            throw std::invalid_argument("check_orthonormal: vectors must be same-dimension columns");
        for (std::size_t j = i; j < basis.size(); ++j) {
            cxd ov{0.0, 0.0};
            for (std::size_t k = 0; k < basis[i].rows(); ++k)
                ov += std::conj(basis[i](k, 0)) * basis[j](k, 0);
            const double target = (i == j) ? 1.0 : 0.0;
            if (std::abs(ov - cxd{target, 0.0}) > tol) return false;
        }
    }
    return true;
}

// Cyclic Jacobi for complex Hermitian matrices. Each sweep zeroes every
// off-diagonal pair (p,q) with a phased Givens rotation; terminates when the
// largest off-diagonal magnitude drops below tol.
inline SpectralDecomposition hermitian_eig(const ComplexMatrix& m, double tol = kDefaultTol) {
    if (!m.square()) throw std::invalid_argument("hermitian_eig: matrix is not square");
    if (hermiticity_residual(m) > tol * 100 + 1e-12)
        throw std::invalid_argument("hermitian_eig: input is not Hermitian within tolerance");

    const std::size_t n = m.rows();
    ComplexMatrix a = m;
    ComplexMatrix v = ComplexMatrix::identity(n);

    constexpr int kSweepBudget = 100;
    auto max_offdiag = [&]() {
        double mx = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                mx = std::max(mx, std::abs(a(p, q)));
        return mx;
    };

    int sweep = 0;
    while (max_offdiag() >= tol) {
        if (++sweep > kSweepBudget)
            throw std::runtime_error("hermitian_eig: Jacobi sweeps did not converge");
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const cxd apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag < tol * 0.1) continue;

                // Phase out a(p,q), then a real Jacobi rotation on the 2x2 block.
                const cxd phase = apq / mag;  // e^{i beta}
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double tau = (aqq - app) / (2.0 * mag);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                // U = diag(1, conj(phase)) * real Givens rotation; U^dag a U
                // zeroes a(p,q).
                const cxd upp = c, upq = s;
                const cxd uqp = -s * std::conj(phase), uqq = c * std::conj(phase);

                // a <- U^dag a U  (update columns then rows)
                for (std::size_t i = 0; i < n; ++i) {
                    const cxd aip = a(i, p), aiq = a(i, q);
                    a(i, p) = aip * upp + aiq * uqp;
                    a(i, q) = aip * upq + aiq * uqq;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const cxd apj = a(p, j), aqj = a(q, j);
                    a(p, j) = std::conj(upp) * apj + std::conj(uqp) * aqj;
                    a(q, j) = std::conj(upq) * apj + std::conj(uqq) * aqj;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const cxd vip = v(i, p), viq = v(i, q);
                    v(i, p) = vip * upp + viq * uqp;
                    v(i, q) = vip * upq + viq * uqq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i).real() > a(j, j).real(); });

    SpectralDecomposition out;
    out.eigenvalues.reserve(n);
    out.eigenvectors.reserve(n);
    for (std::size_t k : order) {
        out.eigenvalues.push_back(a(k, k).real());
        ComplexMatrix col(n, 1);
        for (std::size_t i = 0; i < n; ++i) col(i, 0) = v(i, k);
        // Phase convention: first component with magnitude > tol made real positive.
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(col(i, 0)) > tol) {
                const cxd ph = std::conj(col(i, 0)) / std::abs(col(i, 0));
                for (std::size_t r = 0; r < n; ++r) col(r, 0) *= ph;
                break;
            }
        }
        out.eigenvectors.push_back(std::move(col));
    }
    return out;
}

// V diag(lambda) V^dag.
inline ComplexMatrix reconstruct(const SpectralDecomposition& sd) {
    const std::size_t n = sd.eigenvectors.empty() ? 0 : sd.eigenvectors[0].rows();
    ComplexMatrix out(n, n);
    for (std::size_t k = 0; k < sd.eigenvalues.size(); ++k) {
        const ComplexMatrix& vk = sd.eigenvectors[k];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                out(i, j) += sd.eigenvalues[k] * vk(i, 0) * std::conj(vk(j, 0));
    }
    return out;
}

}  // namespace qmargin
