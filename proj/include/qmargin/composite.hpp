// Operators on tensor-product spaces: extension operators, the rectangular
// ket/bra embedding maps, and two partial-trace implementations (a literal
// embedding-map sum and a strided-index contraction).

#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "qmargin/complex_matrix.hpp"
#include "qmargin/linalg.hpp"
#include "qmargin/states.hpp"

namespace qmargin {

// Orthonormality rejection threshold for user-supplied trace bases; looser
// than arithmetic tolerance so low-precision bases still pass.
inline constexpr double kBasisTol = 1e-8;

struct ExtendedOperator {
    TensorFactorization factorization;
    std::size_t slot;
    ComplexMatrix local;
    ComplexMatrix extended;  // full-space matrix
};

enum class EmbedDirection { KetAttach, BraContract };

// A (local op) tensor (anchor ket/bra): rectangular map between a factor
// space and the composite space.
struct EmbeddingMap {
    EmbedDirection direction;
    ComplexMatrix local_op;
    ComplexMatrix anchor;  // column for KetAttach, row for BraContract
    ComplexMatrix matrix;
};

inline ExtendedOperator extend(const ComplexMatrix& local, std::size_t slot,
                               const TensorFactorization& fact) {
    if (slot >= fact.slots()) throw std::out_of_range("extend: slot out of range");
    if (!local.square() || local.rows() != fact.dims[slot])
        throw std::invalid_argument("extend: local operator does not match slot dimension");
    ComplexMatrix full = ComplexMatrix::identity(1);
    for (std::size_t k = 0; k < fact.slots(); ++k)
        full = kron(full, k == slot ? local : ComplexMatrix::identity(fact.dims[k]));
    return ExtendedOperator{fact, slot, local, std::move(full)};
}

inline EmbeddingMap embed_ket(const ComplexMatrix& local, const Ket& anchor) {
    if (anchor.vector.cols() != 1)
        throw std::invalid_argument("embed_ket: anchor must be a column");
    return EmbeddingMap{EmbedDirection::KetAttach, local, anchor.vector,
                        kron(local, anchor.vector)};
}

inline EmbeddingMap embed_bra(const ComplexMatrix& local, const ComplexMatrix& anchor_bra) {
    if (anchor_bra.rows() != 1)
        throw std::invalid_argument("embed_bra: anchor must be a row");
    double n2 = 0.0;
    for (cxd z : anchor_bra.data()) n2 += std::norm(z);
    if (std::abs(std::sqrt(n2) - 1.0) > kDefaultTol)
        throw std::invalid_argument("embed_bra: anchor is not unit-norm");
    return EmbeddingMap{EmbedDirection::BraContract, local, anchor_bra,
                        kron(local, anchor_bra)};
}

// Computational basis of a factor, as columns.
inline std::vector<ComplexMatrix> computational_basis(std::size_t dim) {
    std::vector<ComplexMatrix> basis;
    basis.reserve(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        ComplexMatrix v(dim, 1);
        v(k, 0) = 1.0;
        basis.push_back(std::move(v));
    }
    return basis;
}

namespace detail {

// Flatten/unflatten helpers for one distinguished slot of a factorization:
// composite index = prefix * (d_slot * suffix_stride) + digit * suffix_stride + suffix.
struct SlotSplit {
    std::size_t d_slot;
    std::size_t suffix_stride;  // product of dims after the slot
    std::size_t prefix_count;   // product of dims before the slot

    static SlotSplit at(const TensorFactorization& fact, std::size_t slot) {
        SlotSplit s{fact.dims[slot], 1, 1};
        for (std::size_t k = slot + 1; k < fact.slots(); ++k) s.suffix_stride *= fact.dims[k];
        for (std::size_t k = 0; k < slot; ++k) s.prefix_count *= fact.dims[k];
        return s;
    }

    std::size_t combine(std::size_t prefix, std::size_t digit, std::size_t suffix) const {
        return (prefix * d_slot + digit) * suffix_stride + suffix;
    }
};

}  // namespace detail

// Literal embedding-map sum: rho_A = sum_j (1 (x) <b_j|) rho (1 (x) |b_j>).
// Supports any slot of a multipartite factorization; the identity factor is
// the full tensor identity on the kept slots.
inline DensityOperator partial_trace_via_embeddings(const DensityOperator& rho,
                                                    std::size_t traced_slot,
                                                    const std::vector<ComplexMatrix>& basis) {
    const TensorFactorization& fact = rho.factorization;
    if (traced_slot >= fact.slots())
        throw std::out_of_range("partial_trace_via_embeddings: slot out of range");
    if (fact.slots() < 2)
        throw std::invalid_argument("partial_trace_via_embeddings: nothing to keep");
    const std::size_t d_tr = fact.dims[traced_slot];
    if (basis.size() != d_tr || basis[0].rows() != d_tr)
        throw std::invalid_argument("partial_trace_via_embeddings: basis does not span traced factor");
    if (!check_orthonormal(basis, kBasisTol))
        throw std::invalid_argument("partial_trace_via_embeddings: basis is not orthonormal");

    // Permute nothing: build 1_pre (x) |b_j> (x) 1_post attach maps directly.
    std::vector<std::size_t> kept_dims;
    for (std::size_t k = 0; k < fact.slots(); ++k)
        if (k != traced_slot) kept_dims.push_back(fact.dims[k]);
    TensorFactorization kept_fact(kept_dims);
    const std::size_t d_keep = kept_fact.total_dim();

    const auto split = detail::SlotSplit::at(fact, traced_slot);

    ComplexMatrix acc(d_keep, d_keep);
    for (const ComplexMatrix& b : basis) {
        // Attach map M_j: kept space -> full space, column layout follows the
        // fixed (prefix, digit, suffix) composite-index convention.
        ComplexMatrix attach(rho.dim(), d_keep);
        for (std::size_t pre = 0; pre < split.prefix_count; ++pre)
            for (std::size_t suf = 0; suf < split.suffix_stride; ++suf) {
                const std::size_t kept_idx = pre * split.suffix_stride + suf;
                for (std::size_t dig = 0; dig < split.d_slot; ++dig)
                    attach(split.combine(pre, dig, suf), kept_idx) = b(dig, 0);
            }
        acc += matmul(dagger(attach), matmul(rho.matrix, attach));
    }
    return DensityOperator(kept_fact, std::move(acc));
}

// Bipartite convenience: default computational basis over the traced slot.
inline DensityOperator partial_trace_via_embeddings(const DensityOperator& rho,
                                                    std::size_t traced_slot) {
    return partial_trace_via_embeddings(rho, traced_slot,
                                        computational_basis(rho.factorization.dims[traced_slot]));
}

// Mixed-radix strided contraction: sums traced digits in the computational
// basis with no embedding matrices or Kronecker intermediates. keep = all
// slots returns the input unchanged.
inline DensityOperator partial_trace_fast(const DensityOperator& rho,
                                          const std::vector<std::size_t>& keep) {
    const TensorFactorization& fact = rho.factorization;
    if (keep.empty()) throw std::invalid_argument("partial_trace_fast: empty keep set");
    std::vector<bool> kept(fact.slots(), false);
    for (std::size_t s : keep) {
        if (s >= fact.slots()) throw std::out_of_range("partial_trace_fast: slot index out of range");
        kept[s] = true;
    }

    std::vector<std::size_t> kept_dims, traced_dims;
    for (std::size_t k = 0; k < fact.slots(); ++k)
        (kept[k] ? kept_dims : traced_dims).push_back(fact.dims[k]);
    if (traced_dims.empty()) return rho;

    const std::size_t d_keep = std::accumulate(kept_dims.begin(), kept_dims.end(),
                                               std::size_t{1}, std::multiplies<>{});
    const std::size_t d_tr = rho.dim() / d_keep;

    // Strides of each slot in the full composite index.
    std::vector<std::size_t> stride(fact.slots(), 1);
    for (std::size_t k = fact.slots(); k-- > 1;) stride[k - 1] = stride[k] * fact.dims[k];

    // full index = sum over kept slots of kept-digit*stride + same for traced.
    auto expand = [&](std::size_t packed, bool take_kept) {
        std::size_t full = 0;
        for (std::size_t k = fact.slots(); k-- > 0;) {
            if (kept[k] != take_kept) continue;
            full += (packed % fact.dims[k]) * stride[k];
            packed /= fact.dims[k];
        }
        return full;
    };

    std::vector<std::size_t> kept_offset(d_keep), traced_offset(d_tr);
    for (std::size_t i = 0; i < d_keep; ++i) kept_offset[i] = expand(i, true);
    for (std::size_t t = 0; t < d_tr; ++t) traced_offset[t] = expand(t, false);

    ComplexMatrix out(d_keep, d_keep);
    for (std::size_t i = 0; i < d_keep; ++i)
        for (std::size_t j = 0; j < d_keep; ++j) {
            cxd sum{0.0, 0.0};
            for (std::size_t t = 0; t < d_tr; ++t)
                sum += rho.matrix(kept_offset[i] + traced_offset[t],
                                  kept_offset[j] + traced_offset[t]);
            out(i, j) = sum;
        }
    return DensityOperator(TensorFactorization(kept_dims), std::move(out));
}

// Numerical evaluation of each displayed intermediate of the closure-relation
// derivation, for the populations <a_i| . |a_i>. Steps:
//   0: sum_j <a_i,b_j| rho |a_i,b_j>                        (joint marginal)
//   1: double closure insertion over k, k'
//   2: same with projectors split into attach/contract map compositions
//   3: delta-collapsed single sum over the embedding maps
//   4: <a_i| rho_A |a_i> with rho_A from the embedding-map partial trace
struct StepReport {
    std::vector<std::string> step_names;
    std::vector<double> step_deviations;  // max over i between consecutive steps
    double max_deviation = 0.0;
};

inline StepReport derivation_walkthrough(const DensityOperator& rho,
                                         const std::vector<ComplexMatrix>& basis_a,
                                         const std::vector<ComplexMatrix>& basis_b) {
    if (rho.factorization.slots() != 2)
        throw std::invalid_argument("derivation_walkthrough: state must be bipartite");
    const std::size_t d_a = rho.factorization.dims[0];
    const std::size_t d_b = rho.factorization.dims[1];
    if (!check_orthonormal(basis_a, kBasisTol) || !check_orthonormal(basis_b, kBasisTol))
        throw std::invalid_argument("derivation_walkthrough: bases are not orthonormal");
    if (basis_a.size() != d_a || basis_b.size() != d_b)
        throw std::invalid_argument("derivation_walkthrough: basis sizes do not match factors");

    auto sandwich = [&](const ComplexMatrix& op, const ComplexMatrix& ket) {
        return matmul(dagger(ket), matmul(op, ket))(0, 0);
    };

    const ComplexMatrix id_a = ComplexMatrix::identity(d_a);

    // Projector form 1_A (x) |b_k><b_k| and its attach/contract factors.
    std::vector<ComplexMatrix> proj(d_b), attach(d_b), contract(d_b);
    for (std::size_t k = 0; k < d_b; ++k) {
        attach[k] = kron(id_a, basis_b[k]);               // (d_a d_b) x d_a
        contract[k] = kron(id_a, dagger(basis_b[k]));     // d_a x (d_a d_b)
        ComplexMatrix bb(d_b, d_b);
        for (std::size_t r = 0; r < d_b; ++r)
            for (std::size_t c = 0; c < d_b; ++c)
                bb(r, c) = basis_b[k](r, 0) * std::conj(basis_b[k](c, 0));
        proj[k] = kron(id_a, bb);
    }

    const DensityOperator rho_a = partial_trace_via_embeddings(rho, 1, basis_b);

    const std::size_t n_steps = 5;
    std::vector<std::vector<double>> pops(n_steps, std::vector<double>(d_a, 0.0));

    for (std::size_t i = 0; i < d_a; ++i) {
        for (std::size_t j = 0; j < d_b; ++j) {
            const ComplexMatrix ab = kron(basis_a[i], basis_b[j]);
            pops[0][i] += sandwich(rho.matrix, ab).real();
            cxd s1{0.0, 0.0}, s2{0.0, 0.0};
            for (std::size_t k = 0; k < d_b; ++k)
                for (std::size_t kp = 0; kp < d_b; ++kp) {
                    s1 += matmul(dagger(ab),
                                 matmul(proj[k], matmul(rho.matrix, matmul(proj[kp], ab))))(0, 0);
                    s2 += matmul(dagger(ab),
                                 matmul(attach[k],
                                        matmul(contract[k],
                                               matmul(rho.matrix,
                                                      matmul(attach[kp], matmul(contract[kp], ab))))))(0, 0);
                }
            pops[1][i] += s1.real();
            pops[2][i] += s2.real();
        }
        for (std::size_t j = 0; j < d_b; ++j) {
            const ComplexMatrix reduced_j =
                matmul(contract[j], matmul(rho.matrix, attach[j]));
            pops[3][i] += sandwich(reduced_j, basis_a[i]).real();
        }
        pops[4][i] = sandwich(rho_a.matrix, basis_a[i]).real();
    }

    StepReport rep;
    rep.step_names = {"joint-marginal -> double-closure",
                      "double-closure -> map-composition",
                      "map-composition -> delta-collapse",
                      "delta-collapse -> reduced-populations"};
    for (std::size_t s = 0; s + 1 < n_steps; ++s) {
        double dev = 0.0;
        for (std::size_t i = 0; i < d_a; ++i)
            dev = std::max(dev, std::abs(pops[s][i] - pops[s + 1][i]));
        rep.step_deviations.push_back(dev);
        rep.max_deviation = std::max(rep.max_deviation, dev);
    }
    return rep;
}

}  // namespace qmargin
