// Born-rule distributions, joint distributions of compatible extended
// observables, classical marginalization, the marginal-consistency verifier,
// and deterministic Monte Carlo sampling.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qmargin/complex_matrix.hpp"
#include "qmargin/composite.hpp"
#include "qmargin/linalg.hpp"
#include "qmargin/rng.hpp"
#include "qmargin/states.hpp"

namespace qmargin {

inline constexpr double kDefaultDegeneracyTol = 1e-9;

// Spectral data of a Hermitian observable, with eigenvalues grouped by
// equality within tol_degeneracy (consecutive in descending order).
struct Observable {
    std::size_t dimension = 0;
    std::vector<double> eigenvalues;          // descending
    std::vector<ComplexMatrix> eigenvectors;  // orthonormal columns, same order
    std::vector<std::vector<std::size_t>> degeneracy_groups;

    ComplexMatrix to_matrix() const {
        SpectralDecomposition sd{eigenvalues, eigenvectors};
        return reconstruct(sd);
    }
};

inline Observable observable_from_spectral(std::vector<double> eigenvalues,
                                           std::vector<ComplexMatrix> eigenvectors,
                                           double tol_degeneracy = kDefaultDegeneracyTol) {
    Observable obs;
    obs.dimension = eigenvectors.empty() ? 0 : eigenvectors[0].rows();
    if (!check_orthonormal(eigenvectors, kBasisTol))
        throw std::invalid_argument("Observable: eigenvectors are not orthonormal");

    // Sort descending, stable so equal values keep draw order.
    std::vector<std::size_t> order(eigenvalues.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return eigenvalues[i] > eigenvalues[j]; });
    for (std::size_t k : order) {
        obs.eigenvalues.push_back(eigenvalues[k]);
        obs.eigenvectors.push_back(eigenvectors[k]);
    }

    // Group consecutive eigenvalues within tol_degeneracy of the group head.
    for (std::size_t i = 0; i < obs.eigenvalues.size(); ++i) {
        if (!obs.degeneracy_groups.empty() &&
            std::abs(obs.eigenvalues[obs.degeneracy_groups.back().front()] - obs.eigenvalues[i]) <=
                tol_degeneracy) {
            obs.degeneracy_groups.back().push_back(i);
        } else {
            obs.degeneracy_groups.push_back({i});
        }
    }
    return obs;
}

inline Observable observable_from_matrix(const ComplexMatrix& m,
                                         double tol_degeneracy = kDefaultDegeneracyTol) {
    if (hermiticity_residual(m) > 1e-8)
        throw std::invalid_argument("observable_from_matrix: input is not Hermitian");
    SpectralDecomposition sd = hermitian_eig(m, kDefaultTol);
    return observable_from_spectral(std::move(sd.eigenvalues), std::move(sd.eigenvectors),
                                    tol_degeneracy);
}

inline Observable pauli_z_observable() {
    return observable_from_matrix(ComplexMatrix{{cxd{1, 0}, cxd{0, 0}}, {cxd{0, 0}, cxd{-1, 0}}});
}

inline Observable pauli_x_observable() {
    return observable_from_matrix(ComplexMatrix{{cxd{0, 0}, cxd{1, 0}}, {cxd{1, 0}, cxd{0, 0}}});
}

// Haar-like random observable: orthonormalized Ginibre eigenbasis, distinct
// Gaussian-jittered eigenvalues.
inline Observable random_observable(std::size_t dim, SplitMix64& rng) {
    // Gram-Schmidt on a Ginibre draw.
    std::vector<ComplexMatrix> cols;
    for (std::size_t c = 0; c < dim; ++c) {
        ComplexMatrix v(dim, 1);
        for (std::size_t r = 0; r < dim; ++r) v(r, 0) = rng.next_complex_gaussian();
        for (const ComplexMatrix& u : cols) {
            cxd ov{0.0, 0.0};
            for (std::size_t r = 0; r < dim; ++r) ov += std::conj(u(r, 0)) * v(r, 0);
            for (std::size_t r = 0; r < dim; ++r) v(r, 0) -= ov * u(r, 0);
        }
        double n2 = 0.0;
        for (std::size_t r = 0; r < dim; ++r) n2 += std::norm(v(r, 0));
        const double inv = 1.0 / std::sqrt(n2);
        for (std::size_t r = 0; r < dim; ++r) v(r, 0) *= inv;
        cols.push_back(std::move(v));
    }
    std::vector<double> vals;
    for (std::size_t k = 0; k < dim; ++k)
        vals.push_back(static_cast<double>(dim - k) + 0.1 * rng.next_gaussian());
    return observable_from_spectral(std::move(vals), std::move(cols));
}

struct ProbabilityDistribution {
    std::vector<double> outcomes;  // real labels (group-head eigenvalues)
    std::vector<double> probs;
};

struct JointDistribution {
    std::vector<double> outcomes_a;
    std::vector<double> outcomes_b;
    std::vector<std::vector<double>> probs;  // [i][j]
};

namespace detail {

// Clamp tiny negatives; anything below -1e-12 signals an invalid state upstream.
inline double clamp_prob(double p) {
    if (p < -1e-12)
        throw std::runtime_error("negative probability below tolerance: invalid state upstream");
    return p < 0.0 ? 0.0 : p;
}

}  // namespace detail

// Born rule: group probability Tr(P_g rho) = sum over group members of
// <a_i| rho |a_i>; reduces to a single population when non-degenerate.
inline ProbabilityDistribution born_probs(const DensityOperator& rho, const Observable& obs) {
    if (obs.dimension != rho.dim())
        throw std::invalid_argument("born_probs: observable/state dimension mismatch");
    ProbabilityDistribution dist;
    for (const auto& group : obs.degeneracy_groups) {
        double p = 0.0;
        for (std::size_t idx : group) {
            const ComplexMatrix& v = obs.eigenvectors[idx];
            p += matmul(dagger(v), matmul(rho.matrix, v))(0, 0).real();
        }
        dist.outcomes.push_back(obs.eigenvalues[group.front()]);
        dist.probs.push_back(detail::clamp_prob(p));
    }
    return dist;
}

inline JointDistribution joint_born_probs(const DensityOperator& rho_ab, const Observable& obs_a,
                                          const Observable& obs_b) {
    if (rho_ab.factorization.slots() != 2)
        throw std::invalid_argument("joint_born_probs: state must be bipartite");
    if (obs_a.dimension != rho_ab.factorization.dims[0] ||
        obs_b.dimension != rho_ab.factorization.dims[1])
        throw std::invalid_argument("joint_born_probs: observable/factor dimension mismatch");

    JointDistribution joint;
    for (const auto& ga : obs_a.degeneracy_groups)
        joint.outcomes_a.push_back(obs_a.eigenvalues[ga.front()]);
    for (const auto& gb : obs_b.degeneracy_groups)
        joint.outcomes_b.push_back(obs_b.eigenvalues[gb.front()]);

    joint.probs.assign(joint.outcomes_a.size(),
                       std::vector<double>(joint.outcomes_b.size(), 0.0));
    for (std::size_t gi = 0; gi < obs_a.degeneracy_groups.size(); ++gi)
        for (std::size_t gj = 0; gj < obs_b.degeneracy_groups.size(); ++gj) {
            double p = 0.0;
            for (std::size_t ia : obs_a.degeneracy_groups[gi])
                for (std::size_t jb : obs_b.degeneracy_groups[gj]) {
                    const ComplexMatrix ab = kron(obs_a.eigenvectors[ia], obs_b.eigenvectors[jb]);
                    p += matmul(dagger(ab), matmul(rho_ab.matrix, ab))(0, 0).real();
                }
            joint.probs[gi][gj] = detail::clamp_prob(p);
        }
    return joint;
}

enum class Side { A, B };

inline ProbabilityDistribution marginalize(const JointDistribution& joint, Side keep) {
    ProbabilityDistribution dist;
    if (keep == Side::A) {
        dist.outcomes = joint.outcomes_a;
        for (std::size_t i = 0; i < joint.outcomes_a.size(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < joint.outcomes_b.size(); ++j) s += joint.probs[i][j];
            dist.probs.push_back(s);
        }
    } else {
        dist.outcomes = joint.outcomes_b;
        for (std::size_t j = 0; j < joint.outcomes_b.size(); ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < joint.outcomes_a.size(); ++i) s += joint.probs[i][j];
            dist.probs.push_back(s);
        }
    }
    return dist;
}

struct ConsistencyReport {
    std::vector<double> outcomes;
    std::vector<double> deviations;  // |reduced-state population - joint marginal|
    double max_deviation = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// The central check: populations of the reduced state against the classical
// marginal of the joint Born distribution, per outcome of obs_a.
inline ConsistencyReport verify_marginal_consistency(const DensityOperator& rho_ab,
                                                     const Observable& obs_a,
                                                     const Observable& obs_b,
                                                     double tol = kDefaultTol) {
    const DensityOperator rho_a = partial_trace_fast(rho_ab, {0});
    const ProbabilityDistribution lhs = born_probs(rho_a, obs_a);
    const ProbabilityDistribution rhs = marginalize(joint_born_probs(rho_ab, obs_a, obs_b), Side::A);

    ConsistencyReport rep;
    rep.tolerance = tol;
    rep.outcomes = lhs.outcomes;
    for (std::size_t i = 0; i < lhs.probs.size(); ++i) {
        const double dev = std::abs(lhs.probs[i] - rhs.probs[i]);
        rep.deviations.push_back(dev);
        rep.max_deviation = std::max(rep.max_deviation, dev);
    }
    rep.pass = rep.max_deviation <= tol;
    return rep;
}

inline double expectation(const DensityOperator& rho, const Observable& obs) {
    if (obs.dimension != rho.dim())
        throw std::invalid_argument("expectation: observable/state dimension mismatch");
    // Per-member populations, so the sum equals Tr(rho A) regardless of grouping.
    double e = 0.0;
    for (std::size_t k = 0; k < obs.eigenvalues.size(); ++k) {
        const ComplexMatrix& v = obs.eigenvectors[k];
        e += obs.eigenvalues[k] * matmul(dagger(v), matmul(rho.matrix, v))(0, 0).real();
    }
    return e;
}

struct SampleCounts {
    std::vector<std::vector<std::uint64_t>> counts;  // [i][j]
    std::uint64_t total = 0;
    std::uint64_t seed = 0;
};

// Inverse-CDF sampling over the flattened (i,j) outcome list, one uniform
// draw per shot.
inline SampleCounts sample_joint(const JointDistribution& joint, std::uint64_t n,
                                 std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_joint: n must be >= 1");
    const std::size_t na = joint.outcomes_a.size();
    const std::size_t nb = joint.outcomes_b.size();
    std::vector<double> cdf;
    cdf.reserve(na * nb);
    double acc = 0.0;
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nb; ++j) {
            acc += joint.probs[i][j];
            cdf.push_back(acc);
        }

    SampleCounts out;
    out.counts.assign(na, std::vector<std::uint64_t>(nb, 0));
    out.total = n;
    out.seed = seed;
    SplitMix64 rng(seed);
    for (std::uint64_t shot = 0; shot < n; ++shot) {
        const double u = rng.next_double() * acc;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t flat = static_cast<std::size_t>(it - cdf.begin());
        if (flat >= na * nb) flat = na * nb - 1;
        ++out.counts[flat / nb][flat % nb];
    }
    return out;
}

struct DeviationReport {
    std::vector<double> deviations;     // flattened |freq - p|
    std::vector<double> sigma_bounds;   // flattened 3 sqrt(p(1-p)/n)
    std::vector<bool> flagged;
    bool any_flagged = false;
};

inline DeviationReport empirical_compare(const SampleCounts& counts,
                                         const JointDistribution& reference) {
    const std::size_t na = reference.outcomes_a.size();
    const std::size_t nb = reference.outcomes_b.size();
    if (counts.counts.size() != na || (na && counts.counts[0].size() != nb))
        throw std::invalid_argument("empirical_compare: outcome-set mismatch");
    DeviationReport rep;
    const double n = static_cast<double>(counts.total);
    for (std::size_t i = 0; i < na; ++i)
        for (std::size_t j = 0; j < nb; ++j) {
            const double p = reference.probs[i][j];
            const double freq = static_cast<double>(counts.counts[i][j]) / n;
            const double dev = std::abs(freq - p);
            const double bound = 3.0 * std::sqrt(p * (1.0 - p) / n);
            rep.deviations.push_back(dev);
            rep.sigma_bounds.push_back(bound);
            rep.flagged.push_back(dev > bound);
            rep.any_flagged = rep.any_flagged || dev > bound;
        }
    return rep;
}

inline DeviationReport empirical_compare(const SampleCounts& counts,
                                         const ProbabilityDistribution& reference, Side side) {
    // Marginal comparison: collapse counts along the other side.
    const std::size_t na = counts.counts.size();
    const std::size_t nb = na ? counts.counts[0].size() : 0;
    const std::size_t m = (side == Side::A) ? na : nb;
    if (reference.outcomes.size() != m)
        throw std::invalid_argument("empirical_compare: outcome-set mismatch");
    DeviationReport rep;
    const double n = static_cast<double>(counts.total);
    for (std::size_t k = 0; k < m; ++k) {
        std::uint64_t c = 0;
        if (side == Side::A)
            for (std::size_t j = 0; j < nb; ++j) c += counts.counts[k][j];
        else
            for (std::size_t i = 0; i < na; ++i) c += counts.counts[i][k];
        const double p = reference.probs[k];
        const double dev = std::abs(static_cast<double>(c) / n - p);
        const double bound = 3.0 * std::sqrt(p * (1.0 - p) / n);
        rep.deviations.push_back(dev);
        rep.sigma_bounds.push_back(bound);
        rep.flagged.push_back(dev > bound);
        rep.any_flagged = rep.any_flagged || dev > bound;
    }
    return rep;
}

}  // namespace qmargin
