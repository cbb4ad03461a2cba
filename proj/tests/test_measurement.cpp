#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qmargin/measurement.hpp"
#include "test_helpers.hpp"

using namespace qmargin;
using namespace qmargin::testing;

namespace {

const DensityOperator kMaxMixed2(TensorFactorization({2}),
                                 ComplexMatrix::identity(2) * cxd{0.5, 0});

}  // namespace

TEST_CASE("observable_from_matrix: Z, identity degeneracy, near-tie grouping") {
    const Observable z = observable_from_matrix(kPauliZ);
    CHECK(z.eigenvalues == std::vector<double>{1.0, -1.0});
    CHECK(z.degeneracy_groups.size() == 2);

    const Observable id = observable_from_matrix(ComplexMatrix::identity(2));
    CHECK(id.degeneracy_groups.size() == 1);
    CHECK(id.degeneracy_groups[0].size() == 2);

    ComplexMatrix near(3, 3);
    near(0, 0) = 1.0;
    near(1, 1) = 1.0 + 1e-14;
    near(2, 2) = 5.0;
    const Observable grouped = observable_from_matrix(near, 1e-12);
    REQUIRE(grouped.degeneracy_groups.size() == 2);
    CHECK(grouped.degeneracy_groups[0].size() == 1);  // {5}
    CHECK(grouped.degeneracy_groups[1].size() == 2);  // {1, 1+1e-14}

    ComplexMatrix nonherm(2, 2);
    nonherm(0, 1) = 1.0;
    CHECK_THROWS_AS(observable_from_matrix(nonherm), std::invalid_argument);
}

TEST_CASE("born_probs examples") {
    const Observable z = pauli_z_observable();
    const Observable x = pauli_x_observable();

    const ProbabilityDistribution mm = born_probs(kMaxMixed2, z);
    CHECK(std::abs(mm.probs[0] - 0.5) < 1e-15);
    CHECK(std::abs(mm.probs[1] - 0.5) < 1e-15);

    const DensityOperator plus = from_pure(ket_plus());
    const ProbabilityDistribution pz = born_probs(plus, z);
    CHECK(std::abs(pz.probs[0] - 0.5) < 1e-12);
    CHECK(std::abs(pz.probs[1] - 0.5) < 1e-12);

    const ProbabilityDistribution px = born_probs(plus, x);
    CHECK(std::abs(px.probs[0] - 1.0) < 1e-10);  // +1 eigenstate
    CHECK(std::abs(px.probs[1]) < 1e-10);

    CHECK_THROWS_AS(born_probs(random_density(3, 0), z), std::invalid_argument);
}

TEST_CASE("joint_born_probs: product factorization, Bell correlations, identity obs") {
    const Observable z = pauli_z_observable();

    const DensityOperator rho_a = random_density(2, 10);
    const DensityOperator rho_b = random_density(2, 11);
    const JointDistribution joint = joint_born_probs(product_state(rho_a, rho_b), z, z);
    const ProbabilityDistribution pa = born_probs(rho_a, z);
    const ProbabilityDistribution pb = born_probs(rho_b, z);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(std::abs(joint.probs[i][j] - pa.probs[i] * pb.probs[j]) < 1e-12);

    const JointDistribution bell = joint_born_probs(bell_phi_plus(), z, z);
    CHECK(std::abs(bell.probs[0][0] - 0.5) < 1e-14);
    CHECK(std::abs(bell.probs[1][1] - 0.5) < 1e-14);
    CHECK(bell.probs[0][1] < 1e-14);
    CHECK(bell.probs[1][0] < 1e-14);

    const Observable id2 = observable_from_matrix(ComplexMatrix::identity(2));
    const JointDistribution trivial = joint_born_probs(bell_phi_plus(), id2, id2);
    REQUIRE(trivial.outcomes_a.size() == 1);
    REQUIRE(trivial.outcomes_b.size() == 1);
    CHECK(std::abs(trivial.probs[0][0] - 1.0) < 1e-12);
}

TEST_CASE("marginalize examples") {
    JointDistribution uniform{{0.0, 1.0}, {0.0, 1.0}, {{0.25, 0.25}, {0.25, 0.25}}};
    const ProbabilityDistribution m = marginalize(uniform, Side::A);
    CHECK(m.probs == std::vector<double>{0.5, 0.5});

    const JointDistribution bell = joint_born_probs(bell_phi_plus(), pauli_z_observable(),
                                                    pauli_z_observable());
    for (Side s : {Side::A, Side::B}) {
        const ProbabilityDistribution pm = marginalize(bell, s);
        CHECK(std::abs(pm.probs[0] - 0.5) < 1e-14);
        CHECK(std::abs(pm.probs[1] - 0.5) < 1e-14);
    }

    JointDistribution point{{0.0, 1.0}, {0.0, 1.0}, {{0.0, 1.0}, {0.0, 0.0}}};
    const ProbabilityDistribution pp = marginalize(point, Side::A);
    CHECK(pp.probs == std::vector<double>{1.0, 0.0});
}

TEST_CASE("verify_marginal_consistency: Bell, random corpus, negative control") {
    const Observable z = pauli_z_observable();
    const ConsistencyReport bell_rep =
        verify_marginal_consistency(bell_phi_plus(), z, z, 1e-10);
    CHECK(bell_rep.pass);
    CHECK(bell_rep.max_deviation <= 1e-12);

    SplitMix64 rng(123);
    const DensityOperator rho = random_density(TensorFactorization({3, 4}), 99);
    const Observable oa = random_observable(3, rng);
    const Observable ob = random_observable(4, rng);
    CHECK(verify_marginal_consistency(rho, oa, ob, 1e-10).pass);

    // Negative control: substitute I/d for a non-maximally-mixed rho_A.
    const ProbabilityDistribution rhs = marginalize(joint_born_probs(rho, oa, ob), Side::A);
    const DensityOperator fake(TensorFactorization({3}),
                               ComplexMatrix::identity(3) * cxd{1.0 / 3.0, 0});
    const ProbabilityDistribution lhs = born_probs(fake, oa);
    double dev = 0.0;
    for (std::size_t i = 0; i < lhs.probs.size(); ++i)
        dev = std::max(dev, std::abs(lhs.probs[i] - rhs.probs[i]));
    CHECK(dev > 1e-10);
}

TEST_CASE("property: consistency over dims {2,3,4}^2 and the symmetric B side") {
    SplitMix64 rng(321);
    int trial = 0;
    for (std::size_t da : {2u, 3u, 4u})
        for (std::size_t db : {2u, 3u, 4u}) {
            const DensityOperator rho =
                random_density(TensorFactorization({da, db}), 700 + trial++);
            const Observable oa = random_observable(da, rng);
            const Observable ob = random_observable(db, rng);
            CHECK(verify_marginal_consistency(rho, oa, ob, 1e-10).pass);

            // <b_j| rho_B |b_j> = sum_i P_AB(a_i, b_j).
            const DensityOperator rho_b = partial_trace_fast(rho, {1});
            const ProbabilityDistribution lhs = born_probs(rho_b, ob);
            const ProbabilityDistribution rhs =
                marginalize(joint_born_probs(rho, oa, ob), Side::B);
            for (std::size_t j = 0; j < lhs.probs.size(); ++j)
                CHECK(std::abs(lhs.probs[j] - rhs.probs[j]) < 1e-10);
        }
}

TEST_CASE("property: born_probs normalization and global-phase invariance") {
    SplitMix64 rng(11);
    for (int t = 0; t < 10; ++t) {
        const std::size_t d = 2 + rng.next_u64() % 3;
        const DensityOperator rho = random_density(d, 800 + t);
        Observable obs = random_observable(d, rng);
        const ProbabilityDistribution p1 = born_probs(rho, obs);
        double sum = 0.0;
        for (double p : p1.probs) sum += p;
        CHECK(std::abs(sum - 1.0) < 1e-9);

        // Re-phase every eigenvector; probabilities must not move.
        for (auto& v : obs.eigenvectors) {
            const double theta = rng.next_double() * 2.0 * M_PI;
            v *= cxd{std::cos(theta), std::sin(theta)};
        }
        const ProbabilityDistribution p2 = born_probs(rho, obs);
        for (std::size_t k = 0; k < p1.probs.size(); ++k)
            CHECK(std::abs(p1.probs[k] - p2.probs[k]) < 1e-12);
    }
}

TEST_CASE("degenerate grouping is consistent with member-wise probabilities") {
    // Observable with an exactly degenerate pair.
    ComplexMatrix m(3, 3);
    m(0, 0) = 2.0;
    m(1, 1) = 2.0;
    m(2, 2) = -1.0;
    const Observable grouped = observable_from_matrix(m);
    REQUIRE(grouped.degeneracy_groups.size() == 2);

    const DensityOperator rho = random_density(3, 42);
    const ProbabilityDistribution p = born_probs(rho, grouped);

    double member_sum = 0.0;
    for (std::size_t idx : grouped.degeneracy_groups[0]) {
        const ComplexMatrix& v = grouped.eigenvectors[idx];
        member_sum += matmul(dagger(v), matmul(rho.matrix, v))(0, 0).real();
    }
    CHECK(std::abs(member_sum - p.probs[0]) < 1e-12);
}

TEST_CASE("extended observables commute (compatibility guard)") {
    SplitMix64 rng(999);
    const TensorFactorization fact({3, 2});
    const Observable oa = random_observable(3, rng);
    const Observable ob = random_observable(2, rng);
    const ComplexMatrix c = commutator(extend(oa.to_matrix(), 0, fact).extended,
                                       extend(ob.to_matrix(), 1, fact).extended);
    CHECK(c.max_abs() < 1e-10);
}

TEST_CASE("expectation: fixtures and the two-route oracle") {
    const Observable z = pauli_z_observable();
    CHECK(std::abs(expectation(kMaxMixed2, z)) < 1e-14);
    CHECK(std::abs(expectation(from_pure(ket_zero()), z) - 1.0) < 1e-14);

    SplitMix64 rng(77);
    for (int t = 0; t < 10; ++t) {
        const std::size_t d = 2 + rng.next_u64() % 3;
        const DensityOperator rho = random_density(d, 900 + t);
        const Observable obs = random_observable(d, rng);
        const double via_probs = expectation(rho, obs);
        const double via_trace = trace(matmul(rho.matrix, obs.to_matrix())).real();
        CHECK(std::abs(via_probs - via_trace) < 1e-10);
    }
}

TEST_CASE("sample_joint: point mass, Bell zero outcomes, determinism") {
    JointDistribution point{{0.0}, {1.0}, {{1.0}}};
    const SampleCounts pc = sample_joint(point, 100, 3);
    CHECK(pc.counts[0][0] == 100);

    const JointDistribution bell = joint_born_probs(bell_phi_plus(), pauli_z_observable(),
                                                    pauli_z_observable());
    const SampleCounts sc = sample_joint(bell, 100000, 7);
    CHECK(sc.counts[0][1] == 0);
    CHECK(sc.counts[1][0] == 0);
    CHECK(sc.counts[0][0] + sc.counts[1][1] == 100000);

    const SampleCounts sc2 = sample_joint(bell, 100000, 7);
    CHECK(sc.counts == sc2.counts);
    CHECK_THROWS_AS(sample_joint(bell, 0, 0), std::invalid_argument);
}

TEST_CASE("empirical_compare: exact match, concentration sweep, skew flagged") {
    JointDistribution point{{0.0}, {1.0}, {{1.0}}};
    const SampleCounts pc = sample_joint(point, 1000, 0);
    const DeviationReport exact = empirical_compare(pc, point);
    CHECK(exact.deviations[0] == 0.0);
    CHECK_FALSE(exact.any_flagged);

    // Bell marginal concentration: >= 99% of 100 seeds inside 3 sigma.
    const JointDistribution bell = joint_born_probs(bell_phi_plus(), pauli_z_observable(),
                                                    pauli_z_observable());
    const ProbabilityDistribution marg = marginalize(bell, Side::A);
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const SampleCounts c = sample_joint(bell, 100000, seed);
        if (!empirical_compare(c, marg, Side::A).any_flagged) ++ok;
    }
    CHECK(ok >= 99);

    // Deliberately skewed counts get flagged.
    SampleCounts skew;
    skew.counts = {{90000, 0}, {0, 10000}};
    skew.total = 100000;
    CHECK(empirical_compare(skew, bell).any_flagged);
}
