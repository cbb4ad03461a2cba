#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qmargin/composite.hpp"
#include "qmargin/states.hpp"
#include "test_helpers.hpp"

using namespace qmargin;
using namespace qmargin::testing;

TEST_CASE("from_pure fixtures") {
    const DensityOperator r0 = from_pure(ket_zero());
    CHECK(std::abs(r0.matrix(0, 0) - cxd{1, 0}) == 0.0);
    CHECK(r0.matrix(1, 1) == cxd{0, 0});

    const DensityOperator rp = from_pure(ket_plus());
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            CHECK(std::abs(rp.matrix(i, j) - cxd{0.5, 0}) < 1e-15);

    const DensityOperator bell = bell_phi_plus();
    ComplexMatrix expect(4, 4);
    expect(0, 0) = expect(0, 3) = expect(3, 0) = expect(3, 3) = 0.5;
    CHECK(max_abs_diff(bell.matrix, expect) < 1e-15);
}

TEST_CASE("from_pure rejects non-normalized kets") {
    ComplexMatrix v(2, 1);
    v(0, 0) = 2.0;
    CHECK_THROWS_AS(Ket(TensorFactorization({2}), v), std::invalid_argument);
}

TEST_CASE("product_state basis alignment and trace") {
    const DensityOperator r0 = from_pure(ket_zero());
    const DensityOperator r1 = from_pure(ket_one());
    const DensityOperator p = product_state(r0, r1);
    REQUIRE(p.dim() == 4);
    CHECK(p.matrix(1, 1) == cxd{1, 0});  // diag(0,1,0,0)
    CHECK(std::abs(trace(p.matrix) - cxd{1, 0}) < 1e-15);
    CHECK(p.factorization.dims == std::vector<std::size_t>{2, 2});

    const DensityOperator mixed(TensorFactorization({2}),
                                ComplexMatrix::identity(2) * cxd{0.5, 0});
    const DensityOperator mm = product_state(mixed, mixed);
    CHECK(max_abs_diff(mm.matrix, ComplexMatrix::identity(4) * cxd{0.25, 0}) == 0.0);

    for (std::uint64_t s = 0; s < 10; ++s) {
        const DensityOperator a = random_density(3, s);
        const DensityOperator b = random_density(2, s + 1000);
        CHECK(std::abs(trace(product_state(a, b).matrix) - cxd{1, 0}) < 1e-12);
    }
}

TEST_CASE("random_density: determinism and validity") {
    const DensityOperator a = random_density(3, 42);
    const DensityOperator b = random_density(3, 42);
    CHECK(max_abs_diff(a.matrix, b.matrix) == 0.0);
    CHECK(validate_density(a, 1e-10).pass());
    CHECK_THROWS_AS(random_density(1, 0), std::invalid_argument);
}

TEST_CASE("random_density: eigenvalue floor over a seed sweep") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const DensityOperator rho = random_density(4, seed);
        const auto sd = hermitian_eig(rho.matrix);
        CHECK(sd.eigenvalues.back() >= -1e-12);
    }
}

TEST_CASE("validate_density examples") {
    const DensityOperator mm(TensorFactorization({2}),
                             ComplexMatrix::identity(2) * cxd{0.5, 0});
    CHECK(validate_density(mm).pass());

    ComplexMatrix bad_psd(2, 2);
    bad_psd(0, 0) = 1.5;
    bad_psd(1, 1) = -0.5;
    const ValidationReport r1 = validate_density(DensityOperator(TensorFactorization({2}), bad_psd));
    CHECK(r1.hermitian);
    CHECK(r1.unit_trace);
    CHECK_FALSE(r1.psd);

    ComplexMatrix bad_trace(2, 2);
    bad_trace(0, 0) = 0.7;
    bad_trace(1, 1) = 0.7;
    const ValidationReport r2 =
        validate_density(DensityOperator(TensorFactorization({2}), bad_trace));
    CHECK_FALSE(r2.unit_trace);
    CHECK(std::abs(r2.trace_residual - 0.4) < 1e-15);
}

TEST_CASE("bell fixture: trace, purity, reduced state") {
    const DensityOperator bell = bell_phi_plus();
    CHECK(std::abs(trace(bell.matrix) - cxd{1, 0}) < 1e-15);
    CHECK(std::abs(bell.purity() - 1.0) < 1e-14);
    for (std::size_t slot : {0u, 1u}) {
        const DensityOperator red = partial_trace_fast(bell, {slot});
        CHECK(max_abs_diff(red.matrix, ComplexMatrix::identity(2) * cxd{0.5, 0}) < 1e-15);
    }
}

TEST_CASE("property: generated states are valid with purity in [1/d, 1]") {
    SplitMix64 seeds(7);
    for (int t = 0; t < 20; ++t) {
        const std::size_t d = 2 + seeds.next_u64() % 3;
        const DensityOperator rho = random_density(d, seeds.next_u64());
        CHECK(validate_density(rho, 1e-10).pass());
        const double p = rho.purity();
        CHECK(p >= 1.0 / static_cast<double>(d) - 1e-10);
        CHECK(p <= 1.0 + 1e-10);
    }
}
