#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qmargin/io.hpp"
#include "test_helpers.hpp"

using namespace qmargin;
using namespace qmargin::testing;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("qmargin_io_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("density file round-trip is bit-exact") {
    TempDir tmp;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const DensityOperator rho = random_density(TensorFactorization({2, 3}), seed);
        const std::string p = tmp.file("rho.json");
        write_density(p, rho);
        const DensityOperator back = read_density(p);
        CHECK(back.factorization.dims == rho.factorization.dims);
        CHECK(max_abs_diff(back.matrix, rho.matrix) == 0.0);

        // Write-read-write produces identical bytes.
        const std::string p2 = tmp.file("rho2.json");
        write_density(p2, back);
        std::ifstream f1(p), f2(p2);
        const std::string s1((std::istreambuf_iterator<char>(f1)), {});
        const std::string s2((std::istreambuf_iterator<char>(f2)), {});
        CHECK(s1 == s2);
    }
}

TEST_CASE("ket files load as pure density operators") {
    TempDir tmp;
    const std::string p = tmp.file("bell.json");
    write_ket(p, bell_phi_plus_ket());
    const DensityOperator rho = read_density(p);
    CHECK(max_abs_diff(rho.matrix, bell_phi_plus().matrix) == 0.0);
}

TEST_CASE("observable file round-trip preserves the spectrum") {
    TempDir tmp;
    SplitMix64 rng(4);
    const ComplexMatrix h = random_hermitian(3, rng);
    const std::string p = tmp.file("obs.json");
    write_observable(p, h);
    const Observable obs = read_observable(p);
    CHECK(max_abs_diff(obs.to_matrix(), h) < 1e-10);
}

TEST_CASE("malformed inputs are rejected") {
    TempDir tmp;

    const std::string garbage = tmp.file("garbage.json");
    std::ofstream(garbage) << "{ not json";
    CHECK_THROWS_AS(read_density(garbage), IoError);

    const std::string missing = tmp.file("does_not_exist.json");
    CHECK_THROWS_AS(read_density(missing), IoError);

    // Valid JSON, wrong payload length.
    const std::string short_file = tmp.file("short.json");
    std::ofstream(short_file) << R"({"kind":"density","dims":[2],"matrix":[[1.0,0.0]]})";
    CHECK_THROWS_AS(read_density(short_file), IoError);

    // Trace 0.9 fails load-time validation.
    const std::string bad_trace = tmp.file("bad_trace.json");
    std::ofstream(bad_trace)
        << R"({"kind":"density","dims":[2],"matrix":[[0.5,0.0],[0.0,0.0],[0.0,0.0],[0.4,0.0]]})";
    CHECK_THROWS_AS(read_density(bad_trace), IoError);

    const std::string bad_obs = tmp.file("bad_obs.json");
    std::ofstream(bad_obs) << R"({"kind":"observable","dim":2,"matrix":[[1.0,0.0]]})";
    CHECK_THROWS_AS(read_observable(bad_obs), IoError);
}
