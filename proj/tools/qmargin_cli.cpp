// qmargin command-line tool.
//
// Exit codes: 0 = all checks pass, 1 = verification failure, 2 = input or
// usage error.

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmargin/composite.hpp"
#include "qmargin/continuum.hpp"
#include "qmargin/io.hpp"
#include "qmargin/measurement.hpp"
#include "qmargin/states.hpp"

namespace {

using namespace qmargin;

constexpr int kExitPass = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

struct GlobalOpts {
    double tol = 1e-10;
    std::uint64_t seed = 0;
    std::string out;
    bool quiet = false;
};

std::string sci(double x) {
    std::ostringstream ss;
    ss << std::scientific << std::setprecision(5) << x;
    return ss.str();
}

void say(const GlobalOpts& g, const std::string& line) {
    if (!g.quiet) std::cout << line << "\n";
}

Observable load_observable_arg(const std::string& spec, std::size_t dim) {
    if (spec == "z") {
        if (dim != 2) throw IoError("shorthand z requires a dimension-2 factor");
        return pauli_z_observable();
    }
    if (spec == "x") {
        if (dim != 2) throw IoError("shorthand x requires a dimension-2 factor");
        return pauli_x_observable();
    }
    Observable obs = read_observable(spec);
    if (obs.dimension != dim) throw IoError("observable dimension does not match state factor");
    return obs;
}

int cmd_reduce(const GlobalOpts& g, const std::string& in_path,
               const std::vector<std::size_t>& keep, const std::string& basis) {
    const DensityOperator rho = read_density(in_path);
    DensityOperator reduced = rho;
    if (basis == "computational" || basis.empty()) {
        reduced = partial_trace_fast(rho, keep);
    } else {
        // Basis file applies to a single traced slot of a bipartite state.
        if (rho.factorization.slots() != 2 || keep.size() != 1)
            throw IoError("custom basis requires a bipartite state and a single kept slot");
        const std::size_t traced = keep[0] == 0 ? 1 : 0;
        const Observable b = read_observable(basis);
        reduced = partial_trace_via_embeddings(rho, traced, b.eigenvectors);
    }
    const ValidationReport rep = validate_density(reduced, g.tol * 100);
    say(g, "trace     " + sci(trace(reduced.matrix).real()));
    say(g, "purity    " + sci(reduced.purity()));
    say(g, "herm_res  " + sci(rep.hermiticity_residual));
    say(g, "min_eig   " + sci(rep.min_eigenvalue));
    if (!g.out.empty()) write_density(g.out, reduced);
    return rep.pass() ? kExitPass : kExitViolation;
}

int cmd_verify(const GlobalOpts& g, const std::string& in_path, std::size_t trials) {
    double max_dev = 0.0;
    bool all_pass = true;
    for (std::size_t t = 0; t < trials; ++t) {
        SplitMix64 rng(g.seed + t);
        DensityOperator rho = bell_phi_plus();
        if (!in_path.empty()) {
            rho = read_density(in_path);
        } else {
            // Fresh Ginibre state per trial, dims uniform over {2,3,4}^2.
            const std::size_t da = 2 + rng.next_u64() % 3;
            const std::size_t db = 2 + rng.next_u64() % 3;
            rho = random_density(TensorFactorization({da, db}), g.seed * 1000003ULL + t);
        }
        if (rho.factorization.slots() != 2) throw IoError("verify requires a bipartite state");
        const Observable obs_a = random_observable(rho.factorization.dims[0], rng);
        const Observable obs_b = random_observable(rho.factorization.dims[1], rng);
        const ConsistencyReport rep = verify_marginal_consistency(rho, obs_a, obs_b, g.tol);
        max_dev = std::max(max_dev, rep.max_deviation);
        all_pass = all_pass && rep.pass;
    }
    say(g, "trials    " + std::to_string(trials));
    say(g, "max_dev   " + sci(max_dev));
    say(g, std::string("result    ") + (all_pass ? "PASS" : "FAIL"));
    return all_pass ? kExitPass : kExitViolation;
}

int cmd_probs(const GlobalOpts& g, const std::string& in_path, const std::string& obs_spec) {
    const DensityOperator rho = read_density(in_path);
    const Observable obs = load_observable_arg(obs_spec, rho.dim());
    const ProbabilityDistribution dist = born_probs(rho, obs);
    for (std::size_t k = 0; k < dist.outcomes.size(); ++k)
        say(g, sci(dist.outcomes[k]) + "  " + sci(dist.probs[k]));
    return kExitPass;
}

int cmd_joint(const GlobalOpts& g, const std::string& in_path, const std::string& obs_a_spec,
              const std::string& obs_b_spec) {
    const DensityOperator rho = read_density(in_path);
    if (rho.factorization.slots() != 2) throw IoError("joint requires a bipartite state");
    const Observable obs_a = load_observable_arg(obs_a_spec, rho.factorization.dims[0]);
    const Observable obs_b = load_observable_arg(obs_b_spec, rho.factorization.dims[1]);
    const JointDistribution joint = joint_born_probs(rho, obs_a, obs_b);
    for (std::size_t i = 0; i < joint.outcomes_a.size(); ++i)
        for (std::size_t j = 0; j < joint.outcomes_b.size(); ++j)
            say(g, sci(joint.outcomes_a[i]) + "  " + sci(joint.outcomes_b[j]) + "  " +
                       sci(joint.probs[i][j]));
    return kExitPass;
}

int cmd_sample(const GlobalOpts& g, const std::string& in_path, const std::string& obs_a_spec,
               const std::string& obs_b_spec, std::uint64_t n) {
    if (n < 1) throw IoError("sample: n must be >= 1");
    const DensityOperator rho = read_density(in_path);
    if (rho.factorization.slots() != 2) throw IoError("sample requires a bipartite state");
    const Observable obs_a = load_observable_arg(obs_a_spec, rho.factorization.dims[0]);
    const Observable obs_b = load_observable_arg(obs_b_spec, rho.factorization.dims[1]);
    const JointDistribution joint = joint_born_probs(rho, obs_a, obs_b);
    const SampleCounts counts = sample_joint(joint, n, g.seed);

    say(g, "counts (a, b, count):");
    for (std::size_t i = 0; i < joint.outcomes_a.size(); ++i)
        for (std::size_t j = 0; j < joint.outcomes_b.size(); ++j)
            say(g, sci(joint.outcomes_a[i]) + "  " + sci(joint.outcomes_b[j]) + "  " +
                       std::to_string(counts.counts[i][j]));

    const ProbabilityDistribution ref_a = marginalize(joint, Side::A);
    const ProbabilityDistribution ref_b = marginalize(joint, Side::B);
    const DeviationReport rep_a = empirical_compare(counts, ref_a, Side::A);
    const DeviationReport rep_b = empirical_compare(counts, ref_b, Side::B);

    say(g, "marginal A (outcome, ref, |dev|, 3sigma, flag):");
    for (std::size_t k = 0; k < ref_a.outcomes.size(); ++k)
        say(g, sci(ref_a.outcomes[k]) + "  " + sci(ref_a.probs[k]) + "  " +
                   sci(rep_a.deviations[k]) + "  " + sci(rep_a.sigma_bounds[k]) + "  " +
                   (rep_a.flagged[k] ? "FLAG" : "ok"));
    say(g, "marginal B (outcome, ref, |dev|, 3sigma, flag):");
    for (std::size_t k = 0; k < ref_b.outcomes.size(); ++k)
        say(g, sci(ref_b.outcomes[k]) + "  " + sci(ref_b.probs[k]) + "  " +
                   sci(rep_b.deviations[k]) + "  " + sci(rep_b.sigma_bounds[k]) + "  " +
                   (rep_b.flagged[k] ? "FLAG" : "ok"));
    return (rep_a.any_flagged || rep_b.any_flagged) ? kExitViolation : kExitPass;
}

int cmd_continuum_demo(const GlobalOpts& g, double s, double S, double lo, double hi,
                       std::size_t n) {
    const Grid grid(lo, hi, n);
    const DemoReport rep = gaussian_demo(s, S, grid);
    say(g, "sup_error          " + sci(rep.sup_error));
    say(g, "sup_error_refined  " + sci(rep.sup_error_refined));
    say(g, "refinement_ratio   " + sci(rep.refinement_ratio));
    say(g, "purity             " + sci(rep.purity));
    const bool ok = rep.sup_error <= 1e-3;
    say(g, std::string("result             ") + (ok ? "PASS" : "FAIL"));
    return ok ? kExitPass : kExitViolation;
}

int cmd_walkthrough(const GlobalOpts& g, const std::string& in_path) {
    const DensityOperator rho = read_density(in_path);
    if (rho.factorization.slots() != 2) throw IoError("walkthrough requires a bipartite state");
    const StepReport rep =
        derivation_walkthrough(rho, computational_basis(rho.factorization.dims[0]),
                               computational_basis(rho.factorization.dims[1]));
    for (std::size_t k = 0; k < rep.step_names.size(); ++k)
        say(g, rep.step_names[k] + "  " + sci(rep.step_deviations[k]));
    say(g, "max_deviation  " + sci(rep.max_deviation));
    const bool ok = rep.max_deviation <= g.tol;
    say(g, std::string("result  ") + (ok ? "PASS" : "FAIL"));
    return ok ? kExitPass : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Composite quantum-state algebra: reduced states, Born-rule "
                 "marginals, and consistency checks"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--tol", g.tol, "Numerical tolerance")->capture_default_str();
    app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
    app.add_option("--out", g.out, "Output file path");
    app.add_flag("--quiet", g.quiet, "Suppress report output");

    std::string in_path, basis = "computational", obs_spec = "z", obs_a_spec = "z",
                obs_b_spec = "z";
    std::vector<std::size_t> keep{0};
    std::size_t trials = 200, grid_n = 128;
    std::uint64_t n_shots = 100000;
    double s = 0.5, S = 2.0, lo = -8.0, hi = 8.0;

    auto* reduce = app.add_subcommand("reduce", "Partial trace of a state file");
    reduce->add_option("input", in_path, "State file")->required();
    reduce->add_option("--keep", keep, "Slots to keep")->capture_default_str();
    reduce->add_option("--basis", basis, "computational or observable-file path")
        ->capture_default_str();

    auto* verify = app.add_subcommand("verify", "Marginal-consistency verification");
    verify->add_option("input", in_path, "Bipartite state file (omit for a generated corpus)");
    verify->add_option("--trials", trials, "Number of trials")->capture_default_str();

    auto* probs = app.add_subcommand("probs", "Born-rule outcome probabilities");
    probs->add_option("input", in_path, "State file")->required();
    probs->add_option("--obs", obs_spec, "z | x | observable file")->capture_default_str();

    auto* joint = app.add_subcommand("joint", "Joint Born-rule distribution");
    joint->add_option("input", in_path, "Bipartite state file")->required();
    joint->add_option("--obs-a", obs_a_spec, "z | x | observable file")->capture_default_str();
    joint->add_option("--obs-b", obs_b_spec, "z | x | observable file")->capture_default_str();

    auto* sample = app.add_subcommand("sample", "Monte Carlo joint sampling");
    sample->add_option("input", in_path, "Bipartite state file")->required();
    sample->add_option("--obs-a", obs_a_spec, "z | x | observable file")->capture_default_str();
    sample->add_option("--obs-b", obs_b_spec, "z | x | observable file")->capture_default_str();
    sample->add_option("-n,--shots", n_shots, "Number of shots")->capture_default_str();

    auto* cdemo = app.add_subcommand("continuum-demo", "Discretized Gaussian marginal demo");
    cdemo->add_option("--s", s, "Relative-coordinate width")->capture_default_str();
    cdemo->add_option("--S", S, "Center-of-mass width")->capture_default_str();
    cdemo->add_option("--lo", lo, "Grid lower bound")->capture_default_str();
    cdemo->add_option("--hi", hi, "Grid upper bound")->capture_default_str();
    cdemo->add_option("-n,--grid", grid_n, "Grid points per axis")->capture_default_str();

    auto* walk = app.add_subcommand("walkthrough", "Closure-relation derivation, step by step");
    walk->add_option("input", in_path, "Bipartite state file")->required();

    // Global flags remain valid after a subcommand name.
    for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (reduce->parsed()) return cmd_reduce(g, in_path, keep, basis);
        if (verify->parsed()) return cmd_verify(g, in_path, trials);
        if (probs->parsed()) return cmd_probs(g, in_path, obs_spec);
        if (joint->parsed()) return cmd_joint(g, in_path, obs_a_spec, obs_b_spec);
        if (sample->parsed()) return cmd_sample(g, in_path, obs_a_spec, obs_b_spec, n_shots);
        if (cdemo->parsed()) return cmd_continuum_demo(g, s, S, lo, hi, grid_n);
        if (walk->parsed()) return cmd_walkthrough(g, in_path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitViolation;
    }
    return kExitUsage;
}
