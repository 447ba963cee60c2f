#pragma once

// Batch front-end: synth, transform, verify, ratestudy and equivalence, plus
// the study presets shared with the acceptance suite.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <vector>

#include "wavekit/formulations.hpp"
#include "wavekit/report.hpp"
#include "wavekit/weakcheck.hpp"

namespace wavekit::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2, kInvariant = 3, kIo = 4 };

/// Line study of Lemma 1 on a one-dimensional Weierstrass field over
/// K = [-half_width, half_width], with eps0 = kappa_eps0 / base_wavenumber.
struct Lemma1Setup {
    double alpha = 0.5;
    std::size_t octaves = 12;
    std::uint64_t seed = 7;
    double base_wavenumber = 16.0;
    double kappa_eps0 = 4.0;
    double half_width = std::numbers::pi;
    std::size_t nodes = 4001;
    int kmin = 3;
    int kmax = 9;
    std::size_t drop_largest = 2;
};

std::vector<RateStudy> run_lemma1(const Lemma1Setup& setup);

/// Flux studies on the analytic perturbed laminar flow, with phi the bump
/// at `center` of radius `radius`.
struct FluxSetup {
    double alpha = 0.5;
    std::size_t octaves = 12;
    std::uint64_t seed = 7;
    double base_wavenumber = 32.0;
    double delta = 0.35;
    double gamma0 = 1.0;
    Point center{std::numbers::pi, 0.5};
    double radius = 0.3;
    /// Top of the sweep before the 2^-kmin factor; zero takes the RegionSpec eps0.
    double eps0 = 0.0;
    int kmin = 3;
    int kmax = 9;
    std::size_t drop_largest = 2;
};

struct FluxResult {
    FluxStudy momentum;
    FluxStudy bernoulli;
    double region_eps0 = 0.0;
};

FluxResult run_flux(const FluxSetup& setup);

/// Gridded S1 stream function with a rough perturbation, nx-by-(nx/2+1).
struct PerturbSetup {
    double alpha = 0.5;
    std::size_t octaves = 8;
    std::uint64_t seed = 7;
    double base_wavenumber = 1.0;
    double delta = 0.02;
    double gamma0 = 1.0;
    std::size_t nx = 512;
};

StreamSolution perturbed_laminar(const PerturbSetup& setup);

/// max |(fg)^eps - f^eps g^eps - R^eps(f,g)| per pair: `smooth` random
/// trigonometric pairs followed by `rough` Weierstrass pairs.
ResidualReport product_identity_suite(std::uint64_t seed, std::size_t smooth = 10, std::size_t rough = 3,
                                      double threshold = 1e-8);

/// Divergence of mollified solenoidal pairs across an eps sweep, one smooth
/// and one rough pair.
ResidualReport lemma2_suite(std::uint64_t seed, double threshold = 1e-8);

/// Runs one command. argv follows main(); reports go to files under --out
/// and a summary to `out`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wavekit::cli
