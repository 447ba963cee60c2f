#pragma once

// Generators of exact and synthetic inputs: laminar flows solving all three
// formulations, Weierstrass-type fields of prescribed Hoelder exponent and
// rough perturbations of a stream function. These are scaffolding for the
// checks, not physical wave solutions.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wavekit/formulations.hpp"
#include "wavekit/weakcheck.hpp"

namespace wavekit {

/// Flat-surface shear flow of depth d. The vorticity is either gamma0 or,
/// when gamma_of_psi is set, a function of psi over [0, -p0].
struct LaminarSpec {
    double depth = 1.0;
    double c = 1.0;
    double g = 1.0;
    double P_atm = 0.0;
    double L = 6.283185307179586;
    /// Horizontal velocity at the bed.
    double u_bed = 0.0;
    double gamma0 = 0.0;
    std::function<double(double)> gamma_of_psi;
    std::size_t nx = 256;
    std::size_t ny = 129;

    void validate() const;
};

struct LaminarTriple {
    VelocitySolution velocity;
    StreamSolution stream;
    HeightSolution height;
};

/// Also checks u < c over the depth; throws InvalidInput otherwise.
LaminarTriple laminar(const LaminarSpec& spec);

/// psi(y) and psi'(y) of the laminar profile (flat surface), from the closed
/// form when gamma is constant and otherwise from RK4 shooting.
class LaminarProfile {
public:
    explicit LaminarProfile(const LaminarSpec& spec);
    double psi(double y) const;
    double dpsi(double y) const;
    /// Unique y in [0, d] with -psi(y) = p.
    double height(double p) const;
    double p0() const { return -psi(0.0); }
    double gamma(double psi_value) const;

private:
    LaminarSpec spec_;
    bool constant_ = true;
    std::vector<double> y_, psi_, dpsi_;
};

struct RoughFieldSpec {
    double alpha = 0.5;
    std::size_t octaves = 12;
    std::uint64_t seed = 7;
    double period = 6.283185307179586;
    /// Wavenumber of octave 0; zero selects 2 pi / period.
    double base_wavenumber = 0.0;
    double amplitude = 1.0;

    void validate() const;
    double kappa0() const;
};

/// W(x) = sum_k a 2^{-alpha k} cos(2^k kappa0 x + theta_k) in 1D and
/// sum_k a 2^{-alpha k} cos(kappa_k x + theta_k) cos(kappa_k y + phi_k) in 2D.
class WeierstrassField {
public:
    WeierstrassField(const RoughFieldSpec& spec, int dimension);

    double operator()(double x) const;
    double operator()(double x, double y) const;
    /// int_0^y W(x, s) ds and its x-derivative (2D only).
    double A(double x, double y) const;
    double A_x(double x, double y) const;
    double bandwidth() const;
    std::size_t octaves() const { return amp_.size(); }
    double amplitude(std::size_t k) const { return amp_[k]; }
    double wavenumber(std::size_t k) const { return kappa_[k]; }
    double theta(std::size_t k) const { return theta_[k]; }
    double phi(std::size_t k) const { return phi_[k]; }
    int dimension() const { return dimension_; }

private:
    int dimension_;
    std::vector<double> amp_, kappa_, theta_, phi_;
};

/// Samples on x_i = i L / n (1D: n-by-1; 2D: n-by-n with y_j = j L / n).
NodalField weierstrass(const RoughFieldSpec& spec, int dimension, std::size_t n);

/// psi + delta (A(x, y) - (y / eta) A(x, eta)) with A from a 2D field; bed and
/// surface values are unchanged. Throws InvariantViolation when psi_y < 0 fails.
StreamSolution perturb(const StreamSolution& sol, const RoughFieldSpec& spec, double delta);

/// Analytic fields of a perturbed laminar flow for the flux studies:
/// psi = psi_L(y) + delta (A(x, y) - (y / d) A(x, d)), F = Gamma(-psi) + B.
class PerturbedLaminar : public FluxFields {
public:
    PerturbedLaminar(const LaminarSpec& spec, const RoughFieldSpec& rough, double delta);
    void sample(std::span<const double> xs, std::span<const double> ys, FluxSample& out) const override;
    double bandwidth() const override { return field_.bandwidth(); }
    const LaminarProfile& profile() const { return profile_; }
    const WeierstrassField& field() const { return field_; }
    double B() const { return B_; }

private:
    LaminarSpec spec_;
    LaminarProfile profile_;
    WeierstrassField field_;
    VorticityProfile gamma_;
    double delta_;
    double B_ = 0.0;
};

/// Spec of a perturbed field whose octave amplitudes sum to one.
RoughFieldSpec normalized_rough(double alpha, std::size_t octaves, std::uint64_t seed, double base_wavenumber);

}  // namespace wavekit
