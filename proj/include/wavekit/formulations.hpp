#pragma once

// The three solution formulations (velocity, stream function, streamline
// height), their parameters and pointwise invariant checks, plus the grid
// derivative operators shared by every module.

#include <optional>
#include <string>
#include <vector>

#include "wavekit/geometry.hpp"
#include "wavekit/numerics.hpp"
#include "wavekit/report.hpp"

namespace wavekit {

struct FlowParameters {
    double c = 1.0;
    double g = 1.0;
    double P_atm = 0.0;
    double L = 6.283185307179586;
    double p0 = -1.0;
    double Q = 0.0;
    double B = 0.0;

    void validate() const;
};

/// Gamma(p) sampled on uniform nodes over [p0, 0], optionally with gamma.
struct VorticityProfile {
    std::vector<double> p;
    std::vector<double> Gamma;
    std::vector<double> gamma;

    double p0() const { return p.front(); }
    /// Cubic interpolation; arguments within 1e-9*|p0| of the range are clamped.
    double operator()(double pv) const;
    /// gamma(-pv) = Gamma'(pv); differentiates the Gamma interpolant when no gamma samples are stored.
    double gamma_at(double pv) const;
    void validate() const;
};

VorticityProfile zero_vorticity(double p0, std::size_t n = 33);
VorticityProfile constant_vorticity(double p0, double gamma0, std::size_t n = 33);

struct VelocitySolution {
    FlowParameters params;
    FluidGrid grid;
    NodalField u, v, P;
    bool smooth = true;
};

struct StreamSolution {
    FlowParameters params;
    FluidGrid grid;
    NodalField psi;
    VorticityProfile gamma;
    bool smooth = true;
};

struct HeightSolution {
    FlowParameters params;
    StripGrid grid;
    NodalField h;
    VorticityProfile gamma;
    bool smooth = true;
};

struct BernoulliField {
    FluidGrid grid;
    NodalField F;
    StripGrid strip;
    NodalField F_strip;
};

struct Gradient {
    NodalField dx;
    NodalField dy;
};

/// Derivative along the periodic index at fixed second index (spectral).
NodalField periodic_derivative(const NodalField& f, double period);
/// Derivative along the second index (fourth order, one-sided at ends).
NodalField vertical_derivative(const NodalField& f, double spacing);

/// Cartesian gradient on the terrain-following grid via the sigma chain rule.
Gradient gradient(const FluidGrid& grid, const NodalField& f);
/// (d/dq, d/dp) on the strip.
Gradient gradient(const StripGrid& grid, const NodalField& f);

/// Per-condition tolerances. Boundary data is exact; conditions involving
/// derivatives default to derivative_scale * spacing^2.
struct InvariantTolerances {
    double boundary = 1e-10;
    double derivative = 0.0;
    double derivative_scale = 1.0;
    double sign_margin = 0.0;

    double derivative_tol(double spacing) const {
        return derivative > 0.0 ? derivative : derivative_scale * spacing * spacing;
    }
};

ResidualReport check_invariants(const VelocitySolution& sol, const InvariantTolerances& tol = {});
ResidualReport check_invariants(const StreamSolution& sol, const InvariantTolerances& tol = {});
ResidualReport check_invariants(const HeightSolution& sol, const InvariantTolerances& tol = {});
ResidualReport check_invariants(const VorticityProfile& gamma, const InvariantTolerances& tol = {});

/// omega = -Laplacian(psi); boundary rows use one-sided stencils.
NodalField vorticity(const StreamSolution& sol);

double max_abs(const NodalField& f);
double max_abs_diff(const NodalField& a, const NodalField& b);

}  // namespace wavekit
