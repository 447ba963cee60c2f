#pragma once

// Conversions among the velocity, stream-function and streamline-height
// formulations, the Bernoulli field and recovery of Gamma from it.

#include <span>
#include <vector>

#include "wavekit/formulations.hpp"
#include "wavekit/testfunction.hpp"

namespace wavekit {

struct TransformOptions {
    double root_tolerance = 1e-13;
    int max_iterations = 200;
    int interpolation_order = 3;
    /// Vertical node count of generated grids; 0 keeps the source count.
    std::size_t levels = 0;
    /// Largest accepted path-independence defect when building psi.
    double path_tolerance = 1e-6;

    void validate() const;
};

struct StreamConstruction {
    StreamSolution stream;
    double path_defect = 0.0;
    double p0 = 0.0;
    double max_psi_x_plus_v = 0.0;
    double gamma_constancy = 0.0;
};

/// psi(x, y) = -int_y^eta (u - c) ds; Gamma and B recovered from the Bernoulli field.
StreamConstruction velocity_to_stream(const VelocitySolution& sol, const TransformOptions& opt = {});

struct VelocityReconstruction {
    VelocitySolution velocity;
    double surface_pressure_defect = 0.0;
};

VelocityReconstruction stream_to_velocity(const StreamSolution& sol, const TransformOptions& opt = {});

HeightSolution stream_to_height(const StreamSolution& sol, const TransformOptions& opt = {});
StreamSolution height_to_stream(const HeightSolution& sol, const TransformOptions& opt = {});

/// Fractional sigma index of the point with -psi = p on column i, for every
/// node of the strip (the hodograph map evaluated column by column).
NodalField hodograph_index(const StreamSolution& sol, const StripGrid& strip, const TransformOptions& opt = {});

/// Strip with q-nodes equal to the fluid x-nodes and opt.levels p-nodes.
StripGrid matching_strip(const StreamSolution& sol, const TransformOptions& opt = {});

ResidualReport chain_rule_audit(const StreamSolution& stream, const HeightSolution& height,
                                const TransformOptions& opt = {});

BernoulliField bernoulli_field(const StreamSolution& sol, const NodalField& P, const TransformOptions& opt = {});
BernoulliField bernoulli_field(const VelocitySolution& vel, const StreamSolution& sol, const TransformOptions& opt = {});
/// Uses the pressure reconstructed by stream_to_velocity.
BernoulliField bernoulli_field(const StreamSolution& sol, const TransformOptions& opt = {});

struct GammaExtraction {
    VorticityProfile gamma;
    double B = 0.0;
    double constancy_defect = 0.0;
    /// Normalised streamline flux per test function (empty without tests).
    std::vector<double> flux;
};

GammaExtraction extract_gamma(const BernoulliField& field, const TransformOptions& opt = {},
                              std::span<const TestFunction> tests = {});

}  // namespace wavekit
