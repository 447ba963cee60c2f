#pragma once

// Compactly supported test functions and their samples on grids.

#include <cstdint>
#include <string>
#include <vector>

#include "wavekit/geometry.hpp"
#include "wavekit/numerics.hpp"

namespace wavekit {

/// phi = amplitude * exp(1 - 1/(1 - s^2)), s = |z - center| / radius, with
/// the horizontal offset folded periodically when period > 0.
struct TestFunction {
    Point center;
    double radius = 0.1;
    double amplitude = 1.0;
    double period = 0.0;
    std::string label;

    double value(Point z) const;
    Point grad(Point z) const;
    /// sup|phi| + sup|grad phi|.
    double c1_norm() const;
    double support_area() const;
    /// Normalisation used by residual reports: c1_norm() * support_area().
    double scale() const { return c1_norm() * support_area(); }
};

/// Test function values and gradient sampled at the nodes of a grid.
struct SampledTest {
    NodalField value;
    NodalField dx;
    NodalField dy;
    double scale = 1.0;
    std::string label;
};

SampledTest sample(const TestFunction& phi, const FluidGrid& grid);
SampledTest sample(const StripGrid& grid, const TestFunction& phi);

/// Radii x centres battery inside the fluid domain (below min eta) with
/// centres drawn from the seeded generator.
std::vector<TestFunction> fluid_battery(const FluidGrid& grid, std::uint64_t seed, std::size_t radii = 3,
                                        std::size_t centres = 4);
std::vector<TestFunction> strip_battery(const StripGrid& grid, std::uint64_t seed, std::size_t radii = 3,
                                        std::size_t centres = 4);

}  // namespace wavekit
