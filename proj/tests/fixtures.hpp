#pragma once

// Laminar fixtures shared by the unit tests.

#include <cstddef>

#include "wavekit/synth.hpp"

namespace fixtures {

/// Still water: psi = 1 - y, p0 = -1.
inline wavekit::LaminarTriple s0(std::size_t nx = 64, std::size_t ny = 33) {
    wavekit::LaminarSpec spec;
    spec.nx = nx;
    spec.ny = ny;
    return wavekit::laminar(spec);
}

/// Constant vorticity one: psi = 1.5 - y - y^2/2, u = -y, p0 = -1.5.
inline wavekit::LaminarTriple s1(std::size_t nx = 64, std::size_t ny = 33) {
    wavekit::LaminarSpec spec;
    spec.gamma0 = 1.0;
    spec.nx = nx;
    spec.ny = ny;
    return wavekit::laminar(spec);
}

}  // namespace fixtures
