#pragma once

// Periodic fluid and strip geometry: surface profiles, terrain-following
// grids over the fluid domain, uniform grids over the strip, and compact
// test regions with their admissible mollification radius.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wavekit/numerics.hpp"

namespace wavekit {

struct SurfaceProfile {
    double period = 0.0;
    std::vector<double> x;
    std::vector<double> eta;
    std::vector<double> eta_x;

    std::size_t size() const { return x.size(); }
    double dx() const { return period / static_cast<double>(x.size()); }
    double min_eta() const;
    double max_eta() const;
    /// Periodic cubic interpolation of eta at an arbitrary abscissa.
    double eta_at(double xp) const;
};

/// Builds a surface from positive samples at x_i = i*L/N; slopes are spectral.
SurfaceProfile build_surface(double period, std::span<const double> eta);

/// Largest gap between stored slopes and centered fourth-order differences of eta.
double surface_slope_consistency(const SurfaceProfile& surface);

/// Nodes (x_i, sigma_j * eta(x_i)) covering the closure of the fluid domain.
struct FluidGrid {
    SurfaceProfile surface;
    std::vector<double> sigma;

    std::size_t nx() const { return surface.size(); }
    std::size_t ny() const { return sigma.size(); }
    double period() const { return surface.period; }
    double dsigma() const { return sigma[1] - sigma[0]; }
    double x(std::size_t i) const { return surface.x[i]; }
    double y(std::size_t i, std::size_t j) const { return sigma[j] * surface.eta[i]; }
};

/// Uniform sigma levels 0 = sigma_0 < ... < sigma_{ny-1} = 1.
FluidGrid make_fluid_grid(SurfaceProfile surface, std::size_t ny);
FluidGrid make_flat_grid(double period, double depth, std::size_t nx, std::size_t ny);

/// Uniform nodes over one period in q and over [p0, 0] in p.
struct StripGrid {
    double period = 0.0;
    double p0 = -1.0;
    std::vector<double> q;
    std::vector<double> p;

    std::size_t nq() const { return q.size(); }
    std::size_t np() const { return p.size(); }
    double dq() const { return period / static_cast<double>(q.size()); }
    double dp() const { return p[1] - p[0]; }
};

StripGrid make_strip_grid(double period, double p0, std::size_t nq, std::size_t np);

/// Axis-aligned selector. An x-extent covering a full period selects every column.
struct Rect {
    double x0 = 0.0;
    double x1 = 0.0;
    double y0 = 0.0;
    double y1 = 0.0;
};

/// Compact set K inside an open parent domain, its enlargement K0 and the
/// admissible radius eps0 = dist(K, complement)/2. Masks are indexed like
/// NodalField (i * ny + j).
struct RegionSpec {
    Rect k;
    double eps0 = 0.0;
    double boundary_distance = 0.0;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<std::uint8_t> k_mask;
    std::vector<std::uint8_t> k0_mask;
    std::vector<Point> k_nodes;

    bool in_k(std::size_t i, std::size_t j) const { return k_mask[i * ny + j] != 0; }
    bool in_k0(std::size_t i, std::size_t j) const { return k0_mask[i * ny + j] != 0; }
};

RegionSpec interior_region(const FluidGrid& grid, const Rect& k);
RegionSpec interior_region(const StripGrid& grid, const Rect& k);

/// One-dimensional region K = [-a, a] inside V = (-A, A), sampled with n
/// nodes; used for line studies of periodic fields on the real axis.
RegionSpec interval_region(double half_width_v, double half_width_k, std::size_t n);

/// Shortest distance from a node of K to the complement of the parent domain.
double min_distance_to_complement(const FluidGrid& grid, const RegionSpec& region);
double min_distance_to_complement(const StripGrid& grid, const RegionSpec& region);

/// Signed periodic separation folded into [-L/2, L/2).
double periodic_offset(double dx, double period);

}  // namespace wavekit
