#include "wavekit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace wavekit {

double SurfaceProfile::min_eta() const { return *std::min_element(eta.begin(), eta.end()); }

double SurfaceProfile::max_eta() const { return *std::max_element(eta.begin(), eta.end()); }

double SurfaceProfile::eta_at(double xp) const {
    return numerics::cubic_interp_periodic(eta, xp / dx());
}

SurfaceProfile build_surface(double period, std::span<const double> eta) {
    if (!(period > 0.0)) throw InvalidInput("surface period must be positive");
    if (eta.size() < 8) throw InvalidInput("surface needs at least 8 samples, got " + std::to_string(eta.size()));
    for (std::size_t i = 0; i < eta.size(); ++i) {
        if (!(eta[i] > 0.0))
            throw InvalidInput("surface sample " + std::to_string(i) + " is not positive (" + std::to_string(eta[i]) + ")");
    }
    SurfaceProfile s;
    s.period = period;
    const std::size_t n = eta.size();
    s.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.x[i] = period * static_cast<double>(i) / static_cast<double>(n);
    s.eta.assign(eta.begin(), eta.end());
    s.eta_x.resize(n);
    numerics::PeriodicDerivative d(n, period);
    d.apply(s.eta.data(), s.eta_x.data());
    return s;
}

double surface_slope_consistency(const SurfaceProfile& surface) {
    const std::size_t n = surface.size();
    const double h = surface.dx();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto at = [&](long k) { return surface.eta[static_cast<std::size_t>((static_cast<long>(i) + k + static_cast<long>(n)) % static_cast<long>(n))]; };
        const double fd = (at(-2) - 8 * at(-1) + 8 * at(1) - at(2)) / (12 * h);
        worst = std::max(worst, std::abs(fd - surface.eta_x[i]));
    }
    return worst;
}

FluidGrid make_fluid_grid(SurfaceProfile surface, std::size_t ny) {
    if (ny < 6) throw InvalidInput("fluid grid needs at least 6 sigma levels");
    FluidGrid g;
    g.surface = std::move(surface);
    g.sigma.resize(ny);
    for (std::size_t j = 0; j < ny; ++j) g.sigma[j] = static_cast<double>(j) / static_cast<double>(ny - 1);
    return g;
}

FluidGrid make_flat_grid(double period, double depth, std::size_t nx, std::size_t ny) {
    std::vector<double> eta(nx, depth);
    return make_fluid_grid(build_surface(period, eta), ny);
}

StripGrid make_strip_grid(double period, double p0, std::size_t nq, std::size_t np) {
    if (!(p0 < 0.0)) throw InvalidInput("strip requires p0 < 0");
    if (!(period > 0.0)) throw InvalidInput("strip period must be positive");
    if (nq < 8 || np < 6) throw InvalidInput("strip grid too coarse");
    StripGrid g;
    g.period = period;
    g.p0 = p0;
    g.q.resize(nq);
    g.p.resize(np);
    for (std::size_t i = 0; i < nq; ++i) g.q[i] = period * static_cast<double>(i) / static_cast<double>(nq);
    for (std::size_t j = 0; j < np; ++j) g.p[j] = p0 * (1.0 - static_cast<double>(j) / static_cast<double>(np - 1));
    g.p.back() = 0.0;
    return g;
}

double periodic_offset(double dx, double period) {
    double r = std::fmod(dx + 0.5 * period, period);
    if (r < 0) r += period;
    return r - 0.5 * period;
}

namespace {

bool full_period(const Rect& k, double period) { return k.x1 - k.x0 >= period; }

double x_gap(const Rect& k, double x, double period) {
    if (full_period(k, period)) return 0.0;
    const double mid = 0.5 * (k.x0 + k.x1);
    const double half = 0.5 * (k.x1 - k.x0);
    return std::max(0.0, std::abs(periodic_offset(x - mid, period)) - half);
}

double interval_gap(double v, double lo, double hi) {
    if (v < lo) return lo - v;
    if (v > hi) return v - hi;
    return 0.0;
}

double rect_distance(const Rect& k, Point p, double period) {
    return std::hypot(x_gap(k, p.x, period), interval_gap(p.y, k.y0, k.y1));
}

std::vector<Point> dense_surface(const SurfaceProfile& s) {
    const std::size_t m = 8 * s.size();
    std::vector<Point> pts(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double x = s.period * static_cast<double>(i) / static_cast<double>(m);
        pts[i] = {x, s.eta_at(x)};
    }
    return pts;
}

void fill_masks(RegionSpec& r, std::size_t nx, std::size_t ny, const std::function<Point(std::size_t, std::size_t)>& node,
                double period) {
    r.nx = nx;
    r.ny = ny;
    r.k_mask.assign(nx * ny, 0);
    r.k0_mask.assign(nx * ny, 0);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const Point p = node(i, j);
            const double d = rect_distance(r.k, p, period);
            if (d == 0.0) {
                r.k_mask[i * ny + j] = 1;
                r.k_nodes.push_back(p);
            }
            if (d <= r.eps0) r.k0_mask[i * ny + j] = 1;
        }
    }
    if (r.k_nodes.empty()) throw InvalidInput("selected region contains no grid nodes");
}

}  // namespace

RegionSpec interior_region(const FluidGrid& grid, const Rect& k) {
    if (!(k.x1 > k.x0) || !(k.y1 > k.y0)) throw InvalidInput("region selector must have positive extent");
    const double L = grid.period();
    double dist = k.y0;
    for (const Point& s : dense_surface(grid.surface)) {
        if (x_gap(k, s.x, L) == 0.0 && s.y <= k.y1) dist = 0.0;
        dist = std::min(dist, rect_distance(k, s, L));
    }
    if (!(dist > 0.0)) throw InvalidInput("region touches the domain boundary (eps0 = 0)");
    RegionSpec r;
    r.k = k;
    r.boundary_distance = dist;
    r.eps0 = 0.5 * dist;
    fill_masks(r, grid.nx(), grid.ny(), [&](std::size_t i, std::size_t j) { return Point{grid.x(i), grid.y(i, j)}; }, L);
    return r;
}

RegionSpec interior_region(const StripGrid& grid, const Rect& k) {
    if (!(k.x1 > k.x0) || !(k.y1 > k.y0)) throw InvalidInput("region selector must have positive extent");
    const double dist = std::min(k.y0 - grid.p0, -k.y1);
    if (!(dist > 0.0)) throw InvalidInput("region touches the strip boundary (eps0 = 0)");
    RegionSpec r;
    r.k = k;
    r.boundary_distance = dist;
    r.eps0 = 0.5 * dist;
    fill_masks(r, grid.nq(), grid.np(), [&](std::size_t i, std::size_t j) { return Point{grid.q[i], grid.p[j]}; },
               grid.period);
    return r;
}

RegionSpec interval_region(double half_width_v, double half_width_k, std::size_t n) {
    if (!(half_width_k > 0.0) || !(half_width_v > half_width_k)) throw InvalidInput("interval K must lie strictly inside V");
    if (n < 2) throw InvalidInput("interval region needs at least 2 nodes");
    RegionSpec r;
    r.k = {-half_width_k, half_width_k, 0.0, 0.0};
    r.boundary_distance = half_width_v - half_width_k;
    r.eps0 = 0.5 * r.boundary_distance;
    r.nx = n;
    r.ny = 1;
    r.k_mask.assign(n, 1);
    r.k0_mask.assign(n, 1);
    for (std::size_t i = 0; i < n; ++i)
        r.k_nodes.push_back({-half_width_k + 2.0 * half_width_k * static_cast<double>(i) / static_cast<double>(n - 1), 0.0});
    return r;
}

double min_distance_to_complement(const FluidGrid& grid, const RegionSpec& region) {
    const auto surf = dense_surface(grid.surface);
    double best = std::numeric_limits<double>::infinity();
    for (const Point& p : region.k_nodes) {
        best = std::min(best, p.y);
        for (const Point& s : surf) best = std::min(best, std::hypot(periodic_offset(p.x - s.x, grid.period()), p.y - s.y));
    }
    return best;
}

double min_distance_to_complement(const StripGrid& grid, const RegionSpec& region) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point& p : region.k_nodes) best = std::min({best, p.y - grid.p0, -p.y});
    return best;
}

}  // namespace wavekit
