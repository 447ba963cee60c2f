#include "wavekit/formulations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wavekit {

void FlowParameters::validate() const {
    if (!(g > 0.0)) throw InvalidInput("flow parameters: g must be positive");
    if (!(p0 < 0.0)) throw InvalidInput("flow parameters: p0 must be negative");
    if (!(L > 0.0)) throw InvalidInput("flow parameters: L must be positive");
}

double VorticityProfile::operator()(double pv) const {
    const double lo = p.front();
    const double slack = 1e-9 * std::abs(lo);
    if (pv < lo - slack || pv > slack)
        throw InvalidInput("vorticity profile does not cover p = " + format_double(pv));
    const double t = (std::clamp(pv, lo, 0.0) - lo) / (p[1] - p[0]);
    return numerics::cubic_interp(Gamma, t);
}

double VorticityProfile::gamma_at(double pv) const {
    const double lo = p.front();
    const double t = (std::clamp(pv, lo, 0.0) - lo) / (p[1] - p[0]);
    if (gamma.empty()) return numerics::cubic_interp_dt(Gamma, t) / (p[1] - p[0]);
    return numerics::cubic_interp(gamma, t);
}

void VorticityProfile::validate() const {
    if (p.size() < 4) throw InvalidInput("vorticity profile needs at least 4 nodes");
    if (Gamma.size() != p.size()) throw InvalidInput("vorticity profile: Gamma length mismatch");
    if (!gamma.empty() && gamma.size() != p.size()) throw InvalidInput("vorticity profile: gamma length mismatch");
    if (!(p.front() < 0.0) || p.back() != 0.0) throw InvalidInput("vorticity profile must span [p0, 0]");
}

namespace {

std::vector<double> uniform_p(double p0, std::size_t n) {
    std::vector<double> p(n);
    for (std::size_t j = 0; j < n; ++j) p[j] = p0 * (1.0 - static_cast<double>(j) / static_cast<double>(n - 1));
    p.back() = 0.0;
    return p;
}

}  // namespace

VorticityProfile zero_vorticity(double p0, std::size_t n) {
    VorticityProfile v;
    v.p = uniform_p(p0, n);
    v.Gamma.assign(n, 0.0);
    v.gamma.assign(n, 0.0);
    return v;
}

VorticityProfile constant_vorticity(double p0, double gamma0, std::size_t n) {
    VorticityProfile v;
    v.p = uniform_p(p0, n);
    v.Gamma.resize(n);
    for (std::size_t j = 0; j < n; ++j) v.Gamma[j] = gamma0 * v.p[j];
    v.gamma.assign(n, gamma0);
    return v;
}

NodalField periodic_derivative(const NodalField& f, double period) {
    NodalField out(f.nx(), f.ny());
    const numerics::PeriodicDerivative d(f.nx(), period);
    const std::size_t ny = f.ny();
    numerics::parallel_for(ny, [&](std::size_t b, std::size_t e) {
        for (std::size_t j = b; j < e; ++j) d.apply(f.values().data() + j, out.values().data() + j, ny);
    });
    return out;
}

NodalField vertical_derivative(const NodalField& f, double spacing) {
    NodalField out(f.nx(), f.ny());
    numerics::parallel_for(f.nx(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) numerics::fd_first(f.column(i), spacing, out.column(i));
    });
    return out;
}

Gradient gradient(const FluidGrid& grid, const NodalField& f) {
    NodalField fx = periodic_derivative(f, grid.period());
    NodalField fs = vertical_derivative(f, grid.dsigma());
    Gradient g{std::move(fx), NodalField(f.nx(), f.ny())};
    for (std::size_t i = 0; i < f.nx(); ++i) {
        const double eta = grid.surface.eta[i];
        const double slope = grid.surface.eta_x[i];
        for (std::size_t j = 0; j < f.ny(); ++j) {
            g.dx(i, j) -= grid.sigma[j] * slope / eta * fs(i, j);
            g.dy(i, j) = fs(i, j) / eta;
        }
    }
    return g;
}

Gradient gradient(const StripGrid& grid, const NodalField& f) {
    return {periodic_derivative(f, grid.period), vertical_derivative(f, grid.dp())};
}

double max_abs(const NodalField& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const NodalField& a, const NodalField& b) {
    if (!a.same_shape(b)) throw InvalidInput("field shapes differ");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
    return m;
}

namespace {

void require_shape(const NodalField& f, std::size_t nx, std::size_t ny, const char* name) {
    if (f.nx() != nx || f.ny() != ny) throw InvalidInput(std::string("field ") + name + " does not match its grid");
}

double spacing(const FluidGrid& g) { return std::max(g.surface.dx(), g.dsigma() * g.surface.max_eta()); }

}  // namespace

ResidualReport check_invariants(const VelocitySolution& sol, const InvariantTolerances& tol) {
    const auto& g = sol.grid;
    require_shape(sol.u, g.nx(), g.ny(), "u");
    require_shape(sol.v, g.nx(), g.ny(), "v");
    require_shape(sol.P, g.nx(), g.ny(), "P");
    const double c = sol.params.c;
    double margin = std::numeric_limits<double>::infinity();
    for (double u : sol.u.values()) margin = std::min(margin, c - u);
    double bed = 0.0, kin = 0.0, pres = 0.0;
    const std::size_t top = g.ny() - 1;
    for (std::size_t i = 0; i < g.nx(); ++i) {
        bed = std::max(bed, std::abs(sol.v(i, 0)));
        kin = std::max(kin, std::abs(sol.v(i, top) - (sol.u(i, top) - c) * g.surface.eta_x[i]));
        pres = std::max(pres, std::abs(sol.P(i, top) - sol.params.P_atm));
    }
    const double dtol = std::max(tol.boundary, tol.derivative_tol(spacing(g)));
    ResidualReport r;
    r.title = "velocity invariants";
    r.add_min("u<c", margin, tol.sign_margin);
    r.add_max("bed v=0", bed, tol.boundary);
    r.add_max("surface kinematic", kin, tol.boundary);
    r.add_max("surface P=P_atm", pres, dtol);
    return r;
}

ResidualReport check_invariants(const StreamSolution& sol, const InvariantTolerances& tol) {
    const auto& g = sol.grid;
    require_shape(sol.psi, g.nx(), g.ny(), "psi");
    const Gradient d = gradient(g, sol.psi);
    double margin = std::numeric_limits<double>::infinity();
    for (double v : d.dy.values()) margin = std::min(margin, -v);
    double bed = 0.0, surf = 0.0, bern = 0.0;
    const std::size_t top = g.ny() - 1;
    for (std::size_t i = 0; i < g.nx(); ++i) {
        bed = std::max(bed, std::abs(sol.psi(i, 0) + sol.params.p0));
        surf = std::max(surf, std::abs(sol.psi(i, top)));
        const double grad2 = d.dx(i, top) * d.dx(i, top) + d.dy(i, top) * d.dy(i, top);
        bern = std::max(bern, std::abs(grad2 + 2 * sol.params.g * g.surface.eta[i] - sol.params.Q));
    }
    ResidualReport r;
    r.title = "stream invariants";
    r.add_min("psi_y<0", margin, tol.sign_margin);
    r.add_max("bed psi=-p0", bed, tol.boundary);
    r.add_max("surface psi=0", surf, tol.boundary);
    r.add_max("surface Bernoulli", bern, std::max(tol.boundary, tol.derivative_tol(spacing(g))));
    return r;
}

ResidualReport check_invariants(const HeightSolution& sol, const InvariantTolerances& tol) {
    const auto& g = sol.grid;
    require_shape(sol.h, g.nq(), g.np(), "h");
    const Gradient d = gradient(g, sol.h);
    double margin = std::numeric_limits<double>::infinity();
    for (double v : d.dy.values()) margin = std::min(margin, v);
    double bed = 0.0, bern = 0.0;
    const std::size_t top = g.np() - 1;
    for (std::size_t i = 0; i < g.nq(); ++i) {
        bed = std::max(bed, std::abs(sol.h(i, 0)));
        const double hq = d.dx(i, top), hp = d.dy(i, top);
        bern = std::max(bern, std::abs((1 + hq * hq) / (2 * hp * hp) + sol.params.g * sol.h(i, top) - 0.5 * sol.params.Q));
    }
    const double sp = std::max(g.dq(), g.dp());
    ResidualReport r;
    r.title = "height invariants";
    r.add_min("h_p>0", margin, tol.sign_margin);
    r.add_max("bed h=0", bed, tol.boundary);
    r.add_max("surface Bernoulli", bern, std::max(tol.boundary, tol.derivative_tol(sp)));
    return r;
}

ResidualReport check_invariants(const VorticityProfile& gamma, const InvariantTolerances& tol) {
    gamma.validate();
    ResidualReport r;
    r.title = "vorticity profile invariants";
    r.add_max("Gamma(0)=0", std::abs(gamma.Gamma.back()), tol.boundary);
    if (!gamma.gamma.empty()) {
        const std::size_t n = gamma.p.size();
        const double dp = gamma.p[1] - gamma.p[0];
        std::vector<double> cum(n);
        numerics::cumulative_integral(gamma.gamma, dp, cum);
        double worst = 0.0;
        for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(gamma.Gamma[j] - (cum[j] - cum.back())));
        r.add_max("Gamma = integral of gamma", worst, std::max(tol.boundary, tol.derivative_tol(dp)));
    }
    return r;
}

NodalField vorticity(const StreamSolution& sol) {
    const auto& g = sol.grid;
    if (g.nx() < 6 || g.ny() < 6) throw InvalidInput("grid too coarse for vorticity (fewer than 4 interior nodes)");
    const Gradient d1 = gradient(g, sol.psi);
    const Gradient dxx = gradient(g, d1.dx);
    const Gradient dyy = gradient(g, d1.dy);
    NodalField w(g.nx(), g.ny());
    for (std::size_t k = 0; k < w.size(); ++k) w.values()[k] = -(dxx.dx.values()[k] + dyy.dy.values()[k]);
    return w;
}

}  // namespace wavekit
