#include "wavekit/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wavekit/weakcheck.hpp"

namespace wavekit {

void TransformOptions::validate() const {
    if (!(root_tolerance > 0.0)) throw InvalidInput("transform options: root tolerance must be positive");
    if (max_iterations < 8) throw InvalidInput("transform options: at least 8 iterations required");
    if (interpolation_order != 3) throw InvalidInput("transform options: only cubic interpolation is supported");
    if (!(path_tolerance > 0.0)) throw InvalidInput("transform options: path tolerance must be positive");
}

namespace {

void require_increasing(std::span<const double> f, const char* what, std::size_t column) {
    for (std::size_t k = 1; k < f.size(); ++k)
        if (!(f[k] > f[k - 1]))
            throw InvariantViolation(std::string("root not bracketed: ") + what + " is not monotone in column " +
                                     std::to_string(column) + " at level " + std::to_string(k));
}

/// Fractional index t with cubic_interp(f, t) = target for increasing f.
double invert_increasing(std::span<const double> f, double target, double tol_t, int max_iter) {
    const std::size_t n = f.size();
    const double slack = 1e-6 * (f[n - 1] - f[0]);
    if (target <= f[0]) {
        if (f[0] - target <= slack) return 0.0;
        throw InvariantViolation("root not bracketed: target " + format_double(target) + " below column range");
    }
    if (target >= f[n - 1]) {
        if (target - f[n - 1] <= slack) return static_cast<double>(n - 1);
        throw InvariantViolation("root not bracketed: target " + format_double(target) + " above column range");
    }
    const auto it = std::upper_bound(f.begin(), f.end(), target);
    const std::size_t j = static_cast<std::size_t>(it - f.begin()) - 1;
    double a = static_cast<double>(j), b = a + 1.0;
    double t = a + (target - f[j]) / (f[j + 1] - f[j]);
    for (int iter = 0; iter < max_iter; ++iter) {
        const double gv = numerics::cubic_interp(f, t) - target;
        if (gv == 0.0) return t;
        if (gv > 0.0)
            b = t;
        else
            a = t;
        const double d = numerics::cubic_interp_dt(f, t);
        double tn = (d > 0.0) ? t - gv / d : 0.5 * (a + b);
        if (!(tn > a && tn < b)) tn = 0.5 * (a + b);
        if (std::abs(tn - t) < tol_t || b - a < tol_t) return tn;
        t = tn;
    }
    return t;
}

std::vector<double> periodic_running_integral(const std::vector<double>& g, double dx) {
    std::vector<double> ext(g);
    ext.push_back(g.front());
    std::vector<double> out(ext.size());
    numerics::cumulative_integral(ext, dx, out);
    return out;
}

double interp_column(std::span<const double> col, double t) { return numerics::cubic_interp(col, t); }

}  // namespace

StripGrid matching_strip(const StreamSolution& sol, const TransformOptions& opt) {
    const std::size_t np = opt.levels ? opt.levels : sol.grid.ny();
    StripGrid s = make_strip_grid(sol.grid.period(), sol.params.p0, sol.grid.nx(), np);
    s.q = sol.grid.surface.x;
    return s;
}

NodalField hodograph_index(const StreamSolution& sol, const StripGrid& strip, const TransformOptions& opt) {
    opt.validate();
    const auto& g = sol.grid;
    if (strip.nq() != g.nx()) throw InvalidInput("strip q-nodes must coincide with fluid x-nodes");
    NodalField t(strip.nq(), strip.np());
    const std::size_t top = g.ny() - 1;
    numerics::parallel_for(g.nx(), [&](std::size_t b, std::size_t e) {
        std::vector<double> col(g.ny());
        for (std::size_t i = b; i < e; ++i) {
            for (std::size_t k = 0; k < g.ny(); ++k) col[k] = -sol.psi(i, k);
            require_increasing(col, "-psi", i);
            const double tol_t = opt.root_tolerance / (g.dsigma() * g.surface.eta[i]);
            t(i, 0) = 0.0;
            t(i, strip.np() - 1) = static_cast<double>(top);
            for (std::size_t j = 1; j + 1 < strip.np(); ++j)
                t(i, j) = invert_increasing(col, strip.p[j], tol_t, opt.max_iterations);
        }
    });
    return t;
}

StreamConstruction velocity_to_stream(const VelocitySolution& sol, const TransformOptions& opt) {
    opt.validate();
    sol.params.validate();
    const auto& g = sol.grid;
    const auto inv = check_invariants(sol);
    if (!inv.at("u<c").pass)
        throw InvariantViolation("u<c violated with margin " + format_double(inv.at("u<c").value));
    const double c = sol.params.c;
    const std::size_t nx = g.nx(), ny = g.ny(), top = ny - 1;

    StreamConstruction out;
    StreamSolution& st = out.stream;
    st.grid = g;
    st.psi = NodalField(nx, ny);
    numerics::parallel_for(nx, [&](std::size_t b, std::size_t e) {
        std::vector<double> col(ny), cum(ny);
        for (std::size_t i = b; i < e; ++i) {
            for (std::size_t j = 0; j < ny; ++j) col[j] = sol.u(i, j) - c;
            numerics::cumulative_integral(col, g.dsigma(), cum);
            const double eta = g.surface.eta[i];
            for (std::size_t j = 0; j < ny; ++j) st.psi(i, j) = -eta * (cum[top] - cum[j]);
            st.psi(i, top) = 0.0;
        }
    });

    double mean0 = 0.0;
    for (std::size_t i = 0; i < nx; ++i) mean0 += st.psi(i, 0);
    mean0 /= static_cast<double>(nx);
    out.p0 = -mean0;

    std::vector<double> bed_v(nx), surf_flux(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        bed_v[i] = sol.v(i, 0);
        surf_flux[i] = (sol.u(i, top) - c) * g.surface.eta_x[i] - sol.v(i, top);
    }
    const auto bed_int = periodic_running_integral(bed_v, g.surface.dx());
    const auto surf_int = periodic_running_integral(surf_flux, g.surface.dx());
    double defect = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
        defect = std::max(defect, std::abs(st.psi(i, 0) - mean0));
        defect = std::max(defect, std::abs(st.psi(i, 0) - st.psi(0, 0) + bed_int[i]));
        defect = std::max(defect, std::abs(surf_int[i]));
    }
    defect = std::max({defect, std::abs(bed_int[nx]), std::abs(surf_int[nx])});
    out.path_defect = defect;
    if (defect > opt.path_tolerance)
        throw InvariantViolation("not weakly divergence-free at this resolution: path-independence defect " +
                                 format_double(defect) + " exceeds " + format_double(opt.path_tolerance));

    const Gradient d = gradient(g, st.psi);
    double cross = 0.0, q = 0.0;
    for (std::size_t k = 0; k < d.dx.size(); ++k) cross = std::max(cross, std::abs(d.dx.values()[k] + sol.v.values()[k]));
    for (std::size_t i = 0; i < nx; ++i)
        q += d.dx(i, top) * d.dx(i, top) + d.dy(i, top) * d.dy(i, top) + 2 * sol.params.g * g.surface.eta[i];
    out.max_psi_x_plus_v = cross;

    st.params = sol.params;
    st.params.p0 = out.p0;
    st.params.Q = q / static_cast<double>(nx);
    st.smooth = true;

    const BernoulliField bf = bernoulli_field(sol, st, opt);
    const GammaExtraction gx = extract_gamma(bf, opt);
    st.gamma = gx.gamma;
    st.params.B = gx.B;
    out.gamma_constancy = gx.constancy_defect;
    return out;
}

VelocityReconstruction stream_to_velocity(const StreamSolution& sol, const TransformOptions& opt) {
    opt.validate();
    sol.params.validate();
    const auto& g = sol.grid;
    sol.gamma.validate();
    const double slack = 1e-9 * std::abs(sol.params.p0);
    if (sol.gamma.p0() > sol.params.p0 + slack) throw InvalidInput("vorticity profile does not cover [p0, 0]");
    const std::size_t nx = g.nx(), ny = g.ny(), top = ny - 1;
    const Gradient d = gradient(g, sol.psi);

    VelocityReconstruction out;
    VelocitySolution& v = out.velocity;
    v.params = sol.params;
    v.grid = g;
    v.u = NodalField(nx, ny);
    v.v = NodalField(nx, ny);
    v.P = NodalField(nx, ny);
    double surf = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const double px = d.dx(i, j), py = d.dy(i, j);
            v.u(i, j) = sol.params.c + py;
            v.v(i, j) = -px;
            const double pv = std::clamp(-sol.psi(i, j), sol.gamma.p0(), 0.0);
            v.P(i, j) = -0.5 * (px * px + py * py) - sol.params.g * g.y(i, j) + sol.gamma(pv);
        }
        surf += v.P(i, top);
    }
    const double B = sol.params.P_atm - surf / static_cast<double>(nx);
    double dev = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) v.P(i, j) += B;
        dev = std::max(dev, std::abs(v.P(i, top) - sol.params.P_atm));
    }
    v.params.B = B;
    out.surface_pressure_defect = dev;
    return out;
}

HeightSolution stream_to_height(const StreamSolution& sol, const TransformOptions& opt) {
    sol.params.validate();
    const auto& g = sol.grid;
    HeightSolution h;
    h.params = sol.params;
    h.grid = matching_strip(sol, opt);
    h.gamma = sol.gamma;
    h.smooth = sol.smooth;
    const NodalField t = hodograph_index(sol, h.grid, opt);
    h.h = NodalField(h.grid.nq(), h.grid.np());
    const double ds = g.dsigma();
    for (std::size_t i = 0; i < h.grid.nq(); ++i) {
        const double eta = g.surface.eta[i];
        for (std::size_t j = 0; j < h.grid.np(); ++j) h.h(i, j) = t(i, j) * ds * eta;
        h.h(i, 0) = 0.0;
        h.h(i, h.grid.np() - 1) = eta;
    }
    return h;
}

StreamSolution height_to_stream(const HeightSolution& sol, const TransformOptions& opt) {
    opt.validate();
    sol.params.validate();
    const auto& s = sol.grid;
    const std::size_t nx = s.nq(), np = s.np(), top_p = np - 1;
    std::vector<double> eta(nx);
    for (std::size_t i = 0; i < nx; ++i) eta[i] = sol.h(i, top_p);
    const std::size_t ny = opt.levels ? opt.levels : np;

    StreamSolution st;
    st.params = sol.params;
    st.grid = make_fluid_grid(build_surface(s.period, eta), ny);
    st.gamma = sol.gamma;
    st.smooth = sol.smooth;
    st.psi = NodalField(nx, ny);
    const std::size_t top = ny - 1;
    numerics::parallel_for(nx, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const auto col = sol.h.column(i);
            require_increasing(col, "h", i);
            const double tol_t = opt.root_tolerance * static_cast<double>(top_p) / (col[top_p] - col[0]);
            for (std::size_t j = 1; j < top; ++j) {
                const double tp = invert_increasing(col, st.grid.y(i, j), tol_t, opt.max_iterations);
                st.psi(i, j) = -(s.p0 + tp * s.dp());
            }
            st.psi(i, 0) = -s.p0;
            st.psi(i, top) = 0.0;
        }
    });
    return st;
}

ResidualReport chain_rule_audit(const StreamSolution& stream, const HeightSolution& height, const TransformOptions& opt) {
    opt.validate();
    const auto& a = stream.params;
    const auto& b = height.params;
    const auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x)); };
    if (!close(a.L, b.L) || !close(a.c, b.c) || !close(a.g, b.g))
        throw InvalidInput("chain rule audit: flow parameters (L, c, g) do not match");
    const auto& g = stream.grid;
    const auto& s = height.grid;
    if (s.nq() != g.nx()) throw InvalidInput("chain rule audit: strip q-nodes must coincide with fluid x-nodes");
    const Gradient dpsi = gradient(g, stream.psi);
    const Gradient dh = gradient(s, height.h);
    double dq = 0.0, dp = 0.0;
    const double ymax = static_cast<double>(g.ny() - 1);
    for (std::size_t i = 0; i < s.nq(); ++i) {
        const double eta = g.surface.eta[i];
        for (std::size_t j = 0; j < s.np(); ++j) {
            const double t = std::clamp(height.h(i, j) / (eta * g.dsigma()), 0.0, ymax);
            const double px = interp_column(dpsi.dx.column(i), t);
            const double py = interp_column(dpsi.dy.column(i), t);
            dq = std::max(dq, std::abs(dh.dx(i, j) + px / py));
            dp = std::max(dp, std::abs(dh.dy(i, j) + 1.0 / py));
        }
    }
    ResidualReport r;
    r.title = "chain rule audit";
    r.add_max("h_q + psi_x/psi_y", dq, std::numeric_limits<double>::infinity());
    r.add_max("h_p + 1/psi_y", dp, std::numeric_limits<double>::infinity());
    return r;
}

BernoulliField bernoulli_field(const StreamSolution& sol, const NodalField& P, const TransformOptions& opt) {
    const auto& g = sol.grid;
    if (!P.same_shape(sol.psi)) throw InvalidInput("pressure does not match the stream grid");
    const Gradient d = gradient(g, sol.psi);
    BernoulliField bf;
    bf.grid = g;
    bf.F = NodalField(g.nx(), g.ny());
    for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t j = 0; j < g.ny(); ++j) {
            const double px = d.dx(i, j), py = d.dy(i, j);
            bf.F(i, j) = P(i, j) + 0.5 * (px * px + py * py) + sol.params.g * g.y(i, j);
        }
    bf.strip = matching_strip(sol, opt);
    const NodalField t = hodograph_index(sol, bf.strip, opt);
    bf.F_strip = NodalField(bf.strip.nq(), bf.strip.np());
    for (std::size_t i = 0; i < bf.strip.nq(); ++i)
        for (std::size_t j = 0; j < bf.strip.np(); ++j) bf.F_strip(i, j) = interp_column(bf.F.column(i), t(i, j));
    return bf;
}

BernoulliField bernoulli_field(const VelocitySolution& vel, const StreamSolution& sol, const TransformOptions& opt) {
    return bernoulli_field(sol, vel.P, opt);
}

BernoulliField bernoulli_field(const StreamSolution& sol, const TransformOptions& opt) {
    return bernoulli_field(sol, stream_to_velocity(sol, opt).velocity.P, opt);
}

GammaExtraction extract_gamma(const BernoulliField& field, const TransformOptions& opt, std::span<const TestFunction> tests) {
    opt.validate();
    const auto& s = field.strip;
    const std::size_t nq = s.nq(), np = s.np();
    std::vector<double> mean(np, 0.0);
    double defect = 0.0;
    for (std::size_t j = 0; j < np; ++j) {
        double lo = field.F_strip(0, j), hi = lo;
        for (std::size_t i = 0; i < nq; ++i) {
            const double v = field.F_strip(i, j);
            mean[j] += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        mean[j] /= static_cast<double>(nq);
        defect = std::max(defect, hi - lo);
    }
    GammaExtraction out;
    out.B = mean.back();
    out.gamma.p = s.p;
    out.gamma.Gamma.resize(np);
    for (std::size_t j = 0; j < np; ++j) out.gamma.Gamma[j] = mean[j] - out.B;
    out.gamma.Gamma.back() = 0.0;
    out.constancy_defect = defect;
    if (!tests.empty()) {
        const auto report = streamline_flux(field, tests);
        out.flux = report.entries.front().per_test;
    }
    return out;
}

}  // namespace wavekit
