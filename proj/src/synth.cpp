#include "wavekit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace wavekit {

void LaminarSpec::validate() const {
    if (!(depth > 0.0)) throw InvalidInput("laminar spec: depth must be positive");
    if (!(g > 0.0)) throw InvalidInput("laminar spec: g must be positive");
    if (!(L > 0.0)) throw InvalidInput("laminar spec: L must be positive");
    if (!std::isfinite(c) || !std::isfinite(u_bed) || !std::isfinite(gamma0) || !std::isfinite(P_atm))
        throw InvalidInput("laminar spec: parameters must be finite");
    if (nx < 8 || ny < 6) throw InvalidInput("laminar spec: grid too coarse (need nx >= 8, ny >= 6)");
}

namespace {

struct Shot {
    std::vector<double> y, psi, dpsi;
};

Shot shoot(const std::function<double(double)>& gamma, double s, double slope, double d, std::size_t n) {
    Shot out;
    out.y.resize(n + 1);
    out.psi.resize(n + 1);
    out.dpsi.resize(n + 1);
    const double h = d / static_cast<double>(n);
    double p = s, q = slope;
    out.y[0] = 0.0;
    out.psi[0] = p;
    out.dpsi[0] = q;
    for (std::size_t k = 0; k < n; ++k) {
        const double k1p = q, k1q = -gamma(p);
        const double k2p = q + 0.5 * h * k1q, k2q = -gamma(p + 0.5 * h * k1p);
        const double k3p = q + 0.5 * h * k2q, k3q = -gamma(p + 0.5 * h * k2p);
        const double k4p = q + h * k3q, k4q = -gamma(p + h * k3p);
        p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        q += h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
        out.y[k + 1] = h * static_cast<double>(k + 1);
        out.psi[k + 1] = p;
        out.dpsi[k + 1] = q;
    }
    out.y[n] = d;
    return out;
}

/// psi(0) such that psi(d) = 0, by the secant method.
Shot solve_shot(const std::function<double(double)>& gamma, double slope, double d, std::size_t n) {
    double s0 = -slope * d, s1 = s0 + 0.1 * std::max(1.0, std::abs(s0));
    double f0 = shoot(gamma, s0, slope, d, n).psi[n];
    double f1 = shoot(gamma, s1, slope, d, n).psi[n];
    for (int it = 0; it < 100 && std::abs(f1) > 1e-15 && f1 != f0; ++it) {
        const double s2 = s1 - f1 * (s1 - s0) / (f1 - f0);
        s0 = s1;
        f0 = f1;
        s1 = s2;
        f1 = shoot(gamma, s1, slope, d, n).psi[n];
    }
    Shot out = shoot(gamma, s1, slope, d, n);
    if (!(std::abs(out.psi[n]) < 1e-10)) throw InvalidInput("laminar spec: shooting for psi(d) = 0 did not converge");
    out.psi[n] = 0.0;
    return out;
}

}  // namespace

LaminarProfile::LaminarProfile(const LaminarSpec& spec) : spec_(spec), constant_(!spec.gamma_of_psi) {
    spec.validate();
    const double d = spec.depth, slope = spec.u_bed - spec.c;
    if (!constant_) {
        std::size_t n = 256;
        Shot prev = solve_shot(spec.gamma_of_psi, slope, d, n);
        for (;;) {
            Shot next = solve_shot(spec.gamma_of_psi, slope, d, 2 * n);
            double diff = 0.0;
            for (std::size_t k = 0; k <= n; ++k)
                diff = std::max({diff, std::abs(next.psi[2 * k] - prev.psi[k]), std::abs(next.dpsi[2 * k] - prev.dpsi[k])});
            prev = std::move(next);
            n *= 2;
            if (diff < 1e-12 || n >= (1u << 16)) break;
        }
        y_ = std::move(prev.y);
        psi_ = std::move(prev.psi);
        dpsi_ = std::move(prev.dpsi);
        for (std::size_t k = 0; k < y_.size(); ++k)
            if (!(dpsi_[k] < 0.0))
                throw InvalidInput("laminar spec rejected: u >= c at y = " + format_double(y_[k]));
    } else {
        if (!(dpsi(0.0) < 0.0)) throw InvalidInput("laminar spec rejected: u >= c at the bed");
        if (!(dpsi(d) < 0.0)) throw InvalidInput("laminar spec rejected: u >= c at the surface");
    }
}

double LaminarProfile::psi(double y) const {
    const double d = spec_.depth;
    if (constant_) return (spec_.u_bed - spec_.c) * (y - d) - 0.5 * spec_.gamma0 * (y * y - d * d);
    const std::size_t n = y_.size() - 1;
    const double h = d / static_cast<double>(n);
    const double t = std::clamp(y / h, 0.0, static_cast<double>(n));
    const std::size_t k = std::min(static_cast<std::size_t>(t), n - 1);
    const double s = t - static_cast<double>(k);
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * psi_[k] + h10 * h * dpsi_[k] + h01 * psi_[k + 1] + h11 * h * dpsi_[k + 1];
}

double LaminarProfile::dpsi(double y) const {
    if (constant_) return (spec_.u_bed - spec_.c) - spec_.gamma0 * y;
    const double d = spec_.depth;
    const std::size_t n = y_.size() - 1;
    const double h = d / static_cast<double>(n);
    const double t = std::clamp(y / h, 0.0, static_cast<double>(n));
    const std::size_t k = std::min(static_cast<std::size_t>(t), n - 1);
    const double s = t - static_cast<double>(k);
    // derivative of the Hermite interpolant of psi
    const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1, d01 = -d00, d11 = 3 * s * s - 2 * s;
    return (d00 * psi_[k] + d01 * psi_[k + 1]) / h + d10 * dpsi_[k] + d11 * dpsi_[k + 1];
}

double LaminarProfile::gamma(double psi_value) const {
    return constant_ ? spec_.gamma0 : spec_.gamma_of_psi(psi_value);
}

double LaminarProfile::height(double p) const {
    const double d = spec_.depth;
    double a = 0.0, b = d;
    double y = d * (p - p0()) / (0.0 - p0());
    for (int it = 0; it < 200; ++it) {
        const double f = -psi(y) - p;
        if (f == 0.0) return y;
        if (f > 0.0)
            b = y;
        else
            a = y;
        const double df = -dpsi(y);
        double yn = df > 0.0 ? y - f / df : 0.5 * (a + b);
        if (!(yn > a && yn < b)) yn = 0.5 * (a + b);
        if (std::abs(yn - y) < 1e-15 * std::max(1.0, d)) return yn;
        y = yn;
    }
    return y;
}

LaminarTriple laminar(const LaminarSpec& spec) {
    const LaminarProfile prof(spec);
    const double d = spec.depth;
    const double p0 = prof.p0();
    const double top_slope = prof.dpsi(d);

    FlowParameters params;
    params.c = spec.c;
    params.g = spec.g;
    params.P_atm = spec.P_atm;
    params.L = spec.L;
    params.p0 = p0;
    params.Q = top_slope * top_slope + 2.0 * spec.g * d;
    params.B = spec.P_atm + 0.5 * params.Q;

    const FluidGrid grid = make_flat_grid(spec.L, d, spec.nx, spec.ny);
    const std::size_t nx = spec.nx, ny = spec.ny;

    VorticityProfile gamma;
    if (!spec.gamma_of_psi) {
        gamma = constant_vorticity(p0, spec.gamma0, ny);
    } else {
        gamma.p = make_strip_grid(spec.L, p0, 8, ny).p;
        gamma.Gamma.resize(ny);
        gamma.gamma.resize(ny);
        for (std::size_t j = 0; j < ny; ++j) {
            const double y = prof.height(gamma.p[j]);
            const double s = prof.dpsi(y);
            gamma.Gamma[j] = 0.5 * s * s - 0.5 * top_slope * top_slope;
            gamma.gamma[j] = spec.gamma_of_psi(-gamma.p[j]);
        }
        gamma.Gamma.back() = 0.0;
    }

    LaminarTriple out;
    auto& v = out.velocity;
    v.params = params;
    v.grid = grid;
    v.u = NodalField(nx, ny);
    v.v = NodalField(nx, ny);
    v.P = NodalField(nx, ny);
    auto& s = out.stream;
    s.params = params;
    s.grid = grid;
    s.psi = NodalField(nx, ny);
    s.gamma = gamma;
    for (std::size_t j = 0; j < ny; ++j) {
        const double y = grid.y(0, j);
        const double ps = j == 0 ? -p0 : (j + 1 == ny ? 0.0 : prof.psi(y));
        const double u = spec.c + prof.dpsi(y);
        const double P = spec.P_atm + spec.g * (d - y);
        for (std::size_t i = 0; i < nx; ++i) {
            s.psi(i, j) = ps;
            v.u(i, j) = u;
            v.P(i, j) = P;
        }
    }

    auto& h = out.height;
    h.params = params;
    h.grid = make_strip_grid(spec.L, p0, nx, ny);
    h.gamma = gamma;
    h.h = NodalField(nx, ny);
    for (std::size_t j = 0; j < ny; ++j) {
        const double hv = j == 0 ? 0.0 : (j + 1 == ny ? d : prof.height(h.grid.p[j]));
        for (std::size_t i = 0; i < nx; ++i) h.h(i, j) = hv;
    }
    return out;
}

void RoughFieldSpec::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidInput("rough field: alpha must lie in (0, 1]");
    if (octaves == 0) throw InvalidInput("rough field: at least one octave required");
    if (octaves > 40) throw InvalidInput("rough field: at most 40 octaves supported");
    if (!(period > 0.0)) throw InvalidInput("rough field: period must be positive");
    if (!(base_wavenumber >= 0.0)) throw InvalidInput("rough field: base wavenumber must be non-negative");
    if (!std::isfinite(amplitude)) throw InvalidInput("rough field: amplitude must be finite");
}

double RoughFieldSpec::kappa0() const { return base_wavenumber > 0.0 ? base_wavenumber : 2.0 * std::numbers::pi / period; }

RoughFieldSpec normalized_rough(double alpha, std::size_t octaves, std::uint64_t seed, double base_wavenumber) {
    RoughFieldSpec r;
    r.alpha = alpha;
    r.octaves = octaves;
    r.seed = seed;
    r.base_wavenumber = base_wavenumber;
    r.validate();
    double sum = 0.0;
    for (std::size_t k = 0; k < octaves; ++k) sum += std::exp2(-alpha * static_cast<double>(k));
    r.amplitude = 1.0 / sum;
    return r;
}

WeierstrassField::WeierstrassField(const RoughFieldSpec& spec, int dimension) : dimension_(dimension) {
    spec.validate();
    if (dimension != 1 && dimension != 2) throw InvalidInput("rough field: dimension must be 1 or 2");
    numerics::Rng rng(spec.seed);
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t k = 0; k < spec.octaves; ++k) {
        const double kd = static_cast<double>(k);
        amp_.push_back(spec.amplitude * std::exp2(-spec.alpha * kd));
        kappa_.push_back(spec.kappa0() * std::exp2(kd));
        theta_.push_back(two_pi * rng.uniform());
        phi_.push_back(dimension == 2 ? two_pi * rng.uniform() : 0.0);
    }
}

double WeierstrassField::operator()(double x) const {
    double s = 0.0;
    for (std::size_t k = 0; k < amp_.size(); ++k) s += amp_[k] * std::cos(kappa_[k] * x + theta_[k]);
    return s;
}

double WeierstrassField::operator()(double x, double y) const {
    if (dimension_ == 1) return (*this)(x);
    double s = 0.0;
    for (std::size_t k = 0; k < amp_.size(); ++k)
        s += amp_[k] * std::cos(kappa_[k] * x + theta_[k]) * std::cos(kappa_[k] * y + phi_[k]);
    return s;
}

double WeierstrassField::A(double x, double y) const {
    double s = 0.0;
    for (std::size_t k = 0; k < amp_.size(); ++k)
        s += amp_[k] * std::cos(kappa_[k] * x + theta_[k]) * (std::sin(kappa_[k] * y + phi_[k]) - std::sin(phi_[k])) / kappa_[k];
    return s;
}

double WeierstrassField::A_x(double x, double y) const {
    double s = 0.0;
    for (std::size_t k = 0; k < amp_.size(); ++k)
        s -= amp_[k] * std::sin(kappa_[k] * x + theta_[k]) * (std::sin(kappa_[k] * y + phi_[k]) - std::sin(phi_[k]));
    return s;
}

double WeierstrassField::bandwidth() const { return kappa_.back(); }

NodalField weierstrass(const RoughFieldSpec& spec, int dimension, std::size_t n) {
    const WeierstrassField w(spec, dimension);
    if (n < 8) throw InvalidInput("rough field: need at least 8 samples per axis");
    const double h = spec.period / static_cast<double>(n);
    NodalField out(n, dimension == 1 ? 1 : n);
    numerics::parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double x = h * static_cast<double>(i);
            if (dimension == 1)
                out(i, 0) = w(x);
            else
                for (std::size_t j = 0; j < n; ++j) out(i, j) = w(x, h * static_cast<double>(j));
        }
    });
    return out;
}

StreamSolution perturb(const StreamSolution& sol, const RoughFieldSpec& spec, double delta) {
    spec.validate();
    if (delta == 0.0) return sol;
    const WeierstrassField w(spec, 2);
    const auto& g = sol.grid;
    const Gradient d = gradient(g, sol.psi);
    StreamSolution out = sol;
    out.smooth = false;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.nx(); ++i) {
        const double x = g.x(i), eta = g.surface.eta[i];
        const double A_eta = w.A(x, eta);
        for (std::size_t j = 1; j + 1 < g.ny(); ++j) {
            const double y = g.y(i, j);
            out.psi(i, j) += delta * (w.A(x, y) - (y / eta) * A_eta);
        }
        for (std::size_t j = 0; j < g.ny(); ++j) {
            const double py = d.dy(i, j) + delta * (w(x, g.y(i, j)) - A_eta / eta);
            worst = std::max(worst, py);
        }
    }
    if (!(worst < 0.0))
        throw InvariantViolation("sign invariant psi_y < 0 broken by the perturbation (max psi_y = " + format_double(worst) +
                                 "); use a smaller delta");
    return out;
}

PerturbedLaminar::PerturbedLaminar(const LaminarSpec& spec, const RoughFieldSpec& rough, double delta)
    : spec_(spec), profile_(spec), field_(rough, 2), delta_(delta) {
    const double s = profile_.dpsi(spec.depth);
    B_ = spec.P_atm + 0.5 * (s * s + 2.0 * spec.g * spec.depth);
    if (spec.gamma_of_psi) gamma_ = laminar(spec).stream.gamma;
}

void PerturbedLaminar::sample(std::span<const double> xs, std::span<const double> ys, FluxSample& out) const {
    const std::size_t na = xs.size(), nb = ys.size(), n = na * nb;
    const double d = spec_.depth;
    std::vector<double> W(n, 0.0), A(n, 0.0), Ax(n, 0.0), Ad(na, 0.0), Axd(na, 0.0);
    std::vector<double> cx(na), sx(na), cy(nb), sy(nb);
    for (std::size_t k = 0; k < field_.octaves(); ++k) {
        const double kap = field_.wavenumber(k), th = field_.theta(k), ph = field_.phi(k), amp = field_.amplitude(k);
        const double s0 = std::sin(ph);
        const double Sd = std::sin(kap * d + ph) - s0;
        for (std::size_t a = 0; a < na; ++a) {
            cx[a] = amp * std::cos(kap * xs[a] + th);
            sx[a] = amp * std::sin(kap * xs[a] + th);
        }
        for (std::size_t b = 0; b < nb; ++b) {
            cy[b] = std::cos(kap * ys[b] + ph);
            sy[b] = std::sin(kap * ys[b] + ph) - s0;
        }
        const double inv = 1.0 / kap;
        for (std::size_t a = 0; a < na; ++a) {
            const double ca = cx[a], cai = cx[a] * inv, sa = sx[a];
            Ad[a] += cai * Sd;
            Axd[a] -= sa * Sd;
            double* Wr = W.data() + a * nb;
            double* Ar = A.data() + a * nb;
            double* Xr = Ax.data() + a * nb;
            for (std::size_t b = 0; b < nb; ++b) {
                Wr[b] += ca * cy[b];
                Ar[b] += cai * sy[b];
                Xr[b] -= sa * sy[b];
            }
        }
    }
    out.psi_x.resize(n);
    out.psi_y.resize(n);
    out.F.resize(n);
    std::vector<double> pl(nb), dpl(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        pl[b] = profile_.psi(ys[b]);
        dpl[b] = profile_.dpsi(ys[b]);
    }
    const bool constant = !spec_.gamma_of_psi;
    for (std::size_t a = 0; a < na; ++a)
        for (std::size_t b = 0; b < nb; ++b) {
            const std::size_t k = a * nb + b;
            const double y = ys[b];
            out.psi_x[k] = delta_ * (Ax[k] - (y / d) * Axd[a]);
            out.psi_y[k] = dpl[b] + delta_ * (W[k] - Ad[a] / d);
            const double psi = pl[b] + delta_ * (A[k] - (y / d) * Ad[a]);
            out.F[k] = constant ? -spec_.gamma0 * psi + B_
                                : gamma_(std::clamp(-psi, gamma_.p0(), 0.0)) + B_;
        }
}

}  // namespace wavekit
