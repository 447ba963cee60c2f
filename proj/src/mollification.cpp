#include "wavekit/mollification.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace wavekit {

double MollifierKernel::profile(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

MollifierKernel::MollifierKernel(int dim, double scale, std::size_t n) : dimension(dim), eps(scale), nodes_per_axis(n) {
    if (dim != 1 && dim != 2) throw InvalidInput("mollifier dimension must be 1 or 2");
    if (!(scale > 0.0)) throw InvalidInput("mollifier scale must be positive");
    const auto rule = numerics::gauss_legendre(n);
    std::vector<double> raw;
    axis = rule.nodes;
    auto push = [&](double zx, double zy, double weight, std::size_t slot) {
        const double r2 = zx * zx + zy * zy;
        if (r2 >= 1.0) return;
        const double rho = profile(r2);
        const double d = -2.0 * rho / ((1.0 - r2) * (1.0 - r2));
        z.push_back({zx, zy});
        tensor_index.push_back(slot);
        raw.push_back(weight * rho);
        grad_w.push_back({weight * d * zx, weight * d * zy});
    };
    if (dim == 1) {
        for (std::size_t a = 0; a < n; ++a) push(rule.nodes[a], 0.0, rule.weights[a], a);
    } else {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) push(rule.nodes[a], rule.nodes[b], rule.weights[a] * rule.weights[b], a * n + b);
    }
    raw_mass = 0.0;
    double grad_moment = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        raw_mass += raw[i];
        grad_moment -= grad_w[i].x * z[i].x;
    }
    w.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        w[i] = raw[i] / raw_mass;
        grad_w[i].x /= grad_moment;
        grad_w[i].y /= grad_moment;
    }
}

MollifierKernel MollifierKernel::rescaled(double new_eps) const {
    MollifierKernel k = *this;
    if (!(new_eps > 0.0)) throw InvalidInput("mollifier scale must be positive");
    k.eps = new_eps;
    return k;
}

double MollifierKernel::moment(int px, int py) const {
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) s += w[i] * std::pow(z[i].x, px) * std::pow(z[i].y, py);
    return s;
}

std::size_t resolving_nodes(double bandwidth, double eps, std::size_t base) {
    const double n = 16.0 + 0.6 * bandwidth * eps;
    return std::max<std::size_t>(base, static_cast<std::size_t>(std::ceil(n)));
}

std::vector<double> eps_sweep(double eps0, int kmin, int kmax) {
    if (kmax < kmin) throw InvalidInput("empty eps sweep");
    std::vector<double> out;
    for (int k = kmin; k <= kmax; ++k) out.push_back(std::ldexp(eps0, -k));
    return out;
}

namespace {

void require_admissible(const MollifierKernel& kernel, const RegionSpec& region) {
    if (!(kernel.eps < region.eps0))
        throw InvalidInput("mollifier scale " + format_double(kernel.eps) + " is not below eps0 = " +
                           format_double(region.eps0) + " of the region");
}

template <class Body>
void for_each_node(const RegionSpec& region, Body body) {
    const std::size_t n = region.k_nodes.size();
    numerics::parallel_for(n, [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) body(k, region.k_nodes[k]);
    });
}

Point shifted(Point x, const MollifierKernel& kernel, std::size_t i) {
    return {x.x - kernel.eps * kernel.z[i].x, x.y - kernel.eps * kernel.z[i].y};
}

}  // namespace

MollifiedPair mollify_pair(const ScalarField& f, const ScalarField& g, const MollifierKernel& kernel, Point x) {
    MollifiedPair m;
    m.f = f(x);
    m.g = g(x);
    for (std::size_t i = 0; i < kernel.z.size(); ++i) {
        const Point p = shifted(x, kernel, i);
        const double fv = f(p), gv = g(p);
        const double w = kernel.w[i];
        m.f_eps += w * fv;
        m.g_eps += w * gv;
        m.fg_eps += w * (fv * gv);
        m.r += w * ((fv - m.f) * (gv - m.g));
        m.grad_f_eps.x += kernel.grad_w[i].x * (fv - m.f);
        m.grad_f_eps.y += kernel.grad_w[i].y * (fv - m.f);
    }
    m.grad_f_eps.x /= kernel.eps;
    m.grad_f_eps.y /= kernel.eps;
    return m;
}

std::vector<double> mollify(const ScalarField& f, const MollifierKernel& kernel, const RegionSpec& region) {
    require_admissible(kernel, region);
    std::vector<double> out(region.k_nodes.size());
    for_each_node(region, [&](std::size_t k, Point x) {
        double s = 0.0;
        for (std::size_t i = 0; i < kernel.z.size(); ++i) s += kernel.w[i] * f(shifted(x, kernel, i));
        out[k] = s;
    });
    return out;
}

std::vector<double> r_eps(const ScalarField& f, const ScalarField& g, const MollifierKernel& kernel, const RegionSpec& region) {
    require_admissible(kernel, region);
    std::vector<double> out(region.k_nodes.size());
    for_each_node(region, [&](std::size_t k, Point x) {
        const double f0 = f(x), g0 = g(x);
        double s = 0.0;
        for (std::size_t i = 0; i < kernel.z.size(); ++i) {
            const Point p = shifted(x, kernel, i);
            s += kernel.w[i] * ((f(p) - f0) * (g(p) - g0));
        }
        out[k] = s;
    });
    return out;
}

std::vector<double> R_eps(const ScalarField& f, const ScalarField& g, const MollifierKernel& kernel, const RegionSpec& region) {
    require_admissible(kernel, region);
    std::vector<double> out(region.k_nodes.size());
    for_each_node(region, [&](std::size_t k, Point x) {
        const MollifiedPair m = mollify_pair(f, g, kernel, x);
        out[k] = m.r - (m.f - m.f_eps) * (m.g - m.g_eps);
    });
    return out;
}

std::vector<Point> gradient_of_mollified(const ScalarField& f, const MollifierKernel& kernel, const RegionSpec& region) {
    require_admissible(kernel, region);
    std::vector<Point> out(region.k_nodes.size());
    for_each_node(region, [&](std::size_t k, Point x) {
        const double f0 = f(x);
        Point s;
        for (std::size_t i = 0; i < kernel.z.size(); ++i) {
            const double d = f(shifted(x, kernel, i)) - f0;
            s.x += kernel.grad_w[i].x * d;
            s.y += kernel.grad_w[i].y * d;
        }
        out[k] = {s.x / kernel.eps, s.y / kernel.eps};
    });
    return out;
}

double lemma2_check(std::span<const ScalarField> fields, const MollifierKernel& kernel, const RegionSpec& region) {
    if (fields.size() != static_cast<std::size_t>(kernel.dimension))
        throw InvalidInput("lemma 2 check needs one field per dimension");
    std::vector<double> div(region.k_nodes.size(), 0.0);
    for (std::size_t d = 0; d < fields.size(); ++d) {
        const auto grad = gradient_of_mollified(fields[d], kernel, region);
        for (std::size_t k = 0; k < div.size(); ++k) div[k] += d == 0 ? grad[k].x : grad[k].y;
    }
    double worst = 0.0;
    for (double v : div) worst = std::max(worst, std::abs(v));
    return worst;
}

std::vector<double> dyadic_scales(double top, std::size_t count) {
    std::vector<double> out;
    for (std::size_t k = 0; k < count; ++k) out.push_back(std::ldexp(top, -static_cast<int>(k)));
    return out;
}

HolderEstimate estimate_holder(const ScalarField& f, const RegionSpec& region, int dimension, std::span<const double> deltas) {
    if (deltas.size() < 4) throw InvalidInput("Hoelder estimate needs at least 4 scales");
    HolderEstimate h;
    std::vector<double> lx, ly;
    const std::size_t n = region.k_nodes.size();
    std::vector<double> base(n);
    for (std::size_t k = 0; k < n; ++k) base[k] = f(region.k_nodes[k]);
    for (double d : deltas) {
        std::vector<double> local(n, 0.0);
        numerics::parallel_for(n, [&](std::size_t b, std::size_t e) {
            for (std::size_t k = b; k < e; ++k) {
                const Point p = region.k_nodes[k];
                double m = std::abs(f({p.x + d, p.y}) - base[k]);
                if (dimension == 2) m = std::max(m, std::abs(f({p.x, p.y + d}) - base[k]));
                local[k] = m;
            }
        });
        const double omega = *std::max_element(local.begin(), local.end());
        if (!(omega > 1e-300)) return h;
        lx.push_back(std::log(d));
        ly.push_back(std::log(omega));
    }
    const auto fit = numerics::fit_line(lx, ly);
    h.defined = true;
    h.alpha = fit.slope;
    h.constant = std::exp(fit.intercept);
    h.r2 = fit.r2;
    h.delta_min = *std::min_element(deltas.begin(), deltas.end());
    h.delta_max = *std::max_element(deltas.begin(), deltas.end());
    return h;
}

ScalarField interpolant(const FluidGrid& grid, const NodalField& f) {
    auto g = std::make_shared<const FluidGrid>(grid);
    auto data = std::make_shared<const NodalField>(f);
    return [g, data](Point p) {
        const double dx = g->surface.dx();
        const double tx = p.x / dx;
        const double sigma = p.y / g->surface.eta_at(p.x);
        const double ts = sigma / g->dsigma();
        const long n = static_cast<long>(g->nx());
        const long base = static_cast<long>(std::floor(tx)) - 1;
        const double s = tx - static_cast<double>(base);
        const double c[4] = {-(s - 1) * (s - 2) * (s - 3) / 6.0, s * (s - 2) * (s - 3) / 2.0,
                             -s * (s - 1) * (s - 3) / 2.0, s * (s - 1) * (s - 2) / 6.0};
        double acc = 0.0;
        for (long m = 0; m < 4; ++m) {
            long i = (base + m) % n;
            if (i < 0) i += n;
            acc += c[m] * numerics::cubic_interp(data->column(static_cast<std::size_t>(i)), ts);
        }
        return acc;
    };
}

ScalarField interpolant(const StripGrid& grid, const NodalField& f) {
    auto g = std::make_shared<const StripGrid>(grid);
    auto data = std::make_shared<const NodalField>(f);
    return [g, data](Point p) {
        const double tx = p.x / g->dq();
        const double tp = (p.y - g->p0) / g->dp();
        const long n = static_cast<long>(g->nq());
        const long base = static_cast<long>(std::floor(tx)) - 1;
        const double s = tx - static_cast<double>(base);
        const double c[4] = {-(s - 1) * (s - 2) * (s - 3) / 6.0, s * (s - 2) * (s - 3) / 2.0,
                             -s * (s - 1) * (s - 3) / 2.0, s * (s - 1) * (s - 2) / 6.0};
        double acc = 0.0;
        for (long m = 0; m < 4; ++m) {
            long i = (base + m) % n;
            if (i < 0) i += n;
            acc += c[m] * numerics::cubic_interp(data->column(static_cast<std::size_t>(i)), tp);
        }
        return acc;
    };
}

std::vector<RateStudy> lemma1_study(const ScalarField& f, int dimension, const RegionSpec& region, double alpha,
                                    const Lemma1Config& config) {
    if (config.eps.size() < 2) throw InvalidInput("lemma 1 study needs at least two scales");
    for (std::size_t k = 0; k < config.eps.size(); ++k) {
        if (!(config.eps[k] < region.eps0))
            throw InvalidInput("eps sweep reaches " + format_double(config.eps[k]) + ", not below eps0 = " +
                               format_double(region.eps0) + " of the region");
        if (k > 0 && !(config.eps[k] < config.eps[k - 1])) throw InvalidInput("eps sweep must be strictly decreasing");
    }
    std::vector<RateStudy> studies(3);
    studies[0].label = "|f^eps - f|";
    studies[0].predicted_slope = alpha;
    studies[1].label = "|grad f^eps|";
    studies[1].predicted_slope = alpha - 1.0;
    studies[2].label = "|R^eps(f,f)|";
    studies[2].predicted_slope = 2.0 * alpha;

    const std::size_t n = region.k_nodes.size();
    std::vector<double> base(n);
    for (std::size_t k = 0; k < n; ++k) base[k] = f(region.k_nodes[k]);

    for (double eps : config.eps) {
        const std::size_t nodes =
            config.bandwidth > 0.0 ? resolving_nodes(config.bandwidth, eps, config.nodes_per_axis) : config.nodes_per_axis;
        const MollifierKernel kernel(dimension, eps, nodes);
        std::vector<double> e0(n), e1(n), e2(n);
        numerics::parallel_for(n, [&](std::size_t b, std::size_t e) {
            for (std::size_t k = b; k < e; ++k) {
                const Point x = region.k_nodes[k];
                const double f0 = base[k];
                double fe = 0.0, r = 0.0, gx = 0.0, gy = 0.0;
                for (std::size_t i = 0; i < kernel.z.size(); ++i) {
                    const double d = f(shifted(x, kernel, i)) - f0;
                    fe += kernel.w[i] * d;
                    r += kernel.w[i] * d * d;
                    gx += kernel.grad_w[i].x * d;
                    gy += kernel.grad_w[i].y * d;
                }
                e0[k] = std::abs(fe);
                e1[k] = std::hypot(gx, gy) / eps;
                e2[k] = std::abs(r - fe * fe);
            }
        });
        studies[0].samples.push_back({eps, *std::max_element(e0.begin(), e0.end())});
        studies[1].samples.push_back({eps, *std::max_element(e1.begin(), e1.end())});
        studies[2].samples.push_back({eps, *std::max_element(e2.begin(), e2.end())});
    }
    for (auto& s : studies) fit_rate(s, config.drop_largest, config.drop_smallest);
    return studies;
}

double product_identity_defect(const ScalarField& f, const ScalarField& g, const MollifierKernel& kernel,
                               const RegionSpec& region) {
    require_admissible(kernel, region);
    std::vector<double> out(region.k_nodes.size());
    for_each_node(region, [&](std::size_t k, Point x) {
        const MollifiedPair m = mollify_pair(f, g, kernel, x);
        const double R = m.r - (m.f - m.f_eps) * (m.g - m.g_eps);
        out[k] = std::abs(m.fg_eps - m.f_eps * m.g_eps - R);
    });
    return out.empty() ? 0.0 : *std::max_element(out.begin(), out.end());
}

}  // namespace wavekit
