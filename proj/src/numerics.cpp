#include "wavekit/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>

namespace wavekit::numerics {

PeriodicDerivative::PeriodicDerivative(std::size_t n, double period) : n_(n), matrix_(n * n, 0.0) {
    if (n < 2) throw InvalidInput("periodic derivative needs at least 2 nodes");
    if (!(period > 0.0)) throw InvalidInput("period must be positive");
    const double h = 2.0 * std::numbers::pi / static_cast<double>(n);
    const double scale = 2.0 * std::numbers::pi / period;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const long k = static_cast<long>(i) - static_cast<long>(j);
            const double sign = (k % 2 == 0) ? 1.0 : -1.0;
            const double arg = 0.5 * static_cast<double>(k) * h;
            const double entry = (n % 2 == 0) ? 0.5 * sign / std::tan(arg) : 0.5 * sign / std::sin(arg);
            matrix_[i * n + j] = scale * entry;
        }
    }
}

void PeriodicDerivative::apply(const double* in, double* out, std::size_t stride) const {
    std::vector<double> buf(n_);
    for (std::size_t j = 0; j < n_; ++j) buf[j] = in[j * stride];
    for (std::size_t i = 0; i < n_; ++i) {
        const double* row = matrix_.data() + i * n_;
        const double fi = buf[i];
        double acc = 0.0;
        for (std::size_t j = 0; j < n_; ++j) acc += row[j] * (buf[j] - fi);
        out[i * stride] = acc;
    }
}

void fd_first(std::span<const double> f, double h, std::span<double> out) {
    const std::size_t n = f.size();
    if (n < 5) throw InvalidInput("fourth-order differencing needs at least 5 nodes");
    const double s = 1.0 / (12.0 * h);
    out[0] = s * (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]);
    out[1] = s * (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]);
    for (std::size_t i = 2; i + 2 < n; ++i) out[i] = s * (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]);
    const std::size_t m = n - 1;
    out[m - 1] = -s * (-3 * f[m] - 10 * f[m - 1] + 18 * f[m - 2] - 6 * f[m - 3] + f[m - 4]);
    out[m] = -s * (-25 * f[m] + 48 * f[m - 1] - 36 * f[m - 2] + 16 * f[m - 3] - 3 * f[m - 4]);
}

void fd_second(std::span<const double> f, double h, std::span<double> out) {
    const std::size_t n = f.size();
    if (n < 8) throw InvalidInput("fourth-order second differencing needs at least 8 nodes");
    const double s = 1.0 / (12.0 * h * h), e = 1.0 / (180.0 * h * h);
    out[0] = e * (938 * f[0] - 4014 * f[1] + 7911 * f[2] - 9490 * f[3] + 7380 * f[4] - 3618 * f[5] + 1019 * f[6] -
                  126 * f[7]);
    out[1] = e * (126 * f[0] - 70 * f[1] - 486 * f[2] + 855 * f[3] - 670 * f[4] + 324 * f[5] - 90 * f[6] + 11 * f[7]);
    for (std::size_t i = 2; i + 2 < n; ++i)
        out[i] = s * (-f[i - 2] + 16 * f[i - 1] - 30 * f[i] + 16 * f[i + 1] - f[i + 2]);
    const std::size_t m = n - 1;
    out[m - 1] = e * (126 * f[m] - 70 * f[m - 1] - 486 * f[m - 2] + 855 * f[m - 3] - 670 * f[m - 4] + 324 * f[m - 5] -
                      90 * f[m - 6] + 11 * f[m - 7]);
    out[m] = e * (938 * f[m] - 4014 * f[m - 1] + 7911 * f[m - 2] - 9490 * f[m - 3] + 7380 * f[m - 4] -
                  3618 * f[m - 5] + 1019 * f[m - 6] - 126 * f[m - 7]);
}

void cumulative_integral(std::span<const double> f, double h, std::span<double> out) {
    const std::size_t n = f.size();
    if (n < 4) throw InvalidInput("cumulative integration needs at least 4 nodes");
    const double s = h / 24.0;
    out[0] = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        double panel;
        if (j == 1)
            panel = s * (9 * f[0] + 19 * f[1] - 5 * f[2] + f[3]);
        else if (j == n - 1)
            panel = s * (f[j - 3] - 5 * f[j - 2] + 19 * f[j - 1] + 9 * f[j]);
        else
            panel = s * (-f[j - 2] + 13 * f[j - 1] + 13 * f[j] - f[j + 1]);
        out[j] = out[j - 1] + panel;
    }
}

std::vector<double> simpson_weights(std::size_t n, double h) {
    if (n < 3) throw InvalidInput("Simpson weights need at least 3 nodes");
    std::vector<double> w(n, 0.0);
    std::size_t simpson_end = n - 1;
    if (n % 2 == 0) {
        if (n < 4) throw InvalidInput("Simpson weights need at least 4 nodes for even counts");
        simpson_end = n - 4;
        const double c = 3.0 * h / 8.0;
        w[n - 4] += c;
        w[n - 3] += 3 * c;
        w[n - 2] += 3 * c;
        w[n - 1] += c;
    }
    for (std::size_t j = 0; j + 2 <= simpson_end; j += 2) {
        w[j] += h / 3.0;
        w[j + 1] += 4.0 * h / 3.0;
        w[j + 2] += h / 3.0;
    }
    return w;
}

namespace {

void lagrange4(double s, double c[4]) {
    // nodes at 0,1,2,3, s measured from node 0
    c[0] = -(s - 1) * (s - 2) * (s - 3) / 6.0;
    c[1] = s * (s - 2) * (s - 3) / 2.0;
    c[2] = -s * (s - 1) * (s - 3) / 2.0;
    c[3] = s * (s - 1) * (s - 2) / 6.0;
}

void lagrange4_dt(double s, double c[4]) {
    c[0] = -((s - 2) * (s - 3) + (s - 1) * (s - 3) + (s - 1) * (s - 2)) / 6.0;
    c[1] = ((s - 2) * (s - 3) + s * (s - 3) + s * (s - 2)) / 2.0;
    c[2] = -((s - 1) * (s - 3) + s * (s - 3) + s * (s - 1)) / 2.0;
    c[3] = ((s - 1) * (s - 2) + s * (s - 2) + s * (s - 1)) / 6.0;
}

std::size_t stencil_start(std::size_t n, double t) {
    const double fl = std::floor(t);
    long start = static_cast<long>(fl) - 1;
    start = std::clamp(start, 0L, static_cast<long>(n) - 4);
    return static_cast<std::size_t>(start);
}

}  // namespace

double cubic_interp(std::span<const double> f, double t) {
    const std::size_t n = f.size();
    if (n < 4) throw InvalidInput("cubic interpolation needs at least 4 samples");
    const std::size_t k = stencil_start(n, t);
    double c[4];
    lagrange4(t - static_cast<double>(k), c);
    return c[0] * f[k] + c[1] * f[k + 1] + c[2] * f[k + 2] + c[3] * f[k + 3];
}

double cubic_interp_dt(std::span<const double> f, double t) {
    const std::size_t n = f.size();
    if (n < 4) throw InvalidInput("cubic interpolation needs at least 4 samples");
    const std::size_t k = stencil_start(n, t);
    double c[4];
    lagrange4_dt(t - static_cast<double>(k), c);
    return c[0] * f[k] + c[1] * f[k + 1] + c[2] * f[k + 2] + c[3] * f[k + 3];
}

double cubic_interp_periodic(std::span<const double> f, double t) {
    const long n = static_cast<long>(f.size());
    if (n < 4) throw InvalidInput("cubic interpolation needs at least 4 samples");
    const double fl = std::floor(t);
    const long base = static_cast<long>(fl) - 1;
    double c[4];
    lagrange4(t - static_cast<double>(base), c);
    double acc = 0.0;
    for (long m = 0; m < 4; ++m) {
        long idx = (base + m) % n;
        if (idx < 0) idx += n;
        acc += c[m] * f[static_cast<std::size_t>(idx)];
    }
    return acc;
}

GaussRule gauss_legendre(std::size_t n) {
    if (n == 0) throw InvalidInput("Gauss-Legendre rule needs at least one node");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double dn = static_cast<double>(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double dk = static_cast<double>(k);
                const double p2 = ((2 * dk - 1) * x * p1 - (dk - 1) * p0) / dk;
                p0 = p1;
                p1 = p2;
            }
            dp = dn * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double dk = static_cast<double>(k);
                const double p2 = ((2 * dk - 1) * x * p1 - (dk - 1) * p0) / dk;
                p0 = p1;
                p1 = p2;
            }
            dp = dn * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw InvalidInput("line fit needs two or more matched points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw InvalidInput("line fit with identical abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.slope * x[i] + fit.intercept);
        ss_res += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

namespace {

std::size_t initial_threads() {
    if (const char* env = std::getenv("WAVEKIT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

std::atomic<std::size_t>& thread_setting() {
    static std::atomic<std::size_t> value{initial_threads()};
    return value;
}

}  // namespace

std::size_t thread_count() { return thread_setting().load(); }

void set_thread_count(std::size_t n) { thread_setting().store(std::max<std::size_t>(n, 1)); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    const std::size_t workers = std::min(thread_count(), n);
    if (workers <= 1) {
        if (n > 0) body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&body, begin, end] { body(begin, end); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace wavekit::numerics
