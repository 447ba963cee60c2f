#pragma once

// Shared discretisation kernels: derivative stencils, quadrature rules,
// interpolation, line fits, seeded random numbers and a small parallel map.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavekit {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Thrown when inputs violate a documented precondition.
class InvalidInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a solution violates a structural invariant (sign condition,
/// bracketing failure, unresolved divergence).
class InvariantViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Node values on an nx-by-ny index space, stored column by column: the
/// second index is contiguous, so vertical operations walk memory linearly.
class NodalField {
public:
    NodalField() = default;
    NodalField(std::size_t nx, std::size_t ny, double value = 0.0)
        : nx_(nx), ny_(ny), data_(nx * ny, value) {}

    double& operator()(std::size_t i, std::size_t j) { return data_[i * ny_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * ny_ + j]; }

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t size() const { return data_.size(); }

    std::span<double> column(std::size_t i) { return {data_.data() + i * ny_, ny_}; }
    std::span<const double> column(std::size_t i) const { return {data_.data() + i * ny_, ny_}; }

    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const NodalField& other) const { return nx_ == other.nx_ && ny_ == other.ny_; }

private:
    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    std::vector<double> data_;
};

namespace numerics {

/// Fourier differentiation on n equispaced nodes of one period.
class PeriodicDerivative {
public:
    PeriodicDerivative(std::size_t n, double period);

    std::size_t size() const { return n_; }
    /// out[i*stride] = d/dx of the trigonometric interpolant of in[i*stride].
    void apply(const double* in, double* out, std::size_t stride = 1) const;

private:
    std::size_t n_;
    std::vector<double> matrix_;
};

/// Fourth-order first derivative on a uniform grid; one-sided at the ends.
void fd_first(std::span<const double> f, double h, std::span<double> out);
/// Fourth-order second derivative on a uniform grid; one-sided at the ends.
void fd_second(std::span<const double> f, double h, std::span<double> out);

/// Running integral from node 0 using cubic local interpolants (exact for cubics).
void cumulative_integral(std::span<const double> f, double h, std::span<double> out);

/// Composite Simpson weights (3/8 rule on the last panel when n is even).
std::vector<double> simpson_weights(std::size_t n, double h);

/// Four-point Lagrange interpolation at fractional index t of a uniform
/// non-periodic sample; the stencil is shifted inward near the ends.
double cubic_interp(std::span<const double> f, double t);
/// Derivative with respect to t of the same interpolant.
double cubic_interp_dt(std::span<const double> f, double t);
/// Four-point Lagrange interpolation on periodic samples; t wraps.
double cubic_interp_periodic(std::span<const double> f, double t);

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
/// Gauss-Legendre rule on [-1, 1].
GaussRule gauss_legendre(std::size_t n);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};
/// Ordinary least squares y = slope*x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Seeded 64-bit Mersenne twister with a platform-independent mapping to
/// doubles. Recorded in outputs under the name returned by name().
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    double uniform();  // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    static const char* name() { return "mt19937_64"; }

private:
    std::mt19937_64 engine_;
};

/// Worker count used by parallel_for. Defaults to WAVEKIT_THREADS or 1.
std::size_t thread_count();
void set_thread_count(std::size_t n);

/// Runs body(begin, end) over disjoint chunks of [0, n). Results written by
/// index are independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace numerics
}  // namespace wavekit
