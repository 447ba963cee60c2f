#pragma once

// Mollification by the scaled standard bump: mollified fields, the quadratic
// remainders r^eps and R^eps, gradients of mollified fields, divergence
// preservation, Hoelder exponent estimates and convergence-rate studies.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wavekit/formulations.hpp"
#include "wavekit/geometry.hpp"
#include "wavekit/report.hpp"

namespace wavekit {

using ScalarField = std::function<double(Point)>;

/// rho(z) = C exp(-1/(1-|z|^2)) on the unit ball of dimension 1 or 2,
/// discretised by tensor Gauss-Legendre nodes restricted to the ball. Weights
/// are renormalised so they sum to one, and gradient weights so that
/// -sum_i grad_w_i z_i = 1, which makes linear fields exact.
struct MollifierKernel {
    int dimension = 2;
    double eps = 0.0;
    std::size_t nodes_per_axis = 32;
    std::vector<Point> z;
    std::vector<double> w;
    std::vector<Point> grad_w;
    /// One-dimensional Gauss nodes; node i sits at tensor position tensor_index[i]
    /// (a * nodes_per_axis + b) for d = 2 and at a for d = 1.
    std::vector<double> axis;
    std::vector<std::size_t> tensor_index;
    /// Quadrature of the unnormalised profile before renormalisation.
    double raw_mass = 0.0;

    MollifierKernel() = default;
    MollifierKernel(int dimension, double eps, std::size_t nodes_per_axis = 32);

    static double profile(double r2);
    MollifierKernel rescaled(double new_eps) const;
    /// sum_i w_i z_x^px z_y^py
    double moment(int px, int py) const;
};

/// Nodes per axis that resolve oscillations of wavenumber `bandwidth` at
/// scale eps: max(base, 16 + 0.6 * bandwidth * eps).
std::size_t resolving_nodes(double bandwidth, double eps, std::size_t base = 32);

/// Geometric sweep eps_k = eps0 * 2^-k for k = kmin..kmax (strictly decreasing).
std::vector<double> eps_sweep(double eps0, int kmin = 3, int kmax = 9);

std::vector<double> mollify(const ScalarField& f, const MollifierKernel& kernel, const RegionSpec& region);
std::vector<double> r_eps(const ScalarField& f, const ScalarField& g, const MollifierKernel& kernel, const RegionSpec& region);
std::vector<double> R_eps(const ScalarField& f, const ScalarField& g, const MollifierKernel& kernel, const RegionSpec& region);
std::vector<Point> gradient_of_mollified(const ScalarField& f, const MollifierKernel& kernel, const RegionSpec& region);

/// Everything the rate studies need at one node, from one pass over the kernel.
struct MollifiedPair {
    double f = 0.0, g = 0.0;
    double f_eps = 0.0, g_eps = 0.0;
    double fg_eps = 0.0;
    double r = 0.0;
    Point grad_f_eps;
};
MollifiedPair mollify_pair(const ScalarField& f, const ScalarField& g, const MollifierKernel& kernel, Point x);

/// max over K of |sum_k d_k (f_k)^eps|, one field per dimension.
double lemma2_check(std::span<const ScalarField> fields, const MollifierKernel& kernel, const RegionSpec& region);

struct HolderEstimate {
    bool defined = false;
    double alpha = 0.0;
    double constant = 0.0;
    double r2 = 0.0;
    double delta_min = 0.0;
    double delta_max = 0.0;
};

/// Fit of log sup_{|x-y|=delta} |f(x)-f(y)| against log delta, with x over
/// the region's K nodes and displacements along each coordinate axis.
HolderEstimate estimate_holder(const ScalarField& f, const RegionSpec& region, int dimension, std::span<const double> deltas);
/// delta_k = top * 2^-k for k = 0..count-1.
std::vector<double> dyadic_scales(double top, std::size_t count);

/// Bicubic interpolant of a nodal field; periodic in x, sigma-mapped in y.
ScalarField interpolant(const FluidGrid& grid, const NodalField& f);
ScalarField interpolant(const StripGrid& grid, const NodalField& f);

struct Lemma1Config {
    std::vector<double> eps;
    std::size_t nodes_per_axis = 32;
    /// When positive, node counts follow resolving_nodes(bandwidth, eps).
    double bandwidth = 0.0;
    std::size_t drop_largest = 2;
    std::size_t drop_smallest = 0;
};

/// Sup-norm rates over K of |f^eps - f|, |grad f^eps| and |R^eps(f, f)|
/// with predicted slopes alpha, alpha - 1 and 2 alpha.
std::vector<RateStudy> lemma1_study(const ScalarField& f, int dimension, const RegionSpec& region, double alpha,
                                    const Lemma1Config& config);

/// max over K of |(fg)^eps - f^eps g^eps - R^eps(f, g)|.
double product_identity_defect(const ScalarField& f, const ScalarField& g, const MollifierKernel& kernel,
                               const RegionSpec& region);

}  // namespace wavekit
