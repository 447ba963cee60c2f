#pragma once

// Weak residuals of the three formulations against compactly supported test
// functions, the pullback of test functions through the hodograph map, the
// streamline flux certificate, the mollified flux studies and classical
// pointwise residuals of smooth solutions.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wavekit/formulations.hpp"
#include "wavekit/mollification.hpp"
#include "wavekit/report.hpp"
#include "wavekit/testfunction.hpp"
#include "wavekit/transforms.hpp"

namespace wavekit {

/// Default threshold on normalised weak residuals.
inline constexpr double kWeakThreshold = 1e-6;

/// Entries "mass", "x-momentum", "y-momentum"; per_test holds raw integrals.
ResidualReport weak_residual_velocity(const VelocitySolution& sol, std::span<const TestFunction> tests,
                                      double threshold = kWeakThreshold);
/// Entry "stream".
ResidualReport weak_residual_stream(const StreamSolution& sol, std::span<const TestFunction> tests,
                                    double threshold = kWeakThreshold);
/// Entry "height"; tests live on the strip in (q, p).
ResidualReport weak_residual_height(const HeightSolution& sol, std::span<const TestFunction> tests,
                                    double threshold = kWeakThreshold);

/// Gauss-Legendre nodes per axis over the support of a test function.
inline constexpr std::size_t kSupportNodes = 128;

struct QuadratureNode {
    Point z;
    double w = 0.0;
};

/// Tensor Gauss-Legendre rule on the bounding square of supp phi, keeping
/// the nodes inside the open disk.
std::vector<QuadratureNode> support_quadrature(const TestFunction& phi, std::size_t n = kSupportNodes);

/// Throws InvalidInput when the closed support of phi leaves the fluid domain.
void require_inside(const FluidGrid& grid, const TestFunction& phi);
void require_inside(const StripGrid& grid, const TestFunction& phi);

/// phi~(q, p) = phi(q, h(q, p)) with phi~_q = phi_x + h_q phi_y and
/// phi~_p = h_p phi_y, where h and its derivatives are interpolated.
class PulledBackTest {
public:
    PulledBackTest(const TestFunction& phi, const HeightSolution& height);

    double value(Point qp) const;
    Point grad(Point qp) const;
    /// Unique p with h(q, p) = y.
    double level(double q, double y) const;
    /// Gauss-Legendre in q across the support, and in p across the image of
    /// each vertical chord.
    std::vector<QuadratureNode> quadrature(std::size_t n = kSupportNodes) const;
    const TestFunction& base() const { return phi_; }
    double scale() const { return phi_.scale(); }

private:
    TestFunction phi_;
    StripGrid strip_;
    ScalarField h_, hq_, hp_;
};

PulledBackTest pullback_testfunction(const TestFunction& phi, const HeightSolution& height);
/// Builds the height solution with stream_to_height first.
PulledBackTest pullback_testfunction(const TestFunction& phi, const StreamSolution& sol, const TransformOptions& opt = {});
/// phi(x, y) = phi~(x, -psi(x, y)) sampled on the fluid grid of sol.
SampledTest pushforward_testfunction(const TestFunction& phi_strip, const StreamSolution& sol);

/// Single-test integrals behind the residual reports.
double weak_integral_stream(const StreamSolution& sol, const TestFunction& phi);
double weak_integral_height(const HeightSolution& sol, const TestFunction& phi);
double weak_integral_height(const HeightSolution& sol, const PulledBackTest& phi);

/// |int_R phi~ dq dp - int_D phi |psi_y| dx dy|.
double jacobian_identity(const TestFunction& phi, const StreamSolution& sol, const TransformOptions& opt = {});

/// Stream residual of each phi against the height residual of its pullback
/// ("gap"), plus the change-of-variables identity ("jacobian").
ResidualReport equivalence_audit(const StreamSolution& stream, std::span<const TestFunction> tests,
                                 double gap_threshold, const TransformOptions& opt = {});

/// int_R F~ phi~_q dq dp per test function; entry "streamline flux".
ResidualReport streamline_flux(const BernoulliField& field, std::span<const TestFunction> tests,
                               double threshold = kWeakThreshold);
ResidualReport streamline_flux(const StripGrid& strip, const NodalField& F_strip, std::span<const TestFunction> tests,
                               double threshold = kWeakThreshold);

/// Region whose K is the bounding box of supp phi inside the fluid domain.
RegionSpec support_region(const FluidGrid& grid, const TestFunction& phi);

/// psi_x, psi_y and F on a tensor set of points, indexed a * ys.size() + b.
struct FluxSample {
    std::vector<double> psi_x;
    std::vector<double> psi_y;
    std::vector<double> F;
};

/// Source of the fields entering the flux studies.
class FluxFields {
public:
    virtual ~FluxFields() = default;
    virtual void sample(std::span<const double> xs, std::span<const double> ys, FluxSample& out) const = 0;
    /// Largest wavenumber present; sets kernel node counts.
    virtual double bandwidth() const = 0;
};

/// Bicubic interpolation of gridded psi derivatives and F.
class GridFluxFields : public FluxFields {
public:
    GridFluxFields(const StreamSolution& sol, const NodalField& F);
    void sample(std::span<const double> xs, std::span<const double> ys, FluxSample& out) const override;
    double bandwidth() const override { return bandwidth_; }

private:
    ScalarField psi_x_, psi_y_, F_;
    double bandwidth_ = 0.0;
};

struct FluxStudyConfig {
    std::vector<double> eps;
    /// Hoelder exponent of the derivative fields, for predicted slopes.
    double alpha = 1.0;
    std::size_t outer_nodes = 40;
    std::size_t nodes_per_axis = 32;
    std::size_t drop_largest = 2;
    std::size_t drop_smallest = 0;
    double delta_floor = 1e-3;
};

/// Signed terms, their ε-independent sum and majorants whose decay the
/// remainder estimates control.
struct FluxStudy {
    std::vector<RateStudy> signed_terms;
    std::vector<RateStudy> bounds;
    double target = 0.0;
    double identity_defect = 0.0;
    double min_psi_y_floor = 0.0;
    std::string verdict;
};

/// I_eps, J_eps with target int F (psi_y phi_x - psi_x phi_y).
FluxStudy flux_study_momentum(const FluxFields& fields, const RegionSpec& region, const TestFunction& phi,
                              const FluxStudyConfig& config);
/// K_eps, L_eps with target int F phi_x - (psi_x^2 - psi_y^2)/2 phi_x - psi_x psi_y phi_y.
/// Throws InvariantViolation when -psi_y^eps drops below the floor on K.
FluxStudy flux_study_bernoulli(const FluxFields& fields, const RegionSpec& region, const TestFunction& phi,
                               const FluxStudyConfig& config);

/// Label attached to bound slopes for exponents at or below one third.
std::string flux_verdict(double alpha, double fitted_slope);

ResidualReport classical_residuals(const StreamSolution& sol, double threshold = kWeakThreshold);
ResidualReport classical_residuals(const HeightSolution& sol, double threshold = kWeakThreshold);
ResidualReport classical_residuals(const VelocitySolution& sol, double threshold = kWeakThreshold);

}  // namespace wavekit
