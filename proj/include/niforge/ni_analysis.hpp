#pragma once

#include "niforge/state_space.hpp"

#include <limits>
#include <utility>

namespace niforge {

/// Outcome of a frequency-sampled negative-imaginary test.
///
/// min_margin is the smallest eigenvalue of j(G(jw) - G(jw)^H) over the grid
/// and worst_omega is where it occurs. Sampling is a necessary-condition test,
/// not a proof; ni_lmi_residual provides the sufficient certificate when a
/// candidate P is available.
struct NiVerdict {
    bool is_ni = false;
    double worst_omega = 0.0;
    double min_margin = std::numeric_limits<double>::infinity();
    int rhp_pole_count = 0;
    bool d_symmetric = true;
    std::vector<double> skipped_omegas;  // grid points near imaginary-axis poles
};

struct NiCheckOptions {
    double pole_tol = 1e-9;        // Re threshold for counting a pole as RHP
    double pole_skip_rtol = 1e-6;  // relative window around |Im(pole)| to skip
};

/// Sampled NI check: is_ni iff D is symmetric (within tol), A has no
/// eigenvalue with Re > pole_tol, and min over the grid of
/// lambda_min(j(G - G^H)) >= -tol. Grid points within pole_skip_rtol of an
/// imaginary-axis pole frequency are skipped and reported.
NiVerdict ni_sample_check(const StateSpace& sys, const FrequencyGrid& grid, double tol = 1e-8,
                          const NiCheckOptions& opts = {});

/// Sampled SNI check: every eigenvalue of A must satisfy Re < -pole_tol and
/// the NI margin must be >= margin (> 0) at every grid point.
NiVerdict sni_check(const StateSpace& sys, const FrequencyGrid& grid, double margin,
                    const NiCheckOptions& opts = {});

/// lambda_max of the NI certificate block
///   [ P A + A^T P      P B - A^T C^T   ]
///   [ B^T P - C A   -(C B + B^T C^T) ]
/// A value <= 0 certifies the NI property. Throws std::invalid_argument when
/// P or D is not symmetric.
double ni_lmi_residual(const StateSpace& sys, const Matrix& P);

/// Relaxation gap delta(P) = max(0, lambda_max of the certificate block);
/// delta = 0 means P is a feasible NI certificate. Unlike ni_lmi_residual this
/// places no symmetry requirement on D (the block does not involve D).
double lmi_relaxation_delta(const StateSpace& sys, const Matrix& P);

/// DC-gain interconnection condition: returns (lambda < 1, lambda) where
/// lambda is the largest real part over the spectrum of G(0) * Gbar(0).
/// Throws std::invalid_argument when either A matrix is singular.
std::pair<bool, double> dc_gain_condition(const StateSpace& plant, const StateSpace& controller);

/// DC gain G(0) = D - C A^{-1} B. Throws std::invalid_argument on singular A.
Matrix dc_gain(const StateSpace& sys);

/// 500 logarithmically spaced points on [1e-2, 1e3] rad/s; point count
/// overridable (the CLI maps NI_FORGE_GRID_POINTS onto it).
FrequencyGrid default_grid(int points = 500);

}  // namespace niforge
