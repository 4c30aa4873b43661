#pragma once

#include "niforge/ph_form.hpp"
#include "niforge/state_space.hpp"

#include <optional>
#include <string>
#include <vector>

namespace niforge {

/// Optional DC-gain interconnection constraint: keep
/// lambda_max(G(0) Gbar(0)) < 1 against a plant with DC gain plant_dc_gain,
/// enforced by rescaling Q (SISO only).
struct DcConstraint {
    double plant_dc_gain = 0.0;
    double epsilon = 1e-2;
};

/// Weighted nearest-NI problem for a target (A, B, C, D): minimize
///   w1 |A - (J-R)Q|_F^2 + w2 |B - (R-J)C^T|_F^2
/// over J skew, R PSD, Q PD. C is kept exactly; D is symmetrized separately.
struct NearestNiProblem {
    StateSpace target;
    double w1 = 1.0;
    double w2 = 1.0;
    std::optional<DcConstraint> dc;

    NearestNiProblem(StateSpace t, double w1_ = 1.0, double w2_ = 1.0,
                     std::optional<DcConstraint> dc_ = std::nullopt);
};

enum class InitKind { Standard, LmiRelaxed, Warm };

struct SolverConfig {
    int max_iter = 100000;
    double rel_tol = 1e-10;   // relative objective decrease over a 100-iteration window
    double pd_floor = 1e-8;   // scaled by max(1, |Q|_2) at each projection
    bool restart = true;      // adaptive restart: momentum dropped when objective rises
    InitKind init = InitKind::Standard;
    std::optional<PhForm> warm_start;
    int lmi_inner_iters = 500;
    bool single_step_rule = false;  // one shared step 1/|Q|_2^2 for all blocks
    int stall_limit = 200;         // consecutive rejected iterations before stopping
};

enum class StopReason { ExactZero, RelTolWindow, Stalled, MaxIter };

struct PerturbationReport {
    double abs_a = 0.0, rel_a = 0.0;
    double abs_b = 0.0, rel_b = 0.0;
    double abs_c = 0.0, rel_c = 0.0;
    double abs_d = 0.0, rel_d = 0.0;
    double total = 0.0;  // |dA|_F^2 + |dB|_F^2 + |dC|_F^2 + |dD|_F^2
};

struct SolverResult {
    PhForm ph;
    StateSpace nearest;                  // ((J-R)Q, -(J-R)C^T, C, sym(D))
    std::vector<double> objective_trace; // accepted iterates, non-increasing
    PerturbationReport report;
    double final_objective = 0.0;
    int iterations = 0;
    StopReason stop = StopReason::MaxIter;
    bool converged = false;   // stopped by rel_tol window / exact zero / stall
    bool dc_feasible = true;  // returned iterate satisfies the DC constraint (if any)
    bool dc_scaling_failed = false;  // alpha <= 0 was ever encountered
};

/// Divergence guard: the objective became non-finite. Carries the accepted
/// trace up to the failure.
struct SolverDivergence : std::runtime_error {
    explicit SolverDivergence(std::string msg, std::vector<double> t)
        : std::runtime_error(std::move(msg)), trace(std::move(t)) {}
    std::vector<double> trace;
};

/// Weighted objective at a PH candidate.
double objective(const NearestNiProblem& problem, const PhForm& ph);

struct Gradients {
    Matrix J, R, Q;
};

/// Analytic gradients of the weighted objective. With E = A - (J-R)Q and
/// F = B - (R-J)C^T:
///   G_J = -2 w1 E Q^T + 2 w2 F C
///   G_R = +2 w1 E Q^T - 2 w2 F C
///   G_Q = -2 w1 (J-R)^T E
Gradients gradients(const NearestNiProblem& problem, const PhForm& ph);

/// Q = I, J = (A - A^T)/2, R = P_psd((-A - A^T)/2).
PhForm init_standard(const NearestNiProblem& problem);

/// LMI-relaxation initialization: projected subgradient descent on
/// delta(P) = max(0, lambda_max of the NI certificate block), starting from
/// P = I; the best P found seeds Q. Falls back to init_standard when delta
/// cannot be reduced.
PhForm init_lmi(const NearestNiProblem& problem, int inner_iters = 500);

/// Fast projected gradient (Nesterov momentum + adaptive restart) over
/// (J, R, Q) with per-block step lengths; see SolverConfig for the knobs.
SolverResult solve(const NearestNiProblem& problem, const SolverConfig& config = {});

struct DcRescale {
    Matrix Q;
    bool scaled = false;             // a rescale was applied
    bool alpha_nonpositive = false;  // condition unsatisfiable by scaling
    double alpha = 1.0;
};

/// DC-gain rescale Q' = alpha Q with
/// alpha = (C Q^{-1} C^T + D) G(0) + epsilon, applied only when the condition
/// lambda_max(G(0) Gbar(0)) < 1 is violated at the current Q. SISO only.
DcRescale dc_gain_rescale(const Matrix& Q, const Matrix& C, const Matrix& D, double plant_dc,
                          double epsilon);

/// Absolute/relative Frobenius perturbations per matrix plus the four-term
/// squared total.
PerturbationReport perturbation_report(const NearestNiProblem& problem, const PhForm& ph);

}  // namespace niforge
