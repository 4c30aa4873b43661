#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace niforge {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Thrown when a transfer function is evaluated at (or numerically too close
/// to) a pole of the realization.
struct EvaluationAtPoleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// StateSpace
// ---------------------------------------------------------------------------

/// Square LTI system (A, B, C, D) with n states and m inputs = m outputs.
///
///   x' = A x + B u
///   y  = C x + D u
///
/// Construction validates dimension consistency and finiteness; instances are
/// immutable values after that and safe to share across threads.
class StateSpace {
  public:
    StateSpace(Matrix A, Matrix B, Matrix C, Matrix D);

    const Matrix& A() const { return A_; }
    const Matrix& B() const { return B_; }
    const Matrix& C() const { return C_; }
    const Matrix& D() const { return D_; }

    Eigen::Index n() const { return A_.rows(); }
    Eigen::Index m() const { return B_.cols(); }

  private:
    Matrix A_, B_, C_, D_;
};

/// Validating constructor wrapper matching the free-function naming used
/// throughout the toolkit.
inline StateSpace ss_new(Matrix A, Matrix B, Matrix C, Matrix D) {
    return StateSpace(std::move(A), std::move(B), std::move(C), std::move(D));
}

// ---------------------------------------------------------------------------
// Frequency grid
// ---------------------------------------------------------------------------

/// Ordered list of strictly increasing positive angular frequencies (rad/s).
class FrequencyGrid {
  public:
    explicit FrequencyGrid(std::vector<double> points);

    static FrequencyGrid logspace(double wmin, double wmax, int count);

    const std::vector<double>& points() const { return points_; }
    bool empty() const { return points_.empty(); }
    std::size_t size() const { return points_.size(); }

  private:
    std::vector<double> points_;
};

/// One lightly damped second-order mode 1/(s^2 + 2*zeta*omega*s + omega^2).
struct ModeSpec {
    double omega = 0.0;  // natural frequency, rad/s, > 0
    double zeta = 0.0;   // damping factor, > 0
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// G(s) = C (sI - A)^{-1} B + D. Throws EvaluationAtPoleError if sI - A is
/// singular.
ComplexMatrix tf_eval(const StateSpace& sys, Complex s);

/// tf_eval at s = j*omega for every grid point, in grid order.
std::vector<ComplexMatrix> freq_response(const StateSpace& sys, const FrequencyGrid& grid);

/// Eigenvalues of A, each with multiplicity.
ComplexVector poles(const StateSpace& sys);

/// True iff every eigenvalue of A has real part < -margin.
bool is_hurwitz(const StateSpace& sys, double margin = 0.0);

/// Positive-feedback interconnection: the controller output adds to the plant
/// input and the plant output feeds the controller input, both with + sign.
/// The exogenous input enters at the plant input; the output is the plant
/// output. State is [plant; controller]. Throws std::invalid_argument when
/// I - D_p D_c is singular (ill-posed loop).
StateSpace positive_feedback(const StateSpace& plant, const StateSpace& controller);

struct StepSample {
    double t = 0.0;
    Vector y;
};

/// Unit-step response from zero initial state, sampled at t = 0, dt, 2 dt, ...
/// up to the horizon. Uses exact zero-order-hold discretization (matrix
/// exponential of the augmented system), so there is no integrator tolerance.
std::vector<StepSample> step_response(const StateSpace& sys, double horizon, double dt);

/// Block-diagonal flexible-structure plant: one companion block
/// [[0,1],[-w^2,-2 z w]] per mode with input column [0,1]^T and output row
/// [1,0]; outputs summed into a single SISO channel.
StateSpace flex_plant(const std::vector<ModeSpec>& modes);

/// Controllable-canonical-form realization of numerator/denominator given as
/// coefficient lists, highest degree first. Requires a proper ratio and a
/// nonzero leading denominator coefficient.
StateSpace tf_to_ss(const std::vector<double>& numerator, const std::vector<double>& denominator);

/// Controllability/observability rank screen. Returns an explanatory message
/// when either matrix is rank deficient (the realization may be non-minimal,
/// so eigenvalue-based pole listings can include spurious entries), empty
/// otherwise. Advisory only; nothing in the toolkit enforces minimality.
std::string minimality_warning(const StateSpace& sys);

}  // namespace niforge
