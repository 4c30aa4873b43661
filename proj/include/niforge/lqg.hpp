#pragma once

#include "niforge/state_space.hpp"

namespace niforge {

/// Riccati synthesis failure: no stabilizing solution (Hamiltonian eigenvalues
/// on the imaginary axis, unstabilizable pair) or an ill-conditioned invariant
/// subspace.
struct RiccatiError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Quadratic cost and noise model for LQG design:
///   J = int x^T Qc x + 2 x^T Nc u + u^T Rc u dt
/// with process noise covariance W and measurement noise covariance V.
struct LqgWeights {
    Matrix Qc;  // n x n symmetric PSD
    Matrix Rc;  // m x m symmetric PD
    Matrix Nc;  // n x m cross term
    Matrix W;   // n x n symmetric PSD
    Matrix V;   // m x m symmetric PD

    /// Qc = C^T C, Rc = 1e-2 I, Nc = 0, W = B B^T, V = 1e-2 I.
    static LqgWeights defaults(const StateSpace& plant);

    /// Symmetry/definiteness checks, including PSD-ness of the joint cost
    /// block [[Qc, Nc],[Nc^T, Rc]]. Throws std::invalid_argument.
    void validate(Eigen::Index n, Eigen::Index m) const;
};

/// Stabilizing solution of A^T P + P A - (P B + N) R^{-1} (B^T P + N^T) + Q = 0
/// via the ordered Schur form of the 2n x 2n Hamiltonian, refined by one
/// Newton (Kleinman) step.
Matrix solve_care(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                  const Matrix& N);

/// K = Rc^{-1} (B^T P + Nc^T) with A - B K Hurwitz.
Matrix lqr_gain(const Matrix& A, const Matrix& B, const LqgWeights& weights);

/// L = Pf C^T V^{-1} from the filter Riccati equation (dual of solve_care)
/// with A - L C Hurwitz.
Matrix kalman_gain(const Matrix& A, const Matrix& C, const Matrix& W, const Matrix& V);

/// Observer-based controller A_c = A - B K - L C + L D K, B_c = L, C_c = -K,
/// D_c = 0, signed so that the positive-feedback loop with the design plant is
/// internally stable.
StateSpace lqg_controller(const StateSpace& plant, const LqgWeights& weights);

/// Unique X solving A^T X + X A + Q = 0 (dense Kronecker solve; intended for
/// the small state dimensions of this toolkit).
Matrix solve_lyapunov(const Matrix& A, const Matrix& Q);

}  // namespace niforge
