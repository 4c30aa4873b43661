#pragma once

#include "niforge/state_space.hpp"

#include <utility>

namespace niforge {

/// Port-Hamiltonian parameter triple: J skew-symmetric, R symmetric PSD,
/// Q symmetric positive definite. Systems of the form
///   x' = (J - R) Q (x - C^T u)
/// are exactly the negative-imaginary ones, which makes (J, R, Q) the natural
/// decision variable for nearness problems over the NI cone.
struct PhForm {
    Matrix J, R, Q;

    Eigen::Index n() const { return J.rows(); }

    /// Throws std::invalid_argument unless J is skew to 1e-12*(1+|J|_F),
    /// lambda_min(R) >= -1e-10*(1+|R|_2), and lambda_min(Q) >= pd_floor.
    void validate(double pd_floor = 0.0) const;
};

/// (M - M^T)/2: the Frobenius-nearest skew-symmetric matrix.
Matrix project_skew(const Matrix& M);

/// Symmetrize, clamp negative eigenvalues to zero, reassemble: the
/// Frobenius-nearest PSD matrix to the symmetric part of M.
Matrix project_psd(const Matrix& M);

/// As project_psd with eigenvalues clamped to >= floor (> 0); nearest point of
/// the closed set {X = X^T : X >= floor*I}.
Matrix project_pd(const Matrix& M, double floor);

/// A = (J - R) Q and B = -(J - R) C^T.
std::pair<Matrix, Matrix> assemble(const PhForm& ph, const Matrix& C);

/// Assembled StateSpace with the given output map and feedthrough symmetrized
/// to (D + D^T)/2.
StateSpace assemble_system(const PhForm& ph, const Matrix& C, const Matrix& D);

/// Unweighted two-term distance |A - (J-R)Q|_F^2 + |B - (R-J)C^T|_F^2 between
/// a system and a PH candidate sharing its C.
double admissibility_residual(const StateSpace& sys, const PhForm& ph);

}  // namespace niforge
