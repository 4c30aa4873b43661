#include "niforge/ph_form.hpp"

namespace niforge {

namespace {

Matrix clamp_eigenvalues(const Matrix& M, double floor) {
    const Matrix S = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigendecomposition failed in cone projection");
    Vector d = es.eigenvalues();
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::max(d[i], floor);
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

double lambda_min(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

void PhForm::validate(double pd_floor) const {
    const Eigen::Index dim = J.rows();
    if (J.cols() != dim || R.rows() != dim || R.cols() != dim || Q.rows() != dim ||
        Q.cols() != dim)
        throw std::invalid_argument("PhForm: J, R, Q must be square with equal dimension");
    if ((J + J.transpose()).norm() > 1e-12 * (1.0 + J.norm()))
        throw std::invalid_argument("PhForm: J is not skew-symmetric");
    if ((R - R.transpose()).norm() > 1e-10 * (1.0 + R.norm()))
        throw std::invalid_argument("PhForm: R is not symmetric");
    if ((Q - Q.transpose()).norm() > 1e-10 * (1.0 + Q.norm()))
        throw std::invalid_argument("PhForm: Q is not symmetric");
    if (dim == 0) return;
    const double r_scale = std::max(1.0, R.operatorNorm());
    if (lambda_min(0.5 * (R + R.transpose())) < -1e-10 * r_scale)
        throw std::invalid_argument("PhForm: R is not positive semidefinite");
    if (lambda_min(0.5 * (Q + Q.transpose())) < pd_floor ||
        lambda_min(0.5 * (Q + Q.transpose())) <= 0.0)
        throw std::invalid_argument("PhForm: Q is not positive definite (below floor)");
}

Matrix project_skew(const Matrix& M) {
    if (M.rows() != M.cols()) throw std::invalid_argument("project_skew: matrix must be square");
    return 0.5 * (M - M.transpose());
}

Matrix project_psd(const Matrix& M) {
    if (M.rows() != M.cols()) throw std::invalid_argument("project_psd: matrix must be square");
    if (M.rows() == 0) return M;
    return clamp_eigenvalues(M, 0.0);
}

Matrix project_pd(const Matrix& M, double floor) {
    if (M.rows() != M.cols()) throw std::invalid_argument("project_pd: matrix must be square");
    if (!(floor > 0.0)) throw std::invalid_argument("project_pd: floor must be > 0");
    if (M.rows() == 0) return M;
    return clamp_eigenvalues(M, floor);
}

std::pair<Matrix, Matrix> assemble(const PhForm& ph, const Matrix& C) {
    if (C.cols() != ph.n())
        throw std::invalid_argument("assemble: C must have n columns");
    const Matrix JR = ph.J - ph.R;
    return {JR * ph.Q, -JR * C.transpose()};
}

StateSpace assemble_system(const PhForm& ph, const Matrix& C, const Matrix& D) {
    auto [A, B] = assemble(ph, C);
    return StateSpace(std::move(A), std::move(B), C, 0.5 * (D + D.transpose()));
}

double admissibility_residual(const StateSpace& sys, const PhForm& ph) {
    if (ph.n() != sys.n())
        throw std::invalid_argument("admissibility_residual: dimension mismatch");
    const auto [A, B] = assemble(ph, sys.C());
    return (sys.A() - A).squaredNorm() + (sys.B() - B).squaredNorm();
}

}  // namespace niforge
