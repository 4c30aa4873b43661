#include "niforge/lqg.hpp"

#include <lapacke.h>

#include <cmath>

namespace niforge {

namespace {

lapack_logical stable_half_plane(const double* re, const double* /*im*/) { return *re < 0.0; }

void require_symmetric(const Matrix& M, const char* name) {
    if ((M - M.transpose()).norm() > 1e-10 * (1.0 + M.norm())) {
        throw std::invalid_argument(std::string(name) + " must be symmetric");
    }
}

double min_eigenvalue(const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// Stable invariant subspace of the Hamiltonian via sorted real Schur form.
// H must be 2n x 2n; returns P = U2 U1^{-1} symmetrized.
Matrix stable_subspace_solution(Matrix H) {
    const lapack_int N = static_cast<lapack_int>(H.rows());
    const lapack_int n = N / 2;
    Matrix vs(N, N);
    Vector wr(N), wi(N);
    lapack_int sdim = 0;
    const lapack_int info =
        LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'S', stable_half_plane, N, H.data(), N, &sdim,
                      wr.data(), wi.data(), vs.data(), N);
    if (info != 0) throw RiccatiError("solve_care: Schur decomposition failed");
    if (sdim != n)
        throw RiccatiError(
            "solve_care: no stabilizing solution (Hamiltonian has eigenvalues on the "
            "imaginary axis; check stabilizability/detectability)");

    const Matrix U1 = vs.block(0, 0, n, n);
    const Matrix U2 = vs.block(n, 0, n, n);
    Eigen::FullPivLU<Matrix> lu(U1.transpose());
    if (!lu.isInvertible())
        throw RiccatiError("solve_care: ill-conditioned invariant subspace");
    const Matrix P = lu.solve(U2.transpose());  // (U2 U1^{-1})^T, and P is symmetric
    return 0.5 * (P + P.transpose());
}

}  // namespace

Matrix solve_lyapunov(const Matrix& A, const Matrix& Q) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || Q.rows() != n || Q.cols() != n)
        throw std::invalid_argument("solve_lyapunov: dimension mismatch");
    // vec(A^T X + X A) = (I kron A^T + A^T kron I) vec(X)
    Matrix K = Matrix::Zero(n * n, n * n);
    const Matrix At = A.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
        K.block(i * n, i * n, n, n) += At;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < n; ++k) K(i * n + j, k * n + j) += At(i, k);
    }
    const Vector q = Eigen::Map<const Vector>(Q.data(), n * n);
    Eigen::FullPivLU<Matrix> lu(K);
    if (!lu.isInvertible())
        throw RiccatiError("solve_lyapunov: singular Lyapunov operator");
    const Vector x = lu.solve(-q);
    Matrix X = Eigen::Map<const Matrix>(x.data(), n, n);
    return 0.5 * (X + X.transpose());
}

Matrix solve_care(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                  const Matrix& N) {
    const Eigen::Index n = A.rows(), m = B.cols();
    if (A.cols() != n || B.rows() != n)
        throw std::invalid_argument("solve_care: A/B dimension mismatch");
    if (Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m)
        throw std::invalid_argument("solve_care: Q/R dimension mismatch");
    if (N.rows() != n || N.cols() != m)
        throw std::invalid_argument("solve_care: N dimension mismatch");
    require_symmetric(Q, "solve_care: Q");
    require_symmetric(R, "solve_care: R");

    Eigen::LLT<Matrix> R_llt(R);
    if (R_llt.info() != Eigen::Success)
        throw std::invalid_argument("solve_care: R must be positive definite");

    // Cross term folded away: Ah = A - B R^{-1} N^T, Qh = Q - N R^{-1} N^T.
    const Matrix RiNt = R_llt.solve(N.transpose());
    const Matrix Ah = A - B * RiNt;
    const Matrix Qh = Q - N * RiNt;
    const Matrix BRiBt = B * R_llt.solve(B.transpose());

    Matrix H(2 * n, 2 * n);
    H.topLeftCorner(n, n) = Ah;
    H.topRightCorner(n, n) = -BRiBt;
    H.bottomLeftCorner(n, n) = -Qh;
    H.bottomRightCorner(n, n) = -Ah.transpose();

    Matrix P = stable_subspace_solution(std::move(H));

    // Newton (Kleinman) refinement, kept only while the residual improves.
    auto residual_of = [&](const Matrix& X) {
        const Matrix G = R_llt.solve(B.transpose() * X + N.transpose());
        return (A.transpose() * X + X * A - (X * B + N) * G + Q).norm();
    };
    double best = residual_of(P);
    const double target = 1e-12 * (1.0 + Q.norm());
    for (int it = 0; it < 15 && best > target; ++it) {
        const Matrix K = R_llt.solve(B.transpose() * P + N.transpose());
        const Matrix rhs = Q + K.transpose() * R * K - N * K - K.transpose() * N.transpose();
        Matrix refined;
        try {
            refined = solve_lyapunov(A - B * K, rhs);
        } catch (const RiccatiError&) {
            break;
        }
        const double res = residual_of(refined);
        if (!(res < best)) break;
        P = refined;
        best = res;
    }
    return P;
}

LqgWeights LqgWeights::defaults(const StateSpace& plant) {
    const Eigen::Index n = plant.n(), m = plant.m();
    LqgWeights w;
    w.Qc = plant.C().transpose() * plant.C();
    w.Rc = 1e-2 * Matrix::Identity(m, m);
    w.Nc = Matrix::Zero(n, m);
    w.W = plant.B() * plant.B().transpose();
    w.V = 1e-2 * Matrix::Identity(m, m);
    return w;
}

void LqgWeights::validate(Eigen::Index n, Eigen::Index m) const {
    if (Qc.rows() != n || Qc.cols() != n) throw std::invalid_argument("LqgWeights: Qc must be n x n");
    if (Rc.rows() != m || Rc.cols() != m) throw std::invalid_argument("LqgWeights: Rc must be m x m");
    if (Nc.rows() != n || Nc.cols() != m) throw std::invalid_argument("LqgWeights: Nc must be n x m");
    if (W.rows() != n || W.cols() != n) throw std::invalid_argument("LqgWeights: W must be n x n");
    if (V.rows() != m || V.cols() != m) throw std::invalid_argument("LqgWeights: V must be m x m");
    require_symmetric(Qc, "LqgWeights: Qc");
    require_symmetric(Rc, "LqgWeights: Rc");
    require_symmetric(W, "LqgWeights: W");
    require_symmetric(V, "LqgWeights: V");
    const double scale_q = 1.0 + Qc.norm(), scale_w = 1.0 + W.norm();
    if (min_eigenvalue(0.5 * (Qc + Qc.transpose())) < -1e-10 * scale_q)
        throw std::invalid_argument("LqgWeights: Qc must be positive semidefinite");
    if (min_eigenvalue(0.5 * (W + W.transpose())) < -1e-10 * scale_w)
        throw std::invalid_argument("LqgWeights: W must be positive semidefinite");
    if (Eigen::LLT<Matrix>(Rc).info() != Eigen::Success)
        throw std::invalid_argument("LqgWeights: Rc must be positive definite");
    if (Eigen::LLT<Matrix>(V).info() != Eigen::Success)
        throw std::invalid_argument("LqgWeights: V must be positive definite");
    Matrix joint(n + m, n + m);
    joint.topLeftCorner(n, n) = Qc;
    joint.topRightCorner(n, m) = Nc;
    joint.bottomLeftCorner(m, n) = Nc.transpose();
    joint.bottomRightCorner(m, m) = Rc;
    if (min_eigenvalue(0.5 * (joint + joint.transpose())) < -1e-10 * (1.0 + joint.norm()))
        throw std::invalid_argument("LqgWeights: joint cost block [[Qc, Nc],[Nc^T, Rc]] must be PSD");
}

Matrix lqr_gain(const Matrix& A, const Matrix& B, const LqgWeights& weights) {
    weights.validate(A.rows(), B.cols());
    const Matrix P = solve_care(A, B, weights.Qc, weights.Rc, weights.Nc);
    return Eigen::LLT<Matrix>(weights.Rc).solve(B.transpose() * P + weights.Nc.transpose());
}

Matrix kalman_gain(const Matrix& A, const Matrix& C, const Matrix& W, const Matrix& V) {
    const Matrix Pf = solve_care(A.transpose(), C.transpose(), W, V,
                                 Matrix::Zero(A.rows(), C.rows()));
    return Eigen::LLT<Matrix>(V).solve(C * Pf).transpose();
}

StateSpace lqg_controller(const StateSpace& plant, const LqgWeights& weights) {
    weights.validate(plant.n(), plant.m());
    const Matrix K = lqr_gain(plant.A(), plant.B(), weights);
    const Matrix L = kalman_gain(plant.A(), plant.C(), weights.W, weights.V);
    // Observer with D folded in: xh' = (A - BK - LC + LDK) xh + L y, u = -K xh.
    const Matrix Ac =
        plant.A() - plant.B() * K - L * plant.C() + L * plant.D() * K;
    return StateSpace(Ac, L, -K, Matrix::Zero(plant.m(), plant.m()));
}

}  // namespace niforge
