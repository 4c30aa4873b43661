#pragma once

#include "niforge/nearest_ni.hpp"
#include "niforge/ph_form.hpp"
#include "niforge/state_space.hpp"

#include <complex>
#include <random>
#include <vector>

namespace niforge::test {

using Rng = std::mt19937_64;

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    Matrix M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) M(i, j) = dist(rng);
    return M;
}

inline Matrix random_orthogonal(Rng& rng, Eigen::Index n) {
    const Matrix G = random_matrix(rng, n, n);
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ();
    // Fix signs so the distribution does not collapse
    const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n; ++i)
        if (R(i, i) < 0) Q.col(i) = -Q.col(i);
    return Q;
}

inline Matrix random_symmetric(Rng& rng, Eigen::Index n, double scale = 1.0) {
    const Matrix M = random_matrix(rng, n, n, scale);
    return 0.5 * (M + M.transpose());
}

inline Matrix random_skew(Rng& rng, Eigen::Index n, double scale = 1.0) {
    const Matrix M = random_matrix(rng, n, n, scale);
    return 0.5 * (M - M.transpose());
}

/// Symmetric matrix with prescribed eigenvalue range via a random orthogonal
/// similarity.
inline Matrix random_sym_with_eigs(Rng& rng, Eigen::Index n, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Vector d(n);
    for (Eigen::Index i = 0; i < n; ++i) d[i] = dist(rng);
    const Matrix V = random_orthogonal(rng, n);
    return V * d.asDiagonal() * V.transpose();
}

inline Matrix random_psd(Rng& rng, Eigen::Index n, double hi = 2.0) {
    return random_sym_with_eigs(rng, n, 0.0, hi);
}

inline Matrix random_pd(Rng& rng, Eigen::Index n, double lo = 0.5, double hi = 2.0) {
    return random_sym_with_eigs(rng, n, lo, hi);
}

/// Valid PH triple with Q eigenvalues in [0.5, 2] and R PSD.
inline PhForm random_ph_form(Rng& rng, Eigen::Index n) {
    PhForm ph;
    ph.J = random_skew(rng, n);
    ph.R = random_psd(rng, n);
    ph.Q = random_pd(rng, n);
    return ph;
}

// ---------------------------------------------------------------------------
// Polynomial helpers (coefficients highest degree first)
// ---------------------------------------------------------------------------

inline std::complex<double> polyval(const std::vector<double>& coeffs, std::complex<double> s) {
    std::complex<double> acc = 0.0;
    for (double c : coeffs) acc = acc * s + c;
    return acc;
}

inline std::vector<double> polymul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

inline std::vector<double> polysub(std::vector<double> a, const std::vector<double>& b) {
    // align at the low-order end
    if (b.size() > a.size()) a.insert(a.begin(), b.size() - a.size(), 0.0);
    const std::size_t off = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i) a[off + i] -= b[i];
    return a;
}

/// Roots via the companion-matrix eigenvalues (monic after normalization).
inline Eigen::VectorXcd polyroots(const std::vector<double>& coeffs) {
    std::size_t first = 0;
    while (first < coeffs.size() && coeffs[first] == 0.0) ++first;
    const auto n = static_cast<Eigen::Index>(coeffs.size() - first) - 1;
    if (n < 1) return Eigen::VectorXcd(0);
    Matrix comp = Matrix::Zero(n, n);
    comp.bottomLeftCorner(n - 1, n - 1).setIdentity();
    for (Eigen::Index i = 0; i < n; ++i)
        comp(0, i) = -coeffs[first + 1 + static_cast<std::size_t>(i)] / coeffs[first];
    return comp.eigenvalues();
}

/// Central finite differences of the solver objective w.r.t. one PhForm block.
inline Matrix fd_gradient(const NearestNiProblem& p, const PhForm& ph, Matrix PhForm::*block) {
    PhForm work = ph;
    Matrix& X = work.*block;
    const double h = 1e-6 * (1.0 + X.norm());
    Matrix g(X.rows(), X.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            const double save = X(i, j);
            X(i, j) = save + h;
            const double fp = objective(p, work);
            X(i, j) = save - h;
            const double fm = objective(p, work);
            X(i, j) = save;
            g(i, j) = (fp - fm) / (2.0 * h);
        }
    }
    return g;
}

/// Greedy matched distance between two spectra, normalized by 1 + |lambda|.
inline double matched_spectra_distance(const ComplexVector& actual,
                                       const ComplexVector& expected) {
    std::vector<bool> used(static_cast<std::size_t>(expected.size()), false);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < actual.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_j = 0;
        for (Eigen::Index j = 0; j < expected.size(); ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double d = std::abs(actual[i] - expected[j]) / (1.0 + std::abs(actual[i]));
            if (d < best) {
                best = d;
                best_j = static_cast<std::size_t>(j);
            }
        }
        used[best_j] = true;
        worst = std::max(worst, best);
    }
    return worst;
}

// Reference controller coefficients used across the suite (highest degree first).
inline const std::vector<double> kLqg1Num{-1.593, 9.84, -12.58, 93.76};
inline const std::vector<double> kNilqg1Num{13.75, 6.77, 132.5};
inline const std::vector<double> kLqgDen{1.0, 3.847, 26.66, 46.86, 125.1};

inline StateSpace lqg1_system() { return tf_to_ss(kLqg1Num, kLqgDen); }
inline StateSpace nilqg1_system() { return tf_to_ss(kNilqg1Num, kLqgDen); }

inline std::vector<ModeSpec> modes_n2() { return {{2.0, 0.02}, {4.0, 0.02}}; }
inline std::vector<ModeSpec> modes_n5() {
    std::vector<ModeSpec> m;
    for (int k = 1; k <= 5; ++k) m.push_back({2.0 * k, 0.02});
    return m;
}

}  // namespace niforge::test
