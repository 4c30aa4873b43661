#include "niforge/ni_analysis.hpp"

#include <algorithm>
#include <cmath>

namespace niforge {

namespace {

bool symmetric_within(const Matrix& M, double tol) {
    return (M - M.transpose()).norm() <= tol * (1.0 + M.norm());
}

Matrix certificate_block(const StateSpace& sys, const Matrix& P) {
    const Eigen::Index n = sys.n(), m = sys.m();
    const Matrix& A = sys.A();
    const Matrix& B = sys.B();
    const Matrix& C = sys.C();
    Matrix block(n + m, n + m);
    block.topLeftCorner(n, n) = P * A + A.transpose() * P;
    block.topRightCorner(n, m) = P * B - A.transpose() * C.transpose();
    block.bottomLeftCorner(m, n) = block.topRightCorner(n, m).transpose();
    block.bottomRightCorner(m, m) = -(C * B + B.transpose() * C.transpose());
    return block;
}

// Shared sweep: collects RHP pole count, skips grid points near jw-axis poles,
// and returns the min sampled margin with its location.
struct SweepResult {
    double min_margin = std::numeric_limits<double>::infinity();
    double worst_omega = 0.0;
    int rhp_pole_count = 0;
    int strict_unstable_count = 0;  // poles with Re >= -pole_tol (SNI test)
    std::vector<double> skipped;
};

SweepResult margin_sweep(const StateSpace& sys, const FrequencyGrid& grid,
                         const NiCheckOptions& opts) {
    SweepResult res;
    const ComplexVector p = poles(sys);
    std::vector<double> axis_freqs;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p[i].real() > opts.pole_tol) ++res.rhp_pole_count;
        if (p[i].real() >= -opts.pole_tol) ++res.strict_unstable_count;
        if (std::abs(p[i].real()) <= opts.pole_tol && std::abs(p[i].imag()) > 0.0)
            axis_freqs.push_back(std::abs(p[i].imag()));
    }
    for (double w : grid.points()) {
        const bool near_pole = std::any_of(axis_freqs.begin(), axis_freqs.end(), [&](double w0) {
            return std::abs(w - w0) <= opts.pole_skip_rtol * w0;
        });
        if (near_pole) {
            res.skipped.push_back(w);
            continue;
        }
        const ComplexMatrix G = tf_eval(sys, Complex(0.0, w));
        const ComplexMatrix M = Complex(0.0, 1.0) * (G - G.adjoint());
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(M, Eigen::EigenvaluesOnly);
        const double lam = es.eigenvalues().minCoeff();
        if (lam < res.min_margin) {
            res.min_margin = lam;
            res.worst_omega = w;
        }
    }
    return res;
}

}  // namespace

NiVerdict ni_sample_check(const StateSpace& sys, const FrequencyGrid& grid, double tol,
                          const NiCheckOptions& opts) {
    NiVerdict v;
    v.d_symmetric = symmetric_within(sys.D(), tol);
    const SweepResult sweep = margin_sweep(sys, grid, opts);
    v.min_margin = sweep.min_margin;
    v.worst_omega = sweep.worst_omega;
    v.rhp_pole_count = sweep.rhp_pole_count;
    v.skipped_omegas = sweep.skipped;
    v.is_ni = v.d_symmetric && v.rhp_pole_count == 0 && v.min_margin >= -tol;
    return v;
}

NiVerdict sni_check(const StateSpace& sys, const FrequencyGrid& grid, double margin,
                    const NiCheckOptions& opts) {
    if (!(margin > 0.0)) throw std::invalid_argument("sni_check: margin must be > 0");
    NiVerdict v;
    v.d_symmetric = symmetric_within(sys.D(), 1e-10);
    const SweepResult sweep = margin_sweep(sys, grid, opts);
    v.min_margin = sweep.min_margin;
    v.worst_omega = sweep.worst_omega;
    v.rhp_pole_count = sweep.strict_unstable_count;
    v.skipped_omegas = sweep.skipped;
    v.is_ni = v.d_symmetric && sweep.strict_unstable_count == 0 && v.min_margin >= margin;
    return v;
}

double ni_lmi_residual(const StateSpace& sys, const Matrix& P) {
    if (P.rows() != sys.n() || P.cols() != sys.n())
        throw std::invalid_argument("ni_lmi_residual: P must be n x n");
    if (!symmetric_within(P, 1e-10))
        throw std::invalid_argument("ni_lmi_residual: P must be symmetric");
    if (!symmetric_within(sys.D(), 1e-10))
        throw std::invalid_argument("ni_lmi_residual: D must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(certificate_block(sys, P), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double lmi_relaxation_delta(const StateSpace& sys, const Matrix& P) {
    if (P.rows() != sys.n() || P.cols() != sys.n())
        throw std::invalid_argument("lmi_relaxation_delta: P must be n x n");
    Eigen::SelfAdjointEigenSolver<Matrix> es(certificate_block(sys, 0.5 * (P + P.transpose())),
                                             Eigen::EigenvaluesOnly);
    return std::max(0.0, es.eigenvalues().maxCoeff());
}

Matrix dc_gain(const StateSpace& sys) {
    if (sys.n() == 0) return sys.D();
    Eigen::FullPivLU<Matrix> lu(sys.A());
    if (!lu.isInvertible())
        throw std::invalid_argument("dc_gain: A is singular, G(0) undefined");
    return sys.D() - sys.C() * lu.solve(sys.B());
}

std::pair<bool, double> dc_gain_condition(const StateSpace& plant, const StateSpace& controller) {
    if (plant.m() != controller.m())
        throw std::invalid_argument("dc_gain_condition: channel counts differ");
    const Matrix product = dc_gain(plant) * dc_gain(controller);
    double lam_max;
    if (product.rows() == 1) {
        lam_max = product(0, 0);
    } else {
        const ComplexVector eigs = product.eigenvalues();
        lam_max = eigs.real().maxCoeff();
    }
    return {lam_max < 1.0, lam_max};
}

FrequencyGrid default_grid(int points) { return FrequencyGrid::logspace(1e-2, 1e3, points); }

}  // namespace niforge
