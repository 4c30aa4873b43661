#include "niforge/state_space.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace niforge {

namespace {

bool all_finite(const Matrix& M) { return M.allFinite(); }

}  // namespace

StateSpace::StateSpace(Matrix A, Matrix B, Matrix C, Matrix D)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), D_(std::move(D)) {
    const Eigen::Index n = A_.rows();
    const Eigen::Index m = B_.cols();
    if (A_.cols() != n) throw std::invalid_argument("StateSpace: A must be square");
    if (B_.rows() != n)
        throw std::invalid_argument("StateSpace: B must have as many rows as A");
    if (C_.rows() != m || C_.cols() != n)
        throw std::invalid_argument("StateSpace: C must be m x n (square systems only)");
    if (D_.rows() != m || D_.cols() != m)
        throw std::invalid_argument("StateSpace: D must be m x m (square systems only)");
    if (!all_finite(A_) || !all_finite(B_) || !all_finite(C_) || !all_finite(D_))
        throw std::invalid_argument("StateSpace: non-finite entry");
}

FrequencyGrid::FrequencyGrid(std::vector<double> points) : points_(std::move(points)) {
    double prev = 0.0;
    for (double w : points_) {
        if (!std::isfinite(w) || w <= 0.0)
            throw std::invalid_argument("FrequencyGrid: points must be finite and > 0");
        if (w <= prev)
            throw std::invalid_argument("FrequencyGrid: points must be strictly increasing");
        prev = w;
    }
}

FrequencyGrid FrequencyGrid::logspace(double wmin, double wmax, int count) {
    if (count < 1) throw std::invalid_argument("FrequencyGrid::logspace: count must be >= 1");
    if (!(wmin > 0.0) || !(wmax > wmin))
        throw std::invalid_argument("FrequencyGrid::logspace: need 0 < wmin < wmax");
    std::vector<double> pts(static_cast<std::size_t>(count));
    if (count == 1) {
        pts[0] = wmin;
    } else {
        const double l0 = std::log10(wmin), l1 = std::log10(wmax);
        for (int i = 0; i < count; ++i)
            pts[static_cast<std::size_t>(i)] = std::pow(10.0, l0 + (l1 - l0) * i / (count - 1));
        pts.back() = wmax;  // exact endpoint
    }
    return FrequencyGrid(std::move(pts));
}

ComplexMatrix tf_eval(const StateSpace& sys, Complex s) {
    const Eigen::Index n = sys.n();
    ComplexMatrix sIA = -sys.A().cast<Complex>();
    sIA.diagonal().array() += s;
    Eigen::FullPivLU<ComplexMatrix> lu(sIA);
    if (n > 0 && !lu.isInvertible()) {
        std::ostringstream msg;
        msg << "tf_eval: sI - A is singular at s = (" << s.real() << ", " << s.imag() << ")";
        throw EvaluationAtPoleError(msg.str());
    }
    return sys.C().cast<Complex>() * lu.solve(sys.B().cast<Complex>()) + sys.D().cast<Complex>();
}

std::vector<ComplexMatrix> freq_response(const StateSpace& sys, const FrequencyGrid& grid) {
    std::vector<ComplexMatrix> out;
    out.reserve(grid.size());
    for (double w : grid.points()) {
        try {
            out.push_back(tf_eval(sys, Complex(0.0, w)));
        } catch (const EvaluationAtPoleError&) {
            std::ostringstream msg;
            msg << "freq_response: grid point omega = " << w << " rad/s coincides with a pole";
            throw EvaluationAtPoleError(msg.str());
        }
    }
    return out;
}

ComplexVector poles(const StateSpace& sys) {
    if (sys.n() == 0) return ComplexVector(0);
    Eigen::EigenSolver<Matrix> es(sys.A(), /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("poles: eigensolver failed to converge");
    return es.eigenvalues();
}

bool is_hurwitz(const StateSpace& sys, double margin) {
    const ComplexVector p = poles(sys);
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p[i].real() >= -margin) return false;
    return true;
}

StateSpace positive_feedback(const StateSpace& plant, const StateSpace& controller) {
    if (plant.m() != controller.m())
        throw std::invalid_argument("positive_feedback: channel counts differ");
    const Eigen::Index np = plant.n(), nc = controller.n(), m = plant.m();
    const Matrix& Ap = plant.A();
    const Matrix& Bp = plant.B();
    const Matrix& Cp = plant.C();
    const Matrix& Dp = plant.D();
    const Matrix& Ac = controller.A();
    const Matrix& Bc = controller.B();
    const Matrix& Cc = controller.C();
    const Matrix& Dc = controller.D();

    // y_p = S (Cp x_p + Dp Cc x_c + Dp w) with S = (I - Dp Dc)^{-1}
    Eigen::FullPivLU<Matrix> lu(Matrix::Identity(m, m) - Dp * Dc);
    if (!lu.isInvertible())
        throw std::invalid_argument("positive_feedback: ill-posed loop, I - Dp*Dc is singular");
    const Matrix S = lu.inverse();

    Matrix A(np + nc, np + nc), B(np + nc, m), C(m, np + nc), D(m, m);
    A.topLeftCorner(np, np) = Ap + Bp * Dc * S * Cp;
    A.topRightCorner(np, nc) = Bp * (Matrix::Identity(m, m) + Dc * S * Dp) * Cc;
    A.bottomLeftCorner(nc, np) = Bc * S * Cp;
    A.bottomRightCorner(nc, nc) = Ac + Bc * S * Dp * Cc;
    B.topRows(np) = Bp * (Matrix::Identity(m, m) + Dc * S * Dp);
    B.bottomRows(nc) = Bc * S * Dp;
    C.leftCols(np) = S * Cp;
    C.rightCols(nc) = S * Dp * Cc;
    D = S * Dp;
    return StateSpace(std::move(A), std::move(B), std::move(C), std::move(D));
}

std::vector<StepSample> step_response(const StateSpace& sys, double horizon, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_response: dt must be > 0");
    if (!(horizon >= dt)) throw std::invalid_argument("step_response: horizon must be >= dt");
    const Eigen::Index n = sys.n(), m = sys.m();

    // Exact ZOH: expm([[A, B],[0, 0]] dt) = [[Ad, Bd],[0, I]]
    Matrix aug = Matrix::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = sys.A();
    aug.topRightCorner(n, m) = sys.B();
    const Matrix E = (aug * dt).exp();
    const Matrix Ad = E.topLeftCorner(n, n);
    const Matrix Bd = E.topRightCorner(n, m);

    const Vector u = Vector::Ones(m);
    const Vector du = sys.D() * u;
    Vector x = Vector::Zero(n);

    const auto steps = static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));
    std::vector<StepSample> out;
    out.reserve(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        out.push_back({static_cast<double>(k) * dt, sys.C() * x + du});
        x = Ad * x + Bd * u;
    }
    return out;
}

StateSpace flex_plant(const std::vector<ModeSpec>& modes) {
    if (modes.empty()) throw std::invalid_argument("flex_plant: at least one mode required");
    for (const ModeSpec& mode : modes) {
        if (!(mode.omega > 0.0) || !std::isfinite(mode.omega))
            throw std::invalid_argument("flex_plant: mode natural frequency must be > 0");
        if (!(mode.zeta > 0.0) || !std::isfinite(mode.zeta))
            throw std::invalid_argument("flex_plant: mode damping factor must be > 0");
    }
    const Eigen::Index n = 2 * static_cast<Eigen::Index>(modes.size());
    Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, 1), C = Matrix::Zero(1, n);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(2 * i);
        const double w = modes[i].omega, z = modes[i].zeta;
        A(k, k + 1) = 1.0;
        A(k + 1, k) = -w * w;
        A(k + 1, k + 1) = -2.0 * z * w;
        B(k + 1, 0) = 1.0;
        C(0, k) = 1.0;
    }
    return StateSpace(std::move(A), std::move(B), std::move(C), Matrix::Zero(1, 1));
}

StateSpace tf_to_ss(const std::vector<double>& numerator, const std::vector<double>& denominator) {
    if (denominator.empty()) throw std::invalid_argument("tf_to_ss: empty denominator");
    if (numerator.empty()) throw std::invalid_argument("tf_to_ss: empty numerator");
    if (denominator.front() == 0.0)
        throw std::invalid_argument("tf_to_ss: zero leading denominator coefficient");
    if (numerator.size() > denominator.size())
        throw std::invalid_argument("tf_to_ss: improper transfer function (numerator degree too high)");

    const auto n = static_cast<Eigen::Index>(denominator.size() - 1);
    const double lead = denominator.front();

    // Monic denominator a_1..a_n and numerator padded to degree n, c_0..c_n.
    std::vector<double> a(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        a[static_cast<std::size_t>(i)] = denominator[static_cast<std::size_t>(i) + 1] / lead;
    std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
    const std::size_t pad = denominator.size() - numerator.size();
    for (std::size_t i = 0; i < numerator.size(); ++i) c[pad + i] = numerator[i] / lead;

    const double d = c[0];
    Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, 1), C = Matrix::Zero(1, n),
           D = Matrix::Constant(1, 1, d);
    if (n > 0) {
        A.topRightCorner(n - 1, n - 1).setIdentity();
        for (Eigen::Index i = 0; i < n; ++i)
            A(n - 1, i) = -a[static_cast<std::size_t>(n - 1 - i)];
        B(n - 1, 0) = 1.0;
        // Strictly proper part b_i = c_i - d a_i, laid out as C = [b_n ... b_1].
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto j = static_cast<std::size_t>(n - i);
            C(0, i) = c[j] - d * a[j - 1];
        }
    }
    return StateSpace(std::move(A), std::move(B), std::move(C), std::move(D));
}

std::string minimality_warning(const StateSpace& sys) {
    const Eigen::Index n = sys.n(), m = sys.m();
    if (n == 0) return {};
    Matrix ctrb(n, n * m), obsv(n * m, n);
    Matrix Ak = Matrix::Identity(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        ctrb.middleCols(k * m, m) = Ak * sys.B();
        obsv.middleRows(k * m, m) = sys.C() * Ak;
        Ak = sys.A() * Ak;
    }
    auto rank_of = [](const Matrix& M) {
        Eigen::ColPivHouseholderQR<Matrix> qr(M);
        qr.setThreshold(1e-10);
        return qr.rank();
    };
    const Eigen::Index rc = rank_of(ctrb), ro = rank_of(obsv);
    if (rc == n && ro == n) return {};
    std::ostringstream msg;
    msg << "realization may be non-minimal:";
    if (rc < n) msg << " controllability rank " << rc << " < " << n;
    if (ro < n) msg << (rc < n ? "," : "") << " observability rank " << ro << " < " << n;
    return msg.str();
}

}  // namespace niforge
