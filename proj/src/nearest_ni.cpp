#include "niforge/nearest_ni.hpp"

#include <cmath>
#include <limits>
#include <tuple>

namespace niforge {

namespace {

double spectral_norm(const Matrix& M) {
    if (M.rows() == 0 || M.cols() == 0) return 0.0;
    return M.jacobiSvd().singularValues()[0];
}

double sym_spectral_norm(const Matrix& S) {
    if (S.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct Residuals {
    Matrix E;  // A - (J-R)Q
    Matrix F;  // B - (R-J)C^T
};

Residuals residuals(const NearestNiProblem& p, const PhForm& ph) {
    const Matrix JR = ph.J - ph.R;
    return {p.target.A() - JR * ph.Q, p.target.B() + JR * p.target.C().transpose()};
}

// One eigendecomposition serving both the floor scale and the clamp:
// floor = base * max(1, |sym(M)|_2).
Matrix project_pd_scaled(const Matrix& M, double base_floor) {
    const Matrix S = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("project_pd_scaled: eigendecomposition failed");
    Vector d = es.eigenvalues();
    const double floor = base_floor * std::max(1.0, d.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::max(d[i], floor);
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

bool dc_violated(const Matrix& Q, const Matrix& C, double d, double plant_dc) {
    const Eigen::LLT<Matrix> llt(Q);
    if (llt.info() != Eigen::Success) return true;  // unusable Q counts as violating
    const double gbar = (C * llt.solve(C.transpose()))(0, 0) + d;
    return !(plant_dc * gbar < 1.0);
}

}  // namespace

NearestNiProblem::NearestNiProblem(StateSpace t, double w1_, double w2_,
                                   std::optional<DcConstraint> dc_)
    : target(std::move(t)), w1(w1_), w2(w2_), dc(std::move(dc_)) {
    if (!(w1 > 0.0) || !(w2 > 0.0))
        throw std::invalid_argument("NearestNiProblem: weights must be > 0");
    if (dc) {
        if (!(dc->epsilon > 0.0))
            throw std::invalid_argument("NearestNiProblem: dc epsilon must be > 0");
        if (target.m() != 1)
            throw std::invalid_argument(
                "NearestNiProblem: DC-gain constraint supports SISO targets only");
    }
}

double objective(const NearestNiProblem& problem, const PhForm& ph) {
    const auto [E, F] = residuals(problem, ph);
    return problem.w1 * E.squaredNorm() + problem.w2 * F.squaredNorm();
}

Gradients gradients(const NearestNiProblem& problem, const PhForm& ph) {
    const auto [E, F] = residuals(problem, ph);
    const Matrix EQt = E * ph.Q.transpose();
    const Matrix FC = F * problem.target.C();
    Gradients g;
    g.J = -2.0 * problem.w1 * EQt + 2.0 * problem.w2 * FC;
    g.R = 2.0 * problem.w1 * EQt - 2.0 * problem.w2 * FC;
    g.Q = -2.0 * problem.w1 * (ph.J - ph.R).transpose() * E;
    return g;
}

PhForm init_standard(const NearestNiProblem& problem) {
    const Matrix& A = problem.target.A();
    PhForm ph;
    ph.J = project_skew(A);
    ph.R = project_psd(-0.5 * (A + A.transpose()));
    ph.Q = Matrix::Identity(A.rows(), A.rows());
    return ph;
}

PhForm init_lmi(const NearestNiProblem& problem, int inner_iters) {
    const StateSpace& sys = problem.target;
    const Eigen::Index n = sys.n(), m = sys.m();
    PhForm ph = init_standard(problem);
    if (n == 0 || inner_iters <= 0) return ph;

    const Matrix& A = sys.A();
    const Matrix& B = sys.B();
    const Matrix& C = sys.C();
    auto block_of = [&](const Matrix& P) {
        Matrix block(n + m, n + m);
        block.topLeftCorner(n, n) = P * A + A.transpose() * P;
        block.topRightCorner(n, m) = P * B - A.transpose() * C.transpose();
        block.bottomLeftCorner(m, n) = block.topRightCorner(n, m).transpose();
        block.bottomRightCorner(m, m) = -(C * B + B.transpose() * C.transpose());
        return block;
    };

    Matrix P = Matrix::Identity(n, n);
    Eigen::SelfAdjointEigenSolver<Matrix> es(block_of(P));
    double delta = std::max(0.0, es.eigenvalues().maxCoeff());
    const double delta0 = delta;
    Matrix best_P = P;
    double best_delta = delta;

    for (int k = 0; k < inner_iters && best_delta > 0.0; ++k) {
        const Vector u = es.eigenvectors().col(n + m - 1);  // eigenvector of lambda_max
        const Vector u1 = u.head(n), u2 = u.tail(m);
        const Vector Au1 = A * u1, Bu2 = B * u2;
        // d lambda_max / dP, symmetric by construction
        const Matrix S = Au1 * u1.transpose() + u1 * Au1.transpose() + Bu2 * u1.transpose() +
                         u1 * Bu2.transpose();
        const double g2 = S.squaredNorm();
        if (!(g2 > 0.0)) break;
        P = project_psd(P - (delta / g2) * S);  // Polyak step toward delta = 0
        es.compute(block_of(P));
        delta = std::max(0.0, es.eigenvalues().maxCoeff());
        if (delta < best_delta) {
            best_delta = delta;
            best_P = P;
        }
    }

    if (best_delta >= delta0) return ph;  // no improvement: keep standard init
    ph.Q = project_pd_scaled(best_P, 1e-8);
    return ph;
}

DcRescale dc_gain_rescale(const Matrix& Q, const Matrix& C, const Matrix& D, double plant_dc,
                          double epsilon) {
    if (C.rows() != 1 || D.rows() != 1 || D.cols() != 1)
        throw std::invalid_argument("dc_gain_rescale: SISO systems only");
    DcRescale out{Q, false, false, 1.0};
    const Eigen::LLT<Matrix> llt(Q);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("dc_gain_rescale: Q must be positive definite");
    const double gbar = (C * llt.solve(C.transpose()))(0, 0) + D(0, 0);
    if (plant_dc * gbar < 1.0) return out;  // condition already satisfied
    const double alpha = gbar * plant_dc + epsilon;
    out.alpha = alpha;
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        out.alpha_nonpositive = true;
        return out;
    }
    out.Q = alpha * Q;
    out.scaled = true;
    return out;
}

PerturbationReport perturbation_report(const NearestNiProblem& problem, const PhForm& ph) {
    const StateSpace& t = problem.target;
    const auto [At, Bt] = assemble(ph, t.C());
    auto rel = [](double abs_err, double ref_norm) {
        if (ref_norm > 0.0) return abs_err / ref_norm;
        return abs_err > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    };
    PerturbationReport r;
    r.abs_a = (t.A() - At).norm();
    r.rel_a = rel(r.abs_a, t.A().norm());
    r.abs_b = (t.B() - Bt).norm();
    r.rel_b = rel(r.abs_b, t.B().norm());
    r.abs_c = 0.0;  // C is kept exactly
    r.rel_c = 0.0;
    r.abs_d = (0.5 * (t.D() - t.D().transpose())).norm();
    r.rel_d = rel(r.abs_d, t.D().norm());
    r.total = r.abs_a * r.abs_a + r.abs_b * r.abs_b + r.abs_c * r.abs_c + r.abs_d * r.abs_d;
    return r;
}

SolverResult solve(const NearestNiProblem& problem, const SolverConfig& config) {
    if (config.max_iter < 1) throw std::invalid_argument("solve: max_iter must be >= 1");
    if (!(config.rel_tol > 0.0)) throw std::invalid_argument("solve: rel_tol must be > 0");
    if (!(config.pd_floor > 0.0)) throw std::invalid_argument("solve: pd_floor must be > 0");

    const StateSpace& target = problem.target;
    const Matrix& C = target.C();
    const double w1 = problem.w1, w2 = problem.w2;
    const double normC = spectral_norm(C);
    const double d_sym = target.m() == 1 ? target.D()(0, 0) : 0.0;

    PhForm cur;
    switch (config.init) {
        case InitKind::Standard: cur = init_standard(problem); break;
        case InitKind::LmiRelaxed: cur = init_lmi(problem, config.lmi_inner_iters); break;
        case InitKind::Warm:
            if (!config.warm_start)
                throw std::invalid_argument("solve: warm init requires warm_start");
            cur = *config.warm_start;
            cur.validate();
            if (cur.n() != target.n())
                throw std::invalid_argument("solve: warm_start dimension mismatch");
            break;
    }

    bool scaling_failed = false;
    auto apply_dc = [&](Matrix Q) -> std::pair<Matrix, bool> {
        if (!problem.dc) return {std::move(Q), false};
        DcRescale rs = dc_gain_rescale(Q, C, Matrix::Constant(1, 1, d_sym),
                                       problem.dc->plant_dc_gain, problem.dc->epsilon);
        if (rs.alpha_nonpositive) scaling_failed = true;
        return {std::move(rs.Q), rs.scaled};
    };
    auto feasible = [&](const PhForm& ph) {
        if (!problem.dc) return true;
        return !dc_violated(ph.Q, C, d_sym, problem.dc->plant_dc_gain);
    };

    cur.Q = apply_dc(std::move(cur.Q)).first;
    double f = objective(problem, cur);
    if (!std::isfinite(f)) throw SolverDivergence("solve: non-finite objective at init", {});

    std::vector<double> trace{f};
    PhForm prev = cur;
    PhForm best_feasible = cur;
    double best_feasible_f = std::numeric_limits<double>::infinity();
    bool have_feasible = false;
    if (feasible(cur)) {
        best_feasible_f = f;
        have_feasible = true;
    }

    double alpha = 1.0;
    int stall = 0;
    int iterations = 0;
    StopReason stop = StopReason::MaxIter;
    double normQ = sym_spectral_norm(cur.Q);

    for (int k = 0; k < config.max_iter; ++k) {
        if (f == 0.0) {
            stop = StopReason::ExactZero;
            break;
        }
        iterations = k + 1;

        const double a2 = alpha * alpha;
        const double alpha_next = 0.5 * (std::sqrt(a2 * a2 + 4.0 * a2) - a2);
        const double beta = alpha * (1.0 - alpha) / (a2 + alpha_next);

        auto attempt = [&](double momentum) {
            PhForm cand;
            const Matrix Yj = cur.J + momentum * (cur.J - prev.J);
            const Matrix Yr = cur.R + momentum * (cur.R - prev.R);
            const double L_jr = config.single_step_rule ? normQ * normQ
                                                       : 2.0 * (w1 * normQ * normQ + w2 * normC * normC);
            const double step_jr = 1.0 / std::max(L_jr, 1e-300);
            Gradients g = gradients(problem, PhForm{Yj, Yr, cur.Q});
            cand.J = project_skew(Yj - step_jr * g.J);
            cand.R = project_psd(Yr - step_jr * g.R);

            const Matrix Yq = cur.Q + momentum * (cur.Q - prev.Q);
            const double sn = spectral_norm(cand.J - cand.R);
            const double L_q = config.single_step_rule ? normQ * normQ : 2.0 * w1 * sn * sn;
            const double step_q = 1.0 / std::max(L_q, 1e-300);
            const Matrix Gq = gradients(problem, PhForm{cand.J, cand.R, Yq}).Q;
            auto [Qs, scaled] = apply_dc(project_pd_scaled(Yq - step_q * Gq, config.pd_floor));
            cand.Q = std::move(Qs);
            const double fv = objective(problem, cand);
            return std::make_tuple(std::move(cand), fv, scaled);
        };

        auto [cand, fn, scaled] = attempt(beta);
        if (!std::isfinite(fn))
            throw SolverDivergence("solve: non-finite objective during iteration", trace);
        if (fn > f && config.restart && beta > 0.0) {
            std::tie(cand, fn, scaled) = attempt(0.0);  // adaptive restart: drop momentum
            alpha = 1.0;
            if (!std::isfinite(fn))
                throw SolverDivergence("solve: non-finite objective during iteration", trace);
        }
        if (fn > f && config.restart) {
            // Even the momentum-free step increased the objective (possible
            // when the DC rescale fires): reject the move, keep the iterate.
            ++stall;
            alpha = 1.0;
            if (stall > config.stall_limit) {
                stop = StopReason::Stalled;
                break;
            }
            continue;
        }
        stall = 0;
        prev = std::move(cur);
        cur = std::move(cand);
        f = fn;
        alpha = alpha_next;
        if (scaled) {
            prev = cur;  // momentum memory must not span a rescale jump
            alpha = 1.0;
        }
        normQ = sym_spectral_norm(cur.Q);
        trace.push_back(f);
        if (feasible(cur) && f <= best_feasible_f) {
            best_feasible = cur;
            best_feasible_f = f;
            have_feasible = true;
        }
        if (trace.size() > 100) {
            const double f_old = trace[trace.size() - 101];
            if (f_old - f < config.rel_tol * std::max(f_old, 1e-300)) {
                stop = StopReason::RelTolWindow;
                break;
            }
        }
    }
    if (f == 0.0 && stop == StopReason::MaxIter) stop = StopReason::ExactZero;

    PhForm final_ph;
    if (problem.dc && have_feasible) {
        final_ph = best_feasible;
    } else if (problem.dc) {
        final_ph = cur;
        final_ph.Q = apply_dc(std::move(final_ph.Q)).first;  // last-chance rescale
    } else {
        final_ph = cur;
    }

    SolverResult res{final_ph,
                     assemble_system(final_ph, C, target.D()),
                     std::move(trace),
                     perturbation_report(problem, final_ph),
                     objective(problem, final_ph),
                     iterations,
                     stop,
                     stop != StopReason::MaxIter,
                     feasible(final_ph),
                     scaling_failed};
    return res;
}

}  // namespace niforge
