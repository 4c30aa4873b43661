#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "niforge/state_space.hpp"
#include "support.hpp"

#include <cmath>

using namespace niforge;
using namespace niforge::test;

namespace {

StateSpace integrator() {
    return ss_new(Matrix::Zero(1, 1), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1));
}

}  // namespace

TEST_CASE("ss_new validates dimensions and entries") {
    CHECK_NOTHROW(integrator());

    SUBCASE("C row count must equal m") {
        CHECK_THROWS_AS(ss_new(Matrix::Zero(2, 2), Matrix::Zero(2, 1), Matrix::Zero(2, 2),
                               Matrix::Zero(1, 1)),
                        std::invalid_argument);
    }
    SUBCASE("B row count must equal n") {
        CHECK_THROWS_AS(ss_new(Matrix::Zero(2, 2), Matrix::Zero(3, 1), Matrix::Zero(1, 2),
                               Matrix::Zero(1, 1)),
                        std::invalid_argument);
    }
    SUBCASE("non-finite entries rejected") {
        Matrix A = Matrix::Zero(1, 1);
        A(0, 0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(ss_new(A, Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1)),
                        std::invalid_argument);
    }
    SUBCASE("reference controller realizes as a 4-state SISO system") {
        const StateSpace sys = lqg1_system();
        CHECK(sys.n() == 4);
        CHECK(sys.m() == 1);
    }
}

TEST_CASE("tf_eval") {
    SUBCASE("integrator at s=2 is 0.5") {
        const ComplexMatrix G = tf_eval(integrator(), Complex(2.0, 0.0));
        CHECK(std::abs(G(0, 0) - 0.5) < 1e-14);
    }
    SUBCASE("two-mode plant DC value is 1/4 + 1/16") {
        const StateSpace plant = flex_plant(modes_n2());
        const ComplexMatrix G = tf_eval(plant, Complex(0.0, 0.0));
        CHECK(std::abs(G(0, 0) - 0.3125) < 1e-12);
    }
    SUBCASE("high-frequency limit approaches D") {
        const StateSpace sys = nilqg1_system();
        const ComplexMatrix G = tf_eval(sys, Complex(0.0, 1e9));
        CHECK(std::abs(G(0, 0) - sys.D()(0, 0)) < 1e-9);
    }
    SUBCASE("evaluation at a pole fails") {
        CHECK_THROWS_AS(tf_eval(integrator(), Complex(0.0, 0.0)), EvaluationAtPoleError);
    }
}

TEST_CASE("freq_response") {
    SUBCASE("integrator at omega=1 is -j") {
        const auto resp = freq_response(integrator(), FrequencyGrid({1.0}));
        REQUIRE(resp.size() == 1);
        CHECK(std::abs(resp[0](0, 0) - Complex(0.0, -1.0)) < 1e-14);
    }
    SUBCASE("two-mode plant peaks near the first resonance") {
        const StateSpace plant = flex_plant(modes_n2());
        const FrequencyGrid grid({1.5, 2.0, 2.5});
        const auto resp = freq_response(plant, grid);
        CHECK(std::abs(resp[1](0, 0)) > 5.0 * std::abs(resp[0](0, 0)));
        CHECK(std::abs(resp[1](0, 0)) > 5.0 * std::abs(resp[2](0, 0)));
    }
    SUBCASE("empty grid gives an empty response") {
        CHECK(freq_response(integrator(), FrequencyGrid({})).empty());
    }
    SUBCASE("grid point at a pole names the offending frequency") {
        const StateSpace osc = ss_new((Matrix(2, 2) << 0, 1, -4, 0).finished(),
                                      (Matrix(2, 1) << 0, 1).finished(),
                                      (Matrix(1, 2) << 1, 0).finished(), Matrix::Zero(1, 1));
        CHECK_THROWS_WITH_AS(freq_response(osc, FrequencyGrid({2.0})),
                             doctest::Contains("omega = 2"), EvaluationAtPoleError);
    }
}

TEST_CASE("poles") {
    SUBCASE("diagonal A") {
        const StateSpace sys =
            ss_new((Matrix(2, 2) << -1, 0, 0, -2).finished(), Matrix::Zero(2, 1),
                   Matrix::Zero(1, 2), Matrix::Zero(1, 1));
        Vector re = poles(sys).real();
        std::sort(re.begin(), re.end());
        CHECK(std::abs(re[0] + 2.0) < 1e-12);
        CHECK(std::abs(re[1] + 1.0) < 1e-12);
    }
    SUBCASE("single lightly damped mode") {
        // roots of s^2 + 0.08 s + 4
        const StateSpace sys = flex_plant({{2.0, 0.02}});
        const ComplexVector p = poles(sys);
        REQUIRE(p.size() == 2);
        const double im_expect = std::sqrt(4.0 - 0.04 * 0.04);
        for (Eigen::Index i = 0; i < 2; ++i) {
            CHECK(std::abs(p[i].real() + 0.04) < 1e-12);
            CHECK(std::abs(std::abs(p[i].imag()) - im_expect) < 1e-10);
        }
    }
    SUBCASE("undamped oscillator has +-2j") {
        const StateSpace sys = ss_new((Matrix(2, 2) << 0, 1, -4, 0).finished(),
                                      Matrix::Zero(2, 1), Matrix::Zero(1, 2), Matrix::Zero(1, 1));
        const ComplexVector p = poles(sys);
        for (Eigen::Index i = 0; i < 2; ++i) {
            CHECK(std::abs(p[i].real()) < 1e-12);
            CHECK(std::abs(std::abs(p[i].imag()) - 2.0) < 1e-12);
        }
    }
}

TEST_CASE("is_hurwitz") {
    const StateSpace stable = ss_new((Matrix(2, 2) << -1, 0, 0, -2).finished(),
                                     Matrix::Zero(2, 1), Matrix::Zero(1, 2), Matrix::Zero(1, 1));
    CHECK(is_hurwitz(stable));
    CHECK(is_hurwitz(stable, 0.5));
    CHECK_FALSE(is_hurwitz(stable, 1.5));

    const StateSpace marginal = ss_new((Matrix(2, 2) << 0, 1, -4, 0).finished(),
                                       Matrix::Zero(2, 1), Matrix::Zero(1, 2), Matrix::Zero(1, 1));
    CHECK_FALSE(is_hurwitz(marginal));
}

TEST_CASE("positive_feedback") {
    SUBCASE("strictly proper case forces the block formula") {
        Rng rng(101);
        const Matrix Ap = random_matrix(rng, 3, 3), Bp = random_matrix(rng, 3, 1),
                     Cp = random_matrix(rng, 1, 3);
        const Matrix Ac = random_matrix(rng, 2, 2), Bc = random_matrix(rng, 2, 1),
                     Cc = random_matrix(rng, 1, 2);
        const StateSpace plant = ss_new(Ap, Bp, Cp, Matrix::Zero(1, 1));
        const StateSpace ctrl = ss_new(Ac, Bc, Cc, Matrix::Zero(1, 1));
        const StateSpace cl = positive_feedback(plant, ctrl);
        Matrix expectA(5, 5);
        expectA << Ap, Bp * Cc, Bc * Cp, Ac;
        CHECK((cl.A() - expectA).norm() < 1e-14);
        CHECK((cl.B().topRows(3) - Bp).norm() < 1e-14);
        CHECK((cl.C().leftCols(3) - Cp).norm() < 1e-14);
    }
    SUBCASE("unit static gains make an ill-posed loop") {
        const StateSpace g = ss_new(Matrix::Zero(0, 0), Matrix::Zero(0, 1), Matrix::Zero(1, 0),
                                    Matrix::Ones(1, 1));
        CHECK_THROWS_AS(positive_feedback(g, g), std::invalid_argument);
    }
    SUBCASE("closed-loop transfer function equals P/(1 - K P)") {
        Rng rng(55);
        const StateSpace plant = tf_to_ss({1.0, 2.0}, {1.0, 1.5, 2.0, 1.0});
        const StateSpace ctrl = tf_to_ss({0.4}, {1.0, 3.0});
        const StateSpace cl = positive_feedback(plant, ctrl);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int k = 0; k < 10; ++k) {
            const Complex s(u(rng), u(rng));
            const Complex p = tf_eval(plant, s)(0, 0);
            const Complex kk = tf_eval(ctrl, s)(0, 0);
            const Complex expect = p / (1.0 - kk * p);
            CHECK(std::abs(tf_eval(cl, s)(0, 0) - expect) <= 1e-10 * (1.0 + std::abs(expect)));
        }
    }
    SUBCASE("closed-loop eigenvalues match den_p den_c - num_p num_c roots") {
        // SISO oracle: under positive feedback the characteristic polynomial
        // is den_p * den_c - num_p * num_c.
        Rng rng(77);
        std::uniform_real_distribution<double> coeff(-2.0, 2.0);
        for (int rep = 0; rep < 10; ++rep) {
            std::vector<double> den_p{1.0, 3.0 + coeff(rng), 2.0 + coeff(rng)};
            std::vector<double> num_p{coeff(rng), coeff(rng)};
            std::vector<double> den_c{1.0, 4.0 + coeff(rng), 3.0 + coeff(rng)};
            std::vector<double> num_c{coeff(rng), coeff(rng)};
            const StateSpace cl =
                positive_feedback(tf_to_ss(num_p, den_p), tf_to_ss(num_c, den_c));
            const Eigen::VectorXcd expected =
                polyroots(polysub(polymul(den_p, den_c), polymul(num_p, num_c)));
            const ComplexVector actual = poles(cl);
            REQUIRE(actual.size() == expected.size());
            std::vector<bool> used(static_cast<std::size_t>(expected.size()), false);
            for (Eigen::Index i = 0; i < actual.size(); ++i) {
                double best = 1e100;
                std::size_t best_j = 0;
                for (Eigen::Index j = 0; j < expected.size(); ++j) {
                    if (used[static_cast<std::size_t>(j)]) continue;
                    const double d = std::abs(actual[i] - expected[j]);
                    if (d < best) {
                        best = d;
                        best_j = static_cast<std::size_t>(j);
                    }
                }
                used[best_j] = true;
                CHECK(best <= 1e-6 * (1.0 + std::abs(actual[i])));
            }
        }
    }
}

TEST_CASE("step_response") {
    SUBCASE("integrator ramps with y(t) = t") {
        const auto traj = step_response(integrator(), 1.0, 0.1);
        REQUIRE(traj.size() == 11);
        for (const auto& s : traj) CHECK(std::abs(s.y[0] - s.t) < 1e-12);
    }
    SUBCASE("static gain holds constant") {
        const StateSpace gain = ss_new(Matrix::Zero(0, 0), Matrix::Zero(0, 1),
                                       Matrix::Zero(1, 0), 2.0 * Matrix::Ones(1, 1));
        for (const auto& s : step_response(gain, 1.0, 0.25)) CHECK(s.y[0] == doctest::Approx(2.0));
    }
    SUBCASE("stable system settles to the DC gain") {
        const StateSpace lag = tf_to_ss({3.0}, {1.0, 2.0, 3.0});  // 3/(s^2+2s+3)
        const double dc = tf_eval(lag, 0.0)(0, 0).real();
        const auto traj = step_response(lag, 20.0, 0.01);  // Re(poles) = -1, 20 time constants
        CHECK(std::abs(traj.back().y[0] - dc) < 1e-6);
    }
    SUBCASE("invalid sampling rejected") {
        CHECK_THROWS_AS(step_response(integrator(), 1.0, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(step_response(integrator(), 0.05, 0.1), std::invalid_argument);
    }
}

TEST_CASE("flex_plant") {
    SUBCASE("two-mode plant structure and resonances") {
        const StateSpace plant = flex_plant(modes_n2());
        CHECK(plant.n() == 4);
        CHECK(plant.m() == 1);
        // block diagonal: no cross-mode coupling
        CHECK(plant.A().topRightCorner(2, 2).norm() == 0.0);
        CHECK(plant.A().bottomLeftCorner(2, 2).norm() == 0.0);
        const double dc = tf_eval(plant, 0.0)(0, 0).real();
        CHECK(std::abs(dc - 0.3125) < 1e-12);
    }
    SUBCASE("eigenvalues are exactly the modal polynomial roots") {
        const std::vector<ModeSpec> modes{{1.3, 0.4}, {5.7, 0.01}, {9.2, 0.15}};
        const ComplexVector p = poles(flex_plant(modes));
        for (const ModeSpec& mode : modes) {
            const Complex r1(-mode.zeta * mode.omega,
                             mode.omega * std::sqrt(1.0 - mode.zeta * mode.zeta));
            double best = 1e100;
            for (Eigen::Index i = 0; i < p.size(); ++i)
                best = std::min(best, std::abs(p[i] - r1));
            CHECK(best < 1e-10);
        }
    }
    SUBCASE("single mode matches 1/(s^2+s+1) pointwise") {
        const StateSpace plant = flex_plant({{1.0, 0.5}});
        for (double w : {0.3, 1.0, 4.2}) {
            const Complex s(0.0, w);
            const Complex expect = 1.0 / (s * s + s + 1.0);
            CHECK(std::abs(tf_eval(plant, s)(0, 0) - expect) < 1e-13);
        }
    }
    SUBCASE("invalid modes rejected") {
        CHECK_THROWS_AS(flex_plant({}), std::invalid_argument);
        CHECK_THROWS_AS(flex_plant({{2.0, -0.1}}), std::invalid_argument);
        CHECK_THROWS_AS(flex_plant({{0.0, 0.1}}), std::invalid_argument);
    }
}

TEST_CASE("tf_to_ss") {
    SUBCASE("num=[1], den=[1,0] is the integrator") {
        const StateSpace sys = tf_to_ss({1.0}, {1.0, 0.0});
        CHECK(sys.n() == 1);
        CHECK(std::abs(tf_eval(sys, 2.0)(0, 0).real() - 0.5) < 1e-14);
    }
    SUBCASE("reference NI controller DC value") {
        const StateSpace sys = nilqg1_system();
        CHECK(std::abs(tf_eval(sys, 0.0)(0, 0).real() - 132.5 / 125.1) < 1e-12);
    }
    SUBCASE("matches the polynomial ratio at random points") {
        Rng rng(42);
        std::uniform_real_distribution<double> re(-3.0, 3.0);
        for (const auto& [num, den] :
             {std::pair(kLqg1Num, kLqgDen), std::pair(kNilqg1Num, kLqgDen),
              std::pair(std::vector<double>{2.0, 0.0, 1.0}, std::vector<double>{4.0, 1.0, 0.5, 2.0})}) {
            const StateSpace sys = tf_to_ss(num, den);
            for (int k = 0; k < 20; ++k) {
                const Complex s(re(rng), re(rng));
                const Complex expect = polyval(num, s) / polyval(den, s);
                const Complex got = tf_eval(sys, s)(0, 0);
                CHECK(std::abs(got - expect) <= 1e-10 * std::abs(expect));
            }
        }
    }
    SUBCASE("biproper ratio keeps its feedthrough") {
        // (2s + 1)/(s + 3): D = 2, G(0) = 1/3
        const StateSpace sys = tf_to_ss({2.0, 1.0}, {1.0, 3.0});
        CHECK(sys.D()(0, 0) == doctest::Approx(2.0));
        CHECK(std::abs(tf_eval(sys, 0.0)(0, 0).real() - 1.0 / 3.0) < 1e-14);
    }
    SUBCASE("improper and degenerate inputs rejected") {
        CHECK_THROWS_AS(tf_to_ss({1.0, 0.0, 0.0}, {1.0, 1.0}), std::invalid_argument);
        CHECK_THROWS_AS(tf_to_ss({1.0}, {0.0, 1.0}), std::invalid_argument);
    }
}

TEST_CASE("minimality_warning flags pole-zero cancellation") {
    // (s+1)/((s+1)(s+2)) realized in companion form is unobservable or
    // uncontrollable depending on convention; either way the screen trips.
    const StateSpace cancel = tf_to_ss({1.0, 1.0}, {1.0, 3.0, 2.0});
    CHECK_FALSE(minimality_warning(cancel).empty());
    CHECK(minimality_warning(flex_plant(modes_n2())).empty());
}
