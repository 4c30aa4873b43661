#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "niforge/ni_analysis.hpp"
#include "niforge/ph_form.hpp"
#include "support.hpp"

#include <cmath>

using namespace niforge;
using namespace niforge::test;

namespace {

StateSpace double_integrator() {
    // minimal realization of 1/s^2
    return ss_new((Matrix(2, 2) << 0, 1, 0, 0).finished(), (Matrix(2, 1) << 0, 1).finished(),
                  (Matrix(1, 2) << 1, 0).finished(), Matrix::Zero(1, 1));
}

}  // namespace

TEST_CASE("ni_sample_check on closed-form and reference systems") {
    const FrequencyGrid grid = default_grid();

    SUBCASE("1/s^2 has identically zero imaginary part") {
        const NiVerdict v = ni_sample_check(double_integrator(), grid);
        CHECK(v.is_ni);
        CHECK(std::abs(v.min_margin) < 1e-12);
        CHECK(v.rhp_pole_count == 0);
    }
    SUBCASE("the reference LQG controller is not NI") {
        const NiVerdict v = ni_sample_check(lqg1_system(), grid);
        CHECK_FALSE(v.is_ni);
        CHECK(v.min_margin < -0.1);  // clear violation near 10 rad/s
        CHECK(v.worst_omega > 5.0);
        CHECK(v.worst_omega < 20.0);
    }
    SUBCASE("the reference NI controller passes") {
        const NiVerdict v = ni_sample_check(nilqg1_system(), grid);
        CHECK(v.is_ni);
        CHECK(v.rhp_pole_count == 0);
    }
    SUBCASE("asymmetric D fails with the margin check intact") {
        Rng rng(5);
        const Matrix A = -random_pd(rng, 2);
        StateSpace sys(A, Matrix::Zero(2, 2), Matrix::Zero(2, 2),
                       (Matrix(2, 2) << 0, 1, -1, 0).finished());
        const NiVerdict v = ni_sample_check(sys, grid);
        CHECK_FALSE(v.is_ni);
        CHECK_FALSE(v.d_symmetric);
    }
    SUBCASE("monotone in tol") {
        // passing at tol t implies passing at any larger tol
        const StateSpace sys = nilqg1_system();
        const NiVerdict tight = ni_sample_check(sys, grid, 1e-10);
        const NiVerdict loose = ni_sample_check(sys, grid, 1e-6);
        if (tight.is_ni) CHECK(loose.is_ni);
        CHECK(tight.min_margin == loose.min_margin);
    }
    SUBCASE("grid points near imaginary-axis poles are skipped and reported") {
        const StateSpace osc = tf_to_ss({1.0}, {1.0, 0.0, 4.0});  // poles at +-2j
        const FrequencyGrid near_pole({1.0, 2.0 * (1.0 + 1e-7), 3.0});
        const NiVerdict v = ni_sample_check(osc, near_pole);
        REQUIRE(v.skipped_omegas.size() == 1);
        CHECK(v.skipped_omegas[0] == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(v.is_ni);  // remaining samples have zero imaginary part
    }
}

TEST_CASE("sni_check") {
    const FrequencyGrid grid = default_grid();

    SUBCASE("1/(s+1) is SNI with margin below the grid minimum") {
        // j(G - G*) = 2 w / (1 + w^2); minimum over the default grid is at
        // w = 1e3: 2e3/(1+1e6) ~ 2.0e-3
        const StateSpace lag = tf_to_ss({1.0}, {1.0, 1.0});
        const double at_wmax = 2e3 / (1.0 + 1e6);
        const NiVerdict v = sni_check(lag, grid, 0.5 * at_wmax);
        CHECK(v.is_ni);
        CHECK(v.min_margin == doctest::Approx(at_wmax).epsilon(1e-9));
        CHECK_FALSE(sni_check(lag, grid, 2.0 * at_wmax).is_ni);
    }
    SUBCASE("undamped oscillator fails on its imaginary-axis poles") {
        const StateSpace osc = tf_to_ss({1.0}, {1.0, 0.0, 4.0});
        CHECK_FALSE(sni_check(osc, grid, 1e-12).is_ni);
    }
    SUBCASE("the zero system is NI but not SNI") {
        const StateSpace zero =
            ss_new(-Matrix::Identity(1, 1), Matrix::Zero(1, 1), Matrix::Zero(1, 1),
                   Matrix::Zero(1, 1));
        CHECK(ni_sample_check(zero, grid).is_ni);
        CHECK_FALSE(sni_check(zero, grid, 1e-12).is_ni);
    }
    SUBCASE("margin must be positive") {
        CHECK_THROWS_AS(sni_check(double_integrator(), grid, 0.0), std::invalid_argument);
    }
}

TEST_CASE("ni_lmi_residual") {
    SUBCASE("P = I on the double integrator gives residual 1") {
        // block becomes [[0,1,0],[1,0,0],[0,0,0]] with lambda_max = 1
        CHECK(ni_lmi_residual(double_integrator(), Matrix::Identity(2, 2)) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("Q of a PH form certifies its assembled system") {
        Rng rng(17);
        for (int rep = 0; rep < 20; ++rep) {
            const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 5);
            const PhForm ph = random_ph_form(rng, n);
            const Matrix C = random_matrix(rng, 1, n);
            const StateSpace sys = assemble_system(ph, C, Matrix::Zero(1, 1));
            CHECK(ni_lmi_residual(sys, ph.Q) <= 1e-8);
        }
    }
    SUBCASE("asymmetric P or D rejected") {
        const StateSpace sys = double_integrator();
        CHECK_THROWS_AS(ni_lmi_residual(sys, (Matrix(2, 2) << 1, 1, 0, 1).finished()),
                        std::invalid_argument);
        const StateSpace bad_d =
            ss_new(-Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                   (Matrix(2, 2) << 0, 1, -1, 0).finished());
        CHECK_THROWS_AS(ni_lmi_residual(bad_d, Matrix::Identity(2, 2)), std::invalid_argument);
    }
    SUBCASE("forward direction: certificate implies the sampled check passes") {
        Rng rng(23);
        const FrequencyGrid grid = default_grid(200);
        for (int rep = 0; rep < 10; ++rep) {
            const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 4);
            const PhForm ph = random_ph_form(rng, n);
            const Matrix C = random_matrix(rng, 1, n);
            const StateSpace sys = assemble_system(ph, C, random_pd(rng, 1));
            if (ni_lmi_residual(sys, ph.Q) <= 0.0) CHECK(ni_sample_check(sys, grid).is_ni);
        }
    }
}

TEST_CASE("dc_gain_condition") {
    auto static_gain = [](double g) {
        return ss_new(-Matrix::Identity(1, 1), Matrix::Ones(1, 1), (g * Matrix::Ones(1, 1)),
                      Matrix::Zero(1, 1));
    };
    SUBCASE("scalar statics") {
        auto [ok, lam] = dc_gain_condition(static_gain(0.5), static_gain(1.0));
        CHECK(ok);
        CHECK(lam == doctest::Approx(0.5));
        auto [bad, lam2] = dc_gain_condition(static_gain(2.0), static_gain(1.0));
        CHECK_FALSE(bad);
        CHECK(lam2 == doctest::Approx(2.0));
    }
    SUBCASE("two-mode plant and reference NI controller satisfy the condition") {
        const StateSpace plant = flex_plant(modes_n2());
        auto [ok, lam] = dc_gain_condition(plant, nilqg1_system());
        CHECK(ok);
        CHECK(lam == doctest::Approx(0.3125 * 132.5 / 125.1).epsilon(1e-10));
    }
    SUBCASE("singular A rejected") {
        const StateSpace integ = tf_to_ss({1.0}, {1.0, 0.0});
        CHECK_THROWS_AS(dc_gain_condition(integ, integ), std::invalid_argument);
    }
}

TEST_CASE("PH-assembled systems pass the sampled NI check") {
    // Soundness of the parameterization, used as the solver's structural
    // guarantee.
    Rng rng(31);
    const FrequencyGrid grid = default_grid(250);
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 7);
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng() % 2);
        const PhForm ph = random_ph_form(rng, n);
        const Matrix C = random_matrix(rng, m, n);
        const StateSpace sys = assemble_system(ph, C, random_symmetric(rng, m));
        const NiVerdict v = ni_sample_check(sys, grid, 1e-8);
        CHECK(v.is_ni);
    }
}

TEST_CASE("NI SISO phase stays in [-pi, 0] modulo 2 pi") {
    const FrequencyGrid grid = default_grid();
    for (const auto& modes : {modes_n2(), modes_n5()}) {
        const StateSpace plant = flex_plant(modes);
        for (const ComplexMatrix& G : freq_response(plant, grid)) {
            const Complex g = G(0, 0);
            if (std::abs(g) == 0.0) continue;
            double phase = std::arg(g);
            if (phase >= M_PI - 1e-6) phase -= 2.0 * M_PI;
            CHECK(phase <= 1e-6);
            CHECK(phase >= -M_PI - 1e-6);
        }
    }
}
