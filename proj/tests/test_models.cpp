#include <doctest.h>

#include <cmath>

#include "fcs/cumulants.hpp"
#include "fcs/models.hpp"

using namespace fcs;

TEST_SUITE_BEGIN("models");

TEST_CASE("zoo Hamiltonians are Hermitian and generators trace preserving") {
    const std::vector<LindbladModel> zoo = {two_spins_same(0.7, 1.2), two_spins_inverse(1.5, 0.4),
                                            two_spins_global(0.3),
                                            squeezed_pair(1.0, 0.2, 1.0, 0.8, 5)};
    for (const LindbladModel& model : zoo) {
        CHECK(model.hamiltonian().is_hermitian(1e-12));
        const Superoperator w = build_liouvillian(model);
        const int n = model.dim();
        const Vector id_vec = vectorize(Matrix(Matrix::Identity(n, n)));
        CHECK((id_vec.transpose() * w.matrix()).norm() <= 1e-10 * w.matrix().norm());
    }
}

TEST_CASE("inverse pair at zero field coincides with the symmetric pair") {
    const LindbladModel a = two_spins_same(0.0, 1.3);
    const LindbladModel b = two_spins_inverse(0.0, 1.3);
    CHECK((a.hamiltonian().matrix() - b.hamiltonian().matrix()).norm() == 0.0);
    for (std::size_t c = 0; c < a.channels().size(); ++c) {
        CHECK((a.channels()[c].l_op.matrix() - b.channels()[c].l_op.matrix()).norm() == 0.0);
        CHECK(a.channels()[c].rate == b.channels()[c].rate);
    }
}

TEST_CASE("globally damped pair: initial-condition dependence of the jump rate") {
    const double gamma = 0.2;
    const LindbladModel model = two_spins_global(gamma);
    const double active = 4.0 * gamma / (gamma * gamma + 8.0);

    Vector up_up = Vector::Zero(4);
    up_up(0) = 1.0;
    const double rate_active = average_jump_rate(
        model, 0, DensityMatrix::pure(up_up, model.layout()), 250.0, 150.0, 1e-2);
    CHECK(std::abs(rate_active - active) < 1e-5);

    Vector bell = Vector::Zero(4);
    bell(1) = bell(2) = 1.0 / std::sqrt(2.0);
    const double rate_quiet = average_jump_rate(
        model, 0, DensityMatrix::pure(bell, model.layout()), 0.0, 50.0, 1e-2);
    CHECK(std::abs(rate_quiet) < 1e-8);
}

TEST_CASE("squeezed pair drift and diffusion entries as printed") {
    const double omega = 1.1, g = 0.25, g1 = 0.9, g2 = 1.4;
    const GaussianModel m = squeezed_pair_gaussian(omega, g, g1, g2);
    RMatrix expected(4, 4);
    expected << g1 / 2, -omega, 0, g,
                omega, g1 / 2, g, 0,
                0, g, g2 / 2, -omega,
                g, 0, omega, g2 / 2;
    CHECK((m.drift() - expected).norm() == 0.0);
    RMatrix d = RMatrix::Zero(4, 4);
    d.diagonal() << g1 / 2, g1 / 2, g2 / 2, g2 / 2;
    CHECK((m.diffusion() - d).norm() == 0.0);
}

TEST_CASE("squeezed pair rejects tiny cutoffs") {
    CHECK_THROWS_AS(squeezed_pair(1.0, 0.2, 1.0, 1.0, 3), std::invalid_argument);
}

TEST_CASE("adaptive cutoff controls the top-level population") {
    const int cutoff = adaptive_fock_cutoff(1.0, 0.2, 1.0, 1.0);
    CHECK(cutoff <= 10);
    const LindbladModel fock = squeezed_pair(1.0, 0.2, 1.0, 1.0, cutoff);
    const DensityMatrix rho = steady_states(build_liouvillian(fock)).front();
    const double k1_fock =
        cumulant(fock, 0, 1, solve_hierarchy(fock, 0, 0, rho));
    const double k1_gauss = gaussian_cumulant(squeezed_pair_gaussian(1.0, 0.2, 1.0, 1.0), 0, 1);
    CHECK(std::abs(k1_fock - k1_gauss) <= 0.01 * k1_gauss);
}

TEST_CASE("Kerr stability bounds at the hysteresis-figure parameters") {
    const KerrParams p{1.0, 0.5, 0.01, 5.0};
    const KerrBranches br = kerr_branches(p);
    const double root_term = std::sqrt(13.0 / 16.0);
    CHECK(std::abs(br.n_minus - (2.0 - root_term) / 0.06) < 1e-9);
    CHECK(std::abs(br.n_plus - (2.0 + root_term) / 0.06) < 1e-9);
}

TEST_CASE("Kerr at zero driving sits at the stable origin") {
    const KerrBranches br = kerr_branches({1.0, 0.5, 0.01, 0.0});
    REQUIRE(br.roots.size() == 1);
    CHECK(br.roots[0] == 0.0);
    CHECK(br.stable[0]);
    CHECK(kerr_kappa1({1.0, 0.5, 0.01, 0.0}) == std::vector<double>{0.0});
}

TEST_CASE("Kerr roots satisfy the cubic") {
    for (double intensity : {0.5, 3.5, 6.0, 9.0, 20.0}) {
        const KerrParams p{1.0, 0.5, 0.01, intensity};
        for (double n : kerr_branches(p).roots) {
            const double lhs = (std::pow(p.delta - 2.0 * p.g * n, 2) + 0.25 * p.gamma * p.gamma) * n;
            CHECK(std::abs(lhs - intensity) <= 1e-9 * std::max(1.0, intensity));
        }
    }
}

TEST_CASE("Kerr bistable window is a single interval with two stable branches") {
    const KerrParams base{1.0, 0.5, 0.01, 0.0};
    // Fold intensities from the stability bounds.
    auto intensity_at = [&](double n) {
        return (std::pow(base.delta - 2.0 * base.g * n, 2) + 0.25 * base.gamma * base.gamma) * n;
    };
    const KerrBranches bounds = kerr_branches(base);
    const double i_lo = intensity_at(bounds.n_plus);
    const double i_hi = intensity_at(bounds.n_minus);
    REQUIRE(i_lo < i_hi);

    bool in_window_prev = false;
    int window_openings = 0;
    for (int k = 1; k <= 400; ++k) {
        const double intensity = 12.0 * k / 400.0;
        KerrParams p = base;
        p.intensity = intensity;
        const std::vector<double> k1 = kerr_kappa1(p);
        const bool inside = intensity > i_lo && intensity < i_hi;
        if (std::abs(intensity - i_lo) > 0.05 && std::abs(intensity - i_hi) > 0.05) {
            CHECK(k1.size() == (inside ? 2u : 1u));
        }
        if (inside && !in_window_prev) ++window_openings;
        in_window_prev = inside;
        for (double v : k1) CHECK(v >= 0.0);
    }
    CHECK(window_openings == 1);
}

TEST_CASE("Kerr with weak detuning is monostable at every intensity") {
    // delta^2 < 3 gamma^2 / 4: no unstable window.
    const KerrParams p{0.2, 0.5, 0.01, 0.0};
    const KerrBranches br = kerr_branches(p);
    CHECK(std::isnan(br.n_minus));
    for (double intensity : {0.1, 1.0, 10.0, 100.0}) {
        KerrParams q = p;
        q.intensity = intensity;
        CHECK(kerr_kappa1(q).size() == 1);
    }
}

TEST_SUITE_END();
