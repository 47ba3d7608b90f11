#include <doctest.h>

#include <cmath>
#include <random>

#include "fcs/models.hpp"
#include "fcs/trajectories.hpp"

using namespace fcs;

TEST_SUITE_BEGIN("trajectories");

namespace {

LindbladModel decaying_qubit(double gamma) {
    const SpaceLayout single({2});
    return LindbladModel(0.0 * identity(single), {{pauli(Pauli::Minus, 0, single), gamma}},
                         "decaying_qubit");
}

Vector basis_state(int dim, int index) {
    Vector v = Vector::Zero(dim);
    v(index) = 1.0;
    return v;
}

}  // namespace

TEST_CASE("dark initial state never jumps") {
    const LindbladModel model = decaying_qubit(1.0);
    const TrajectoryBatch batch =
        run_trajectories(model, 0, basis_state(2, 1), 20.0, 0.01, 99, 200, 2);
    for (long k : batch.counts) CHECK(k == 0);
}

TEST_CASE("single excitation emits exactly once") {
    const LindbladModel model = decaying_qubit(1.0);
    const TrajectoryBatch batch =
        run_trajectories(model, 0, basis_state(2, 0), 50.0, 0.01, 7, 100, 2);
    for (long k : batch.counts) CHECK(k == 1);
}

TEST_CASE("identical seeds reproduce the batch bit for bit") {
    const LindbladModel model = two_spins_same(0.0, 1.0);
    const Vector psi0 = basis_state(4, 0);
    const TrajectoryBatch a = run_trajectories(model, 0, psi0, 50.0, 0.01, 1234, 64, 4);
    const TrajectoryBatch b = run_trajectories(model, 0, psi0, 50.0, 0.01, 1234, 64, 1);
    CHECK(a.counts == b.counts);
    CHECK(a.seeds == b.seeds);

    const JumpRecord r1 = simulate_jump_trajectory(model, psi0, 50.0, 0.01, a.seeds[5]);
    const JumpRecord r2 = simulate_jump_trajectory(model, psi0, 50.0, 0.01, a.seeds[5]);
    CHECK(r1.counts == r2.counts);
    CHECK((r1.psi_final - r2.psi_final).norm() == 0.0);
}

TEST_CASE("empirical cumulants of constant counts") {
    TrajectoryBatch batch;
    batch.horizon = 10.0;
    batch.counts.assign(150, 7);
    batch.seeds.assign(150, 0);
    batch.channel_index = 0;
    const EmpiricalCumulants emp = empirical_cumulants(batch);
    CHECK(emp.kappa1_hat == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(emp.kappa2_hat == 0.0);
}

TEST_CASE("undersized batches are rejected") {
    TrajectoryBatch batch;
    batch.horizon = 1.0;
    batch.counts.assign(50, 1);
    CHECK_THROWS_AS(empirical_cumulants(batch), std::invalid_argument);
}

TEST_CASE("synthetic Poisson counts have matching rate and variance rate") {
    std::mt19937_64 rng(2024);
    const double lambda = 3.7, horizon = 10.0;
    std::poisson_distribution<long> poisson(lambda * horizon);
    TrajectoryBatch batch;
    batch.horizon = horizon;
    for (int k = 0; k < 4000; ++k) batch.counts.push_back(poisson(rng));
    batch.seeds.assign(batch.counts.size(), 0);
    const EmpiricalCumulants emp = empirical_cumulants(batch);
    CHECK(std::abs(emp.kappa1_hat - lambda) <= 3.0 * emp.se1);
    CHECK(std::abs(emp.kappa2_hat - lambda) <= 3.0 * emp.se2);
}

TEST_CASE("quiet sector of the globally damped pair stays quiet") {
    const LindbladModel model = two_spins_global(0.1);
    const TrajectoryBatch batch =
        run_trajectories(model, 0, basis_state(4, 1), 100.0, 0.01, 5, 150, 2);
    const EmpiricalCumulants emp = empirical_cumulants(batch);
    CHECK(emp.kappa1_hat == 0.0);
}

TEST_CASE("mean jump rate of the symmetric pair approaches kappa_1") {
    const LindbladModel model = two_spins_same(0.0, 1.0);
    const DensityMatrix rho = steady_states(build_liouvillian(model)).front();
    const TrajectoryBatch batch = run_trajectories(model, 0, rho, 200.0, 0.01, 31, 2000, 0);
    const EmpiricalCumulants emp = empirical_cumulants(batch);
    CHECK(std::abs(emp.kappa1_hat - 0.4) <= 3.0 * emp.se1);
}

TEST_CASE("variance rate at the Poisson point equals the second theta derivative") {
    // kappa_2 = theta''(0) = kappa_1 - kappa_1^2 = 1/4 here; the mean rate is 1/2.
    const LindbladModel model = two_spins_same(0.0, 2.0);
    const DensityMatrix rho = steady_states(build_liouvillian(model)).front();
    const TrajectoryBatch batch = run_trajectories(model, 0, rho, 200.0, 0.005, 77, 2000, 0);
    const EmpiricalCumulants emp = empirical_cumulants(batch);
    CHECK(std::abs(emp.kappa1_hat - 0.5) <= 3.0 * emp.se1);
    CHECK(std::abs(emp.kappa2_hat - 0.25) <= 3.0 * emp.se2 + 2.0 / 200.0);
}

TEST_CASE("trajectory ensemble reproduces master-equation populations") {
    const LindbladModel model = two_spins_same(0.5, 1.0);
    const Superoperator w = build_liouvillian(model);
    const Vector psi0 = basis_state(4, 0);
    const DensityMatrix rho0 = DensityMatrix::pure(psi0, model.layout());
    for (double t : {0.5, 1.5}) {
        const Matrix ensemble = mean_projected_state(model, psi0, t, 0.005, 11, 10000, 0);
        const Matrix exact = evolve(w, rho0, t, 1e-3).matrix();
        for (int k = 0; k < 4; ++k) {
            const double p = exact(k, k).real();
            const double se = std::sqrt(std::max(p * (1.0 - p), 1e-4) / 10000.0);
            CHECK(std::abs(ensemble(k, k).real() - p) <= 3.5 * se);
        }
    }
}

TEST_SUITE_END();
