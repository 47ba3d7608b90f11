#pragma once

#include <cstdint>
#include <vector>

#include "fcs/liouville.hpp"

namespace fcs {

// Jump counts of one channel over a fixed horizon, one entry per seeded
// trajectory.
struct TrajectoryBatch {
    std::vector<long> counts;
    double horizon;
    std::vector<std::uint64_t> seeds;
    std::string model_tag;
    int channel_index;
};

struct EmpiricalCumulants {
    double kappa1_hat;  // mean(K) / T
    double kappa2_hat;  // unbiased variance(K) / T
    double se1;         // jackknife standard errors
    double se2;
};

struct JumpRecord {
    std::vector<long> counts;  // per channel
    Vector psi_final;
};

// Standard wavefunction unraveling: non-Hermitian drift under
// H_eff = H - (i/2) sum gamma_i L_i^dag L_i, jump times located by bisection
// on the squared norm, channel chosen proportional to gamma_i <L_i^dag L_i>.
// Identical seeds give identical output bit for bit.
JumpRecord simulate_jump_trajectory(const LindbladModel& model, const Vector& psi0, double t_final,
                                    double dt, std::uint64_t seed);

// Batch runner; mixed initial states are sampled from their eigendecomposition
// per trajectory. jobs = 0 uses the machine parallelism.
TrajectoryBatch run_trajectories(const LindbladModel& model, int channel, const Vector& psi0,
                                 double t_final, double dt, std::uint64_t seed, int n_traj,
                                 int jobs = 0);
TrajectoryBatch run_trajectories(const LindbladModel& model, int channel,
                                 const DensityMatrix& rho0, double t_final, double dt,
                                 std::uint64_t seed, int n_traj, int jobs = 0);

// Average of the projected trajectory states at t_final (ensemble check
// against the master equation).
Matrix mean_projected_state(const LindbladModel& model, const Vector& psi0, double t_final,
                            double dt, std::uint64_t seed, int n_traj, int jobs = 0);

EmpiricalCumulants empirical_cumulants(const TrajectoryBatch& batch);

// Deterministic per-index seed stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace fcs
