#include "fcs/trajectories.hpp"

#include <Eigen/Eigenvalues>

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

namespace fcs {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    // splitmix64 over base + index keeps streams decorrelated and portable.
    std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

namespace {

// Uniform in [0, 1) built directly from the generator output; identical on
// every platform, unlike std::uniform_real_distribution.
double next_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double next_uniform_positive(std::mt19937_64& rng) {
    double u = next_uniform(rng);
    while (u == 0.0) u = next_uniform(rng);
    return u;
}

constexpr double kNormBisectionTol = 1e-10;  // in squared norm

// Drift propagator with preallocated RK4 stages; Mat/Vec are fixed-size for
// the small spin models, dynamic otherwise.
template <typename Mat, typename Vec>
struct Stepper {
    Mat m;  // -i H_eff
    std::vector<Mat> jump_ops;
    std::vector<double> rates;
    mutable Vec k1, k2, k3, k4, tmp, out;

    explicit Stepper(const LindbladModel& model) {
        const Complex i(0.0, 1.0);
        Matrix h_eff = model.hamiltonian().matrix();
        for (const Channel& c : model.channels()) {
            const Matrix& l = c.l_op.matrix();
            h_eff -= (0.5 * i * c.rate) * (l.adjoint() * l);
            jump_ops.push_back(Mat(l));
            rates.push_back(c.rate);
        }
        m = Mat(-i * h_eff);
        const int n = model.dim();
        k1.resize(n); k2.resize(n); k3.resize(n); k4.resize(n);
        tmp.resize(n); out.resize(n);
    }

    const Vec& rk4_step(const Vec& psi, double dt) const {
        k1.noalias() = m * psi;
        tmp = psi + (0.5 * dt) * k1;
        k2.noalias() = m * tmp;
        tmp = psi + (0.5 * dt) * k2;
        k3.noalias() = m * tmp;
        tmp = psi + dt * k3;
        k4.noalias() = m * tmp;
        out = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        return out;
    }
};

template <typename Mat, typename Vec>
JumpRecord simulate_impl(const LindbladModel& model, const Vector& psi0, double t_final,
                         double dt, std::uint64_t seed) {
    const Stepper<Mat, Vec> prop(model);
    std::mt19937_64 rng(seed);

    JumpRecord rec;
    rec.counts.assign(model.channels().size(), 0);

    Vec psi = Vec(psi0);
    Vec psi_hi = psi;
    std::vector<double> weights(prop.jump_ops.size());
    double t = 0.0;
    double threshold = next_uniform_positive(rng);
    while (t < t_final) {
        const double step = std::min(dt, t_final - t);
        const Vec& next = prop.rk4_step(psi, step);
        if (next.squaredNorm() > threshold) {
            psi = next;
            t += step;
            continue;
        }
        // Norm crossed the threshold inside [t, t + step]: bisect the jump time.
        double lo = 0.0, hi = step;
        psi_hi = next;
        while (hi - lo > 1e-13 * dt) {
            const double mid = 0.5 * (lo + hi);
            const Vec& psi_mid = prop.rk4_step(psi, mid);
            const double n2 = psi_mid.squaredNorm();
            if (std::abs(n2 - threshold) <= kNormBisectionTol) {
                psi_hi = psi_mid;
                hi = mid;
                break;
            }
            if (n2 > threshold) {
                lo = mid;
            } else {
                hi = mid;
                psi_hi = psi_mid;
            }
        }
        t += hi;
        // Channel selection proportional to gamma_i <L_i^dag L_i>.
        double total = 0.0;
        for (std::size_t c = 0; c < prop.jump_ops.size(); ++c) {
            weights[c] = prop.rates[c] * (prop.jump_ops[c] * psi_hi).squaredNorm();
            total += weights[c];
        }
        if (total <= 0.0) throw solve_error("simulate_jump_trajectory: norm underflow at jump");
        double pick = next_uniform(rng) * total;
        std::size_t chosen = 0;
        for (; chosen + 1 < weights.size(); ++chosen) {
            if (pick < weights[chosen]) break;
            pick -= weights[chosen];
        }
        psi = prop.jump_ops[chosen] * psi_hi;
        const double n = psi.norm();
        if (n <= 1e-150) throw solve_error("simulate_jump_trajectory: norm underflow after jump");
        psi /= n;
        ++rec.counts[chosen];
        threshold = next_uniform_positive(rng);
    }
    rec.psi_final = Vector(psi.normalized());
    return rec;
}

}  // namespace

JumpRecord simulate_jump_trajectory(const LindbladModel& model, const Vector& psi0, double t_final,
                                    double dt, std::uint64_t seed) {
    if (t_final <= 0.0) throw std::invalid_argument("simulate_jump_trajectory: t_final must be > 0");
    if (dt <= 0.0) throw std::invalid_argument("simulate_jump_trajectory: dt must be > 0");
    if (psi0.size() != model.dim())
        throw dimension_error("simulate_jump_trajectory: state size mismatch");
    if (std::abs(psi0.squaredNorm() - 1.0) > 1e-10)
        throw std::invalid_argument("simulate_jump_trajectory: state not normalized");

    switch (model.dim()) {
        case 2:
            return simulate_impl<Eigen::Matrix2cd, Eigen::Vector2cd>(model, psi0, t_final, dt, seed);
        case 4:
            return simulate_impl<Eigen::Matrix4cd, Eigen::Vector4cd>(model, psi0, t_final, dt, seed);
        default:
            return simulate_impl<Matrix, Vector>(model, psi0, t_final, dt, seed);
    }
}

namespace {

// Draw a pure state from the eigendecomposition of rho0 (identity for pure
// states), then run the trajectory with the remaining stream.
Vector sample_initial(const Matrix& rho0, std::mt19937_64& rng,
                      const Eigen::SelfAdjointEigenSolver<Matrix>& es) {
    double pick = next_uniform(rng);
    const int n = static_cast<int>(rho0.rows());
    for (int k = n - 1; k >= 0; --k) {
        const double p = std::max(es.eigenvalues()(k), 0.0);
        if (pick < p || k == 0) return es.eigenvectors().col(k).normalized();
        pick -= p;
    }
    return es.eigenvectors().col(0).normalized();
}

template <typename PerTrajectory>
void parallel_for_trajectories(int n_traj, int jobs, const PerTrajectory& body) {
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min(jobs, n_traj));
    if (jobs == 1) {
        for (int i = 0; i < n_traj; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) {
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < n_traj; i = next.fetch_add(1)) body(i);
        });
    }
    for (std::thread& th : pool) th.join();
}

}  // namespace

TrajectoryBatch run_trajectories(const LindbladModel& model, int channel, const Vector& psi0,
                                 double t_final, double dt, std::uint64_t seed, int n_traj,
                                 int jobs) {
    if (n_traj < 1) throw std::invalid_argument("run_trajectories: need at least one trajectory");
    model.channel(channel);  // validate index

    TrajectoryBatch batch;
    batch.horizon = t_final;
    batch.model_tag = model.label();
    batch.channel_index = channel;
    batch.counts.assign(static_cast<std::size_t>(n_traj), 0);
    batch.seeds.resize(static_cast<std::size_t>(n_traj));
    for (int i = 0; i < n_traj; ++i)
        batch.seeds[static_cast<std::size_t>(i)] = derive_seed(seed, static_cast<std::uint64_t>(i));

    parallel_for_trajectories(n_traj, jobs, [&](int i) {
        const JumpRecord rec = simulate_jump_trajectory(
            model, psi0, t_final, dt, batch.seeds[static_cast<std::size_t>(i)]);
        batch.counts[static_cast<std::size_t>(i)] = rec.counts[static_cast<std::size_t>(channel)];
    });
    return batch;
}

TrajectoryBatch run_trajectories(const LindbladModel& model, int channel,
                                 const DensityMatrix& rho0, double t_final, double dt,
                                 std::uint64_t seed, int n_traj, int jobs) {
    if (n_traj < 1) throw std::invalid_argument("run_trajectories: need at least one trajectory");
    model.channel(channel);

    Eigen::SelfAdjointEigenSolver<Matrix> es(rho0.matrix());
    TrajectoryBatch batch;
    batch.horizon = t_final;
    batch.model_tag = model.label();
    batch.channel_index = channel;
    batch.counts.assign(static_cast<std::size_t>(n_traj), 0);
    batch.seeds.resize(static_cast<std::size_t>(n_traj));
    for (int i = 0; i < n_traj; ++i)
        batch.seeds[static_cast<std::size_t>(i)] = derive_seed(seed, static_cast<std::uint64_t>(i));

    parallel_for_trajectories(n_traj, jobs, [&](int i) {
        std::mt19937_64 rng(batch.seeds[static_cast<std::size_t>(i)]);
        const Vector psi = sample_initial(rho0.matrix(), rng, es);
        const JumpRecord rec =
            simulate_jump_trajectory(model, psi, t_final, dt, rng());
        batch.counts[static_cast<std::size_t>(i)] = rec.counts[static_cast<std::size_t>(channel)];
    });
    return batch;
}

Matrix mean_projected_state(const LindbladModel& model, const Vector& psi0, double t_final,
                            double dt, std::uint64_t seed, int n_traj, int jobs) {
    std::vector<Matrix> partial(static_cast<std::size_t>(n_traj));
    parallel_for_trajectories(n_traj, jobs, [&](int i) {
        const JumpRecord rec = simulate_jump_trajectory(
            model, psi0, t_final, dt, derive_seed(seed, static_cast<std::uint64_t>(i)));
        partial[static_cast<std::size_t>(i)] = rec.psi_final * rec.psi_final.adjoint();
    });
    Matrix acc = Matrix::Zero(model.dim(), model.dim());
    for (const Matrix& m : partial) acc += m;
    return acc / static_cast<double>(n_traj);
}

EmpiricalCumulants empirical_cumulants(const TrajectoryBatch& batch) {
    const std::size_t n = batch.counts.size();
    if (n < 100) throw std::invalid_argument("empirical_cumulants: batch size must be >= 100");
    const double t = batch.horizon;
    const double dn = static_cast<double>(n);

    double s1 = 0.0, s2 = 0.0;
    for (long k : batch.counts) {
        s1 += static_cast<double>(k);
        s2 += static_cast<double>(k) * static_cast<double>(k);
    }
    const double mean = s1 / dn;
    const double var = (s2 - dn * mean * mean) / (dn - 1.0);

    // Jackknife over leave-one-out estimates.
    double acc_mean = 0.0, acc_var = 0.0;
    std::vector<double> loo_mean(n), loo_var(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(batch.counts[i]);
        const double m_i = (s1 - x) / (dn - 1.0);
        const double v_i = (s2 - x * x - (dn - 1.0) * m_i * m_i) / (dn - 2.0);
        loo_mean[i] = m_i;
        loo_var[i] = v_i;
        acc_mean += m_i;
        acc_var += v_i;
    }
    acc_mean /= dn;
    acc_var /= dn;
    double se_mean2 = 0.0, se_var2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        se_mean2 += (loo_mean[i] - acc_mean) * (loo_mean[i] - acc_mean);
        se_var2 += (loo_var[i] - acc_var) * (loo_var[i] - acc_var);
    }
    se_mean2 *= (dn - 1.0) / dn;
    se_var2 *= (dn - 1.0) / dn;

    EmpiricalCumulants out;
    out.kappa1_hat = mean / t;
    out.kappa2_hat = var / t;
    out.se1 = std::sqrt(se_mean2) / t;
    out.se2 = std::sqrt(se_var2) / t;
    return out;
}

}  // namespace fcs
