#pragma once

#include <Eigen/Dense>

#include <vector>

#include "fcs/errors.hpp"

namespace fcs {

using RMatrix = Eigen::MatrixXd;

// Counted exchange rates of one mode: gamma for outgoing quanta, gamma_bar
// for incoming ones (zero for a zero-temperature bath).
struct GaussianChannel {
    int mode_index;
    double gamma;
    double gamma_bar;
};

// Linear (quadratic-Hamiltonian) bosonic network in phase space. Quadratures
// are ordered (x_1, p_1, x_2, p_2, ...); the vacuum covariance is the
// identity, so a mode damped at rate gamma has drift block (gamma/2) I and
// diffusion block (gamma/2) I.
class GaussianModel {
public:
    GaussianModel(int n_modes, RMatrix drift, RMatrix diffusion,
                  std::vector<GaussianChannel> channels);

    int n_modes() const { return n_modes_; }
    int phase_dim() const { return 2 * n_modes_; }
    const RMatrix& drift() const { return drift_; }
    const RMatrix& diffusion() const { return diffusion_; }
    const std::vector<GaussianChannel>& channels() const { return channels_; }
    const GaussianChannel& channel(int i) const;

    // True when -A is Hurwitz (all drift eigenvalues in the right half-plane).
    bool stable() const;

private:
    int n_modes_;
    RMatrix drift_;
    RMatrix diffusion_;
    std::vector<GaussianChannel> channels_;
};

// Solves A X + X A^T + Q = 0 for symmetric X via Kronecker vectorization.
RMatrix lyapunov_solve(const RMatrix& a, const RMatrix& q);

// s-derivatives of the counting matrices at s = 0, diagonal in the counted
// mode's 2x2 block: f_(+/-)^(n) = (-1)^n gamma +/- gamma_bar for n > 0,
// zero for n = 0.
struct BiasMatrices {
    int order;
    RMatrix f_plus;
    RMatrix f_minus;
};

BiasMatrices f_matrices(const GaussianModel& model, int channel, int order);

// Biased covariance expansion around s = 0.
struct SigmaHierarchy {
    std::vector<RMatrix> orders;     // Sigma^(0) ... Sigma^(n_max)
    std::vector<double> residuals;   // Lyapunov residual per order
};

SigmaHierarchy sigma_hierarchy(const GaussianModel& model, int channel, int n_max);

double gaussian_cumulant(const GaussianModel& model, int channel, int n,
                         const SigmaHierarchy& hierarchy);
double gaussian_cumulant(const GaussianModel& model, int channel, int n);

struct RiccatiOptions {
    int max_iter = 60;
    double tol = 1e-12;
};

// theta(s) from the stationary biased covariance, obtained by Newton
// iteration on the algebraic Riccati equation with Lyapunov inner solves,
// seeded at the unbiased covariance.
double riccati_theta(const GaussianModel& model, int channel, double s,
                     const RiccatiOptions& opts = {});

// Minimal quadrature from the first cumulant: 1 / (1 + sqrt(2 k1 / (gamma + 2 k1))).
double squeezing_from_kappa1(double kappa1, double gamma);

}  // namespace fcs
