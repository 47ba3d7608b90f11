#include "fcs/gaussian.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

#include "fcs/combinatorics.hpp"

namespace fcs {

namespace {

// The theta trace formula runs over both quadratures of the counted mode, so
// each quadrature carries half of the channel rate.
constexpr double kQuadratureWeight = 0.5;

RMatrix counted_block(const GaussianModel& model, int channel, double value) {
    const GaussianChannel& c = model.channel(channel);
    RMatrix m = RMatrix::Zero(model.phase_dim(), model.phase_dim());
    m(2 * c.mode_index, 2 * c.mode_index) = value;
    m(2 * c.mode_index + 1, 2 * c.mode_index + 1) = value;
    return m;
}

double f_value(const GaussianChannel& c, int order, bool plus) {
    if (order == 0) return 0.0;
    const double sign = (order % 2 == 0) ? 1.0 : -1.0;
    return sign * c.gamma + (plus ? c.gamma_bar : -c.gamma_bar);
}

// Weighted F matrices used by every solver below.
RMatrix f_plus_weighted(const GaussianModel& model, int channel, int order) {
    return counted_block(model, channel,
                         kQuadratureWeight * f_value(model.channel(channel), order, true));
}

RMatrix f_minus_weighted(const GaussianModel& model, int channel, int order) {
    return counted_block(model, channel,
                         kQuadratureWeight * f_value(model.channel(channel), order, false));
}

// Finite-s counting functions f_(+/-)(s) = gamma (e^{-s} - 1) +/- gamma_bar (e^s - 1).
double f_value_at(const GaussianChannel& c, double s, bool plus) {
    const double em = std::expm1(-s);
    const double ep = std::expm1(s);
    return c.gamma * em + (plus ? c.gamma_bar * ep : -c.gamma_bar * ep);
}

}  // namespace

GaussianModel::GaussianModel(int n_modes, RMatrix drift, RMatrix diffusion,
                             std::vector<GaussianChannel> channels)
    : n_modes_(n_modes), drift_(std::move(drift)), diffusion_(std::move(diffusion)),
      channels_(std::move(channels)) {
    if (n_modes_ < 1) throw std::invalid_argument("GaussianModel: need at least one mode");
    const int d = phase_dim();
    if (drift_.rows() != d || drift_.cols() != d)
        throw dimension_error("GaussianModel: drift must be 2N x 2N");
    if (diffusion_.rows() != d || diffusion_.cols() != d)
        throw dimension_error("GaussianModel: diffusion must be 2N x 2N");
    const double dscale = std::max(1.0, diffusion_.norm());
    if ((diffusion_ - diffusion_.transpose()).norm() > 1e-10 * dscale)
        throw std::invalid_argument("GaussianModel: diffusion not symmetric");
    Eigen::SelfAdjointEigenSolver<RMatrix> es(diffusion_);
    if (es.eigenvalues().minCoeff() < -1e-10 * dscale)
        throw std::invalid_argument("GaussianModel: diffusion not positive semidefinite");
    for (const GaussianChannel& c : channels_) {
        if (c.mode_index < 0 || c.mode_index >= n_modes_)
            throw std::invalid_argument("GaussianModel: channel mode index out of range");
        if (c.gamma < 0.0 || c.gamma_bar < 0.0)
            throw std::invalid_argument("GaussianModel: negative rate");
    }
}

const GaussianChannel& GaussianModel::channel(int i) const {
    if (i < 0 || i >= static_cast<int>(channels_.size()))
        throw std::invalid_argument("GaussianModel: invalid channel index");
    return channels_[static_cast<std::size_t>(i)];
}

bool GaussianModel::stable() const {
    Eigen::EigenSolver<RMatrix> es(drift_);
    return es.eigenvalues().real().minCoeff() > 0.0;
}

RMatrix lyapunov_solve(const RMatrix& a, const RMatrix& q) {
    const int n = static_cast<int>(a.rows());
    if (a.cols() != n || q.rows() != n || q.cols() != n)
        throw dimension_error("lyapunov_solve: dimension mismatch");
    if ((q - q.transpose()).norm() > 1e-9 * std::max(1.0, q.norm()))
        throw std::invalid_argument("lyapunov_solve: Q not symmetric");
    Eigen::EigenSolver<RMatrix> es(a);
    if (es.eigenvalues().real().minCoeff() <= 0.0)
        throw instability_error("lyapunov_solve: drift not stable");

    const RMatrix id = RMatrix::Identity(n, n);
    RMatrix big = Eigen::kroneckerProduct(id, a).eval();
    big += Eigen::kroneckerProduct(a, id).eval();
    Eigen::PartialPivLU<RMatrix> lu(big);
    Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(q.data(), q.size());
    Eigen::VectorXd xv = lu.solve(rhs);
    RMatrix x = Eigen::Map<const RMatrix>(xv.data(), n, n);
    x = 0.5 * (x + x.transpose()).eval();

    const double resid = (a * x + x * a.transpose() + q).norm();
    const double scale = a.norm() * x.norm() + q.norm();
    if (resid > 1e-10 * std::max(1.0, scale))
        throw solve_error("lyapunov_solve: residual above tolerance");
    return x;
}

BiasMatrices f_matrices(const GaussianModel& model, int channel, int order) {
    if (order < 0) throw std::invalid_argument("f_matrices: negative order");
    const GaussianChannel& c = model.channel(channel);
    return BiasMatrices{order, counted_block(model, channel, f_value(c, order, true)),
                        counted_block(model, channel, f_value(c, order, false))};
}

SigmaHierarchy sigma_hierarchy(const GaussianModel& model, int channel, int n_max) {
    if (n_max < 0) throw std::invalid_argument("sigma_hierarchy: negative order");
    if (!model.stable()) throw instability_error("sigma_hierarchy: unstable drift");
    const RMatrix& a = model.drift();

    SigmaHierarchy h;
    h.orders.reserve(static_cast<std::size_t>(n_max) + 1);
    h.residuals.reserve(static_cast<std::size_t>(n_max) + 1);

    // Sigma^(0): unbiased stationary covariance, A S + S A^T - 2D = 0.
    RMatrix sigma0;
    try {
        sigma0 = lyapunov_solve(a, (-2.0 * model.diffusion()).eval());
    } catch (const solve_error& e) {
        throw solve_error(std::string("sigma_hierarchy: order 0 failed: ") + e.what());
    }
    h.orders.push_back(sigma0);
    h.residuals.push_back((a * sigma0 + sigma0 * a.transpose() - 2.0 * model.diffusion()).norm());

    for (int n = 1; n <= n_max; ++n) {
        // Source from the s-expansion of the stationary biased-covariance
        // equation (the finite-s form sits in riccati_theta): F_- couples
        // linearly to the lower orders, F_+ quadratically.
        RMatrix src = -f_plus_weighted(model, channel, n);
        for (int k = 1; k <= n; ++k) {
            const RMatrix fm = f_minus_weighted(model, channel, k);
            const RMatrix& lower = h.orders[static_cast<std::size_t>(n - k)];
            src += binomial(n, k) * (fm * lower + lower * fm);
        }
        for (int i = 0; i <= n - 1; ++i) {
            for (int j = 1; j <= n - i; ++j) {
                const int k = n - i - j;
                const RMatrix fp = f_plus_weighted(model, channel, j);
                src -= multinomial3(n, i, j, k) *
                       (h.orders[static_cast<std::size_t>(i)] * fp *
                        h.orders[static_cast<std::size_t>(k)]);
            }
        }
        src = 0.5 * (src + src.transpose()).eval();
        RMatrix sigma_n;
        try {
            sigma_n = lyapunov_solve(a, src);
        } catch (const solve_error& e) {
            std::ostringstream msg;
            msg << "sigma_hierarchy: order " << n << " failed: " << e.what();
            throw solve_error(msg.str());
        }
        h.residuals.push_back((a * sigma_n + sigma_n * a.transpose() + src).norm());
        h.orders.push_back(std::move(sigma_n));
    }
    return h;
}

double gaussian_cumulant(const GaussianModel& model, int channel, int n,
                         const SigmaHierarchy& hierarchy) {
    if (n < 1) throw std::invalid_argument("gaussian_cumulant: order must be >= 1");
    if (static_cast<int>(hierarchy.orders.size()) < n)
        throw std::invalid_argument("gaussian_cumulant: insufficient hierarchy depth");
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) {
        acc += binomial(n, k) *
               (f_plus_weighted(model, channel, k) * hierarchy.orders[static_cast<std::size_t>(n - k)])
                   .trace();
    }
    acc -= f_minus_weighted(model, channel, n).trace();
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    return 0.5 * sign * acc;
}

double gaussian_cumulant(const GaussianModel& model, int channel, int n) {
    return gaussian_cumulant(model, channel, n, sigma_hierarchy(model, channel, n - 1));
}

double riccati_theta(const GaussianModel& model, int channel, double s,
                     const RiccatiOptions& opts) {
    if (!model.stable()) throw instability_error("riccati_theta: unstable drift");
    const GaussianChannel& c = model.channel(channel);
    const RMatrix fp = counted_block(model, channel, kQuadratureWeight * f_value_at(c, s, true));
    const RMatrix fm = counted_block(model, channel, kQuadratureWeight * f_value_at(c, s, false));
    // 0 = (A + Fm) S + S (A + Fm)^T - S Fp S - Fp - 2D, theta = Tr{Fp S - Fm}/2,
    // with the half-rate quadrature weight folded into Fp/Fm.
    const RMatrix a_tilde = model.drift() + fm;
    const RMatrix q0 = -fp - 2.0 * model.diffusion();

    RMatrix sigma = lyapunov_solve(model.drift(), (-2.0 * model.diffusion()).eval());
    const double scale = std::max(1.0, q0.norm() + a_tilde.norm() * sigma.norm());
    for (int it = 0; it < opts.max_iter; ++it) {
        const RMatrix resid = a_tilde * sigma + sigma * a_tilde.transpose() -
                              sigma * fp * sigma + q0;
        if (resid.norm() <= opts.tol * scale) {
            const double theta = 0.5 * ((fp * sigma).trace() - fm.trace());
            return theta;
        }
        const RMatrix a_newton = a_tilde - sigma * fp;
        const RMatrix q_newton = q0 + sigma * fp * sigma;
        try {
            sigma = lyapunov_solve(a_newton, (0.5 * (q_newton + q_newton.transpose())).eval());
        } catch (const std::runtime_error& e) {
            std::ostringstream msg;
            msg << "riccati_theta: Newton step failed at s=" << s << " (" << e.what() << ")";
            throw solve_error(msg.str());
        }
    }
    std::ostringstream msg;
    const RMatrix resid =
        a_tilde * sigma + sigma * a_tilde.transpose() - sigma * fp * sigma + q0;
    msg << "riccati_theta: no convergence at s=" << s << ", residual " << resid.norm();
    throw solve_error(msg.str());
}

double squeezing_from_kappa1(double kappa1, double gamma) {
    if (kappa1 < 0.0) throw std::invalid_argument("squeezing_from_kappa1: kappa1 must be >= 0");
    if (gamma <= 0.0) throw std::invalid_argument("squeezing_from_kappa1: gamma must be > 0");
    return 1.0 / (1.0 + std::sqrt(2.0 * kappa1 / (gamma + 2.0 * kappa1)));
}

}  // namespace fcs
