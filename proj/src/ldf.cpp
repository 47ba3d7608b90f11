#include "fcs/ldf.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace fcs {

namespace {

// Ties on the real part (degenerate peripheral spectra) resolve toward the
// eigenvalue with the smallest imaginary part.
Complex pick_rightmost(const Complex& a, const Complex& b, double tie_tol) {
    if (a.real() > b.real() + tie_tol) return a;
    if (b.real() > a.real() + tie_tol) return b;
    return std::abs(a.imag()) <= std::abs(b.imag()) ? a : b;
}

Complex rightmost_dense(const Matrix& m) {
    Eigen::ComplexEigenSolver<Matrix> es(m, false);
    if (es.info() != Eigen::Success)
        throw solve_error("theta_spectral: dense eigensolve failed");
    const double tie_tol = 1e-10 * std::max(1.0, m.norm());
    Complex best = es.eigenvalues()(0);
    for (int k = 1; k < es.eigenvalues().size(); ++k)
        best = pick_rightmost(best, es.eigenvalues()(k), tie_tol);
    return best;
}

// Upper bound on Re(lambda) from Gershgorin discs.
double gershgorin_real_bound(const Matrix& m) {
    double bound = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m.rows(); ++i) {
        double radius = 0.0;
        for (int j = 0; j < m.cols(); ++j)
            if (j != i) radius += std::abs(m(i, j));
        bound = std::max(bound, m(i, i).real() + radius);
    }
    return bound;
}

struct RitzPair {
    Complex value;
    Vector vector;
};

// Shift-invert Arnoldi around a real shift to the right of the spectrum.
// Returns the rightmost converged Ritz pair, or nothing on failure.
bool arnoldi_rightmost(const Matrix& m, double sigma, int krylov, std::uint64_t seed,
                       double resid_tol, RitzPair& out) {
    const int n = static_cast<int>(m.rows());
    krylov = std::min(krylov, n);
    Matrix shifted = m;
    shifted.diagonal().array() -= sigma;
    Eigen::PartialPivLU<Matrix> lu(shifted);

    std::mt19937_64 rng(seed);
    Vector v(n);
    for (int i = 0; i < n; ++i) {
        const double a = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double b = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        v(i) = Complex(2.0 * a - 1.0, 2.0 * b - 1.0);
    }
    v.normalize();

    Matrix basis(n, krylov + 1);
    basis.col(0) = v;
    Matrix hess = Matrix::Zero(krylov + 1, krylov);
    int k_eff = krylov;
    for (int j = 0; j < krylov; ++j) {
        Vector w = lu.solve(basis.col(j));
        for (int pass = 0; pass < 2; ++pass) {  // re-orthogonalize once
            for (int i = 0; i <= j; ++i) {
                const Complex hij = basis.col(i).dot(w);
                hess(i, j) += hij;
                w -= hij * basis.col(i);
            }
        }
        const double beta = w.norm();
        hess(j + 1, j) = beta;
        if (beta < 1e-13) {
            k_eff = j + 1;
            break;
        }
        basis.col(j + 1) = w / beta;
    }

    Eigen::ComplexEigenSolver<Matrix> small(hess.topLeftCorner(k_eff, k_eff), true);
    if (small.info() != Eigen::Success) return false;

    // Candidates sorted by Re(sigma + 1/mu), most positive first.
    std::vector<int> idx(static_cast<std::size_t>(k_eff));
    for (int k = 0; k < k_eff; ++k) idx[static_cast<std::size_t>(k)] = k;
    auto to_lambda = [&](int k) -> Complex {
        const Complex mu = small.eigenvalues()(k);
        if (std::abs(mu) < 1e-300) return Complex(-std::numeric_limits<double>::infinity(), 0);
        return sigma + 1.0 / mu;
    };
    const double scale = std::max(1.0, m.norm());
    const double tie_tol = 1e-10 * scale;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        const Complex la = to_lambda(a), lb = to_lambda(b);
        if (la.real() > lb.real() + tie_tol) return true;
        if (lb.real() > la.real() + tie_tol) return false;
        return std::abs(la.imag()) < std::abs(lb.imag());
    });
    for (int pick = 0; pick < std::min(k_eff, 4); ++pick) {
        const int k = idx[static_cast<std::size_t>(pick)];
        const Complex lambda = to_lambda(k);
        if (!std::isfinite(lambda.real())) continue;
        Vector x = basis.leftCols(k_eff) * small.eigenvectors().col(k);
        x.normalize();
        const double resid = (m * x - lambda * x).norm();
        if (resid <= resid_tol * scale) {
            out = {lambda, std::move(x)};
            return true;
        }
    }
    return false;
}

Complex rightmost_eigenvalue(const Matrix& m, const ThetaOptions& opts) {
    const int n = static_cast<int>(m.rows());
    if (n <= opts.full_solve_max) return rightmost_dense(m);

    const double scale = std::max(1.0, m.norm() / std::sqrt(static_cast<double>(n)));
    double sigma = gershgorin_real_bound(m) + 0.05 * scale;
    RitzPair pair;
    for (int attempt = 0; attempt < 4; ++attempt) {
        if (arnoldi_rightmost(m, sigma, 40 + 20 * attempt, opts.seed + attempt, 1e-11, pair))
            return pair.value;
        sigma += 0.5 * scale;  // retries move the shift away from near-singular territory
    }
    if (n <= opts.dim_cap) return rightmost_dense(m);
    throw solve_error("theta_spectral: dominant eigenvalue iteration failed");
}

}  // namespace

double theta_spectral(const LindbladModel& model, int channel, double s,
                      const ThetaOptions& opts) {
    if (model.liouville_dim() > opts.dim_cap) {
        std::ostringstream msg;
        msg << "theta_spectral: Liouville dimension " << model.liouville_dim()
            << " exceeds cap " << opts.dim_cap;
        throw dimension_error(msg.str());
    }
    const Superoperator ws = biased_liouvillian(model, channel, s);
    const Complex lambda = rightmost_eigenvalue(ws.matrix(), opts);
    if (std::abs(lambda.imag()) > opts.im_tol) {
        std::ostringstream msg;
        msg << "theta_spectral: dominant eigenvalue has imaginary part " << lambda.imag();
        throw solve_error(msg.str());
    }
    return lambda.real();
}

double theta_global_spins(double gamma, double s) {
    if (gamma <= 0.0) throw std::invalid_argument("theta_global_spins: gamma must be > 0");
    if (s >= 0.0) return 0.0;

    const Complex g2 = gamma * gamma;
    const Complex w = g2 - 16.0;
    const Complex radicand = 1728.0 * g2 * std::exp(-2.0 * s) - w * w * w;
    const Complex inner = std::sqrt(3.0) * std::sqrt(radicand) + 72.0 * gamma * std::exp(-s);
    const Complex f = gamma * std::pow(inner, 1.0 / 3.0);

    const double c23 = std::pow(3.0, 2.0 / 3.0);
    const double c13 = std::pow(3.0, 1.0 / 3.0);
    const Complex theta = (c23 * g2 * w + c13 * f * f - 3.0 * g2 * f) / (6.0 * gamma * f);
    if (std::abs(theta.imag()) > 1e-10 * std::max(1.0, std::abs(theta.real())))
        throw solve_error("theta_global_spins: branch produced a complex value");
    return theta.real();
}

ThetaCurve theta_curve(const LindbladModel& model, int channel,
                       const std::vector<double>& s_values, const ThetaOptions& opts) {
    ThetaCurve curve;
    curve.s_values = s_values;
    curve.model_tag = model.label();
    curve.channel_index = channel;
    curve.theta_values.reserve(s_values.size());
    for (double s : s_values) curve.theta_values.push_back(theta_spectral(model, channel, s, opts));
    return curve;
}

namespace {

class ThetaCache {
public:
    ThetaCache(const LindbladModel& model, int channel, const ThetaOptions& opts)
        : model_(model), channel_(channel), opts_(opts) {}

    double operator()(double s) {
        auto it = cache_.find(s);
        if (it != cache_.end()) return it->second;
        const double v = theta_spectral(model_, channel_, s, opts_);
        cache_.emplace(s, v);
        return v;
    }

private:
    const LindbladModel& model_;
    int channel_;
    ThetaOptions opts_;
    std::map<double, double> cache_;
};

// One-sided first derivative at 0, O(h^3) stencil plus one Richardson step.
double one_sided_derivative(ThetaCache& theta, double h, bool left) {
    auto d = [&](double hh) {
        if (left)
            return (11.0 * theta(0.0) - 18.0 * theta(-hh) + 9.0 * theta(-2.0 * hh) -
                    2.0 * theta(-3.0 * hh)) /
                   (6.0 * hh);
        return (-11.0 * theta(0.0) + 18.0 * theta(hh) - 9.0 * theta(2.0 * hh) +
                2.0 * theta(3.0 * hh)) /
               (6.0 * hh);
    };
    return (8.0 * d(h / 2.0) - d(h)) / 7.0;
}

double central_derivative(ThetaCache& theta, int m, double h) {
    auto d = [&](double hh) {
        switch (m) {
            case 1:
                return (theta(hh) - theta(-hh)) / (2.0 * hh);
            case 2:
                return (theta(hh) - 2.0 * theta(0.0) + theta(-hh)) / (hh * hh);
            case 3:
                return (theta(2.0 * hh) - 2.0 * theta(hh) + 2.0 * theta(-hh) -
                        theta(-2.0 * hh)) /
                       (2.0 * hh * hh * hh);
            case 4:
                return (theta(2.0 * hh) - 4.0 * theta(hh) + 6.0 * theta(0.0) -
                        4.0 * theta(-hh) + theta(-2.0 * hh)) /
                       (hh * hh * hh * hh);
            default:
                throw std::invalid_argument("cumulants_from_theta: order must be <= 4");
        }
    };
    return (4.0 * d(h / 2.0) - d(h)) / 3.0;
}

}  // namespace

ThetaCumulants cumulants_from_theta(const LindbladModel& model, int channel, int n, double step,
                                    const ThetaDerivativeOptions& opts) {
    if (n < 1 || n > 4)
        throw std::invalid_argument("cumulants_from_theta: order must be in 1..4");
    if (step <= 0.0) throw std::invalid_argument("cumulants_from_theta: step must be > 0");

    ThetaCache theta(model, channel, opts.theta);
    ThetaCumulants out;
    const double d_left = one_sided_derivative(theta, 4.0 * step, true);
    const double d_right = one_sided_derivative(theta, 4.0 * step, false);
    out.kappa1_left = -d_left;
    out.kappa1_right = -d_right;
    out.kink = std::abs(d_left - d_right) > opts.kink_tol;
    if (out.kink) return out;

    for (int m = 1; m <= n; ++m) {
        // Higher orders amplify eigensolver noise as h^-m; widen the stencil.
        const double h = (m <= 2) ? step : std::max(step, (m == 3) ? 2e-2 : 5e-2);
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        out.values.push_back(sign * central_derivative(theta, m, h));
    }
    return out;
}

}  // namespace fcs
