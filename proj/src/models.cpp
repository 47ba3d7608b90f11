#include "fcs/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fcs {

namespace {

LindbladModel two_spins(double h1, double h2, double gamma, const std::string& label) {
    if (gamma <= 0.0) throw std::invalid_argument("two_spins: gamma must be > 0");
    const SpaceLayout layout({2, 2});
    Operator ham = pauli(Pauli::X, 0, layout) * pauli(Pauli::X, 1, layout) +
                   h1 * pauli(Pauli::Z, 0, layout) + h2 * pauli(Pauli::Z, 1, layout);
    std::vector<Channel> channels{{pauli(Pauli::Plus, 0, layout), gamma},
                                  {pauli(Pauli::Plus, 1, layout), gamma}};
    return LindbladModel(std::move(ham), std::move(channels), label);
}

}  // namespace

LindbladModel two_spins_same(double h, double gamma) {
    std::ostringstream tag;
    tag << "two_spins_same(h=" << h << ",gamma=" << gamma << ")";
    return two_spins(h, h, gamma, tag.str());
}

LindbladModel two_spins_inverse(double h, double gamma) {
    std::ostringstream tag;
    tag << "two_spins_inverse(h=" << h << ",gamma=" << gamma << ")";
    return two_spins(h, -h, gamma, tag.str());
}

LindbladModel two_spins_global(double gamma) {
    if (gamma <= 0.0) throw std::invalid_argument("two_spins_global: gamma must be > 0");
    const SpaceLayout layout({2, 2});
    Operator ham = pauli(Pauli::X, 0, layout) * pauli(Pauli::X, 1, layout);
    Operator l = pauli(Pauli::Plus, 0, layout) * pauli(Pauli::Plus, 1, layout);
    std::ostringstream tag;
    tag << "two_spins_global(gamma=" << gamma << ")";
    return LindbladModel(std::move(ham), {{std::move(l), gamma}}, tag.str());
}

LindbladModel squeezed_pair(double omega, double g, double gamma1, double gamma2, int cutoff) {
    if (cutoff < 4) throw std::invalid_argument("squeezed_pair: cutoff must be >= 4");
    if (gamma1 < 0.0 || gamma2 < 0.0) throw std::invalid_argument("squeezed_pair: negative rate");
    const SpaceLayout layout({cutoff, cutoff});
    const Operator a_local = boson_annihilation(cutoff);
    const Operator id_local = identity(SpaceLayout({cutoff}));
    const Operator a1 = tensor({a_local, id_local}, layout);
    const Operator a2 = tensor({id_local, a_local}, layout);
    const Operator half = 0.5 * identity(layout);
    Operator ham = omega * (a1.adjoint() * a1 + half) + omega * (a2.adjoint() * a2 + half);
    const Operator coupling = a2 * a1;
    ham = ham + g * (coupling + coupling.adjoint());
    std::ostringstream tag;
    tag << "squeezed_pair(omega=" << omega << ",g=" << g << ",gamma1=" << gamma1
        << ",gamma2=" << gamma2 << ",cutoff=" << cutoff << ")";
    return LindbladModel(std::move(ham), {{a1, gamma1}, {a2, gamma2}}, tag.str());
}

GaussianModel squeezed_pair_gaussian(double omega, double g, double gamma1, double gamma2) {
    RMatrix a(4, 4);
    a << gamma1 / 2, -omega, 0, g,
         omega, gamma1 / 2, g, 0,
         0, g, gamma2 / 2, -omega,
         g, 0, omega, gamma2 / 2;
    RMatrix d = RMatrix::Zero(4, 4);
    d(0, 0) = d(1, 1) = gamma1 / 2;
    d(2, 2) = d(3, 3) = gamma2 / 2;
    GaussianModel model(2, std::move(a), std::move(d),
                        {{0, gamma1, 0.0}, {1, gamma2, 0.0}});
    if (!model.stable())
        throw instability_error("squeezed_pair_gaussian: unstable parameters");
    return model;
}

int adaptive_fock_cutoff(double omega, double g, double gamma1, double gamma2, double pop_tol,
                         int max_cutoff) {
    for (int cutoff = 4; cutoff <= max_cutoff; cutoff += 2) {
        const LindbladModel model = squeezed_pair(omega, g, gamma1, gamma2, cutoff);
        const Superoperator w = build_liouvillian(model);
        const DensityMatrix rho = steady_states(w).front();
        // Population of the top level of either mode.
        double top = 0.0;
        for (int n1 = 0; n1 < cutoff; ++n1) {
            for (int n2 = 0; n2 < cutoff; ++n2) {
                if (n1 != cutoff - 1 && n2 != cutoff - 1) continue;
                const int idx = n1 * cutoff + n2;
                top += rho.matrix()(idx, idx).real();
            }
        }
        if (top < pop_tol) return cutoff;
    }
    throw solve_error("adaptive_fock_cutoff: no converged cutoff below cap");
}

namespace {

// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 = 0, c3 != 0, with Newton polish.
std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0) {
    const double a = c2 / c3, b = c1 / c3, c = c0 / c3;
    // Depressed form t^3 + p t + q with x = t - a/3.
    const double p = b - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    const double disc = -4.0 * p * p * p - 27.0 * q * q;

    std::vector<double> roots;
    if (disc > 0.0) {
        // Three distinct real roots: trigonometric form.
        const double m = 2.0 * std::sqrt(-p / 3.0);
        const double phi = std::acos(std::clamp(3.0 * q / (p * m), -1.0, 1.0)) / 3.0;
        for (int k = 0; k < 3; ++k)
            roots.push_back(m * std::cos(phi - 2.0 * M_PI * k / 3.0) - a / 3.0);
    } else {
        // One real root: Cardano.
        const double u = -q / 2.0;
        const double v = std::sqrt(std::max(q * q / 4.0 + p * p * p / 27.0, 0.0));
        const double t = std::cbrt(u + v) + std::cbrt(u - v);
        roots.push_back(t - a / 3.0);
    }
    for (double& x : roots) {
        for (int it = 0; it < 3; ++it) {
            const double f = ((c3 * x + c2) * x + c1) * x + c0;
            const double df = (3.0 * c3 * x + 2.0 * c2) * x + c1;
            if (df != 0.0) x -= f / df;
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace

KerrBranches kerr_branches(const KerrParams& p) {
    if (p.gamma <= 0.0 || p.g <= 0.0)
        throw std::invalid_argument("kerr_branches: gamma and g must be > 0");
    if (p.intensity < 0.0) throw std::invalid_argument("kerr_branches: negative intensity");

    KerrBranches out;
    const double window_disc = p.delta * p.delta - 0.75 * p.gamma * p.gamma;
    if (window_disc >= 0.0) {
        out.n_minus = (2.0 * p.delta - std::sqrt(window_disc)) / (6.0 * p.g);
        out.n_plus = (2.0 * p.delta + std::sqrt(window_disc)) / (6.0 * p.g);
    } else {
        out.n_minus = std::numeric_limits<double>::quiet_NaN();
        out.n_plus = std::numeric_limits<double>::quiet_NaN();
    }

    if (p.intensity == 0.0) {
        out.roots = {0.0};
    } else {
        // [(delta - 2 g n)^2 + gamma^2/4] n = I
        out.roots = cubic_real_roots(4.0 * p.g * p.g, -4.0 * p.delta * p.g,
                                     p.delta * p.delta + 0.25 * p.gamma * p.gamma,
                                     -p.intensity);
    }
    out.stable.reserve(out.roots.size());
    for (double n : out.roots) {
        const bool unstable = window_disc >= 0.0 && n > out.n_minus && n < out.n_plus;
        out.stable.push_back(!unstable);
    }
    return out;
}

std::vector<double> kerr_kappa1(const KerrParams& p) {
    const KerrBranches br = kerr_branches(p);
    std::vector<double> values;
    for (std::size_t k = 0; k < br.roots.size(); ++k)
        if (br.stable[k]) values.push_back(p.gamma * br.roots[k]);
    return values;
}

}  // namespace fcs
