#pragma once

#include <vector>

#include "fcs/gaussian.hpp"
#include "fcs/liouville.hpp"

namespace fcs {

// Two interacting spins-1/2, H = sx sx + h (sz_1 + sz_2), each pumped by
// sigma_plus at rate gamma.
LindbladModel two_spins_same(double h, double gamma);

// Same but with opposite susceptibilities, H = sx sx + h (sz_1 - sz_2).
LindbladModel two_spins_inverse(double h, double gamma);

// H = sx sx with a single global channel L = sigma_plus sigma_plus.
LindbladModel two_spins_global(double gamma);

// Two modes coupled by a squeezing interaction, Fock-truncated at `cutoff`
// levels per mode, each damped into a zero-temperature bath.
LindbladModel squeezed_pair(double omega, double g, double gamma1, double gamma2, int cutoff);

// Phase-space representation of the same system.
GaussianModel squeezed_pair_gaussian(double omega, double g, double gamma1, double gamma2);

// Smallest cutoff at which the topmost Fock level of the steady state stays
// below pop_tol. Searches even cutoffs starting at 4.
int adaptive_fock_cutoff(double omega, double g, double gamma1, double gamma2,
                         double pop_tol = 1e-8, int max_cutoff = 30);

// Driven Kerr oscillator, mean-field level.
struct KerrParams {
    double delta;      // detuning omega - omega_p
    double gamma;      // damping rate, > 0
    double g;          // nonlinear coupling, > 0
    double intensity;  // |F|^2 >= 0
};

struct KerrBranches {
    std::vector<double> roots;   // real solutions n of the cubic, ascending
    std::vector<bool> stable;    // per-root Hurwitz flag
    double n_minus;              // stability bounds; NaN when no unstable window
    double n_plus;
};

// Real roots of [(delta - 2 g n)^2 + gamma^2/4] n = I with stability
// classification against the n_-/n_+ window.
KerrBranches kerr_branches(const KerrParams& p);

// gamma * n for every stable mean-field root: two values inside the bistable
// window, one outside.
std::vector<double> kerr_kappa1(const KerrParams& p);

}  // namespace fcs
