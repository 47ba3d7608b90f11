#pragma once

#include <string>
#include <vector>

#include "fcs/liouville.hpp"

namespace fcs {

struct ThetaOptions {
    int dim_cap = 4096;        // largest Liouville dimension accepted
    int full_solve_max = 600;  // dense eigensolve below this, Arnoldi above
    double im_tol = 1e-8;      // tolerance on Im(theta)
    std::uint64_t seed = 0x9e3779b97f4a7c15ull;
};

// theta(s): eigenvalue of the biased generator with the most positive real
// part. Errors when the dominant eigenvalue carries an imaginary part beyond
// tolerance or the Liouville dimension exceeds the cap.
double theta_spectral(const LindbladModel& model, int channel, double s,
                      const ThetaOptions& opts = {});

// Closed-form theta(s) of the globally damped spin pair: positive branch for
// s < 0, identically zero for s >= 0. Complex intermediates, real result.
double theta_global_spins(double gamma, double s);

struct ThetaCurve {
    std::vector<double> s_values;
    std::vector<double> theta_values;
    std::string model_tag;
    int channel_index;
};

ThetaCurve theta_curve(const LindbladModel& model, int channel,
                       const std::vector<double>& s_values, const ThetaOptions& opts = {});

struct ThetaCumulants {
    bool kink;                   // left/right first derivatives disagree at s = 0
    std::vector<double> values;  // kappa_1..kappa_n when analytic, empty otherwise
    double kappa1_left;          // -d theta/ds at 0^-
    double kappa1_right;         // -d theta/ds at 0^+
};

struct ThetaDerivativeOptions {
    double kink_tol = 1e-4;
    ThetaOptions theta;
};

// kappa_m from central finite differences of theta at 0 with Richardson
// extrapolation (m <= 4). A detected non-analyticity switches the result to
// per-side first derivatives.
ThetaCumulants cumulants_from_theta(const LindbladModel& model, int channel, int n,
                                    double step = 1e-3, const ThetaDerivativeOptions& opts = {});

}  // namespace fcs
