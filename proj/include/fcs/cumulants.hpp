#pragma once

#include <vector>

#include "fcs/liouville.hpp"

namespace fcs {

// One order of the stationary biased-matrix hierarchy. Order 0 is a fixed
// point of W; every higher order is traceless and Hermitian.
struct HierarchyOrder {
    int order;
    Operator matrix;
    double residual;  // ||W[rho^(n)] + S_n||
};

struct HierarchySolveOptions {
    double residual_tol = 1e-8;
    double rank_tol = 1e-10;
};

// Inhomogeneous term S_n with d/dt rho^(n) = W[rho^(n)] + S_n, built from the
// lower orders 0..n-1.
Operator hierarchy_source(const LindbladModel& model, int channel, int n,
                          const std::vector<HierarchyOrder>& lower);

// Stationary hierarchy up to order n_max for the given fixed point: each
// order solves W x = -S_n in the trace-zero gauge, restricted to the
// orthogonal complement of the full nullspace.
std::vector<HierarchyOrder> solve_hierarchy(const LindbladModel& model, int channel, int n_max,
                                            const DensityMatrix& fixed_point,
                                            const HierarchySolveOptions& opts = {});

// kappa_n = gamma_i sum_{j<n} C(n,j) (-1)^j Tr{L^dag L rho^(j)}.
double cumulant(const LindbladModel& model, int channel, int n,
                const std::vector<HierarchyOrder>& hierarchy);

// (kappa_2 + kappa_1^2) / kappa_1 and kappa_2 / kappa_1 for a unique-phase
// model. Both throw quiet_phase_error when kappa_1 vanishes.
double fano(const LindbladModel& model, int channel);
double fano_standard(const LindbladModel& model, int channel);

struct CumulantResult {
    std::vector<double> values;  // kappa_1 .. kappa_n_max
    int channel_index;
    int fixed_point_index;
    std::vector<HierarchyOrder> hierarchy;
};

struct MultistableCumulants {
    std::vector<CumulantResult> per_fixed_point;  // sorted by kappa_1 ascending
    bool first_order_transition;
};

struct PerFixedPointOptions {
    SteadyStateOptions steady;
    HierarchySolveOptions solve;
};

// One CumulantResult per extremal fixed point; flags a first-order dynamical
// phase transition when the kappa_1 values disagree.
MultistableCumulants cumulants_per_fixed_point(const LindbladModel& model, int channel,
                                               int n_max,
                                               const PerFixedPointOptions& opts = {});

}  // namespace fcs
