#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fcs/hilbert.hpp"

namespace fcs {

// One dissipation channel: Liouville operator L and rate gamma >= 0.
struct Channel {
    Operator l_op;
    double rate;
};

// Hamiltonian plus dissipation channels on a shared layout. Immutable.
class LindbladModel {
public:
    LindbladModel(Operator hamiltonian, std::vector<Channel> channels, std::string label = "");

    const Operator& hamiltonian() const { return hamiltonian_; }
    const std::vector<Channel>& channels() const { return channels_; }
    const Channel& channel(int i) const;
    const SpaceLayout& layout() const { return hamiltonian_.layout(); }
    int dim() const { return hamiltonian_.dim(); }
    int liouville_dim() const { return dim() * dim(); }
    const std::string& label() const { return label_; }

private:
    Operator hamiltonian_;
    std::vector<Channel> channels_;
    std::string label_;
};

// Matrix acting on column-vectorized operators: vec(A X B) = (B^T (x) A) vec(X).
class Superoperator {
public:
    Superoperator(SpaceLayout layout, Matrix m);

    const Matrix& matrix() const { return mat_; }
    const SpaceLayout& layout() const { return layout_; }
    int hilbert_dim() const { return layout_.total_dim(); }

    // unvec(W vec(rho))
    Matrix apply(const Matrix& rho) const;

private:
    SpaceLayout layout_;
    Matrix mat_;
};

Vector vectorize(const Matrix& m);
Matrix unvectorize(const Vector& v, int n);

// W[rho] = -i[H, rho] + sum_i gamma_i (L rho L^dag - {L^dag L, rho}/2)
Superoperator build_liouvillian(const LindbladModel& model);

// gamma_i * (conj(L_i) (x) L_i), the vectorized recycling term of channel i.
Matrix jump_superoperator(const LindbladModel& model, int channel);

// W + gamma_i (e^{-s} - 1) L_i . L_i^dag
Superoperator biased_liouvillian(const LindbladModel& model, int channel, double s);

struct SteadyStateOptions {
    double null_tol = 1e-9;    // relative to the largest singular value
    double dedupe_tol = 1e-7;  // Frobenius distance between distinct fixed points
    int degenerate_dim_cap = 2048;
};

// Nullspace of W, post-processed into trace-one Hermitian fixed points.
// Degenerate nullspaces yield the stationary states reached from
// computational-basis seeds under the zero-eigenvalue spectral projection.
std::vector<DensityMatrix> steady_states(const Superoperator& w,
                                         const SteadyStateOptions& opts = {});

struct EvolveOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_trace_drift = 1e-8;
};

// Adaptive 4th/5th-order integration of vec(rho_dot) = W vec(rho).
DensityMatrix evolve(const Superoperator& w, const DensityMatrix& rho0, double t_final,
                     double dt0, const EvolveOptions& opts = {});

// Time-averaged jump rate gamma <L^dag L> over [t_transient, t_transient + t_average],
// starting from rho0. Quadrature rides along inside the adaptive integrator.
double average_jump_rate(const LindbladModel& model, int channel, const DensityMatrix& rho0,
                         double t_transient, double t_average, double dt0 = 1e-3,
                         const EvolveOptions& opts = {});

}  // namespace fcs
