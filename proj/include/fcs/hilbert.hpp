#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

#include "fcs/errors.hpp"

namespace fcs {

using Complex = std::complex<double>;
using Matrix  = Eigen::MatrixXcd;
using Vector  = Eigen::VectorXcd;

// Tensor-factor structure of a composite finite-dimensional Hilbert space.
// Subsystem 0 is the leftmost Kronecker factor. Qubit basis ordering puts
// |up> at index 0; Fock index equals the excitation number.
class SpaceLayout {
public:
    explicit SpaceLayout(std::vector<int> dims);
    SpaceLayout(std::initializer_list<int> dims) : SpaceLayout(std::vector<int>(dims)) {}

    const std::vector<int>& dims() const { return dims_; }
    int subsystems() const { return static_cast<int>(dims_.size()); }
    int dim(int site) const { return dims_.at(static_cast<std::size_t>(site)); }
    int total_dim() const { return total_dim_; }

    friend bool operator==(const SpaceLayout& a, const SpaceLayout& b) {
        return a.dims_ == b.dims_;
    }
    friend bool operator!=(const SpaceLayout& a, const SpaceLayout& b) { return !(a == b); }

private:
    std::vector<int> dims_;
    int total_dim_{0};
};

// Dense operator on a composite space. Immutable after construction.
class Operator {
public:
    Operator(SpaceLayout layout, Matrix m);

    const SpaceLayout& layout() const { return layout_; }
    const Matrix& matrix() const { return mat_; }
    int dim() const { return static_cast<int>(mat_.rows()); }

    Operator adjoint() const { return Operator(layout_, mat_.adjoint()); }
    Complex trace() const { return mat_.trace(); }
    double norm() const { return mat_.norm(); }
    bool is_hermitian(double tol = 1e-10) const;

    Operator operator+(const Operator& rhs) const;
    Operator operator-(const Operator& rhs) const;
    Operator operator*(const Operator& rhs) const;
    friend Operator operator*(Complex c, const Operator& op) {
        return Operator(op.layout_, c * op.mat_);
    }
    friend Operator operator*(double c, const Operator& op) {
        return Operator(op.layout_, c * op.mat_);
    }

private:
    SpaceLayout layout_;
    Matrix mat_;
};

enum class Pauli { X, Y, Z, Plus, Minus };

Operator identity(const SpaceLayout& layout);

// Kronecker product of one single-site operator per subsystem, in layout order.
Operator tensor(const std::vector<Operator>& factors, const SpaceLayout& layout);

// Single-site Pauli embedded by tensoring identities elsewhere.
// sigma_plus = (sigma_x + i sigma_y)/2 maps |down> to |up>.
Operator pauli(Pauli axis, int site, const SpaceLayout& layout);

// Truncated annihilation operator: sqrt(n) on the first superdiagonal.
Operator boson_annihilation(int cutoff);

// Tr(obs * state). The state need not have unit trace.
Complex expectation(const Operator& obs, const Operator& state);

// Unit-trace, Hermitian, positive (up to numerical tolerance) operator.
class DensityMatrix {
public:
    static DensityMatrix validated(Operator op, double trace_tol = 1e-10,
                                   double herm_tol = 1e-10, double pos_tol = 1e-9);
    static DensityMatrix pure(const Vector& psi, const SpaceLayout& layout);

    const Operator& op() const { return op_; }
    const Matrix& matrix() const { return op_.matrix(); }
    const SpaceLayout& layout() const { return op_.layout(); }

private:
    explicit DensityMatrix(Operator op) : op_(std::move(op)) {}
    Operator op_;
};

}  // namespace fcs
