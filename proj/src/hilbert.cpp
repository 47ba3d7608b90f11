#include "fcs/hilbert.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <numeric>
#include <sstream>

namespace fcs {

SpaceLayout::SpaceLayout(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw std::invalid_argument("SpaceLayout: no subsystems");
    total_dim_ = 1;
    for (int d : dims_) {
        if (d < 2) throw std::invalid_argument("SpaceLayout: local dimension must be >= 2");
        total_dim_ *= d;
    }
}

Operator::Operator(SpaceLayout layout, Matrix m) : layout_(std::move(layout)), mat_(std::move(m)) {
    if (mat_.rows() != mat_.cols())
        throw dimension_error("Operator: matrix must be square");
    if (mat_.rows() != layout_.total_dim())
        throw dimension_error("Operator: matrix size does not match layout");
}

bool Operator::is_hermitian(double tol) const {
    return (mat_ - mat_.adjoint()).norm() <= tol * std::max(1.0, mat_.norm());
}

namespace {

void check_same_layout(const Operator& a, const Operator& b, const char* what) {
    if (a.layout() != b.layout()) {
        std::ostringstream msg;
        msg << what << ": layout mismatch";
        throw dimension_error(msg.str());
    }
}

}  // namespace

Operator Operator::operator+(const Operator& rhs) const {
    check_same_layout(*this, rhs, "Operator::operator+");
    return Operator(layout_, mat_ + rhs.mat_);
}

Operator Operator::operator-(const Operator& rhs) const {
    check_same_layout(*this, rhs, "Operator::operator-");
    return Operator(layout_, mat_ - rhs.mat_);
}

Operator Operator::operator*(const Operator& rhs) const {
    check_same_layout(*this, rhs, "Operator::operator*");
    return Operator(layout_, mat_ * rhs.mat_);
}

Operator identity(const SpaceLayout& layout) {
    return Operator(layout, Matrix::Identity(layout.total_dim(), layout.total_dim()));
}

Operator tensor(const std::vector<Operator>& factors, const SpaceLayout& layout) {
    if (static_cast<int>(factors.size()) != layout.subsystems())
        throw dimension_error("tensor: need exactly one factor per subsystem");
    Matrix acc = Matrix::Identity(1, 1);
    for (int site = 0; site < layout.subsystems(); ++site) {
        const Operator& f = factors[static_cast<std::size_t>(site)];
        if (f.dim() != layout.dim(site))
            throw dimension_error("tensor: factor does not match local dimension");
        acc = Eigen::kroneckerProduct(acc, f.matrix()).eval();
    }
    return Operator(layout, std::move(acc));
}

namespace {

Matrix pauli_matrix(Pauli axis) {
    Matrix m = Matrix::Zero(2, 2);
    const Complex i(0.0, 1.0);
    switch (axis) {
        case Pauli::X: m(0, 1) = 1.0; m(1, 0) = 1.0; break;
        case Pauli::Y: m(0, 1) = -i;  m(1, 0) = i;   break;
        case Pauli::Z: m(0, 0) = 1.0; m(1, 1) = -1.0; break;
        case Pauli::Plus:  m(0, 1) = 1.0; break;  // |up><down|
        case Pauli::Minus: m(1, 0) = 1.0; break;  // |down><up|
    }
    return m;
}

}  // namespace

Operator pauli(Pauli axis, int site, const SpaceLayout& layout) {
    if (site < 0 || site >= layout.subsystems())
        throw std::invalid_argument("pauli: site index out of range");
    if (layout.dim(site) != 2)
        throw std::invalid_argument("pauli: site is not a qubit");
    std::vector<Operator> factors;
    factors.reserve(static_cast<std::size_t>(layout.subsystems()));
    for (int k = 0; k < layout.subsystems(); ++k) {
        SpaceLayout local({layout.dim(k)});
        if (k == site) {
            factors.emplace_back(local, pauli_matrix(axis));
        } else {
            factors.push_back(identity(local));
        }
    }
    return tensor(factors, layout);
}

Operator boson_annihilation(int cutoff) {
    if (cutoff < 2) throw std::invalid_argument("boson_annihilation: cutoff must be >= 2");
    Matrix m = Matrix::Zero(cutoff, cutoff);
    for (int n = 1; n < cutoff; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
    return Operator(SpaceLayout({cutoff}), std::move(m));
}

Complex expectation(const Operator& obs, const Operator& state) {
    check_same_layout(obs, state, "expectation");
    return (obs.matrix() * state.matrix()).trace();
}

DensityMatrix DensityMatrix::validated(Operator op, double trace_tol, double herm_tol,
                                       double pos_tol) {
    if (std::abs(op.trace() - 1.0) > trace_tol)
        throw std::invalid_argument("DensityMatrix: trace differs from 1");
    if (!op.is_hermitian(herm_tol))
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(op.matrix());
    if (es.info() != Eigen::Success)
        throw solve_error("DensityMatrix: eigenvalue check failed");
    if (es.eigenvalues().minCoeff() < -pos_tol)
        throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    return DensityMatrix(std::move(op));
}

DensityMatrix DensityMatrix::pure(const Vector& psi, const SpaceLayout& layout) {
    if (psi.size() != layout.total_dim())
        throw dimension_error("DensityMatrix::pure: state size does not match layout");
    const double n2 = psi.squaredNorm();
    if (std::abs(n2 - 1.0) > 1e-10)
        throw std::invalid_argument("DensityMatrix::pure: state not normalized");
    Matrix rho = psi * psi.adjoint();
    return DensityMatrix(Operator(layout, std::move(rho)));
}

}  // namespace fcs
