#include "fcs/liouville.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fcs {

LindbladModel::LindbladModel(Operator hamiltonian, std::vector<Channel> channels,
                             std::string label)
    : hamiltonian_(std::move(hamiltonian)), channels_(std::move(channels)),
      label_(std::move(label)) {
    if (!hamiltonian_.is_hermitian(1e-10))
        throw std::invalid_argument("LindbladModel: Hamiltonian not Hermitian");
    for (const Channel& c : channels_) {
        if (c.l_op.layout() != hamiltonian_.layout())
            throw dimension_error("LindbladModel: channel layout mismatch");
        if (c.rate < 0.0)
            throw std::invalid_argument("LindbladModel: negative rate");
    }
}

const Channel& LindbladModel::channel(int i) const {
    if (i < 0 || i >= static_cast<int>(channels_.size()))
        throw std::invalid_argument("LindbladModel: invalid channel index");
    return channels_[static_cast<std::size_t>(i)];
}

Superoperator::Superoperator(SpaceLayout layout, Matrix m)
    : layout_(std::move(layout)), mat_(std::move(m)) {
    const int n2 = layout_.total_dim() * layout_.total_dim();
    if (mat_.rows() != n2 || mat_.cols() != n2)
        throw dimension_error("Superoperator: matrix size does not match layout");
}

Matrix Superoperator::apply(const Matrix& rho) const {
    const int n = hilbert_dim();
    if (rho.rows() != n || rho.cols() != n)
        throw dimension_error("Superoperator::apply: dimension mismatch");
    return unvectorize(mat_ * vectorize(rho), n);
}

Vector vectorize(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvectorize(const Vector& v, int n) {
    if (v.size() != static_cast<Eigen::Index>(n) * n)
        throw dimension_error("unvectorize: size mismatch");
    return Eigen::Map<const Matrix>(v.data(), n, n);
}

namespace {

Matrix left_mult(const Matrix& a) {
    const Matrix id = Matrix::Identity(a.rows(), a.cols());
    return Eigen::kroneckerProduct(id, a);
}

Matrix right_mult(const Matrix& a) {
    const Matrix id = Matrix::Identity(a.rows(), a.cols());
    return Eigen::kroneckerProduct(a.transpose(), id);
}

}  // namespace

Superoperator build_liouvillian(const LindbladModel& model) {
    const Complex i(0.0, 1.0);
    const Matrix& h = model.hamiltonian().matrix();
    Matrix w = -i * (left_mult(h) - right_mult(h));
    for (const Channel& c : model.channels()) {
        const Matrix& l = c.l_op.matrix();
        const Matrix ldl = (l.adjoint() * l).eval();
        w.noalias() += c.rate * Eigen::kroneckerProduct(l.conjugate(), l);
        w.noalias() -= (0.5 * c.rate) * left_mult(ldl);
        w.noalias() -= (0.5 * c.rate) * right_mult(ldl);
    }
    return Superoperator(model.layout(), std::move(w));
}

Matrix jump_superoperator(const LindbladModel& model, int channel) {
    const Channel& c = model.channel(channel);
    const Matrix& l = c.l_op.matrix();
    return c.rate * Eigen::kroneckerProduct(l.conjugate(), l).eval();
}

Superoperator biased_liouvillian(const LindbladModel& model, int channel, double s) {
    Superoperator w = build_liouvillian(model);
    Matrix m = w.matrix();
    m.noalias() += (std::exp(-s) - 1.0) * jump_superoperator(model, channel);
    return Superoperator(model.layout(), std::move(m));
}

namespace {

DensityMatrix state_from_vec(const Vector& v, int n) {
    Matrix rho = unvectorize(v, n);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const Complex tr = rho.trace();
    if (std::abs(tr) < 1e-12)
        throw solve_error("steady_states: nullspace vector has zero trace");
    rho /= tr;
    return DensityMatrix::validated(Operator(SpaceLayout({n}), rho), 1e-9, 1e-9, 1e-8);
}

// Re-attach the model layout after matrix-level work.
DensityMatrix with_layout(const DensityMatrix& dm, const SpaceLayout& layout) {
    return DensityMatrix::validated(Operator(layout, dm.matrix()), 1e-9, 1e-9, 1e-8);
}

}  // namespace

std::vector<DensityMatrix> steady_states(const Superoperator& w, const SteadyStateOptions& opts) {
    const int n = w.hilbert_dim();
    const int n2 = n * n;
    const Matrix& wm = w.matrix();

    int null_dim = 0;
    Vector last_singular_vector;
    {
        Eigen::VectorXd sv;
        Matrix v;
        if (n2 <= 400) {
            Eigen::JacobiSVD<Matrix> svd(wm, Eigen::ComputeThinV);
            sv = svd.singularValues();
            v = svd.matrixV();
        } else {
            Eigen::BDCSVD<Matrix> svd(wm, Eigen::ComputeThinV);
            sv = svd.singularValues();
            v = svd.matrixV();
        }
        const double smax = sv(0);
        for (int k = n2 - 1; k >= 0 && sv(k) < opts.null_tol * smax; --k) ++null_dim;
        if (null_dim == 0) throw solve_error("steady_states: empty nullspace");
        last_singular_vector = v.col(n2 - 1);
    }
    if (null_dim == 1)
        return {with_layout(state_from_vec(last_singular_vector, n), w.layout())};

    // Degenerate nullspace: build the spectral projector onto eigenvalue zero
    // and push every computational-basis seed through it. The projection is
    // the exact long-time (time-averaged) limit of the evolution.
    if (n2 > opts.degenerate_dim_cap)
        throw dimension_error("steady_states: degenerate nullspace beyond supported dimension");

    Eigen::ComplexEigenSolver<Matrix> right(wm);
    Eigen::ComplexEigenSolver<Matrix> left(wm.adjoint().eval());
    if (right.info() != Eigen::Success || left.info() != Eigen::Success)
        throw solve_error("steady_states: eigendecomposition failed");

    const double scale = wm.norm();
    const double zero_tol = opts.null_tol * scale;
    std::vector<int> ridx, lidx;
    for (int k = 0; k < n2; ++k) {
        if (std::abs(right.eigenvalues()(k)) < zero_tol) ridx.push_back(k);
        if (std::abs(left.eigenvalues()(k)) < zero_tol) lidx.push_back(k);
    }
    if (ridx.empty()) throw solve_error("steady_states: empty nullspace");
    if (ridx.size() != lidx.size())
        throw solve_error("steady_states: left/right zero-mode count mismatch");

    const int d = static_cast<int>(ridx.size());
    Matrix r(n2, d), lv(n2, d);
    for (int k = 0; k < d; ++k) {
        r.col(k) = right.eigenvectors().col(ridx[static_cast<std::size_t>(k)]);
        lv.col(k) = left.eigenvectors().col(lidx[static_cast<std::size_t>(k)]);
    }
    const Matrix overlap = lv.adjoint() * r;
    Eigen::FullPivLU<Matrix> lu(overlap);
    if (!lu.isInvertible())
        throw solve_error("steady_states: defective zero eigenspace");
    // P0 = R (L^dag R)^{-1} L^dag applied to each seed.
    std::vector<DensityMatrix> found;
    for (int k = 0; k < n; ++k) {
        Matrix seed = Matrix::Zero(n, n);
        seed(k, k) = 1.0;
        const Vector projected = r * lu.solve(lv.adjoint() * vectorize(seed));
        DensityMatrix cand = with_layout(state_from_vec(projected, n), w.layout());
        bool duplicate = false;
        for (const DensityMatrix& s : found) {
            if ((s.matrix() - cand.matrix()).norm() < opts.dedupe_tol) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) found.push_back(std::move(cand));
    }
    // Deterministic order: lexicographic in the real diagonal.
    std::sort(found.begin(), found.end(), [n](const DensityMatrix& a, const DensityMatrix& b) {
        for (int k = 0; k < n; ++k) {
            const double da = a.matrix()(k, k).real();
            const double db = b.matrix()(k, k).real();
            if (std::abs(da - db) > 1e-12) return da < db;
        }
        return false;
    });
    return found;
}

namespace {

// Dormand-Prince 5(4) step on y' = f(y). Returns 5th-order solution and the
// embedded error estimate.
struct Rk45Step {
    Vector y5;
    double err;  // scaled error norm
};

template <typename Deriv>
Rk45Step rk45_step(const Deriv& f, const Vector& y, double dt, double atol, double rtol) {
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                        e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

    const Vector k1 = f(y);
    const Vector k2 = f(y + dt * (a21 * k1));
    const Vector k3 = f(y + dt * (a31 * k1 + a32 * k2));
    const Vector k4 = f(y + dt * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 = f(y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vector k6 = f(y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Vector y5 = y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vector k7 = f(y5);
    Vector y4 = y + dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double scale = atol + rtol * std::max(y.norm(), y5.norm());
    const double err = (y5 - y4).norm() / scale;
    return {std::move(y5), err};
}

template <typename Deriv>
Vector integrate_rk45(const Deriv& f, Vector y, double t_final, double dt0, double atol,
                      double rtol) {
    if (t_final < 0.0) throw std::invalid_argument("integrate_rk45: negative horizon");
    if (dt0 <= 0.0) throw std::invalid_argument("integrate_rk45: dt must be positive");
    double t = 0.0;
    double dt = std::min(dt0, t_final > 0.0 ? t_final : dt0);
    const double dt_min = 1e-14 * std::max(1.0, t_final);
    while (t < t_final) {
        dt = std::min(dt, t_final - t);
        const Rk45Step step = rk45_step(f, y, dt, atol, rtol);
        // Non-finite error estimates (diverging state, zero scale) count as
        // rejections so dt keeps shrinking toward the underflow guard.
        const double err = std::isfinite(step.err) ? step.err
                                                   : std::numeric_limits<double>::max();
        if (err <= 1.0) {
            y = step.y5;
            t += dt;
        }
        const double grow = 0.9 * std::pow(std::max(err, 1e-12), -0.2);
        dt *= std::clamp(grow, 0.2, 5.0);
        if (dt < dt_min) throw solve_error("evolve: step-size underflow");
    }
    return y;
}

}  // namespace

DensityMatrix evolve(const Superoperator& w, const DensityMatrix& rho0, double t_final,
                     double dt0, const EvolveOptions& opts) {
    if (rho0.layout() != w.layout())
        throw dimension_error("evolve: state layout does not match superoperator");
    if (t_final == 0.0) return rho0;
    const int n = w.hilbert_dim();
    const Matrix& wm = w.matrix();
    auto deriv = [&wm](const Vector& y) -> Vector { return wm * y; };
    Vector y = integrate_rk45(deriv, vectorize(rho0.matrix()), t_final, dt0, opts.abs_tol,
                              opts.rel_tol);
    Matrix rho = unvectorize(y, n);
    const double drift = std::abs(rho.trace() - 1.0);
    if (drift > opts.max_trace_drift)
        throw solve_error("evolve: trace drift exceeds tolerance");
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace();
    return DensityMatrix::validated(Operator(w.layout(), std::move(rho)), 1e-10, 1e-9, 1e-8);
}

double average_jump_rate(const LindbladModel& model, int channel, const DensityMatrix& rho0,
                         double t_transient, double t_average, double dt0,
                         const EvolveOptions& opts) {
    if (t_average <= 0.0) throw std::invalid_argument("average_jump_rate: t_average must be > 0");
    const Superoperator w = build_liouvillian(model);
    const Channel& c = model.channel(channel);
    const Matrix ldl = (c.l_op.matrix().adjoint() * c.l_op.matrix()).eval();
    const Vector obs = vectorize(Matrix(ldl.adjoint()));  // <L^dag L, rho> = obs^dag vec(rho)
    const int n = model.dim();
    const int n2 = n * n;
    const Matrix& wm = w.matrix();

    // Augmented system: last component accumulates gamma <L^dag L>.
    auto deriv = [&](const Vector& y) -> Vector {
        Vector dy(n2 + 1);
        dy.head(n2) = wm * y.head(n2);
        dy(n2) = c.rate * obs.dot(y.head(n2));
        return dy;
    };

    Vector y0(n2 + 1);
    y0.head(n2) = vectorize(rho0.matrix());
    y0(n2) = 0.0;
    Vector y = t_transient > 0.0
                   ? integrate_rk45(deriv, y0, t_transient, dt0, opts.abs_tol, opts.rel_tol)
                   : y0;
    y(n2) = 0.0;
    y = integrate_rk45(deriv, y, t_average, dt0, opts.abs_tol, opts.rel_tol);
    return y(n2).real() / t_average;
}

}  // namespace fcs
