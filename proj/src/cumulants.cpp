#include "fcs/cumulants.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fcs/combinatorics.hpp"

namespace fcs {

namespace {

// L^(m) applied to the hierarchy: gamma sum_{k<m} C(m,k) (-1)^{m-k} L rho^(k) L^dag.
Matrix biasing_term(const LindbladModel& model, int channel, int m,
                    const std::vector<HierarchyOrder>& orders) {
    const Channel& c = model.channel(channel);
    const Matrix& l = c.l_op.matrix();
    Matrix acc = Matrix::Zero(model.dim(), model.dim());
    for (int k = 0; k < m; ++k) {
        const double sign = ((m - k) % 2 == 0) ? 1.0 : -1.0;
        acc.noalias() += (binomial(m, k) * sign) *
                         (l * orders[static_cast<std::size_t>(k)].matrix.matrix() * l.adjoint());
    }
    return c.rate * acc;
}

void require_orders(const std::vector<HierarchyOrder>& orders, int up_to, const char* who) {
    if (static_cast<int>(orders.size()) < up_to + 1) {
        std::ostringstream msg;
        msg << who << ": missing hierarchy orders (need 0.." << up_to << ")";
        throw std::invalid_argument(msg.str());
    }
    for (int k = 0; k <= up_to; ++k)
        if (orders[static_cast<std::size_t>(k)].order != k)
            throw std::invalid_argument(std::string(who) + ": hierarchy orders out of sequence");
}

}  // namespace

Operator hierarchy_source(const LindbladModel& model, int channel, int n,
                          const std::vector<HierarchyOrder>& lower) {
    if (n < 1) throw std::invalid_argument("hierarchy_source: order must be >= 1");
    if (n > kMaxCumulantOrder) throw std::invalid_argument("hierarchy_source: order above 20");
    require_orders(lower, n - 1, "hierarchy_source");

    // S_n = L^(n)[.] - sum_{j<n} C(n,j) rho^(j) Tr{L^(n-j)[.]}
    Matrix src = biasing_term(model, channel, n, lower);
    for (int j = 0; j < n; ++j) {
        const Complex tr = biasing_term(model, channel, n - j, lower).trace();
        src.noalias() -= (binomial(n, j) * tr) * lower[static_cast<std::size_t>(j)].matrix.matrix();
    }
    return Operator(model.layout(), std::move(src));
}

std::vector<HierarchyOrder> solve_hierarchy(const LindbladModel& model, int channel, int n_max,
                                            const DensityMatrix& fixed_point,
                                            const HierarchySolveOptions& opts) {
    if (n_max < 0) throw std::invalid_argument("solve_hierarchy: negative order");
    if (n_max > kMaxCumulantOrder) throw std::invalid_argument("solve_hierarchy: order above 20");
    if (fixed_point.layout() != model.layout())
        throw dimension_error("solve_hierarchy: fixed point layout mismatch");

    const Superoperator w = build_liouvillian(model);
    const int n = model.dim();
    const int n2 = n * n;

    std::vector<HierarchyOrder> orders;
    orders.push_back(
        {0, fixed_point.op(), w.apply(fixed_point.matrix()).norm()});
    if (orders[0].residual > opts.residual_tol)
        throw solve_error("solve_hierarchy: supplied fixed point does not satisfy W[rho] = 0");
    if (n_max == 0) return orders;

    // Augmented system: W rows plus a weighted trace row. The minimum-norm
    // least-squares solution picks the representative orthogonal to the full
    // nullspace, which is what the per-fixed-point hierarchy needs.
    const double weight = std::max(w.matrix().norm() / n, 1.0);
    Matrix aug(n2 + 1, n2);
    aug.topRows(n2) = w.matrix();
    Matrix id = Matrix::Identity(n, n);
    aug.row(n2) = weight * vectorize(id).transpose();
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(aug);
    cod.setThreshold(opts.rank_tol);

    for (int order = 1; order <= n_max; ++order) {
        const Operator src = hierarchy_source(model, channel, order, orders);
        Vector rhs = Vector::Zero(n2 + 1);
        rhs.head(n2) = -vectorize(src.matrix());
        const Vector x = cod.solve(rhs);
        Matrix rho_n = unvectorize(x, n);
        rho_n = 0.5 * (rho_n + rho_n.adjoint()).eval();
        const double residual = (w.apply(rho_n) + src.matrix()).norm();
        if (residual > opts.residual_tol) {
            std::ostringstream msg;
            msg << "solve_hierarchy: order " << order << " residual " << residual
                << " above tolerance";
            throw solve_error(msg.str());
        }
        orders.push_back({order, Operator(model.layout(), std::move(rho_n)), residual});
    }
    return orders;
}

double cumulant(const LindbladModel& model, int channel, int n,
                const std::vector<HierarchyOrder>& hierarchy) {
    if (n < 1) throw std::invalid_argument("cumulant: order must be >= 1");
    if (n > kMaxCumulantOrder) throw std::invalid_argument("cumulant: order above 20");
    require_orders(hierarchy, n - 1, "cumulant");
    const Channel& c = model.channel(channel);
    const Operator ldl = c.l_op.adjoint() * c.l_op;
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        acc += binomial(n, j) * sign *
               expectation(ldl, hierarchy[static_cast<std::size_t>(j)].matrix).real();
    }
    return c.rate * acc;
}

namespace {

DensityMatrix unique_steady_state(const LindbladModel& model) {
    const std::vector<DensityMatrix> states = steady_states(build_liouvillian(model));
    if (states.size() != 1)
        throw std::invalid_argument(
            "fano: multiple fixed points; use cumulants_per_fixed_point");
    return states.front();
}

}  // namespace

double fano(const LindbladModel& model, int channel) {
    const auto hierarchy = solve_hierarchy(model, channel, 1, unique_steady_state(model));
    const double k1 = cumulant(model, channel, 1, hierarchy);
    const double k2 = cumulant(model, channel, 2, hierarchy);
    if (k1 <= 1e-12) throw quiet_phase_error("fano: kappa_1 vanishes (quiet phase)");
    return (k2 + k1 * k1) / k1;
}

double fano_standard(const LindbladModel& model, int channel) {
    const auto hierarchy = solve_hierarchy(model, channel, 1, unique_steady_state(model));
    const double k1 = cumulant(model, channel, 1, hierarchy);
    const double k2 = cumulant(model, channel, 2, hierarchy);
    if (k1 <= 1e-12) throw quiet_phase_error("fano_standard: kappa_1 vanishes (quiet phase)");
    return k2 / k1;
}

MultistableCumulants cumulants_per_fixed_point(const LindbladModel& model, int channel,
                                               int n_max, const PerFixedPointOptions& opts) {
    if (n_max < 1) throw std::invalid_argument("cumulants_per_fixed_point: n_max must be >= 1");
    const std::vector<DensityMatrix> states =
        steady_states(build_liouvillian(model), opts.steady);

    MultistableCumulants out;
    for (const DensityMatrix& fp : states) {
        auto hierarchy = solve_hierarchy(model, channel, n_max - 1, fp, opts.solve);
        CumulantResult res;
        res.channel_index = channel;
        for (int k = 1; k <= n_max; ++k)
            res.values.push_back(cumulant(model, channel, k, hierarchy));
        res.hierarchy = std::move(hierarchy);
        out.per_fixed_point.push_back(std::move(res));
    }
    std::sort(out.per_fixed_point.begin(), out.per_fixed_point.end(),
              [](const CumulantResult& a, const CumulantResult& b) {
                  return a.values.front() < b.values.front();
              });
    double k1_min = out.per_fixed_point.front().values.front();
    double k1_max = out.per_fixed_point.back().values.front();
    double k1_scale = std::max(std::abs(k1_min), std::abs(k1_max));
    out.first_order_transition = (k1_max - k1_min) > 1e-6 * k1_scale && k1_scale > 0.0;
    for (std::size_t k = 0; k < out.per_fixed_point.size(); ++k)
        out.per_fixed_point[k].fixed_point_index = static_cast<int>(k);
    return out;
}

}  // namespace fcs
