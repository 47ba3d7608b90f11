#include <doctest.h>

#include <cmath>

#include "fcs/hilbert.hpp"

using namespace fcs;

TEST_SUITE_BEGIN("hilbert");

namespace {

Matrix sigma_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

}  // namespace

TEST_CASE("tensor of identities is the identity") {
    const SpaceLayout layout({2, 2});
    const Operator id2 = identity(SpaceLayout({2}));
    const Operator t = tensor({id2, id2}, layout);
    CHECK((t.matrix() - Matrix::Identity(4, 4)).norm() == 0.0);
}

TEST_CASE("tensor of sigma_x with itself has ones on the anti-diagonal") {
    const SpaceLayout layout({2, 2});
    const Operator sx(SpaceLayout({2}), sigma_x());
    const Operator t = tensor({sx, sx}, layout);
    Matrix expected = Matrix::Zero(4, 4);
    expected(0, 3) = expected(1, 2) = expected(2, 1) = expected(3, 0) = 1.0;
    CHECK((t.matrix() - expected).norm() == 0.0);
}

TEST_CASE("tensor of sigma_plus with identity, explicit Kronecker product") {
    // sigma_plus = |up><down| at site 0: entries (0,1) of the left factor fan
    // out into the (0..1, 2..3) block.
    const SpaceLayout layout({2, 2});
    Matrix sp = Matrix::Zero(2, 2);
    sp(0, 1) = 1.0;
    const Operator t = tensor({Operator(SpaceLayout({2}), sp), identity(SpaceLayout({2}))}, layout);
    Matrix expected = Matrix::Zero(4, 4);
    expected(0, 2) = 1.0;
    expected(1, 3) = 1.0;
    CHECK((t.matrix() - expected).norm() == 0.0);
    CHECK(t.matrix().cwiseAbs().sum() == 2.0);
}

TEST_CASE("tensor rejects mismatched factors") {
    const SpaceLayout layout({2, 3});
    const Operator id2 = identity(SpaceLayout({2}));
    CHECK_THROWS_AS(tensor({id2, id2}, layout), dimension_error);
    CHECK_THROWS_AS(tensor({id2}, layout), dimension_error);
}

TEST_CASE("tensor agrees with pairwise products") {
    const SpaceLayout layout({2, 2, 2});
    const Operator sx(SpaceLayout({2}), sigma_x());
    const Operator id2 = identity(SpaceLayout({2}));
    const Operator one_shot = tensor({sx, id2, sx}, layout);

    // Pairwise: (sx (x) id2) then (x) sx.
    const SpaceLayout pair({2, 2});
    const Operator left = tensor({sx, id2}, pair);
    const Operator pairwise =
        tensor({Operator(SpaceLayout({4}), left.matrix()), sx}, SpaceLayout({4, 2}));
    CHECK((one_shot.matrix() - pairwise.matrix()).norm() == 0.0);
}

TEST_CASE("pauli z and ladder conventions") {
    const SpaceLayout single({2});
    const Operator sz = pauli(Pauli::Z, 0, single);
    CHECK(sz.matrix()(0, 0) == Complex(1, 0));
    CHECK(sz.matrix()(1, 1) == Complex(-1, 0));

    const Operator proj = pauli(Pauli::Plus, 0, single) * pauli(Pauli::Minus, 0, single);
    Matrix up = Matrix::Zero(2, 2);
    up(0, 0) = 1.0;
    CHECK((proj.matrix() - up).norm() == 0.0);
}

TEST_CASE("pauli embeds at the requested site") {
    const SpaceLayout layout({2, 2});
    const Operator sx1 = pauli(Pauli::X, 1, layout);
    const Matrix expected =
        tensor({identity(SpaceLayout({2})), Operator(SpaceLayout({2}), sigma_x())}, layout)
            .matrix();
    CHECK((sx1.matrix() - expected).norm() == 0.0);
}

TEST_CASE("pauli rejects non-qubit sites") {
    const SpaceLayout layout({3, 2});
    CHECK_THROWS_AS(pauli(Pauli::X, 0, layout), std::invalid_argument);
}

TEST_CASE("pauli algebra: sx sy = i sz") {
    const SpaceLayout single({2});
    const Operator lhs = pauli(Pauli::X, 0, single) * pauli(Pauli::Y, 0, single);
    const Operator rhs = Complex(0, 1) * pauli(Pauli::Z, 0, single);
    CHECK((lhs.matrix() - rhs.matrix()).norm() == 0.0);
}

TEST_CASE("boson annihilation at small cutoffs") {
    const Operator a2 = boson_annihilation(2);
    Matrix expected = Matrix::Zero(2, 2);
    expected(0, 1) = 1.0;
    CHECK((a2.matrix() - expected).norm() == 0.0);

    const Operator a4 = boson_annihilation(4);
    const Operator number = a4.adjoint() * a4;
    for (int n = 0; n < 4; ++n)
        CHECK(std::abs(number.matrix()(n, n) - Complex(n, 0)) < 1e-14);

    CHECK_THROWS_AS(boson_annihilation(1), std::invalid_argument);
}

TEST_CASE("truncated commutator [a, a_dag] is identity except the top level") {
    const Operator a = boson_annihilation(5);
    const Operator comm = a * a.adjoint() - a.adjoint() * a;
    Matrix expected = Matrix::Identity(5, 5);
    expected(4, 4) = -4.0;
    CHECK((comm.matrix() - expected).norm() < 1e-13);
}

TEST_CASE("expectation values") {
    const SpaceLayout single({2});
    Matrix rho_m = Matrix::Zero(2, 2);
    rho_m(0, 0) = 0.75;
    rho_m(1, 1) = 0.25;
    const DensityMatrix rho = DensityMatrix::validated(Operator(single, rho_m));
    CHECK(std::abs(expectation(identity(single), rho.op()) - Complex(1, 0)) < 1e-14);

    Matrix up = Matrix::Zero(2, 2);
    up(0, 0) = 1.0;
    CHECK(std::abs(expectation(pauli(Pauli::Z, 0, single), Operator(single, up)) -
                   Complex(1, 0)) < 1e-14);
}

TEST_CASE("thermal state occupation from an explicit geometric series") {
    const int cutoff = 30;
    const double nbar = 0.5;
    const double q = nbar / (1.0 + nbar);
    Matrix rho = Matrix::Zero(cutoff, cutoff);
    for (int n = 0; n < cutoff; ++n) rho(n, n) = (1.0 - q) * std::pow(q, n);
    rho /= rho.trace();
    const SpaceLayout layout({cutoff});
    const Operator a = boson_annihilation(cutoff);
    const Complex n_mean = expectation(a.adjoint() * a, Operator(layout, rho));
    CHECK(std::abs(n_mean.real() - nbar) < 1e-6);
    CHECK(std::abs(n_mean.imag()) < 1e-14);
}

TEST_CASE("expectation rejects mismatched layouts") {
    const SpaceLayout one({2});
    const SpaceLayout two({2, 2});
    CHECK_THROWS_AS(expectation(identity(one), identity(two)), dimension_error);
}

TEST_CASE("adjoint is an involution and reverses products") {
    const SpaceLayout layout({2, 2});
    const Operator x = pauli(Pauli::X, 0, layout) + 0.3 * pauli(Pauli::Plus, 1, layout);
    const Operator y = pauli(Pauli::Y, 1, layout) - 1.7 * pauli(Pauli::Minus, 0, layout);
    CHECK((x.adjoint().adjoint().matrix() - x.matrix()).norm() == 0.0);
    CHECK(((x * y).adjoint().matrix() - (y.adjoint() * x.adjoint()).matrix()).norm() < 1e-13);
}

TEST_CASE("density matrix validation catches bad input") {
    const SpaceLayout single({2});
    Matrix bad_trace = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(DensityMatrix::validated(Operator(single, bad_trace)),
                    std::invalid_argument);

    Matrix not_positive(2, 2);
    not_positive << 1.5, 0, 0, -0.5;
    CHECK_THROWS_AS(DensityMatrix::validated(Operator(single, not_positive)),
                    std::invalid_argument);
}

TEST_SUITE_END();
