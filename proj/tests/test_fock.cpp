#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>

#include "cvbell/fock.hpp"
#include "cvbell/rng.hpp"

using namespace cvbell;

namespace {

constexpr double kPi = std::numbers::pi;

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix identity_like(const Matrix& m) { return Matrix::Identity(m.rows(), m.cols()); }

}  // namespace

TEST_CASE("make_space validates the pair count", "[fock]") {
    REQUIRE(make_space(1).dimension == 2);
    REQUIRE(make_space(8).dimension == 16);
    REQUIRE(make_space(8).pair_count == 8);
    REQUIRE_THROWS_AS(make_space(0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_space(-3), std::invalid_argument);
}

TEST_CASE("annihilation ladder elements", "[fock]") {
    SECTION("dimension 2") {
        const auto a = annihilation(make_space(1));
        Vector one = Vector::Zero(2);
        one(1) = 1.0;
        Vector zero_state = Vector::Zero(2);
        zero_state(0) = 1.0;
        REQUIRE((a.matrix * one - zero_state).norm() == Approx(0.0).margin(1e-15));
        REQUIRE((a.matrix * zero_state).norm() == Approx(0.0).margin(1e-15));
    }
    SECTION("dimension 4 matrix element") {
        const auto a = annihilation(make_space(2));
        REQUIRE(a.matrix(2, 3).real() == Approx(std::sqrt(3.0)));
        REQUIRE(a.matrix(2, 3).imag() == 0.0);
    }
    SECTION("a^dag a is the number operator") {
        const auto space = make_space(4);
        const auto a = annihilation(space);
        const Matrix n = a.matrix.adjoint() * a.matrix;
        REQUIRE(max_abs(n - number_op(space).matrix) <= 1e-14);
    }
}

TEST_CASE("parity is the diagonal (-1)^n involution", "[fock]") {
    const auto space = make_space(3);
    const auto p = parity(space);
    REQUIRE(p.matrix(0, 0) == Complex(1.0, 0.0));
    REQUIRE(p.matrix(3, 3) == Complex(-1.0, 0.0));
    REQUIRE(max_abs(p.matrix * p.matrix - identity_like(p.matrix)) == 0.0);
}

TEST_CASE("pseudospin triple definition", "[fock]") {
    const auto space = make_space(4);

    SECTION("s_z = -(-1)^N entrywise") {
        REQUIRE(max_abs(pseudospin_z(space).matrix + parity(space).matrix) == 0.0);
    }
    SECTION("s_- annihilates even states and lowers odd ones") {
        const auto sm = pseudospin_minus(space);
        for (std::int64_t k = 0; k < space.pair_count; ++k) {
            Vector even = Vector::Zero(space.dimension);
            even(2 * k) = 1.0;
            Vector odd = Vector::Zero(space.dimension);
            odd(2 * k + 1) = 1.0;
            REQUIRE((sm.matrix * even).norm() == 0.0);
            REQUIRE((sm.matrix * odd - even).norm() == 0.0);
        }
    }
    SECTION("single parity pair is a qubit: Pauli matrices in (|1>,|0>) ordering") {
        const auto qubit = make_space(1);
        Matrix swap(2, 2);
        swap << 0, 1, 1, 0;
        const Matrix sz = swap * pseudospin_z(qubit).matrix * swap;
        const Matrix sx = swap * pseudospin_x(qubit).matrix * swap;
        const Matrix sy = swap * pseudospin_y(qubit).matrix * swap;
        Matrix pauli_z(2, 2), pauli_x(2, 2), pauli_y(2, 2);
        pauli_z << 1, 0, 0, -1;
        pauli_x << 0, 1, 1, 0;
        pauli_y << 0, Complex(0, -1), Complex(0, 1), 0;
        REQUIRE(max_abs(sz - pauli_z) <= 1e-15);
        REQUIRE(max_abs(sx - pauli_x) <= 1e-15);
        REQUIRE(max_abs(sy - pauli_y) <= 1e-15);
    }
    SECTION("restriction to the span of {|0>,|1>} is the same qubit on any truncation") {
        const auto qubit = make_space(1);
        const Matrix sx = pseudospin_x(space).matrix.topLeftCorner(2, 2);
        const Matrix sy = pseudospin_y(space).matrix.topLeftCorner(2, 2);
        const Matrix sz = pseudospin_z(space).matrix.topLeftCorner(2, 2);
        REQUIRE(max_abs(sx - pseudospin_x(qubit).matrix) == 0.0);
        REQUIRE(max_abs(sy - pseudospin_y(qubit).matrix) == 0.0);
        REQUIRE(max_abs(sz - pseudospin_z(qubit).matrix) == 0.0);
    }
}

TEST_CASE("closed-form s_- construction matches the projector definition", "[fock]") {
    SECTION("dimension 2 evaluates to the lowering matrix") {
        const auto alt = pseudospin_minus_alt(make_space(1));
        Matrix expected(2, 2);
        expected << 0, 1, 0, 0;
        REQUIRE(max_abs(alt.matrix - expected) <= 1e-15);
    }
    SECTION("entrywise agreement on larger truncations") {
        for (std::int64_t pairs : {1, 2, 8, 32}) {
            const auto space = make_space(pairs);
            const double diff =
                max_abs(pseudospin_minus_alt(space).matrix - pseudospin_minus(space).matrix);
            REQUIRE(diff <= 1e-14);
        }
    }
    SECTION("kills even basis states") {
        const auto space = make_space(4);
        const auto alt = pseudospin_minus_alt(space);
        for (std::int64_t k = 0; k < space.pair_count; ++k) {
            Vector even = Vector::Zero(space.dimension);
            even(2 * k) = 1.0;
            REQUIRE((alt.matrix * even).norm() <= 1e-15);
        }
    }
}

TEST_CASE("pseudospin commutators close exactly under even truncation", "[fock][property]") {
    for (std::int64_t pairs : {1, 2, 8, 64}) {
        const auto space = make_space(pairs);
        const Matrix sz = pseudospin_z(space).matrix;
        const Matrix sp = pseudospin_plus(space).matrix;
        const Matrix sm = pseudospin_minus(space).matrix;
        REQUIRE(max_abs(sz * sp - sp * sz - 2.0 * sp) <= 1e-14);
        REQUIRE(max_abs(sz * sm - sm * sz + 2.0 * sm) <= 1e-14);
        REQUIRE(max_abs(sp * sm - sm * sp - sz) <= 1e-14);
    }
}

TEST_CASE("direction projections are Hermitian involutions", "[fock][property]") {
    Rng rng(20260808);
    for (std::int64_t pairs : {1, 2, 8}) {
        const auto space = make_space(pairs);
        for (int trial = 0; trial < 100; ++trial) {
            const auto dir = rng.direction();
            const auto op = pseudospin_component(space, dir);
            REQUIRE(hermiticity_residual(op.matrix) <= 1e-14);
            REQUIRE(max_abs(op.matrix * op.matrix - identity_like(op.matrix)) <= 1e-14);
        }
    }
}

TEST_CASE("direction projection special cases", "[fock]") {
    const auto space = make_space(2);
    SECTION("theta = 0 returns s_z") {
        const auto op = pseudospin_component(space, MeasurementDirection(0.0, 0.0));
        REQUIRE(max_abs(op.matrix - pseudospin_z(space).matrix) == 0.0);
    }
    SECTION("theta = pi/2, phi = 0 returns s_x") {
        const auto op = pseudospin_component(space, MeasurementDirection(kPi / 2.0, 0.0));
        REQUIRE(max_abs(op.matrix - pseudospin_x(space).matrix) <= 1e-15);
    }
    SECTION("formula route agrees with the pair-block construction") {
        const MeasurementDirection dir(1.234, 2.345);
        const Matrix via_blocks = pseudospin_component(space, dir).matrix;
        const Complex ephi = std::polar(1.0, dir.phi());
        const Matrix via_formula = std::cos(dir.theta()) * pseudospin_z(space).matrix +
                                   std::sin(dir.theta()) * (ephi * pseudospin_minus(space).matrix +
                                                            std::conj(ephi) * pseudospin_plus(space).matrix);
        REQUIRE(max_abs(via_blocks - via_formula) <= 1e-15);
    }
}

TEST_CASE("direction projections have eigenvalues +-1 with multiplicity M", "[fock]") {
    Rng rng(7);
    for (std::int64_t pairs : {1, 2, 8}) {
        const auto space = make_space(pairs);
        for (int trial = 0; trial < 5; ++trial) {
            const auto op = pseudospin_component(space, rng.direction());
            Eigen::SelfAdjointEigenSolver<Matrix> solver(op.matrix);
            REQUIRE(solver.info() == Eigen::Success);
            std::int64_t plus = 0, minus = 0;
            for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
                const double ev = solver.eigenvalues()(i);
                if (std::abs(ev - 1.0) <= 1e-12) ++plus;
                if (std::abs(ev + 1.0) <= 1e-12) ++minus;
            }
            REQUIRE(plus == pairs);
            REQUIRE(minus == pairs);
        }
    }
}

TEST_CASE("measurement directions canonicalize into [0, pi] x [0, 2pi)", "[fock]") {
    SECTION("negative polar angle reflects through phi") {
        const MeasurementDirection d(-kPi / 4.0, 0.0);
        REQUIRE(d.theta() == Approx(kPi / 4.0));
        REQUIRE(d.phi() == Approx(kPi));
    }
    SECTION("canonical inputs are untouched") {
        const MeasurementDirection d(0.7, 1.3);
        REQUIRE(d.theta() == 0.7);
        REQUIRE(d.phi() == 1.3);
    }
    SECTION("unit vector round trip") {
        Rng rng(11);
        for (int trial = 0; trial < 50; ++trial) {
            const auto d = rng.direction();
            REQUIRE(d.unit_vector().norm() == Approx(1.0).margin(1e-14));
            const auto back = MeasurementDirection::from_vector(d.unit_vector());
            REQUIRE((back.unit_vector() - d.unit_vector()).norm() <= 1e-12);
        }
    }
    SECTION("non-finite angles rejected") {
        REQUIRE_THROWS_AS(MeasurementDirection(std::nan(""), 0.0), std::invalid_argument);
    }
    SECTION("arbitrary raw angles keep the direction") {
        Rng rng(12);
        for (int trial = 0; trial < 100; ++trial) {
            const double theta = rng.uniform(-20.0, 20.0);
            const double phi = rng.uniform(-20.0, 20.0);
            const MeasurementDirection d(theta, phi);
            REQUIRE(d.theta() >= 0.0);
            REQUIRE(d.theta() <= kPi);
            REQUIRE(d.phi() >= 0.0);
            REQUIRE(d.phi() < 2.0 * kPi);
            const Eigen::Vector3d raw(std::sin(theta) * std::cos(phi),
                                      std::sin(theta) * std::sin(phi), std::cos(theta));
            REQUIRE((d.unit_vector() - raw).norm() <= 1e-12);
        }
    }
}

TEST_CASE("operators advertised as Hermitian are Hermitian", "[fock]") {
    const auto space = make_space(5);
    REQUIRE(hermiticity_residual(parity(space).matrix) == 0.0);
    REQUIRE(hermiticity_residual(number_op(space).matrix) == 0.0);
    REQUIRE(hermiticity_residual(pseudospin_z(space).matrix) == 0.0);
    REQUIRE(hermiticity_residual(pseudospin_x(space).matrix) <= 1e-14);
    REQUIRE(hermiticity_residual(pseudospin_y(space).matrix) <= 1e-14);
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        REQUIRE(hermiticity_residual(pseudospin_component(space, rng.direction()).matrix) <=
                1e-14);
        const Eigen::Vector3d v(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
        REQUIRE(hermiticity_residual(vector_dot_pseudospin(space, v).matrix) <= 1e-14);
    }
}
