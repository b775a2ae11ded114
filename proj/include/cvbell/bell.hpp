// Copyright 2026 The cvbell developers

// Licensed under the Apache License, Version 2.0 (the License);
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

// http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an AS IS BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cvbell/fock.hpp"
#include "cvbell/linalg.hpp"
#include "cvbell/states.hpp"

namespace cvbell {

inline constexpr double kCirelsonBound = 2.8284271247461903;  // 2 sqrt(2)
inline constexpr double kImagResidueTol = 1e-12;
inline constexpr double kCorrelationSlack = 1e-10;

/// The four measurement directions (a, a', b, b') of a CHSH experiment.
struct BellSettings {
    MeasurementDirection a;
    MeasurementDirection a_prime;
    MeasurementDirection b;
    MeasurementDirection b_prime;
};

/// E(a,b) = <(a.s_1) (x) (b.s_2)>; |value| <= 1 up to float slack since both
/// factors are commuting dichotomic observables.
struct CorrelationValue {
    double value = 0.0;
};

enum class BellMethod { numeric, analytic };

struct BellValue {
    double value = 0.0;
    BellSettings settings;
    BellMethod method = BellMethod::numeric;
};

struct TwoModeOperator {
    Matrix matrix;
    FockSpace space_1;
    FockSpace space_2;
};

namespace detail {

inline double checked_real_expectation(const Complex& e, const char* who) {
    if (std::abs(e.imag()) > kImagResidueTol) {
        throw std::runtime_error(std::string(who) +
                                 ": imaginary residue exceeds tolerance (Hermiticity bug)");
    }
    return e.real();
}

}  // namespace detail

/// <Psi| (a.s) (x) (b.s) |Psi>. Diagonal states use the exact parity-block
/// form of a.s (no dense matrices); dense states go through operator-matrix
/// products. Errors if the imaginary residue exceeds 1e-12 or the value
/// leaves [-1, 1] beyond float slack.
inline CorrelationValue correlation(const TwoModeState& state, const MeasurementDirection& dir_a,
                                    const MeasurementDirection& dir_b) {
    Complex e;
    if (state.is_diagonal_geometric()) {
        const Eigen::Matrix2cd qa = pseudospin_pair_block(dir_a);
        const Eigen::Matrix2cd qb = pseudospin_pair_block(dir_b);
        e = qa(0, 0) * qb(0, 0) * state.even_weight() + qa(1, 1) * qb(1, 1) * state.odd_weight() +
            (qa(0, 1) * qb(0, 1) + qa(1, 0) * qb(1, 0)) * state.pair_cross_weight();
    } else {
        const Matrix op_a = pseudospin_component(state.space_1(), dir_a).matrix;
        const Matrix op_b = pseudospin_component(state.space_2(), dir_b).matrix;
        const Matrix& psi = state.dense_ref();
        e = (psi.conjugate().cwiseProduct(op_a * psi * op_b.transpose())).sum();
    }
    const double value = detail::checked_real_expectation(e, "correlation");
    if (std::abs(value) > 1.0 + kCorrelationSlack) {
        throw std::runtime_error("correlation: |E| exceeds 1 beyond tolerance");
    }
    return {value};
}

/// Closed-form NOPA correlation at zero azimuths:
/// E = cos(theta_a) cos(theta_b) + tanh(2r) sin(theta_a) sin(theta_b).
inline CorrelationValue correlation_nopa_analytic(SqueezingParameter r, double theta_a,
                                                  double theta_b) {
    const double k = std::tanh(2.0 * r.value);
    return {std::cos(theta_a) * std::cos(theta_b) + k * std::sin(theta_a) * std::sin(theta_b)};
}

/// Generic CHSH combination A(x)B + A(x)B' + A'(x)B - A'(x)B' for any family
/// of dichotomic observables; pseudospin and Pauli instantiations share it.
inline Matrix chsh_combination(const Matrix& obs_a, const Matrix& obs_a_prime,
                               const Matrix& obs_b, const Matrix& obs_b_prime) {
    return kron(obs_a, obs_b) + kron(obs_a, obs_b_prime) + kron(obs_a_prime, obs_b) -
           kron(obs_a_prime, obs_b_prime);
}

inline TwoModeOperator bell_operator(const FockSpace& space_1, const FockSpace& space_2,
                                     const BellSettings& settings) {
    if (space_1.dimension * space_2.dimension > kMaxDenseDimension) {
        throw std::invalid_argument("bell_operator: two-mode space too large to materialize");
    }
    const Matrix a = pseudospin_component(space_1, settings.a).matrix;
    const Matrix ap = pseudospin_component(space_1, settings.a_prime).matrix;
    const Matrix b = pseudospin_component(space_2, settings.b).matrix;
    const Matrix bp = pseudospin_component(space_2, settings.b_prime).matrix;
    return {chsh_combination(a, ap, b, bp), space_1, space_2};
}

/// <B_CHSH> = E(a,b) + E(a,b') + E(a',b) - E(a',b'), summed in fixed order.
inline BellValue bell_expectation(const TwoModeState& state, const BellSettings& settings) {
    const double e_ab = correlation(state, settings.a, settings.b).value;
    const double e_abp = correlation(state, settings.a, settings.b_prime).value;
    const double e_apb = correlation(state, settings.a_prime, settings.b).value;
    const double e_apbp = correlation(state, settings.a_prime, settings.b_prime).value;
    const double value = e_ab + e_abp + e_apb - e_apbp;
    if (std::abs(value) > kCirelsonBound + kCorrelationSlack) {
        throw std::runtime_error("bell_expectation: value exceeds the Cirel'son bound");
    }
    return {value, settings, BellMethod::numeric};
}

/// Closed form for the canonical family theta_a = 0, theta_a' = pi/2,
/// theta_b' = -theta_b, zero azimuths: <B> = 2 (cos(theta_b) + K sin(theta_b)).
inline BellValue bell_expectation_canonical_analytic(SqueezingParameter r, double theta_b) {
    const double k = std::tanh(2.0 * r.value);
    const double value = 2.0 * (std::cos(theta_b) + k * std::sin(theta_b));
    const BellSettings settings{MeasurementDirection(0.0, 0.0),
                                MeasurementDirection(std::numbers::pi / 2.0, 0.0),
                                MeasurementDirection(theta_b, 0.0),
                                MeasurementDirection(-theta_b, 0.0)};
    return {value, settings, BellMethod::analytic};
}

/// Max entrywise residue of B^2 = 4 I + 4 [(a x a').s] (x) [(b x b').s].
/// The identity is exact under even truncation, so the residue is float noise.
inline double bell_squared_residual(const FockSpace& space_1, const FockSpace& space_2,
                                    const BellSettings& settings) {
    const Matrix bell = bell_operator(space_1, space_2, settings).matrix;
    const Eigen::Vector3d cross_a =
        settings.a.unit_vector().cross(settings.a_prime.unit_vector());
    const Eigen::Vector3d cross_b =
        settings.b.unit_vector().cross(settings.b_prime.unit_vector());
    const Matrix correction = kron(vector_dot_pseudospin(space_1, cross_a).matrix,
                                   vector_dot_pseudospin(space_2, cross_b).matrix);
    const Eigen::Index dim = bell.rows();
    const Matrix expected = 4.0 * Matrix::Identity(dim, dim) + 4.0 * correction;
    return (bell * bell - expected).cwiseAbs().maxCoeff();
}

/// Largest |eigenvalue| of a Hermitian two-mode operator.
inline double spectral_bound(const TwoModeOperator& op) {
    return largest_abs_eigenvalue(op.matrix);
}

namespace detail {

inline Matrix pauli_component(const MeasurementDirection& dir) {
    const Complex i{0.0, 1.0};
    Eigen::Matrix2cd sx, sy, sz;
    sx << 0, 1, 1, 0;
    sy << 0, -i, i, 0;
    sz << 1, 0, 0, -1;
    const Eigen::Vector3d v = dir.unit_vector();
    return v.x() * sx + v.y() * sy + v.z() * sz;
}

}  // namespace detail

/// Two-qubit Bell operator assembled from Pauli matrices in the conventional
/// (spin-up, spin-down) basis. On pair_count = 1 spaces it must match
/// bell_operator after reordering each mode's basis so that |1> <-> spin-up.
inline TwoModeOperator pauli_reference_bell(const BellSettings& settings) {
    const Matrix m = chsh_combination(
        detail::pauli_component(settings.a), detail::pauli_component(settings.a_prime),
        detail::pauli_component(settings.b), detail::pauli_component(settings.b_prime));
    return {m, make_space(1), make_space(1)};
}

}  // namespace cvbell
