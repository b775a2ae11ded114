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
#include <cstdint>
#include <numbers>
#include <stdexcept>

#include "cvbell/linalg.hpp"

namespace cvbell {

/// Truncated single-mode Fock space. The dimension is always even: the basis
/// splits into parity pairs {|2n>, |2n+1>}, n = 0..pair_count-1, so the
/// pseudospin algebra closes exactly under truncation. Basis ordering is
/// |0>, |1>, ..., |2M-1> everywhere.
struct FockSpace {
    std::int64_t pair_count = 1;
    std::int64_t dimension = 2;

    friend bool operator==(const FockSpace&, const FockSpace&) = default;
};

inline FockSpace make_space(std::int64_t pair_count) {
    if (pair_count < 1) {
        throw std::invalid_argument("make_space: pair_count must be >= 1");
    }
    return FockSpace{pair_count, 2 * pair_count};
}

/// Dense matrices are only built at desk scale; larger spaces are still valid
/// for the structured (diagonal / parity-block) evaluation paths.
inline constexpr std::int64_t kMaxDenseDimension = 4096;

inline void require_dense_scale(const FockSpace& space, const char* who) {
    if (space.dimension > kMaxDenseDimension) {
        throw std::invalid_argument(std::string(who) +
                                    ": space too large to materialize densely");
    }
}

/// Dense single-mode operator tied to its Fock space.
struct Operator {
    Matrix matrix;
    FockSpace space;
};

/// Unit vector on the sphere selecting a pseudospin component, stored as
/// canonical angles theta in [0, pi], phi in [0, 2*pi). Arbitrary finite
/// angles are accepted and reduced to that range; already-canonical inputs
/// are kept bit-exact.
class MeasurementDirection {
  public:
    MeasurementDirection() = default;

    MeasurementDirection(double theta, double phi) {
        if (!std::isfinite(theta) || !std::isfinite(phi)) {
            throw std::invalid_argument("MeasurementDirection: angles must be finite");
        }
        constexpr double pi = std::numbers::pi;
        constexpr double two_pi = 2.0 * std::numbers::pi;
        if (theta < 0.0 || theta > pi) {
            theta = std::fmod(theta, two_pi);
            if (theta < 0.0) theta += two_pi;
            if (theta > pi) {
                theta = two_pi - theta;
                phi += pi;
            }
        }
        if (phi < 0.0 || phi >= two_pi) {
            phi = std::fmod(phi, two_pi);
            if (phi < 0.0) phi += two_pi;
        }
        if (theta == 0.0 || theta == pi) phi = 0.0;
        theta_ = theta;
        phi_ = phi;
    }

    static MeasurementDirection from_vector(const Eigen::Vector3d& v) {
        const double norm = v.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            throw std::invalid_argument("MeasurementDirection: zero or non-finite vector");
        }
        const Eigen::Vector3d u = v / norm;
        const double rho = std::hypot(u.x(), u.y());
        const double theta = std::atan2(rho, u.z());
        double phi = rho > 0.0 ? std::atan2(u.y(), u.x()) : 0.0;
        if (phi < 0.0) phi += 2.0 * std::numbers::pi;
        return MeasurementDirection(theta, phi);
    }

    double theta() const { return theta_; }
    double phi() const { return phi_; }

    Eigen::Vector3d unit_vector() const {
        const double st = std::sin(theta_);
        return {st * std::cos(phi_), st * std::sin(phi_), std::cos(theta_)};
    }

  private:
    double theta_ = 0.0;
    double phi_ = 0.0;
};

inline Operator identity_op(const FockSpace& space) {
    require_dense_scale(space, "identity_op");
    return {Matrix::Identity(space.dimension, space.dimension), space};
}

/// <n-1| a |n> = sqrt(n).
inline Operator annihilation(const FockSpace& space) {
    require_dense_scale(space, "annihilation");
    Matrix m = Matrix::Zero(space.dimension, space.dimension);
    for (std::int64_t n = 1; n < space.dimension; ++n) {
        m(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return {std::move(m), space};
}

inline Operator creation(const FockSpace& space) {
    auto a = annihilation(space);
    return {a.matrix.adjoint(), space};
}

inline Operator number_op(const FockSpace& space) {
    require_dense_scale(space, "number_op");
    Matrix m = Matrix::Zero(space.dimension, space.dimension);
    for (std::int64_t n = 0; n < space.dimension; ++n) {
        m(n, n) = static_cast<double>(n);
    }
    return {std::move(m), space};
}

/// (-1)^N: +1 on even Fock states, -1 on odd ones.
inline Operator parity(const FockSpace& space) {
    require_dense_scale(space, "parity");
    Matrix m = Matrix::Zero(space.dimension, space.dimension);
    for (std::int64_t n = 0; n < space.dimension; ++n) {
        m(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
    }
    return {std::move(m), space};
}

/// s_z = -(-1)^N: +1 on odd states, -1 on even states.
inline Operator pseudospin_z(const FockSpace& space) {
    auto p = parity(space);
    return {-p.matrix, space};
}

/// s_- = sum_n |2n><2n+1|, the parity-flip lowering operator.
inline Operator pseudospin_minus(const FockSpace& space) {
    require_dense_scale(space, "pseudospin_minus");
    Matrix m = Matrix::Zero(space.dimension, space.dimension);
    for (std::int64_t k = 0; k < space.pair_count; ++k) {
        m(2 * k, 2 * k + 1) = 1.0;
    }
    return {std::move(m), space};
}

inline Operator pseudospin_plus(const FockSpace& space) {
    auto sm = pseudospin_minus(space);
    return {sm.matrix.adjoint(), space};
}

/// Alternative closed form s_- = (I + (-1)^N) / (2 sqrt(N+1)) a; must agree
/// with pseudospin_minus entrywise.
inline Operator pseudospin_minus_alt(const FockSpace& space) {
    const auto a = annihilation(space);
    Matrix diag = Matrix::Zero(space.dimension, space.dimension);
    for (std::int64_t n = 0; n < space.dimension; ++n) {
        const double parity_sign = (n % 2 == 0) ? 1.0 : -1.0;
        diag(n, n) = (1.0 + parity_sign) / (2.0 * std::sqrt(static_cast<double>(n) + 1.0));
    }
    return {diag * a.matrix, space};
}

inline Operator pseudospin_x(const FockSpace& space) {
    return {pseudospin_plus(space).matrix + pseudospin_minus(space).matrix, space};
}

inline Operator pseudospin_y(const FockSpace& space) {
    const Complex minus_i{0.0, -1.0};
    return {minus_i * (pseudospin_plus(space).matrix - pseudospin_minus(space).matrix), space};
}

/// 2x2 block of a.s on one parity pair {|2n>, |2n+1>}; the full operator is
/// pair_count copies of this block along the diagonal.
inline Eigen::Matrix2cd pseudospin_pair_block(const MeasurementDirection& dir) {
    const double ct = std::cos(dir.theta());
    const double st = std::sin(dir.theta());
    const Complex ephi = std::polar(1.0, dir.phi());
    Eigen::Matrix2cd q;
    q << -ct, st * ephi, st * std::conj(ephi), ct;
    return q;
}

/// a.s = s_z cos(theta) + sin(theta) (e^{i phi} s_- + e^{-i phi} s_+).
/// Hermitian with eigenvalues +-1, each of multiplicity pair_count.
inline Operator pseudospin_component(const FockSpace& space, const MeasurementDirection& dir) {
    require_dense_scale(space, "pseudospin_component");
    const Eigen::Matrix2cd q = pseudospin_pair_block(dir);
    Matrix m = Matrix::Zero(space.dimension, space.dimension);
    for (std::int64_t k = 0; k < space.pair_count; ++k) {
        m.block<2, 2>(2 * k, 2 * k) = q;
    }
    return {std::move(m), space};
}

/// v.s = v_x s_x + v_y s_y + v_z s_z by linear extension; v need not be unit.
inline Operator vector_dot_pseudospin(const FockSpace& space, const Eigen::Vector3d& v) {
    require_dense_scale(space, "vector_dot_pseudospin");
    Matrix m = v.x() * pseudospin_x(space).matrix;
    m += v.y() * pseudospin_y(space).matrix;
    m += v.z() * pseudospin_z(space).matrix;
    return {std::move(m), space};
}

}  // namespace cvbell
