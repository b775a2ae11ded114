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
#include <optional>
#include <stdexcept>
#include <utility>

#include "cvbell/fock.hpp"
#include "cvbell/linalg.hpp"

namespace cvbell {

struct SqueezingParameter {
    double value = 0.0;

    SqueezingParameter() = default;
    explicit SqueezingParameter(double r) : value(r) {
        if (!std::isfinite(r) || r < 0.0) {
            throw std::invalid_argument("SqueezingParameter: r must be finite and >= 0");
        }
    }
};

/// Normalized two-mode state. Truncated squeezed-vacuum states are stored in
/// a diagonal geometric form c_n = amplitude * ratio^n (so squeezing sweeps
/// never materialize a dense matrix); everything else is a dense coefficient
/// matrix Psi[n1][n2]. States are renormalized after truncation, and the
/// discarded tail weight of the untruncated state is recorded when known.
class TwoModeState {
  public:
    const FockSpace& space_1() const { return space_1_; }
    const FockSpace& space_2() const { return space_2_; }
    std::optional<double> tail_mass() const { return tail_mass_; }

    bool is_diagonal_geometric() const { return geometric_; }
    double diagonal_ratio() const { return ratio_; }

    /// Numerically accumulated sum of |c_2k|^2 over the kept pairs.
    double even_weight() const { return even_weight_; }
    /// Numerically accumulated sum of |c_2k+1|^2.
    double odd_weight() const { return odd_weight_; }
    /// Numerically accumulated sum of c_2k * c_2k+1 (real coefficients).
    double pair_cross_weight() const { return cross_weight_; }

    Complex coefficient(std::int64_t n1, std::int64_t n2) const {
        if (n1 < 0 || n1 >= space_1_.dimension || n2 < 0 || n2 >= space_2_.dimension) {
            throw std::out_of_range("TwoModeState::coefficient: index out of range");
        }
        if (geometric_) {
            if (n1 != n2) return {0.0, 0.0};
            return {amplitude_ * std::pow(ratio_, static_cast<double>(n1)), 0.0};
        }
        return dense_(n1, n2);
    }

    const Matrix& dense_ref() const {
        if (geometric_) {
            throw std::logic_error("TwoModeState::dense_ref: state stored in diagonal form");
        }
        return dense_;
    }

    Matrix dense_coefficients() const {
        if (!geometric_) return dense_;
        require_dense_scale(space_1_, "TwoModeState::dense_coefficients");
        require_dense_scale(space_2_, "TwoModeState::dense_coefficients");
        Matrix m = Matrix::Zero(space_1_.dimension, space_2_.dimension);
        double c = amplitude_;
        for (std::int64_t n = 0; n < space_1_.dimension; ++n) {
            m(n, n) = c;
            c *= ratio_;
        }
        return m;
    }

    double norm() const {
        if (geometric_) return std::sqrt(even_weight_ + odd_weight_);
        return dense_.norm();
    }

    friend TwoModeState nopa_state(SqueezingParameter r, const FockSpace& space_1,
                                   const FockSpace& space_2);
    friend TwoModeState from_coefficients(const Matrix& coefficients, const FockSpace& space_1,
                                          const FockSpace& space_2);

  private:
    TwoModeState(FockSpace s1, FockSpace s2) : space_1_(s1), space_2_(s2) {}

    FockSpace space_1_;
    FockSpace space_2_;
    std::optional<double> tail_mass_;

    bool geometric_ = false;
    double ratio_ = 0.0;
    double amplitude_ = 0.0;
    double even_weight_ = 0.0;
    double odd_weight_ = 0.0;
    double cross_weight_ = 0.0;

    Matrix dense_;
};

/// Two-mode squeezed vacuum truncated to the given spaces:
/// Psi[n][n] = tanh(r)^n / cosh(r), renormalized; the exact geometric tail
/// tanh(r)^{4M} of the untruncated squared coefficients is recorded.
inline TwoModeState nopa_state(SqueezingParameter r, const FockSpace& space_1,
                               const FockSpace& space_2) {
    if (space_1.dimension != space_2.dimension) {
        throw std::invalid_argument("nopa_state: mode truncations must match");
    }
    const double rho = std::tanh(r.value);
    if (rho >= 1.0) {
        // tanh(r) rounds to 1 in double precision near r ~ 19; the geometric
        // construction is no longer representable.
        throw std::invalid_argument("nopa_state: squeezing too large for double precision");
    }
    const std::int64_t pairs = space_1.pair_count;
    const double tail = std::pow(rho, 4.0 * static_cast<double>(pairs));

    TwoModeState state(space_1, space_2);
    state.geometric_ = true;
    state.ratio_ = rho;
    // Renormalization of the truncated geometric series; 1/cosh^2 = 1 - rho^2
    // keeps the amplitude stable for large r.
    state.amplitude_ = (1.0 / std::cosh(r.value)) / std::sqrt(1.0 - tail);
    state.tail_mass_ = tail;

    KahanAccumulator even, odd, cross;
    double c_even = state.amplitude_;
    for (std::int64_t k = 0; k < pairs; ++k) {
        const double c_odd = c_even * rho;
        even.add(c_even * c_even);
        odd.add(c_odd * c_odd);
        cross.add(c_even * c_odd);
        c_even = c_odd * rho;
    }
    state.even_weight_ = even.sum;
    state.odd_weight_ = odd.sum;
    state.cross_weight_ = cross.sum;
    return state;
}

/// Smallest M with tanh(r)^{4M} <= tail_tol (M = 1 for the vacuum).
inline std::int64_t required_pair_count(SqueezingParameter r, double tail_tol) {
    if (!(tail_tol > 0.0) || !(tail_tol < 1.0)) {
        throw std::invalid_argument("required_pair_count: tail_tol must lie in (0, 1)");
    }
    if (r.value == 0.0) return 1;
    const double rho = std::tanh(r.value);
    if (rho >= 1.0) {
        throw std::invalid_argument("required_pair_count: squeezing too large for double precision");
    }
    const double log_rho = std::log(rho);
    auto tail = [&](std::int64_t m) { return std::exp(4.0 * static_cast<double>(m) * log_rho); };

    std::int64_t m = static_cast<std::int64_t>(std::ceil(std::log(tail_tol) / (4.0 * log_rho)));
    if (m < 1) m = 1;
    while (m > 1 && tail(m - 1) <= tail_tol) --m;
    while (tail(m) > tail_tol) ++m;
    return m;
}

/// General two-mode state from an arbitrary nonzero coefficient matrix;
/// stored renormalized, tail mass unknown.
inline TwoModeState from_coefficients(const Matrix& coefficients, const FockSpace& space_1,
                                      const FockSpace& space_2) {
    if (coefficients.rows() != space_1.dimension || coefficients.cols() != space_2.dimension) {
        throw std::invalid_argument("from_coefficients: matrix does not match the spaces");
    }
    const double norm = coefficients.norm();
    if (norm == 0.0) {
        throw std::invalid_argument("from_coefficients: coefficient matrix is identically zero");
    }
    if (!std::isfinite(norm)) {
        throw std::invalid_argument("from_coefficients: coefficients must be finite");
    }
    TwoModeState state(space_1, space_2);
    state.dense_ = coefficients / norm;
    return state;
}

}  // namespace cvbell
