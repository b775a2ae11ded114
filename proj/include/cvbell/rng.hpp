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
#include <random>

#include "cvbell/bell.hpp"
#include "cvbell/fock.hpp"
#include "cvbell/states.hpp"

namespace cvbell {

/// Seeded generator for directions, settings and states. Doubles are mapped
/// from raw engine output directly, so a given seed reproduces the same
/// stream on every standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Uniform direction on the unit sphere.
    MeasurementDirection direction() {
        const double z = 1.0 - 2.0 * uniform();
        const double phi = uniform(0.0, 2.0 * std::numbers::pi);
        return MeasurementDirection(std::acos(std::clamp(z, -1.0, 1.0)), phi);
    }

    BellSettings settings() {
        // Fixed draw order keeps seeded streams reproducible.
        MeasurementDirection a = direction();
        MeasurementDirection ap = direction();
        MeasurementDirection b = direction();
        MeasurementDirection bp = direction();
        return {a, ap, b, bp};
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Haar-ish random normalized two-mode state (complex Gaussian coefficients).
inline TwoModeState random_state(Rng& rng, const FockSpace& space_1, const FockSpace& space_2) {
    Matrix m(space_1.dimension, space_2.dimension);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(i, j) = Complex(rng.normal(), rng.normal());
        }
    }
    return from_coefficients(m, space_1, space_2);
}

}  // namespace cvbell
