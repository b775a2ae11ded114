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
#include <string>
#include <vector>

#include "cvbell/fock.hpp"
#include "cvbell/linalg.hpp"

namespace cvbell {

inline constexpr std::int64_t kMaxReadoutAtoms = 12;
inline constexpr std::int64_t kMaxCompositeDimension = 8192;
inline constexpr double kAtomNormTol = 1e-12;
inline constexpr double kTopLevelWeightTol = 1e-10;
inline constexpr double kTrappingTol = 1e-6;

/// Configuration of the atom-chain measurement: N two-level atoms crossing
/// the cavity in sequence, each coupled resonantly for the same dimensionless
/// time gt_I. Atom basis ordering is (|g>, |e>); an empty atom_initial means
/// every atom starts in the ground state.
struct ReadoutChainConfig {
    std::int64_t atom_count = 1;
    double coupling = 1.0;  // g * t_I
    std::vector<Eigen::Vector2cd> atom_initial;
    FockSpace field_space;
};

inline void validate_config(const ReadoutChainConfig& config) {
    if (config.atom_count < 1 || config.atom_count > kMaxReadoutAtoms) {
        throw std::invalid_argument("ReadoutChainConfig: atom_count must lie in [1, 12]");
    }
    const std::int64_t composite = config.field_space.dimension << config.atom_count;
    if (composite > kMaxCompositeDimension) {
        throw std::invalid_argument(
            "ReadoutChainConfig: composite dimension 2M*2^N exceeds the memory guard");
    }
    if (!std::isfinite(config.coupling) || !(config.coupling > 0.0)) {
        throw std::invalid_argument("ReadoutChainConfig: coupling gt_I must be > 0");
    }
    if (!config.atom_initial.empty()) {
        if (static_cast<std::int64_t>(config.atom_initial.size()) != config.atom_count) {
            throw std::invalid_argument("ReadoutChainConfig: one initial state per atom required");
        }
        for (const auto& a : config.atom_initial) {
            if (std::abs(a.norm() - 1.0) > kAtomNormTol) {
                throw std::invalid_argument("ReadoutChainConfig: atom states must be normalized");
            }
        }
    }
}

inline Eigen::Vector2cd atom_initial_state(const ReadoutChainConfig& config, std::int64_t index) {
    if (config.atom_initial.empty()) return Eigen::Vector2cd(1.0, 0.0);
    return config.atom_initial[static_cast<std::size_t>(index)];
}

/// One-atom Jaynes-Cummings step U = exp(-i gt (a^dag sigma + a sigma^dag))
/// on field (x) atom, basis |n, q> with index 2n + q and q in {g=0, e=1}.
/// The generator is block diagonal in the excitation sectors {|n,e>, |n+1,g>},
/// each rotating by gt*sqrt(n+1); |0,g> and the top sector left open by the
/// truncation are fixed points, so the matrix is exactly unitary. States must
/// keep their weight off the top field levels for the step to agree with the
/// untruncated dynamics (enforced by readout_estimate).
inline Matrix jc_step_unitary(const FockSpace& field_space, double gt) {
    if (!std::isfinite(gt)) {
        throw std::invalid_argument("jc_step_unitary: gt must be finite");
    }
    const std::int64_t d = field_space.dimension;
    if (2 * d > kMaxDenseDimension) {
        throw std::invalid_argument("jc_step_unitary: field space too large");
    }
    Matrix u = Matrix::Identity(2 * d, 2 * d);
    const Complex minus_i{0.0, -1.0};
    for (std::int64_t n = 0; n + 1 < d; ++n) {
        const std::int64_t row_e = 2 * n + 1;       // |n, e>
        const std::int64_t row_g = 2 * (n + 1);     // |n+1, g>
        const double angle = gt * std::sqrt(static_cast<double>(n) + 1.0);
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        u(row_e, row_e) = c;
        u(row_g, row_g) = c;
        u(row_e, row_g) = minus_i * s;
        u(row_g, row_e) = minus_i * s;
    }
    return u;
}

/// Fock levels k <= 2M whose Rabi angle gt*sqrt(k) sits within kTrappingTol
/// of a multiple of pi; such sectors exchange nothing with the atoms.
inline std::vector<std::string> trapping_warnings(double gt, const FockSpace& field_space) {
    std::vector<std::string> out;
    for (std::int64_t k = 1; k <= field_space.dimension; ++k) {
        const double angle = gt * std::sqrt(static_cast<double>(k));
        const auto multiple = std::llround(angle / std::numbers::pi);
        if (std::abs(angle - static_cast<double>(multiple) * std::numbers::pi) < kTrappingTol) {
            out.push_back("trapping sector k=" + std::to_string(k) + ": gt*sqrt(k) within 1e-6 of " +
                          std::to_string(multiple) + "*pi");
        }
    }
    return out;
}

namespace detail {

// Composite index layout: idx = n * 2^N + bits, atom i (1-based) owning bit
// weight 2^{N-i}. The step couples the (field, atom i) coordinates only, so
// applying it means small dense products over gathered subvectors.

inline std::int64_t insert_zero_bit(std::int64_t packed, std::int64_t weight) {
    const std::int64_t low = packed & (weight - 1);
    return ((packed - low) << 1) | low;
}

inline void apply_step_vector(const Matrix& step, Eigen::Ref<Vector> v, std::int64_t field_dim,
                              std::int64_t atom_count, std::int64_t atom_index) {
    const std::int64_t weight = std::int64_t{1} << (atom_count - atom_index);
    const std::int64_t atoms_dim = std::int64_t{1} << atom_count;
    const std::int64_t rest_count = atoms_dim / 2;
    const std::int64_t small_dim = 2 * field_dim;
    Vector x(small_dim), y(small_dim);
    for (std::int64_t packed = 0; packed < rest_count; ++packed) {
        const std::int64_t rest = insert_zero_bit(packed, weight);
        for (std::int64_t n = 0; n < field_dim; ++n) {
            for (std::int64_t q = 0; q < 2; ++q) {
                x(2 * n + q) = v(n * atoms_dim + q * weight + rest);
            }
        }
        y.noalias() = step * x;
        for (std::int64_t n = 0; n < field_dim; ++n) {
            for (std::int64_t q = 0; q < 2; ++q) {
                v(n * atoms_dim + q * weight + rest) = y(2 * n + q);
            }
        }
    }
}

inline void apply_step_left(Matrix& m, const Matrix& step, std::int64_t field_dim,
                            std::int64_t atom_count, std::int64_t atom_index) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        apply_step_vector(step, m.col(c), field_dim, atom_count, atom_index);
    }
}

inline void apply_step_right(Matrix& m, const Matrix& step, std::int64_t field_dim,
                             std::int64_t atom_count, std::int64_t atom_index) {
    const Matrix step_t = step.transpose();
    const std::int64_t weight = std::int64_t{1} << (atom_count - atom_index);
    const std::int64_t atoms_dim = std::int64_t{1} << atom_count;
    const std::int64_t rest_count = atoms_dim / 2;
    const std::int64_t small_dim = 2 * field_dim;
    Vector x(small_dim), y(small_dim);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (std::int64_t packed = 0; packed < rest_count; ++packed) {
            const std::int64_t rest = insert_zero_bit(packed, weight);
            for (std::int64_t n = 0; n < field_dim; ++n) {
                for (std::int64_t q = 0; q < 2; ++q) {
                    x(2 * n + q) = m(r, n * atoms_dim + q * weight + rest);
                }
            }
            y.noalias() = step_t * x;
            for (std::int64_t n = 0; n < field_dim; ++n) {
                for (std::int64_t q = 0; q < 2; ++q) {
                    m(r, n * atoms_dim + q * weight + rest) = y(2 * n + q);
                }
            }
        }
    }
}

struct AtomicImage {
    Matrix m;         // best atoms-only approximant M_A (Hermitian)
    double residual;  // ||H - I (x) M_A||_F / ||H||_F
};

// Frobenius-optimal atoms-only approximant of a conjugated observable: the
// normalized partial trace over the field.
inline AtomicImage project_to_atomic(const Matrix& h, std::int64_t field_dim,
                                     std::int64_t atoms_dim) {
    Matrix m = partial_trace_first(h, field_dim, atoms_dim) / static_cast<double>(field_dim);
    const double denominator = h.norm();
    const double numerator =
        (h - kron(Matrix::Identity(field_dim, field_dim), m)).norm();
    return {std::move(m), denominator == 0.0 ? 0.0 : numerator / denominator};
}

// Forward conjugation H_n = U_n^dag (A (x) I) U_n with U_n = S_n ... S_1.
inline AtomicImage forward_atomic_image(const Matrix& observable, const Matrix& step,
                                        std::int64_t field_dim, std::int64_t atoms) {
    const std::int64_t atoms_dim = std::int64_t{1} << atoms;
    Matrix h = kron(observable, Matrix::Identity(atoms_dim, atoms_dim));
    const Matrix step_adj = step.adjoint();
    for (std::int64_t i = atoms; i >= 1; --i) {
        apply_step_left(h, step_adj, field_dim, atoms, i);
        apply_step_right(h, step, field_dim, atoms, i);
    }
    return project_to_atomic(h, field_dim, atoms_dim);
}

// Reversed-time conjugation H_n = W_n (A (x) I) W_n^dag with
// W_n = U_n^dag(-t) = S_1 ... S_n (atom n interacting first).
inline AtomicImage reversed_atomic_image(const Matrix& observable, const Matrix& step,
                                         std::int64_t field_dim, std::int64_t atoms) {
    const std::int64_t atoms_dim = std::int64_t{1} << atoms;
    Matrix h = kron(observable, Matrix::Identity(atoms_dim, atoms_dim));
    const Matrix step_adj = step.adjoint();
    for (std::int64_t i = atoms; i >= 1; --i) {
        apply_step_left(h, step, field_dim, atoms, i);
        apply_step_right(h, step_adj, field_dim, atoms, i);
    }
    return project_to_atomic(h, field_dim, atoms_dim);
}

inline Vector evolved_reversed_state(const Vector& field_state, const Matrix& step,
                                     const ReadoutChainConfig& config) {
    Vector psi = field_state;
    for (std::int64_t i = 0; i < config.atom_count; ++i) {
        psi = kron(psi, Vector(atom_initial_state(config, i)));
    }
    for (std::int64_t i = config.atom_count; i >= 1; --i) {
        apply_step_vector(step, psi, config.field_space.dimension, config.atom_count, i);
    }
    return psi;
}

// Atoms-only image of a field observable under the chain's drain action.
// The chain maps |m> (x) |atoms_0> towards |0_field> (x) (atom record); the
// conditioned transfer map V|m> = <0_field| W_N (|m> (x) |atoms_0>) carries
// the field into the atoms, and its polar isometry transports the observable:
// M_A = iso A iso^dag, with directions outside the drained image scoring the
// observable's mean eigenvalue (so A = I maps to I exactly). The estimate
// error then tracks the state's own un-drained weight rather than the
// truncation sectors the chain has not yet reached.
inline Matrix transfer_atomic_image(const Matrix& observable, const Matrix& step,
                                    const ReadoutChainConfig& config) {
    const std::int64_t d = config.field_space.dimension;
    const std::int64_t atoms_dim = std::int64_t{1} << config.atom_count;
    Matrix transfer(atoms_dim, d);
    for (std::int64_t m = 0; m < d; ++m) {
        Vector level = Vector::Zero(d);
        level(m) = 1.0;
        const Vector evolved = evolved_reversed_state(level, step, config);
        transfer.col(m) = evolved.segment(0, atoms_dim);
    }
    Eigen::JacobiSVD<Matrix> svd(transfer, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sigma = svd.singularValues();
    const double cutoff = sigma.size() > 0 ? sigma(0) * 1e-12 : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > cutoff) ++rank;
    }
    const Matrix iso = svd.matrixU().leftCols(rank) * svd.matrixV().leftCols(rank).adjoint();
    const double mean = observable.trace().real() / static_cast<double>(d);
    const Matrix projector = iso * iso.adjoint();
    return iso * observable * iso.adjoint() +
           mean * (Matrix::Identity(atoms_dim, atoms_dim) - projector);
}

inline double atomic_expectation(const Vector& psi, const Matrix& atomic_op,
                                 std::int64_t field_dim) {
    const std::int64_t atoms_dim = atomic_op.rows();
    Complex e{0.0, 0.0};
    for (std::int64_t n = 0; n < field_dim; ++n) {
        const auto segment = psi.segment(n * atoms_dim, atoms_dim);
        e += (segment.adjoint() * (atomic_op * segment))(0);
    }
    if (std::abs(e.imag()) > 1e-12) {
        throw std::runtime_error("atomic_expectation: imaginary residue exceeds tolerance");
    }
    return e.real();
}

inline void require_hermitian_observable(const Operator& observable, const char* who) {
    if (hermiticity_residual(observable.matrix) > 1e-12) {
        throw std::invalid_argument(std::string(who) + ": observable must be Hermitian");
    }
}

}  // namespace detail

/// Ordered chain product U_N = S_N ... S_1 on field (x) N atoms, atom 1
/// acting first; each factor touches the field and one atom slot only.
inline Matrix chain_unitary(const ReadoutChainConfig& config) {
    validate_config(config);
    const std::int64_t d = config.field_space.dimension;
    const std::int64_t composite = d << config.atom_count;
    const Matrix step = jc_step_unitary(config.field_space, config.coupling);
    Matrix u = Matrix::Identity(composite, composite);
    for (std::int64_t i = 1; i <= config.atom_count; ++i) {
        detail::apply_step_left(u, step, d, config.atom_count, i);
    }
    return u;
}

struct CompletenessReport {
    std::string observable_label;
    std::vector<double> residuals;              // indexed by n = 1..N
    std::vector<Matrix> atomic_approximants;    // M_A estimate at each stage
    std::vector<std::string> trapping_warnings;
};

/// Quantifies asymptotic completeness: conjugates the field observable
/// through n = 1..N atoms and measures how far H_n = U_n^dag (A (x) I) U_n is
/// from an atoms-only operator I (x) M, with M the normalized field-partial
/// trace (the Frobenius-optimal choice).
inline CompletenessReport completeness_residual(const Operator& observable, double gt,
                                                std::int64_t atom_count,
                                                std::string label = "observable") {
    detail::require_hermitian_observable(observable, "completeness_residual");
    if (!std::isfinite(gt)) {
        throw std::invalid_argument("completeness_residual: gt must be finite");
    }
    if (atom_count < 1 || atom_count > kMaxReadoutAtoms) {
        throw std::invalid_argument("completeness_residual: atom_count must lie in [1, 12]");
    }
    const std::int64_t d = observable.space.dimension;
    if ((d << atom_count) > kMaxCompositeDimension) {
        throw std::invalid_argument("completeness_residual: composite dimension exceeds guard");
    }
    const Matrix step = jc_step_unitary(observable.space, gt);

    CompletenessReport report;
    report.observable_label = std::move(label);
    report.trapping_warnings = trapping_warnings(gt, observable.space);
    for (std::int64_t n = 1; n <= atom_count; ++n) {
        auto image = detail::forward_atomic_image(observable.matrix, step, d, n);
        report.residuals.push_back(image.residual);
        report.atomic_approximants.push_back(std::move(image.m));
    }
    return report;
}

/// Estimate of <f|A|f> via the reversed-time protocol of the atom chain:
/// evolve |f> (x) |atoms> by W_N = U_N^dag(-t_I) and read the atoms-only
/// image M_A of the observable on the evolved state.
inline double readout_estimate(const Vector& field_state, const Operator& observable,
                               const ReadoutChainConfig& config) {
    validate_config(config);
    detail::require_hermitian_observable(observable, "readout_estimate");
    const std::int64_t d = config.field_space.dimension;
    if (observable.space.dimension != d) {
        throw std::invalid_argument("readout_estimate: observable space does not match config");
    }
    if (field_state.size() != d) {
        throw std::invalid_argument("readout_estimate: field state does not match the space");
    }
    if (std::abs(field_state.norm() - 1.0) > kAtomNormTol) {
        throw std::invalid_argument("readout_estimate: field state must be normalized");
    }
    const double top_weight = std::norm(field_state(d - 1)) + std::norm(field_state(d - 2));
    if (top_weight > kTopLevelWeightTol) {
        throw std::invalid_argument(
            "readout_estimate: field state carries weight on the top two Fock levels; "
            "enlarge the truncation");
    }

    const Matrix step = jc_step_unitary(config.field_space, config.coupling);
    const Vector psi = detail::evolved_reversed_state(field_state, step, config);
    const Matrix atomic = detail::transfer_atomic_image(observable.matrix, step, config);
    return detail::atomic_expectation(psi, atomic, d);
}

struct ReadoutRow {
    std::int64_t n = 0;
    double estimate = 0.0;
    double target = 0.0;
    double abs_error = 0.0;
    double residual = 0.0;
    bool trapping = false;
};

/// Convergence table over chain lengths n = 1..N: readout estimate against
/// the exact <f|A|f>, plus the reversed-form completeness residual per stage.
inline std::vector<ReadoutRow> readout_table(const Vector& field_state,
                                             const Operator& observable,
                                             const ReadoutChainConfig& config) {
    validate_config(config);
    detail::require_hermitian_observable(observable, "readout_table");
    const std::int64_t d = config.field_space.dimension;
    const Matrix step = jc_step_unitary(config.field_space, config.coupling);

    const Complex t = (field_state.adjoint() * (observable.matrix * field_state))(0);
    if (std::abs(t.imag()) > 1e-12) {
        throw std::runtime_error("readout_table: target expectation has imaginary residue");
    }
    const double target = t.real();
    const bool trapped = !trapping_warnings(config.coupling, config.field_space).empty();

    std::vector<ReadoutRow> rows;
    for (std::int64_t n = 1; n <= config.atom_count; ++n) {
        ReadoutChainConfig stage = config;
        stage.atom_count = n;
        if (!config.atom_initial.empty()) {
            stage.atom_initial.assign(config.atom_initial.begin(),
                                      config.atom_initial.begin() + n);
        }
        const double estimate = readout_estimate(field_state, observable, stage);
        const double residual =
            detail::reversed_atomic_image(observable.matrix, step, d, n).residual;
        rows.push_back({n, estimate, target, std::abs(estimate - target), residual, trapped});
    }
    return rows;
}

}  // namespace cvbell
