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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "cvbell/bell.hpp"
#include "cvbell/parallel.hpp"
#include "cvbell/states.hpp"

namespace cvbell {

struct SearchOptions {
    std::int64_t grid_points = 33;        // coarse grid per polar angle on [0, pi)
    double objective_tolerance = 1e-9;    // simplex stopping tolerance
    std::int64_t max_evaluations = 20000; // refinement budget
    std::optional<double> analytic_reference;
};

struct OptimumReport {
    BellSettings settings;
    double value = 0.0;
    std::optional<double> analytic_value;
    std::optional<double> gap;
    std::optional<double> squeezing_r;
    std::int64_t pair_count = 0;
    std::int64_t evaluations = 0;
};

struct SweepRow {
    double r = 0.0;
    double big_k = 0.0;  // K = tanh(2r)
    double theta_b_star = 0.0;
    double bell_max_analytic = 0.0;
    double bell_max_numeric = 0.0;
    std::int64_t pair_count = 0;
    double tail_mass = 0.0;
};

/// theta_a = 0, theta_a' = pi/2, theta_b' = -theta_b, zero azimuths.
inline BellSettings canonical_chsh_settings(double theta_b) {
    return {MeasurementDirection(0.0, 0.0), MeasurementDirection(std::numbers::pi / 2.0, 0.0),
            MeasurementDirection(theta_b, 0.0), MeasurementDirection(-theta_b, 0.0)};
}

namespace detail {

/// T_ij = <s_i (x) s_j> over the Cartesian axes; E(a, b) = a . T b since the
/// pseudospin component is linear in the direction vector.
inline Eigen::Matrix3d correlation_matrix(const TwoModeState& state) {
    const std::array<MeasurementDirection, 3> axes = {
        MeasurementDirection(std::numbers::pi / 2.0, 0.0),
        MeasurementDirection(std::numbers::pi / 2.0, std::numbers::pi / 2.0),
        MeasurementDirection(0.0, 0.0)};
    Eigen::Matrix3d t;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            t(i, j) = correlation(state, axes[i], axes[j]).value;
        }
    }
    return t;
}

inline Eigen::Vector3d direction_vector(double theta, double phi) {
    const double st = std::sin(theta);
    return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

struct ChshObjective {
    Eigen::Matrix3d t;
    std::int64_t evaluations = 0;

    double operator()(const std::array<double, 8>& x) {
        ++evaluations;
        const Eigen::Vector3d a = direction_vector(x[0], x[1]);
        const Eigen::Vector3d ap = direction_vector(x[2], x[3]);
        const Eigen::Vector3d tb = t * direction_vector(x[4], x[5]);
        const Eigen::Vector3d tbp = t * direction_vector(x[6], x[7]);
        return a.dot(tb + tbp) + ap.dot(tb - tbp);
    }
};

/// Deterministic Nelder-Mead over 8 angles (minimization). Stops when the
/// simplex value spread drops below ftol or the budget runs out.
template <typename F>
std::pair<std::array<double, 8>, double> nelder_mead(F&& f, const std::array<double, 8>& start,
                                                     const std::array<double, 8>& step,
                                                     double ftol, std::int64_t max_evals,
                                                     std::int64_t& used_evals) {
    constexpr int n = 8;
    constexpr double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    using Point = std::array<double, n>;

    std::array<Point, n + 1> xs;
    std::array<double, n + 1> fs;
    auto eval = [&](const Point& p) {
        ++used_evals;
        return f(p);
    };

    xs[0] = start;
    fs[0] = eval(start);
    for (int i = 0; i < n; ++i) {
        xs[i + 1] = start;
        xs[i + 1][i] += step[i];
        fs[i + 1] = eval(xs[i + 1]);
    }

    std::array<int, n + 1> order;
    while (true) {
        for (int i = 0; i <= n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](int lhs, int rhs) { return fs[lhs] < fs[rhs]; });
        {
            std::array<Point, n + 1> xs2;
            std::array<double, n + 1> fs2;
            for (int i = 0; i <= n; ++i) {
                xs2[i] = xs[order[i]];
                fs2[i] = fs[order[i]];
            }
            xs = xs2;
            fs = fs2;
        }
        if (fs[n] - fs[0] <= ftol || used_evals >= max_evals) break;

        Point centroid{};
        for (int i = 0; i < n; ++i) {
            for (int d = 0; d < n; ++d) centroid[d] += xs[i][d];
        }
        for (int d = 0; d < n; ++d) centroid[d] /= n;

        Point reflected;
        for (int d = 0; d < n; ++d) reflected[d] = centroid[d] + alpha * (centroid[d] - xs[n][d]);
        const double f_reflected = eval(reflected);

        if (f_reflected < fs[0]) {
            Point expanded;
            for (int d = 0; d < n; ++d) expanded[d] = centroid[d] + gamma * (reflected[d] - centroid[d]);
            const double f_expanded = eval(expanded);
            if (f_expanded < f_reflected) {
                xs[n] = expanded;
                fs[n] = f_expanded;
            } else {
                xs[n] = reflected;
                fs[n] = f_reflected;
            }
        } else if (f_reflected < fs[n - 1]) {
            xs[n] = reflected;
            fs[n] = f_reflected;
        } else {
            const bool outside = f_reflected < fs[n];
            Point contracted;
            const Point& base = outside ? reflected : xs[n];
            for (int d = 0; d < n; ++d) contracted[d] = centroid[d] + rho * (base[d] - centroid[d]);
            const double f_contracted = eval(contracted);
            if (f_contracted < (outside ? f_reflected : fs[n])) {
                xs[n] = contracted;
                fs[n] = f_contracted;
            } else {
                for (int i = 1; i <= n; ++i) {
                    for (int d = 0; d < n; ++d) xs[i][d] = xs[0][d] + sigma * (xs[i][d] - xs[0][d]);
                    fs[i] = eval(xs[i]);
                }
            }
        }
    }
    return {xs[0], fs[0]};
}

using DirectionQuad = std::array<Eigen::Vector3d, 4>;  // a, a', b, b'

/// CHSH value is invariant under these direction substitutions; the orbit is
/// finite and used to pick a canonical representative of a found maximizer.
inline std::vector<DirectionQuad> symmetry_orbit(const DirectionQuad& start) {
    auto negate = [](const Eigen::Vector3d& v) { return Eigen::Vector3d(-v); };
    auto apply = [&](const DirectionQuad& q, int generator) -> DirectionQuad {
        switch (generator) {
            case 0: return {negate(q[0]), negate(q[1]), negate(q[2]), negate(q[3])};
            case 1: return {q[0], negate(q[1]), q[3], q[2]};
            default: return {q[1], q[0], q[2], negate(q[3])};
        }
    };
    auto key = [](const DirectionQuad& q) {
        std::array<std::int64_t, 12> k{};
        int idx = 0;
        for (const auto& v : q) {
            for (int c = 0; c < 3; ++c) {
                k[idx++] = static_cast<std::int64_t>(std::llround(v(c) * 1e9));
            }
        }
        return k;
    };

    std::vector<DirectionQuad> orbit{start};
    std::set<std::array<std::int64_t, 12>> seen{key(start)};
    for (std::size_t cursor = 0; cursor < orbit.size() && orbit.size() < 512; ++cursor) {
        const DirectionQuad current = orbit[cursor];
        for (int g = 0; g < 3; ++g) {
            DirectionQuad image = apply(current, g);
            if (seen.insert(key(image)).second) orbit.push_back(image);
        }
    }
    return orbit;
}

inline std::array<double, 8> canonical_angles(const DirectionQuad& q) {
    std::array<double, 8> out{};
    for (int i = 0; i < 4; ++i) {
        const MeasurementDirection d = MeasurementDirection::from_vector(q[i]);
        out[2 * i] = d.theta();
        out[2 * i + 1] = d.phi();
    }
    return out;
}

/// Lexicographic order on quantized angle tuples (exact compare breaks ties)
/// so float dust cannot flip the canonical choice.
inline bool angles_less(const std::array<double, 8>& lhs, const std::array<double, 8>& rhs) {
    for (int i = 0; i < 8; ++i) {
        const auto ql = std::llround(lhs[i] * 1e7);
        const auto qr = std::llround(rhs[i] * 1e7);
        if (ql != qr) return ql < qr;
    }
    return lhs < rhs;
}

inline BellSettings lexicographic_orbit_minimum(const DirectionQuad& quad) {
    const auto orbit = symmetry_orbit(quad);
    std::array<double, 8> best = canonical_angles(orbit.front());
    for (std::size_t i = 1; i < orbit.size(); ++i) {
        const auto candidate = canonical_angles(orbit[i]);
        if (angles_less(candidate, best)) best = candidate;
    }
    return {MeasurementDirection(best[0], best[1]), MeasurementDirection(best[2], best[3]),
            MeasurementDirection(best[4], best[5]), MeasurementDirection(best[6], best[7])};
}

/// The CHSH maximum is degenerate along a continuum: with E(a, b) = a.T b,
/// the value at conditionally optimal (a, a') depends only on the plane
/// spanned by (b, b'), not on the basis chosen inside it. A found maximizer
/// is therefore canonicalized by (i) extracting that plane, (ii) rotating its
/// basis so the first vector maps closest to +z under T (smallest theta_a
/// first, matching the lexicographic tie-break), (iii) rebuilding b, b' and
/// the conditionally optimal a, a' from the closed form, and (iv) resolving
/// the remaining discrete sign/swap ties over the symmetry orbit.
inline BellSettings canonicalize_settings(const std::array<double, 8>& raw_angles,
                                          const Eigen::Matrix3d& t) {
    using V3 = Eigen::Vector3d;
    const V3 b = direction_vector(raw_angles[4], raw_angles[5]);
    const V3 bp = direction_vector(raw_angles[6], raw_angles[7]);
    const V3 sum = b + bp;
    const V3 diff = b - bp;  // exactly orthogonal to sum for unit b, b'

    V3 e1, e2;
    const double n_sum = sum.norm();
    const double n_diff = diff.norm();
    if (n_sum > 1e-9 && n_diff > 1e-9) {
        e1 = sum / n_sum;
        e2 = (diff - diff.dot(e1) * e1).normalized();
    } else {
        e1 = (n_sum >= n_diff ? sum : diff).normalized();
        const V3 helper = std::abs(e1.z()) < 0.9 ? V3(0, 0, 1) : V3(1, 0, 0);
        e2 = (helper - helper.dot(e1) * e1).normalized();
    }

    auto alignment = [&](double angle) {
        const V3 c = std::cos(angle) * e1 + std::sin(angle) * e2;
        const V3 tc = t * c;
        const double norm = tc.norm();
        return norm > 1e-15 ? tc.z() / norm : -2.0;
    };
    constexpr int samples = 2048;
    double best_angle = 0.0;
    double best_alignment = alignment(0.0);
    for (int k = 1; k < samples; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / samples;
        const double value = alignment(angle);
        if (value > best_alignment) {
            best_alignment = value;
            best_angle = angle;
        }
    }
    double lo = best_angle - 2.0 * std::numbers::pi / samples;
    double hi = best_angle + 2.0 * std::numbers::pi / samples;
    for (int iteration = 0; iteration < 200; ++iteration) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (alignment(m1) < alignment(m2)) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    const double angle_star = 0.5 * (lo + hi);

    const V3 c0 = std::cos(angle_star) * e1 + std::sin(angle_star) * e2;
    const V3 c0p = -std::sin(angle_star) * e1 + std::cos(angle_star) * e2;
    const V3 tc0 = t * c0;
    const V3 tc0p = t * c0p;
    const double s = tc0.norm();
    const double w = tc0p.norm();
    const double chi = std::atan2(w, s);
    const V3 new_b = std::cos(chi) * c0 + std::sin(chi) * c0p;
    const V3 new_bp = std::cos(chi) * c0 - std::sin(chi) * c0p;
    const V3 new_a = s > 1e-12 ? V3(tc0 / s) : V3(0, 0, 1);
    const V3 new_ap = w > 1e-12 ? V3(tc0p / w) : new_a;
    return lexicographic_orbit_minimum({new_a, new_ap, new_b, new_bp});
}

}  // namespace detail

/// Canonical-family maximum at theta_b = arctan(K): analytic value
/// 2 sqrt(1 + K^2) plus the numeric Bell expectation at an auto-selected
/// truncation (tail below tail_tol).
inline OptimumReport canonical_optimum(SqueezingParameter r, double tail_tol = 1e-12) {
    const double big_k = std::tanh(2.0 * r.value);
    const double theta_star = std::atan(big_k);
    const std::int64_t pairs = required_pair_count(r, tail_tol);
    const FockSpace space = make_space(pairs);
    const TwoModeState state = nopa_state(r, space, space);
    const BellSettings settings = canonical_chsh_settings(theta_star);
    const double numeric = bell_expectation(state, settings).value;
    const double analytic = 2.0 * std::sqrt(1.0 + big_k * big_k);

    OptimumReport report;
    report.settings = settings;
    report.value = numeric;
    report.analytic_value = analytic;
    report.gap = std::abs(numeric - analytic);
    report.squeezing_r = r.value;
    report.pair_count = pairs;
    report.evaluations = 1;
    return report;
}

/// Deterministic two-stage search over the eight CHSH angles: a coarse grid
/// over the four polar angles (azimuths seeded at zero), then Nelder-Mead
/// refinement of all eight angles with shrinking polish rounds. Ties and
/// degenerate maxima are resolved by returning the lexicographically smallest
/// angle tuple over the CHSH symmetry orbit of the found maximizer.
inline OptimumReport optimize_settings(const TwoModeState& state,
                                       const SearchOptions& options = {}) {
    if (options.grid_points < 2) {
        throw std::invalid_argument("optimize_settings: grid_points must be >= 2");
    }
    if (!(options.objective_tolerance > 0.0)) {
        throw std::invalid_argument("optimize_settings: objective_tolerance must be > 0");
    }
    if (options.max_evaluations < 100) {
        throw std::invalid_argument("optimize_settings: max_evaluations must be >= 100");
    }

    detail::ChshObjective objective{detail::correlation_matrix(state)};

    // Stage 1: polar grid on [0, pi), azimuths zero. E(a, b) = a . T b lets the
    // grid collapse to a table of pairwise dot products.
    const std::int64_t g = options.grid_points;
    std::vector<double> thetas(static_cast<std::size_t>(g));
    for (std::int64_t k = 0; k < g; ++k) {
        thetas[static_cast<std::size_t>(k)] =
            std::numbers::pi * static_cast<double>(k) / static_cast<double>(g);
    }
    std::vector<Eigen::Vector3d> unit(static_cast<std::size_t>(g));
    std::vector<Eigen::Vector3d> t_unit(static_cast<std::size_t>(g));
    for (std::int64_t k = 0; k < g; ++k) {
        unit[static_cast<std::size_t>(k)] = detail::direction_vector(thetas[static_cast<std::size_t>(k)], 0.0);
        t_unit[static_cast<std::size_t>(k)] = objective.t * unit[static_cast<std::size_t>(k)];
    }
    Eigen::MatrixXd dots(g, g);
    for (std::int64_t i = 0; i < g; ++i) {
        for (std::int64_t j = 0; j < g; ++j) {
            dots(i, j) = unit[static_cast<std::size_t>(i)].dot(t_unit[static_cast<std::size_t>(j)]);
        }
    }
    double best_value = -std::numeric_limits<double>::infinity();
    std::array<std::int64_t, 4> best_idx{0, 0, 0, 0};
    for (std::int64_t ia = 0; ia < g; ++ia) {
        for (std::int64_t iap = 0; iap < g; ++iap) {
            for (std::int64_t ib = 0; ib < g; ++ib) {
                for (std::int64_t ibp = 0; ibp < g; ++ibp) {
                    const double value =
                        dots(ia, ib) + dots(ia, ibp) + dots(iap, ib) - dots(iap, ibp);
                    if (value > best_value) {
                        best_value = value;
                        best_idx = {ia, iap, ib, ibp};
                    }
                }
            }
        }
    }
    objective.evaluations += g * g * g * g;

    // Stage 2: simplex refinement with two tighter polish rounds so the argmax
    // is pinned well below the reporting tolerances.
    std::array<double, 8> x = {thetas[static_cast<std::size_t>(best_idx[0])], 0.0,
                               thetas[static_cast<std::size_t>(best_idx[1])], 0.0,
                               thetas[static_cast<std::size_t>(best_idx[2])], 0.0,
                               thetas[static_cast<std::size_t>(best_idx[3])], 0.0};
    auto negated = [&](const std::array<double, 8>& p) { return -objective(p); };
    const std::array<std::array<double, 8>, 3> round_steps = {{
        {0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 0.2},
        {5e-3, 5e-3, 5e-3, 5e-3, 5e-3, 5e-3, 5e-3, 5e-3},
        {1e-4, 1e-4, 1e-4, 1e-4, 1e-4, 1e-4, 1e-4, 1e-4},
    }};
    const std::array<double, 3> round_tols = {options.objective_tolerance,
                                              std::min(options.objective_tolerance, 1e-12), 1e-14};
    std::int64_t refine_evals = 0;
    for (int round = 0; round < 3; ++round) {
        if (refine_evals >= options.max_evaluations) break;
        x = detail::nelder_mead(negated, x, round_steps[static_cast<std::size_t>(round)],
                                round_tols[static_cast<std::size_t>(round)],
                                options.max_evaluations, refine_evals)
                .first;
    }

    const BellSettings settings = detail::canonicalize_settings(x, objective.t);
    const double value = bell_expectation(state, settings).value;

    OptimumReport report;
    report.settings = settings;
    report.value = value;
    report.analytic_value = options.analytic_reference;
    if (options.analytic_reference) {
        report.gap = std::abs(value - *options.analytic_reference);
    }
    report.pair_count = state.space_1().pair_count;
    report.evaluations = objective.evaluations;
    return report;
}

/// One row per squeezing value, truncation auto-selected per row; rows are
/// computed independently (possibly concurrently) and returned in input order.
inline std::vector<SweepRow> violation_curve(const std::vector<double>& r_values,
                                             double tail_tol) {
    for (const double r : r_values) {
        if (!std::isfinite(r) || r < 0.0) {
            throw std::invalid_argument("violation_curve: squeezing values must be finite and >= 0");
        }
    }
    if (!(tail_tol > 0.0) || !(tail_tol < 1.0)) {
        throw std::invalid_argument("violation_curve: tail_tol must lie in (0, 1)");
    }
    std::vector<SweepRow> rows(r_values.size());
    parallel_for_indexed(static_cast<std::int64_t>(r_values.size()), [&](std::int64_t i) {
        const SqueezingParameter r(r_values[static_cast<std::size_t>(i)]);
        const double big_k = std::tanh(2.0 * r.value);
        const double theta_star = std::atan(big_k);
        const std::int64_t pairs = required_pair_count(r, tail_tol);
        const FockSpace space = make_space(pairs);
        const TwoModeState state = nopa_state(r, space, space);
        const double numeric = bell_expectation(state, canonical_chsh_settings(theta_star)).value;
        rows[static_cast<std::size_t>(i)] =
            SweepRow{r.value,  big_k, theta_star, 2.0 * std::sqrt(1.0 + big_k * big_k),
                     numeric, pairs, *state.tail_mass()};
    });
    return rows;
}

}  // namespace cvbell
