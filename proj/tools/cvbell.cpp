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

// Command-line surface: identity checks, violation sweeps, angle
// optimization and atom-chain readout scans, emitting CSV/JSON tables.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cvbell/bell.hpp"
#include "cvbell/fock.hpp"
#include "cvbell/jcreadout.hpp"
#include "cvbell/optimize.hpp"
#include "cvbell/rng.hpp"
#include "cvbell/states.hpp"
#include "cvbell/version.hpp"

namespace {

using namespace cvbell;

constexpr double kMaxCliSqueezing = 10.0;  // K(10) is 1 to ~4e-18; larger r only inflates cutoffs
constexpr std::int64_t kMaxCheckPairs = 16;

// 17 significant digits: round-trip exact for doubles.
std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 8);
    for (const char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    return out;
}

struct Manifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> parameters;
};

// SOURCE_DATE_EPOCH freezes the stamp for reproducible output bytes.
std::string iso8601_utc_now() {
    std::time_t t = std::time(nullptr);
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
        char* end = nullptr;
        const long long parsed = std::strtoll(env, &end, 10);
        if (end != env && *end == '\0') t = static_cast<std::time_t>(parsed);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string manifest_json(const Manifest& m) {
    std::ostringstream out;
    out << "{\"command\":\"" << json_escape(m.command) << "\",\"parameters\":{";
    bool first = true;
    for (const auto& [key, value] : m.parameters) {
        if (!first) out << ",";
        first = false;
        out << "\"" << json_escape(key) << "\":\"" << json_escape(value) << "\"";
    }
    out << "},\"tool_version\":\"" << kVersion << "\",\"timestamp\":\"" << iso8601_utc_now()
        << "\"}";
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot open output path: " + path);
    out << content;
    out.flush();
    if (!out) throw std::invalid_argument("failed while writing: " + path);
}

// CSV files stay byte-stable; the manifest travels as a sidecar.
void emit_csv(const std::string& out_path, const std::string& csv, const Manifest& manifest) {
    if (out_path.empty()) {
        std::cout << csv;
        return;
    }
    write_file(out_path, csv);
    write_file(out_path + ".manifest.json", manifest_json(manifest) + "\n");
}

void emit_json(const std::string& out_path, const std::string& json) {
    if (out_path.empty()) {
        std::cout << json;
        return;
    }
    write_file(out_path, json);
}

std::vector<double> parse_double_list(const std::string& csv, const char* what) {
    std::vector<double> out;
    std::stringstream stream(csv);
    std::string item;
    while (std::getline(stream, item, ',')) {
        std::size_t consumed = 0;
        double value = 0.0;
        try {
            value = std::stod(item, &consumed);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string(what) + ": cannot parse '" + item + "'");
        }
        if (consumed != item.size()) {
            throw std::invalid_argument(std::string(what) + ": cannot parse '" + item + "'");
        }
        out.push_back(value);
    }
    if (out.empty()) throw std::invalid_argument(std::string(what) + ": empty list");
    return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& csv, const char* what) {
    std::vector<std::int64_t> out;
    for (const double v : parse_double_list(csv, what)) {
        const auto i = static_cast<std::int64_t>(v);
        if (static_cast<double>(i) != v) {
            throw std::invalid_argument(std::string(what) + ": expected integers");
        }
        out.push_back(i);
    }
    return out;
}

// ---------------------------------------------------------------------------
// check: pseudospin algebra, involution, B^2 identity, Cirel'son bound.

struct CheckRow {
    std::string name;
    std::int64_t pair_count;
    std::int64_t samples;
    double max_residual;
    double tolerance;
    bool pass;
};

int run_check(const std::vector<std::int64_t>& pair_counts, std::uint64_t seed,
              const std::string& out_path) {
    for (const auto p : pair_counts) {
        if (p < 1) throw std::invalid_argument("check: pair counts must be >= 1");
        if (p > kMaxCheckPairs) {
            throw std::invalid_argument("check: pair counts above " +
                                        std::to_string(kMaxCheckPairs) +
                                        " exceed the two-mode materialization guard");
        }
    }

    Rng rng(seed);
    std::vector<CheckRow> rows;
    for (const auto pairs : pair_counts) {
        const FockSpace space = make_space(pairs);
        const Matrix sz = pseudospin_z(space).matrix;
        const Matrix sp = pseudospin_plus(space).matrix;
        const Matrix sm = pseudospin_minus(space).matrix;

        double comm = (sz * sp - sp * sz - 2.0 * sp).cwiseAbs().maxCoeff();
        comm = std::max(comm, (sz * sm - sm * sz + 2.0 * sm).cwiseAbs().maxCoeff());
        comm = std::max(comm, (sp * sm - sm * sp - sz).cwiseAbs().maxCoeff());
        rows.push_back({"commutators", pairs, 1, comm, 1e-14, comm <= 1e-14});

        double invol = 0.0;
        const Matrix eye = Matrix::Identity(space.dimension, space.dimension);
        for (int i = 0; i < 100; ++i) {
            const Matrix c = pseudospin_component(space, rng.direction()).matrix;
            invol = std::max(invol, (c * c - eye).cwiseAbs().maxCoeff());
        }
        rows.push_back({"involution", pairs, 100, invol, 1e-14, invol <= 1e-14});

        double b2 = 0.0;
        for (int i = 0; i < 50; ++i) {
            b2 = std::max(b2, bell_squared_residual(space, space, rng.settings()));
        }
        rows.push_back({"bell_squared_identity", pairs, 50, b2, 1e-12, b2 <= 1e-12});

        double norm_max = 0.0;
        for (int i = 0; i < 50; ++i) {
            norm_max = std::max(norm_max, spectral_bound(bell_operator(space, space, rng.settings())));
        }
        const double cirelson_tol = kCirelsonBound + 1e-10;
        rows.push_back({"cirelson_bound", pairs, 50, norm_max, cirelson_tol,
                        norm_max <= cirelson_tol});
    }

    bool all_pass = true;
    for (const auto& row : rows) {
        std::printf("%-22s pairs=%-4lld samples=%-4lld max=%-13.6g tol=%-10.3g %s\n",
                    row.name.c_str(), static_cast<long long>(row.pair_count),
                    static_cast<long long>(row.samples), row.max_residual, row.tolerance,
                    row.pass ? "PASS" : "FAIL");
        if (!row.pass) {
            all_pass = false;
            std::printf("FAILED check: %s at pairs=%lld\n", row.name.c_str(),
                        static_cast<long long>(row.pair_count));
        }
    }

    if (!out_path.empty()) {
        std::string csv = "check,pair_count,samples,max_residual,tolerance,status\n";
        for (const auto& row : rows) {
            csv += row.name + "," + std::to_string(row.pair_count) + "," +
                   std::to_string(row.samples) + "," + fmt17(row.max_residual) + "," +
                   fmt17(row.tolerance) + "," + (row.pass ? "pass" : "fail") + "\n";
        }
        Manifest manifest{"check",
                          {{"pairs", [&] {
                                std::string s;
                                for (const auto p : pair_counts) {
                                    if (!s.empty()) s += ",";
                                    s += std::to_string(p);
                                }
                                return s;
                            }()},
                           {"seed", std::to_string(seed)}}};
        emit_csv(out_path, csv, manifest);
    }
    return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// violation: canonical-maximum sweep over squeezing values.

int run_violation(const std::string& r_spec, double tail_tol, const std::string& out_path,
                  const std::string& format) {
    const std::vector<double> rs = parse_double_list(r_spec, "violation --r");
    for (const double r : rs) {
        if (!(r >= 0.0)) throw std::invalid_argument("violation: squeezing values must be >= 0");
        if (r > kMaxCliSqueezing) {
            throw std::invalid_argument("violation: squeezing capped at 10 on the CLI");
        }
    }
    if (format != "csv" && format != "json") {
        throw std::invalid_argument("violation: format must be csv or json");
    }

    const auto rows = violation_curve(rs, tail_tol);
    Manifest manifest{"violation",
                      {{"r", r_spec}, {"tail_tol", fmt17(tail_tol)}, {"format", format}}};

    if (format == "csv") {
        std::string csv = "r,K,theta_b_star,bell_max_analytic,bell_max_numeric,pair_count,tail_mass\n";
        for (const auto& row : rows) {
            csv += fmt17(row.r) + "," + fmt17(row.big_k) + "," + fmt17(row.theta_b_star) + "," +
                   fmt17(row.bell_max_analytic) + "," + fmt17(row.bell_max_numeric) + "," +
                   std::to_string(row.pair_count) + "," + fmt17(row.tail_mass) + "\n";
        }
        emit_csv(out_path, csv, manifest);
    } else {
        std::ostringstream json;
        json << "{\"manifest\":" << manifest_json(manifest) << ",\"rows\":[";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& row = rows[i];
            if (i) json << ",";
            json << "{\"r\":" << fmt17(row.r) << ",\"K\":" << fmt17(row.big_k)
                 << ",\"theta_b_star\":" << fmt17(row.theta_b_star)
                 << ",\"bell_max_analytic\":" << fmt17(row.bell_max_analytic)
                 << ",\"bell_max_numeric\":" << fmt17(row.bell_max_numeric)
                 << ",\"pair_count\":" << row.pair_count
                 << ",\"tail_mass\":" << fmt17(row.tail_mass) << "}";
        }
        json << "]}\n";
        emit_json(out_path, json.str());
    }
    return 0;
}

// ---------------------------------------------------------------------------
// optimize: full eight-angle search against the closed-form maximum.

int run_optimize(double r, double tail_tol, std::int64_t grid_points, std::int64_t max_evals,
                 double objective_tol, const std::string& out_path) {
    if (!(r >= 0.0)) throw std::invalid_argument("optimize: r must be >= 0");
    if (r > kMaxCliSqueezing) throw std::invalid_argument("optimize: squeezing capped at 10");

    const SqueezingParameter sp(r);
    const double big_k = std::tanh(2.0 * r);
    const auto space = make_space(required_pair_count(sp, tail_tol));
    const auto state = nopa_state(sp, space, space);

    SearchOptions options;
    options.grid_points = grid_points;
    options.max_evaluations = max_evals;
    options.objective_tolerance = objective_tol;
    options.analytic_reference = 2.0 * std::sqrt(1.0 + big_k * big_k);

    OptimumReport report = optimize_settings(state, options);
    report.squeezing_r = r;

    Manifest manifest{"optimize",
                      {{"r", fmt17(r)},
                       {"tail_tol", fmt17(tail_tol)},
                       {"grid_points", std::to_string(grid_points)},
                       {"max_evals", std::to_string(max_evals)},
                       {"tol", fmt17(objective_tol)}}};
    std::ostringstream json;
    json << "{\"manifest\":" << manifest_json(manifest) << ",\"rows\":[{";
    json << "\"r\":" << fmt17(r) << ",\"pair_count\":" << report.pair_count
         << ",\"value\":" << fmt17(report.value)
         << ",\"analytic_value\":" << fmt17(*report.analytic_value)
         << ",\"gap\":" << fmt17(*report.gap)
         << ",\"evaluations\":" << report.evaluations
         << ",\"theta_a\":" << fmt17(report.settings.a.theta())
         << ",\"phi_a\":" << fmt17(report.settings.a.phi())
         << ",\"theta_a_prime\":" << fmt17(report.settings.a_prime.theta())
         << ",\"phi_a_prime\":" << fmt17(report.settings.a_prime.phi())
         << ",\"theta_b\":" << fmt17(report.settings.b.theta())
         << ",\"phi_b\":" << fmt17(report.settings.b.phi())
         << ",\"theta_b_prime\":" << fmt17(report.settings.b_prime.theta())
         << ",\"phi_b_prime\":" << fmt17(report.settings.b_prime.phi()) << "}]}\n";
    emit_json(out_path, json.str());
    return *report.gap <= 1e-6 ? 0 : 1;
}

// ---------------------------------------------------------------------------
// readout: atom-chain convergence table.

Operator parse_observable(const std::string& spec, const FockSpace& space) {
    if (spec == "sz") return pseudospin_z(space);
    if (spec == "sx") return pseudospin_x(space);
    if (spec == "sy") return pseudospin_y(space);
    if (spec == "identity") return identity_op(space);
    const std::string prefix = "stheta:";
    if (spec.rfind(prefix, 0) == 0) {
        const std::string args = spec.substr(prefix.size());
        const auto colon = args.find(':');
        const std::string theta_text = colon == std::string::npos ? args : args.substr(0, colon);
        const std::string phi_text = colon == std::string::npos ? "" : args.substr(colon + 1);
        const auto values = parse_double_list(
            phi_text.empty() ? theta_text : theta_text + "," + phi_text, "readout --obs");
        const double theta = values.at(0);
        const double phi = values.size() > 1 ? values.at(1) : 0.0;
        return pseudospin_component(space, MeasurementDirection(theta, phi));
    }
    throw std::invalid_argument("readout: unknown observable spec '" + spec +
                                "' (use sz, sx, sy, identity, stheta:<rad>[:<phi>])");
}

Vector parse_field_state(const std::string& spec, const FockSpace& space) {
    if (spec == "plus") {
        Vector v = Vector::Zero(space.dimension);
        v(0) = 1.0 / std::sqrt(2.0);
        v(1) = 1.0 / std::sqrt(2.0);
        return v;
    }
    const std::string prefix = "fock:";
    if (spec.rfind(prefix, 0) == 0) {
        const auto level = parse_int_list(spec.substr(prefix.size()), "readout --state").at(0);
        if (level < 0 || level >= space.dimension) {
            throw std::invalid_argument("readout: Fock level outside the truncation");
        }
        Vector v = Vector::Zero(space.dimension);
        v(level) = 1.0;
        return v;
    }
    throw std::invalid_argument("readout: unknown state spec '" + spec +
                                "' (use fock:<n> or plus)");
}

int run_readout(double gt, std::int64_t atoms, const std::string& obs_spec,
                const std::string& state_spec, std::int64_t pairs, const std::string& out_path) {
    const FockSpace space = make_space(pairs);
    ReadoutChainConfig config;
    config.field_space = space;
    config.coupling = gt;
    config.atom_count = atoms;
    validate_config(config);

    const Operator observable = parse_observable(obs_spec, space);
    const Vector field_state = parse_field_state(state_spec, space);
    const auto rows = readout_table(field_state, observable, config);

    std::string csv = "n,estimate,target,abs_error,residual,trapping_flag\n";
    for (const auto& row : rows) {
        csv += std::to_string(row.n) + "," + fmt17(row.estimate) + "," + fmt17(row.target) + "," +
               fmt17(row.abs_error) + "," + fmt17(row.residual) + "," +
               (row.trapping ? "1" : "0") + "\n";
    }
    Manifest manifest{"readout",
                      {{"gt", fmt17(gt)},
                       {"n", std::to_string(atoms)},
                       {"obs", obs_spec},
                       {"state", state_spec},
                       {"pairs", std::to_string(pairs)}}};
    emit_csv(out_path, csv, manifest);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bell-CHSH tests for continuous-variable states via parity-spin observables"};
    app.require_subcommand(1);

    std::string pairs_spec = "1,2,8";
    std::uint64_t seed = 0;
    std::string check_out;
    auto* check = app.add_subcommand("check", "run the operator identity suite");
    check->add_option("--pairs", pairs_spec, "comma-separated pair counts");
    check->add_option("--seed", seed, "seed for random directions/settings");
    check->add_option("--out", check_out, "write the detail table (CSV) here");

    std::string r_spec = "0,0.5,1,2,5";
    double tail_tol = 1e-12;
    std::string violation_out, violation_format = "csv";
    auto* violation = app.add_subcommand("violation", "canonical violation sweep over r");
    violation->add_option("--r", r_spec, "comma-separated squeezing values");
    violation->add_option("--tail-tol", tail_tol, "truncation tail tolerance");
    violation->add_option("--out", violation_out, "output path (default: stdout)");
    violation->add_option("--format", violation_format, "csv or json");

    double opt_r = 1.0, opt_tail = 1e-12, opt_tol = 1e-9;
    std::int64_t opt_grid = 33, opt_evals = 20000;
    std::string optimize_out;
    auto* optimize = app.add_subcommand("optimize", "search the eight CHSH angles");
    optimize->add_option("--r", opt_r, "squeezing parameter");
    optimize->add_option("--tail-tol", opt_tail, "truncation tail tolerance");
    optimize->add_option("--grid-points", opt_grid, "coarse grid points per polar angle");
    optimize->add_option("--max-evals", opt_evals, "refinement evaluation budget");
    optimize->add_option("--tol", opt_tol, "objective tolerance");
    optimize->add_option("--out", optimize_out, "output path (default: stdout)");

    double gt = 1.0;
    std::int64_t atoms = 6, readout_pairs = 4;
    std::string obs_spec = "sz", state_spec = "fock:0", readout_out;
    auto* readout = app.add_subcommand("readout", "atom-chain readout convergence scan");
    readout->add_option("--gt", gt, "dimensionless coupling g*t_I");
    readout->add_option("--n", atoms, "number of atoms");
    readout->add_option("--obs", obs_spec, "sz, sx, sy, identity, stheta:<rad>[:<phi>]");
    readout->add_option("--state", state_spec, "fock:<n> or plus");
    readout->add_option("--pairs", readout_pairs, "field truncation pair count");
    readout->add_option("--out", readout_out, "output path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(check)) {
            return run_check(parse_int_list(pairs_spec, "check --pairs"), seed, check_out);
        }
        if (app.got_subcommand(violation)) {
            return run_violation(r_spec, tail_tol, violation_out, violation_format);
        }
        if (app.got_subcommand(optimize)) {
            return run_optimize(opt_r, opt_tail, opt_grid, opt_evals, opt_tol, optimize_out);
        }
        if (app.got_subcommand(readout)) {
            return run_readout(gt, atoms, obs_spec, state_spec, readout_pairs, readout_out);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
