#pragma once

// Command-line front end: configuration parsing (flags over an optional JSON
// document) and dispatch to the dataset generators.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qslsense/analytic.hpp"
#include "qslsense/csv.hpp"
#include "qslsense/datasets.hpp"
#include "qslsense/labframe.hpp"
#include "qslsense/policy.hpp"
#include "qslsense/response.hpp"
#include "qslsense/selfcheck.hpp"
#include "qslsense/units.hpp"

namespace qsl::cli {

enum class Command { metrics, kernel, bode, fig2, fig3b, fig3c, fig3d, fig4d, offaxis, optimal, qsl };

inline const std::map<std::string, Command> &command_names() {
    static const std::map<std::string, Command> m{
        {"metrics", Command::metrics}, {"kernel", Command::kernel},   {"bode", Command::bode},
        {"fig2", Command::fig2},       {"fig3b", Command::fig3b},     {"fig3c", Command::fig3c},
        {"fig3d", Command::fig3d},     {"fig4d", Command::fig4d},     {"offaxis", Command::offaxis},
        {"optimal", Command::optimal}, {"qsl", Command::qsl}};
    return m;
}

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kConfigError = 2, kNumericError = 3, kIoError = 4 };

enum class ParamKind { quantity, integer, text, boolean };

struct ParamSpec {
    ParamKind kind;
    units::Dimension dim = units::Dimension::dimensionless;
    const char *help;
};

/// Every parameter a command may read, keyed by its flag name.
inline const std::map<std::string, ParamSpec> &param_specs() {
    using units::Dimension;
    static const std::map<std::string, ParamSpec> m{
        {"rabi", {ParamKind::quantity, Dimension::frequency, "Rabi frequency, e.g. 10MHz or 6.3e7rad/s"}},
        {"alpha", {ParamKind::quantity, Dimension::angle, "flip angle per pulse, e.g. 90deg"}},
        {"tau", {ParamKind::quantity, Dimension::time, "total sequence duration, e.g. 50ns"}},
        {"chi", {ParamKind::quantity, Dimension::angle, "stimulus off-axis angle (lab backend)"}},
        {"omega", {ParamKind::quantity, Dimension::frequency, "signal frequency (optimal)"}},
        {"omega-max", {ParamKind::quantity, Dimension::frequency, "upper end of the Bode grid"}},
        {"detuning", {ParamKind::quantity, Dimension::frequency, "static detuning (qsl)"}},
        {"b0", {ParamKind::quantity, Dimension::field, "bias field for the lab backend, e.g. 4T"}},
        {"points", {ParamKind::integer, Dimension::dimensionless, "number of grid points"}},
        {"steps-per-tau", {ParamKind::integer, Dimension::dimensionless, "kernel probe positions per tau"}},
        {"backend", {ParamKind::text, Dimension::dimensionless, "rotating (default) or lab"}},
        {"basis", {ParamKind::text, Dimension::dimensionless, "ms0 (default) or ms-1 (lab backend)"}},
        {"extended", {ParamKind::boolean, Dimension::dimensionless, "allow flip angles up to 180 deg"}},
    };
    return m;
}

struct RunConfig {
    std::optional<Command> command;
    bool check = false;
    std::map<std::string, std::string> parameters;  ///< raw text, units included
    std::filesystem::path output_path;
    bool expensive = false;
    std::size_t workers = 0;
};

/// Parameter values after unit conversion.
class Parameters {
  public:
    explicit Parameters(const std::map<std::string, std::string> &raw) : raw_(raw) {}

    bool has(const std::string &key) const { return raw_.count(key) != 0; }

    std::optional<double> quantity(const std::string &key) const {
        const auto it = raw_.find(key);
        if (it == raw_.end()) return std::nullopt;
        return units::parse_quantity(it->second, param_specs().at(key).dim, key);
    }

    double quantity_or(const std::string &key, double fallback) const { return quantity(key).value_or(fallback); }

    std::optional<std::size_t> integer(const std::string &key) const {
        const auto it = raw_.find(key);
        if (it == raw_.end()) return std::nullopt;
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(it->second, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == 0 || used != it->second.size() || v <= 0)
            throw ConfigError("--" + key + ": expected a positive integer, got '" + it->second + "'");
        return static_cast<std::size_t>(v);
    }

    std::string text_or(const std::string &key, const std::string &fallback) const {
        const auto it = raw_.find(key);
        return it == raw_.end() ? fallback : it->second;
    }

    bool flag(const std::string &key) const {
        const auto it = raw_.find(key);
        if (it == raw_.end()) return false;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError("--" + key + ": expected true or false, got '" + it->second + "'");
    }

  private:
    std::map<std::string, std::string> raw_;
};

struct Timing {
    double rabi = 0.0;
    double tau = 0.0;
};

/// Resolves (rabi, tau) from any two of rabi, alpha and tau; alpha = rabi tau / 2.
/// Missing values fall back to the given defaults; all three must agree when given.
inline Timing resolve_timing(const Parameters &p, std::optional<double> default_rabi = std::nullopt,
                             std::optional<double> default_tau = std::nullopt) {
    auto rabi = p.quantity("rabi");
    auto alpha = p.quantity("alpha");
    auto tau = p.quantity("tau");
    const int given = (rabi ? 1 : 0) + (alpha ? 1 : 0) + (tau ? 1 : 0);
    if (given == 3) {
        const double implied = 0.5 * *rabi * *tau;
        if (std::abs(implied - *alpha) > 1e-9 * std::abs(*alpha)) {
            std::ostringstream os;
            os << "--rabi, --alpha and --tau are over-determined and inconsistent: rabi*tau/2 = " << implied
               << " rad but alpha = " << *alpha << " rad";
            throw ConfigError(os.str());
        }
    }
    if (rabi && tau) return {*rabi, *tau};
    if (alpha && tau) return {2.0 * *alpha / *tau, *tau};
    if (alpha && rabi) return {*rabi, 2.0 * *alpha / *rabi};
    if (alpha && default_tau) return {2.0 * *alpha / *default_tau, *default_tau};
    if (rabi && default_tau) return {*rabi, *default_tau};
    if (tau && default_rabi) return {*default_rabi, *tau};
    if (default_rabi && default_tau) return {*default_rabi, *default_tau};
    throw ConfigError("missing timing: give two of --rabi, --alpha, --tau");
}

inline nlohmann::json read_config_document(const std::filesystem::path &path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config document '" + path.string() + "'");
    try {
        return nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError("config document '" + path.string() + "': " + e.what());
    }
}

inline std::string json_scalar_text(const std::string &key, const nlohmann::json &v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) {
        // A bare number cannot carry a unit; only dimensionless parameters accept one.
        if (param_specs().at(key).kind == ParamKind::quantity)
            throw ConfigError("parameter '" + key + "': missing unit (write the value as a string such as \"10MHz\")");
        return csv::format_number(v.get<double>(), 17);
    }
    throw ConfigError("parameter '" + key + "': unsupported value type");
}

/// Raised by parse_config for --help; carries the rendered usage text.
class HelpRequested : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Parses argv (without the program name) plus an optional --config document.
/// Flags given on the command line win over document values.
inline RunConfig parse_config(const std::vector<std::string> &args) {
    CLI::App app{"qslsense: bipartite Ramsey sensing models and datasets"};
    std::string command, config_path, out;
    bool check = false, expensive = false;
    std::size_t workers = 0;
    std::map<std::string, std::string> flags;
    app.add_option("command", command, "one of: metrics kernel bode fig2 fig3b fig3c fig3d fig4d offaxis optimal qsl");
    app.add_option("--config", config_path, "JSON configuration document");
    app.add_option("--out", out, "output directory (default: $QSLSENSE_OUTPUT_DIR or .)");
    app.add_flag("--check", check, "run the analytic cross-checks and print a pass/fail table");
    app.add_flag("--expensive", expensive, "full-scale lab-frame runs (40 T bias field)");
    app.add_option("--workers", workers, "worker threads (0 = hardware concurrency)");
    for (const auto &[key, spec] : param_specs()) {
        if (spec.kind == ParamKind::boolean)
            app.add_flag_callback("--" + key, [&flags, k = key] { flags[k] = "true"; }, spec.help);
        else
            app.add_option_function<std::string>(
                "--" + key, [&flags, k = key](const std::string &v) { flags[k] = v; }, spec.help);
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError &e) {
        throw ConfigError(e.what());
    }

    RunConfig cfg;
    if (!config_path.empty()) {
        const auto doc = read_config_document(config_path);
        if (!doc.is_object()) throw ConfigError("config document must be a JSON object");
        try {
            for (const auto &[key, v] : doc.items()) {
                if (key == "command") {
                    command = command.empty() ? v.get<std::string>() : command;
                } else if (key == "output") {
                    if (out.empty()) out = v.get<std::string>();
                } else if (key == "expensive") {
                    expensive = expensive || v.get<bool>();
                } else if (key == "workers") {
                    if (workers == 0) workers = v.get<std::size_t>();
                } else if (key == "parameters") {
                    if (!v.is_object()) throw ConfigError("config document: 'parameters' must be an object");
                    for (const auto &[pk, pv] : v.items()) {
                        if (!param_specs().count(pk)) throw ConfigError("config document: unknown parameter '" + pk + "'");
                        cfg.parameters[pk] = json_scalar_text(pk, pv);
                    }
                } else {
                    throw ConfigError("config document: unknown key '" + key + "'");
                }
            }
        } catch (const nlohmann::json::exception &e) {
            throw ConfigError(std::string("config document: ") + e.what());
        }
    }
    for (const auto &[k, v] : flags) cfg.parameters[k] = v;

    cfg.check = check;
    cfg.expensive = expensive;
    cfg.workers = workers;
    if (!command.empty()) {
        const auto it = command_names().find(command);
        if (it == command_names().end()) throw ConfigError("unknown command '" + command + "'");
        cfg.command = it->second;
    }
    if (!cfg.command && !cfg.check) throw ConfigError("no command given (use --help for the list)");
    if (!out.empty()) {
        cfg.output_path = out;
    } else if (const char *env = std::getenv("QSLSENSE_OUTPUT_DIR"); env && *env) {
        cfg.output_path = env;
    } else {
        cfg.output_path = ".";
    }
    return cfg;
}

/// Output sink: one CSV per dataset inside the output directory.
class Emitter {
  public:
    Emitter(std::filesystem::path dir, std::ostream &log) : dir_(std::move(dir)), log_(log) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec || !std::filesystem::is_directory(dir_))
            throw csv::WriteError("cannot create output directory '" + dir_.string() + "'");
    }

    void emit(const std::string &stem, const csv::Table &t) {
        const auto path = dir_ / (stem + ".csv");
        csv::write_file(path, t);
        log_ << "wrote " << path.string() << " (" << t.rows.size() << " rows)\n";
    }

  private:
    std::filesystem::path dir_;
    std::ostream &log_;
};

inline lab::Basis parse_basis(const std::string &s) {
    if (s == "ms0") return lab::Basis::ms0;
    if (s == "ms-1") return lab::Basis::ms_minus1;
    throw ConfigError("--basis: expected ms0 or ms-1, got '" + s + "'");
}

/// --b0 if given, otherwise 40 T with --expensive and the scaled field without.
inline double bias_field(const RunConfig &cfg, const Parameters &p) {
    return p.quantity_or("b0", cfg.expensive ? lab::kPaperBiasField : lab::kScaledBiasField);
}

inline response::ProtocolRunner make_runner(const RunConfig &cfg, const Parameters &p, const Timing &t) {
    const auto backend = p.text_or("backend", "rotating");
    if (backend == "rotating") return response::rotating_frame_runner(t.rabi, t.tau);
    if (backend != "lab") throw ConfigError("--backend: expected rotating or lab, got '" + backend + "'");
    const double b0 = bias_field(cfg, p);
    const auto model = lab::make_resonant_model(b0, t.rabi, p.quantity_or("chi", 0.0));
    return response::lab_frame_runner(model, t.tau, parse_basis(p.text_or("basis", "ms0")));
}

inline void dispatch(const RunConfig &cfg, Emitter &out) {
    const Parameters p(cfg.parameters);
    constexpr double two_pi = 2.0 * std::numbers::pi;
    switch (*cfg.command) {
        case Command::metrics: {
            const auto t = resolve_timing(p);
            out.emit("metrics", datasets::metrics_table(t.rabi, t.tau));
            break;
        }
        case Command::kernel: {
            const auto t = resolve_timing(p);
            const auto runner = make_runner(cfg, p, t);
            response::KernelOptions ko;
            ko.workers = cfg.workers;
            const auto grid = datasets::kernel_grid(t.tau, p.integer("steps-per-tau").value_or(50));
            out.emit("kernel", response::kernel_table(response::estimate_kernel(runner, grid, ko)));
            break;
        }
        case Command::bode: {
            const auto t = resolve_timing(p);
            const auto runner = make_runner(cfg, p, t);
            response::BodeOptions bo;
            bo.workers = cfg.workers;
            bo.chi = p.quantity_or("chi", 0.0);
            const auto grid =
                numeric::linspace(0.0, p.quantity_or("omega-max", 8.0 * t.rabi), p.integer("points").value_or(161));
            out.emit("bode", response::bode_table(response::bode_response(runner, grid, 0.0, bo)));
            break;
        }
        case Command::fig2: {
            datasets::Fig2Options o;
            o.rabi = p.quantity_or("rabi", o.rabi);
            o.points_per_branch = p.integer("points").value_or(o.points_per_branch);
            out.emit("fig2", datasets::fig2_table(o));
            break;
        }
        case Command::fig3b:
        case Command::fig3c: {
            datasets::FamilyOptions o;
            o.tau = p.quantity_or("tau", o.tau);
            o.workers = cfg.workers;
            o.steps_per_tau = p.integer("steps-per-tau").value_or(o.steps_per_tau);
            o.bode_points = p.integer("points").value_or(o.bode_points);
            const auto tables = *cfg.command == Command::fig3b ? datasets::fig3b_tables(o) : datasets::fig3c_tables(o);
            for (const auto &nt : tables) out.emit(nt.name, nt.table);
            break;
        }
        case Command::fig3d: {
            datasets::SurfaceDatasetOptions o;
            o.rabi = p.quantity_or("rabi", o.rabi);
            o.surface.extended_range = p.flag("extended");
            o.surface.workers = cfg.workers;
            if (auto n = p.integer("points")) o.omega_points = o.tau_points = *n;
            const auto s = datasets::fig3d_surface(o);
            out.emit("fig3d_surface", optimize::surface_table(s));
            out.emit("fig3d_ridge", optimize::ridge_table(s));
            break;
        }
        case Command::fig4d: {
            datasets::Fig4dOptions o;
            o.bias_field = bias_field(cfg, p);
            if (auto n = p.integer("points")) o.rabi_over_d = numeric::logspace(0.01, 8.0, *n);
            o.workers = cfg.workers;
            out.emit("fig4d", datasets::fig4d_table(datasets::fig4d(o)));
            break;
        }
        case Command::offaxis: {
            datasets::OffAxisOptions o;
            o.rabi = p.quantity_or("rabi", o.rabi);
            o.workers = cfg.workers;
            if (auto chi = p.quantity("chi")) o.chis = {*chi};
            const auto series = datasets::offaxis_series(o);
            for (const auto &s : series)
                out.emit("offaxis_chi" + csv::format_number(s.chi / datasets::kDeg, 6) + "deg", response::bode_table(s));
            break;
        }
        case Command::optimal: {
            const double rabi = p.quantity_or("rabi", two_pi * 10e6);
            optimize::OptimalOptions oo;
            oo.extended_range = p.flag("extended");
            std::vector<double> omegas;
            if (auto w = p.quantity("omega"))
                omegas = {*w};
            else
                omegas = numeric::linspace(0.0, 4.0 * rabi, p.integer("points").value_or(81));
            out.emit("optimal", datasets::optimal_table(rabi, omegas, oo));
            break;
        }
        case Command::qsl: {
            const auto rabi = p.quantity("rabi");
            if (!rabi) throw ConfigError("qsl: missing --rabi");
            const double detuning = p.quantity_or("detuning", 0.0);
            const auto s = spin_operators<kSpinHalf>();
            const SpinMatrix2 h = detuning * s.z + *rabi * s.y;
            const auto eig = hermitian_eigen(h);
            const auto t = analytic::qsl_times<2>({h, StateVector2::basis(0), eig.values[0]});
            out.emit("qsl", csv::Table{{"rabi_rad_s", "detuning_rad_s", "t_mt_s", "t_ml_s"},
                                       {{*rabi, detuning, t.mandelstam_tamm, t.margolus_levitin}}});
            break;
        }
    }
}

/// Runs a parsed configuration and maps failures onto exit codes.
inline int run(const RunConfig &cfg, std::ostream &log = std::cout, std::ostream &err = std::cerr) {
    try {
        int status = kOk;
        if (cfg.check) {
            for (const auto &r : check::analytic_checks()) {
                check::print_line(log, r);
                if (!r.passed) status = kCheckFailed;
            }
        }
        if (cfg.command) {
            Emitter out(cfg.output_path, log);
            dispatch(cfg, out);
        }
        return status;
    } catch (const ConfigError &e) {
        err << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ContractError &e) {
        err << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DomainError &e) {
        err << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const NumericError &e) {
        err << "numeric failure: " << e.what() << '\n';
        return kNumericError;
    } catch (const csv::WriteError &e) {
        err << "output error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::filesystem::filesystem_error &e) {
        err << "output error: " << e.what() << '\n';
        return kIoError;
    }
}

/// Full entry point: parse, run, and report parse errors with exit code 2.
inline int main_entry(int argc, char **argv, std::ostream &log = std::cout, std::ostream &err = std::cerr) {
    std::vector<std::string> args(argv + 1, argv + argc);
    RunConfig cfg;
    try {
        cfg = parse_config(args);
    } catch (const HelpRequested &h) {
        log << h.what();
        return kOk;
    } catch (const ConfigError &e) {
        err << "configuration error: " << e.what() << '\n';
        return kConfigError;
    }
    return run(cfg, log, err);
}

}  // namespace qsl::cli
