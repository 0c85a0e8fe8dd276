// optograv_cli: single points, sweeps, scaling fits, R_w grids and oracle validation runs.
// Exit codes: 0 ok, 1 validation tolerance breached, 2 config error, 3 solver failure.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <optograv/optograv.hpp>

using namespace optograv;

namespace {

constexpr int schema_version = 1;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- records ---------------------------------------------------------------

using Value = std::variant<std::monostate, double, long long, bool, std::string>;
using Row = std::vector<std::pair<std::string, Value>>;

std::string csv_field(const Value& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::monostate>) return "";
            else if constexpr (std::is_same_v<T, double>) return std::isnan(x) ? "" : fmt::format("{:.17g}", x + 0.0);
            else if constexpr (std::is_same_v<T, long long>) return std::to_string(x);
            else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
            else {
                if (x.find_first_of(",\"\n") == std::string::npos) return x;
                std::string q = "\"";
                for (char c : x) q += c == '"' ? std::string("\"\"") : std::string(1, c);
                return q + "\"";
            }
        },
        v);
}

std::string json_field(const Value& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::monostate>) return "null";
            else if constexpr (std::is_same_v<T, double>) return std::isfinite(x) ? fmt::format("{:.17g}", x + 0.0) : "null";
            else if constexpr (std::is_same_v<T, long long>) return std::to_string(x);
            else if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
            else return nlohmann::json(x).dump();
        },
        v);
}

class Writer {
public:
    Writer(std::ostream& os, bool jsonl) : os_(os), jsonl_(jsonl) {}
    void write(const Row& r) {
        if (jsonl_) {
            os_ << "{\"schema_version\":" << schema_version;
            for (const auto& [k, v] : r) os_ << ",\"" << k << "\":" << json_field(v);
            os_ << "}\n";
            return;
        }
        if (!header_done_) {
            os_ << "schema_version";
            for (const auto& kv : r) os_ << ',' << kv.first;
            os_ << '\n';
            header_done_ = true;
        }
        os_ << schema_version;
        for (const auto& kv : r) os_ << ',' << csv_field(kv.second);
        os_ << '\n';
    }

private:
    std::ostream& os_;
    bool jsonl_;
    bool header_done_ = false;
};

// ---- configuration ---------------------------------------------------------

const std::vector<std::string> param_names{"omega_b", "kappa",  "gamma_a", "gamma_b", "eta", "chi",
                                           "upsilon", "mass",   "g",       "G",       "theta", "F"};

struct Axis {
    std::string name;
    double lo = 0, hi = 0;
    int count = 1;
    bool log = false;
};

Axis parse_axis(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string t; std::getline(ss, t, ':');) parts.push_back(t);
    if (parts.size() < 4 || parts.size() > 5) throw ConfigError("sweep axis must be name:min:max:count[:log|lin], got " + s);
    Axis a;
    a.name = parts[0];
    if (std::find(param_names.begin(), param_names.end(), a.name) == param_names.end())
        throw ConfigError("sweep axis references unknown parameter " + a.name);
    try {
        a.lo = std::stod(parts[1]);
        a.hi = std::stod(parts[2]);
        a.count = std::stoi(parts[3]);
    } catch (const std::exception&) {
        throw ConfigError("sweep axis has a malformed number: " + s);
    }
    if (a.count < 1) throw ConfigError("sweep count must be >= 1");
    if (parts.size() == 5) {
        if (parts[4] != "log" && parts[4] != "lin") throw ConfigError("sweep spacing must be log or lin");
        a.log = parts[4] == "log";
    }
    if (a.log && (a.lo <= 0 || a.hi <= 0)) throw ConfigError("log sweep needs positive bounds");
    return a;
}

struct RunConfig {
    std::map<std::string, double> params;  // only what the user set
    std::vector<std::string> sweeps;
    std::string regime;
    std::string out = "-";
    std::string format = "csv";
    unsigned jobs = default_jobs();
    std::string dims;
    std::string preset;
    std::string provenance = "analytic";
    std::vector<double> ratios{0.9, 0.99, 0.999, 0.9999};
    double chi_sign = 1.0;
    bool oracle = false;
    bool amplitude = false;
    double tolerance = 0.05;
    long long seed = 0;  // reserved
    RatioGrid grid;
    std::string spacing = "log";
};

void set_param(SystemParams& p, const std::string& k, double v) {
    if (k == "omega_b") p.omega_b = v;
    else if (k == "kappa") p.kappa = v;
    else if (k == "gamma_a") p.gamma_a = v;
    else if (k == "gamma_b") p.gamma_b = v;
    else if (k == "eta") p.eta = v;
    else if (k == "chi") p.chi = v;
    else if (k == "upsilon") p.upsilon = v;
    else if (k == "mass") p.mass = v;
    else if (k == "g") p.g = v;
    else if (k == "G") p.set_G(v);
    else if (k == "theta") p.theta_tilt = v;
    else if (k == "F") p.force_F = v;
}

// G depends on mass and omega_b, so it goes last
SystemParams make_params(std::map<std::string, double> vals) {
    SystemParams p;
    std::optional<double> G;
    if (auto it = vals.find("G"); it != vals.end()) {
        G = it->second;
        vals.erase(it);
    }
    for (const auto& [k, v] : vals) set_param(p, k, v);
    if (G) p.set_G(*G);
    p.lambda = p.kappa;
    return p;
}

std::vector<SystemParams> points(const RunConfig& cfg, std::map<std::string, double> defaults) {
    for (const auto& [k, v] : cfg.params) defaults[k] = v;
    if (defaults.count("G") && cfg.params.count("g")) defaults.erase("G");
    if (defaults.count("g") && cfg.params.count("G")) defaults.erase("g");
    std::vector<Axis> axes;
    for (const auto& s : cfg.sweeps) axes.push_back(parse_axis(s));
    std::vector<std::map<std::string, double>> out{defaults};
    for (const Axis& a : axes) {
        std::vector<std::map<std::string, double>> next;
        for (const auto& base : out)
            for (double v : spaced(a.lo, a.hi, a.count, a.log)) {
                auto m = base;
                if (a.name == "G") m.erase("g");
                if (a.name == "g") m.erase("G");
                m[a.name] = v;
                next.push_back(m);
            }
        out = std::move(next);
    }
    std::vector<SystemParams> ps;
    for (const auto& m : out) {
        SystemParams p = make_params(m);
        p.validate();
        ps.push_back(p);
    }
    return ps;
}

Dims parse_dims(const std::string& s, Dims fallback) {
    if (s.empty()) return fallback;
    std::vector<int> v;
    std::stringstream ss(s);
    for (std::string t; std::getline(ss, t, ',');) {
        try {
            v.push_back(std::stoi(t));
        } catch (const std::exception&) {
            throw ConfigError("--dims expects A,B[,C]");
        }
    }
    if (v.size() < 2 || v.size() > 3) throw ConfigError("--dims expects A,B[,C]");
    for (int d : v)
        if (d < 2) throw ConfigError("--dims entries must be >= 2");
    return Dims{v[0], v[1], v.size() == 3 ? v[2] : 0};
}

Regime regime_or(const RunConfig& cfg, Regime fallback) {
    if (cfg.regime.empty()) return fallback;
    try {
        return regime_from_string(cfg.regime);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

std::vector<Coupling> couplings_of(const RunConfig& cfg) {
    if (cfg.regime.empty()) return {Coupling::Nonreciprocal, Coupling::Reciprocal};
    return {coupling_of(regime_or(cfg, Regime::NonreciprocalSingle))};
}

void put_params(Row& r, const SystemParams& p) {
    r.emplace_back("omega_b", p.omega_b);
    r.emplace_back("kappa", p.kappa);
    r.emplace_back("lambda", p.lambda);
    r.emplace_back("gamma_a", p.gamma_a);
    r.emplace_back("gamma_b", p.gamma_b);
    r.emplace_back("eta", p.eta);
    r.emplace_back("chi", p.chi);
    r.emplace_back("upsilon", p.upsilon);
    r.emplace_back("mass", p.mass);
    r.emplace_back("g", p.g);
    r.emplace_back("G", p.G());
    r.emplace_back("theta", p.theta_tilt);
    r.emplace_back("F", p.force_F);
}

std::string joined(const std::vector<std::string>& w) {
    std::string s;
    for (const auto& x : w) s += (s.empty() ? "" : "; ") + x;
    return s;
}

Value opt_value(bool have, double x) { return have ? Value(x) : Value(); }

// ---- subcommands -----------------------------------------------------------

std::vector<Row> cmd_steady(const RunConfig& cfg) {
    const Regime r = regime_or(cfg, Regime::NonreciprocalSingle);
    const auto ps = points(cfg, {});
    return parallel_map(ps.size(), cfg.jobs, [&](std::size_t i) {
        const SystemParams p = for_regime(ps[i], r);
        MeanFieldOptions o;
        o.allow_beyond_critical = true;
        MeanFieldState mf = steady(p, r, o);
        LinearSystem ls = build_drift(mf);
        Row row;
        row.emplace_back("regime", std::string(to_string(r)));
        put_params(row, mf.params);
        row.emplace_back("alpha_re", mf.alpha.real());
        row.emplace_back("alpha_im", mf.alpha.imag());
        row.emplace_back("beta_re", mf.beta.real());
        row.emplace_back("beta_im", mf.beta.imag());
        row.emplace_back("n", mf.n());
        row.emplace_back("homodyne_mean", mf.homodyne_mean());
        row.emplace_back("residual", mf.residual);
        row.emplace_back("distance_to_critical", mf.distance_to_critical);
        row.emplace_back("roots", static_cast<long long>(mf.roots.size()));
        row.emplace_back("bistable", mf.bistable);
        row.emplace_back("stable", ls.stable);
        for (int k = 0; k < 4; ++k) {
            row.emplace_back(fmt::format("ev{}_re", k), ls.eigenvalues(k).real());
            row.emplace_back(fmt::format("ev{}_im", k), ls.eigenvalues(k).imag());
        }
        std::optional<SteadyMoments> m;
        if (ls.stable) m = steady_covariance(ls);
        row.emplace_back("adag_a", opt_value(bool(m), m ? m->adag_a : 0));
        row.emplace_back("aa_re", opt_value(bool(m), m ? m->aa.real() : 0));
        row.emplace_back("aa_im", opt_value(bool(m), m ? m->aa.imag() : 0));
        row.emplace_back("bdag_b", opt_value(bool(m), m ? m->bdag_b : 0));
        const bool estimable = m && p.g != 0.0;
        double dg = 0;
        if (estimable) dg = uncertainty(p, r).delta_g;
        row.emplace_back("delta_g", opt_value(estimable, dg));
        if (!ls.stable) spdlog::warn("point {}: no stable steady state, reporting the formal fixed point", i);
        return row;
    });
}

Provenance provenance_of(const std::string& s) {
    if (s == "analytic") return Provenance::Analytic;
    if (s == "linearized_numeric") return Provenance::LinearizedNumeric;
    throw ConfigError("provenance must be analytic or linearized_numeric");
}

void put_report(Row& row, const MetrologyReport& rep) {
    row.emplace_back("provenance", std::string(to_string(rep.provenance)));
    row.emplace_back("signal", rep.signal);
    row.emplace_back("signal_G", rep.signal_G);
    row.emplace_back("noise_var", rep.noise_var);
    row.emplace_back("quadrature_var", rep.quadrature_var);
    row.emplace_back("delta_g", rep.delta_g);
    row.emplace_back("delta_G", rep.delta_G);
    row.emplace_back("validity_ratio", rep.validity_ratio);
    row.emplace_back("closed_form_delta_g", opt_value(bool(rep.closed_form_delta_g), rep.closed_form_delta_g.value_or(0)));
}

std::vector<Row> cmd_uncertainty(const RunConfig& cfg) {
    const Provenance prov = provenance_of(cfg.provenance);
    if (cfg.preset == "ratio") {
        const auto ps = points(cfg, {{"kappa", 0.05}, {"eta", 2.0}, {"G", 1.0}});
        return parallel_map(ps.size(), cfg.jobs, [&](std::size_t i) {
            RatioReport rr = regime_ratio(ps[i], prov);
            Row row;
            row.emplace_back("preset", std::string("ratio"));
            put_params(row, ps[i]);
            row.emplace_back("R", rr.R);
            row.emplace_back("delta_g_nonreciprocal", rr.nonreciprocal.delta_g);
            row.emplace_back("delta_g_reciprocal", rr.reciprocal.delta_g);
            row.emplace_back("validity_nonreciprocal", rr.nonreciprocal.validity_ratio);
            row.emplace_back("validity_reciprocal", rr.reciprocal.validity_ratio);
            const bool cf = rr.nonreciprocal.closed_form_delta_g && rr.reciprocal.closed_form_delta_g;
            row.emplace_back("R_closed_form", opt_value(cf, cf ? *rr.nonreciprocal.closed_form_delta_g /
                                                                    *rr.reciprocal.closed_form_delta_g
                                                              : 0));
            return row;
        });
    }
    if (cfg.preset == "two_photon_scaling") {
        if (cfg.ratios.size() < 2) throw ConfigError("two_photon_scaling needs at least two ratios");
        const auto ps = points(cfg, {{"kappa", 0.05}, {"eta", 2.0}, {"G", 50.0}});
        return parallel_map(ps.size(), cfg.jobs, [&](std::size_t i) {
            SystemParams p = with_coupling(ps[i], Coupling::Nonreciprocal);
            if (p.g == 0.0) throw DegenerateEstimand("degenerate estimand: g = 0");
            ScalingFits f = two_photon_scaling(p, cfg.ratios, cfg.chi_sign);
            Row row;
            row.emplace_back("preset", std::string("two_photon_scaling"));
            put_params(row, p);
            row.emplace_back("chi_c", chi_critical(p));
            row.emplace_back("points", static_cast<long long>(cfg.ratios.size()));
            row.emplace_back("signal_slope", f.signal_fit.slope);
            row.emplace_back("noise_slope", f.noise_fit.slope);
            row.emplace_back("delta_g_slope", f.delta_g_fit.slope);
            row.emplace_back("delta_g_rms", f.delta_g_fit.rms);
            return row;
        });
    }
    if (!cfg.preset.empty()) throw ConfigError("unknown preset " + cfg.preset);
    const Regime r = regime_or(cfg, Regime::NonreciprocalSingle);
    const auto ps = points(cfg, {});
    return parallel_map(ps.size(), cfg.jobs, [&](std::size_t i) {
        MetrologyReport rep = uncertainty(ps[i], r, prov);
        Row row;
        row.emplace_back("regime", std::string(to_string(r)));
        put_params(row, rep.mf.params);
        put_report(row, rep);
        return row;
    });
}

std::vector<Row> cmd_fig2(const RunConfig& cfg) {
    if (!cfg.sweeps.empty()) throw ConfigError("fig2 takes its grid from the grid options, not --sweep");
    SystemParams base = make_params([&] {
        std::map<std::string, double> m{{"eta", 0.01}};
        for (const auto& [k, v] : cfg.params) m[k] = v;
        return m;
    }());
    RatioGrid grid = cfg.grid;
    if (cfg.spacing != "log" && cfg.spacing != "lin") throw ConfigError("grid spacing must be log or lin");
    grid.log_spacing = cfg.spacing == "log";
    if (grid.n_kappa < 1 || grid.n_gamma_a < 1) throw ConfigError("grid counts must be >= 1");
    auto pts = ratio_sweep(base, grid, cfg.amplitude, cfg.jobs);
    std::vector<Row> rows;
    rows.reserve(pts.size());
    for (const auto& pt : pts) {
        SystemParams p = base;
        p.kappa = pt.kappa;
        p.gamma_a = pt.gamma_a;
        Row row;
        row.emplace_back("kappa", pt.kappa);
        row.emplace_back("gamma_a", pt.gamma_a);
        row.emplace_back("omega_b", base.omega_b);
        row.emplace_back("gamma_b", base.gamma_b);
        row.emplace_back("R_w", pt.R_w);
        row.emplace_back("R_w_small_kappa", rw_small_kappa(p));
        row.emplace_back("R_w_amplitude", opt_value(cfg.amplitude, pt.R_w_amplitude));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<Row> cmd_qfi(const RunConfig& cfg, const Dims& dims) {
    const auto ps = points(cfg, {{"eta", 0.01}});
    const auto cs = couplings_of(cfg);
    auto rows = parallel_map(ps.size() * cs.size(), cfg.jobs, [&](std::size_t i) {
        const SystemParams& p = ps[i / cs.size()];
        const Coupling c = cs[i % cs.size()];
        QfiResult q = qfi(p, c, cfg.tolerance);
        Row row;
        row.emplace_back("coupling", std::string(to_string(c)));
        put_params(row, with_coupling(p, c));
        row.emplace_back("closed_form", q.closed_form);
        row.emplace_back("numeric", q.numeric);
        row.emplace_back("richardson_rel", q.richardson_rel);
        row.emplace_back("full_state", q.full_state);
        row.emplace_back("rel_mismatch", q.rel_mismatch);
        row.emplace_back("closed_form_flagged", q.closed_form_flagged);
        double oq = 0;
        if (cfg.oracle) oq = numeric_qfi(p, c, dims).qfi;
        row.emplace_back("oracle_qfi", opt_value(cfg.oracle, oq));
        row.emplace_back("warnings", joined(q.warnings));
        for (const auto& w : q.warnings) spdlog::warn("{}", w);
        return row;
    });
    return rows;
}

std::vector<Row> cmd_validate(const RunConfig& cfg, const Dims& dims, bool& breached) {
    const auto ps = points(cfg, {{"eta", 0.05}, {"G", 1.0}});
    const auto cs = couplings_of(cfg);
    const double tol = cfg.tolerance;
    // truncation consistency compares half dims against dims
    const Dims half{std::max(2, dims.a / 2), std::max(2, dims.b / 2), 0};
    auto groups = parallel_map(ps.size() * cs.size(), cfg.jobs, [&](std::size_t i) {
        const Coupling c = cs[i % cs.size()];
        const SystemParams p = with_coupling(ps[i / cs.size()], c);
        const Regime r = c == Coupling::Nonreciprocal ? Regime::NonreciprocalSingle : Regime::ReciprocalSingle;
        spdlog::info("validate point {} ({})", i / cs.size(), to_string(c));
        TruncationCheck tc = truncation_check(p, c, half, 0.01);
        HomodyneMoments h = homodyne_moments(tc.fine);
        MeanFieldState mf = steady(p, r);
        SteadyMoments m = steady_covariance(build_drift(mf));
        std::vector<Row> out;
        // predicted == nullopt: oracle value is checked against the tolerance directly
        auto add = [&](const char* obs, double oracle, std::optional<double> predicted, double t) {
            const double err = predicted ? std::abs(oracle - *predicted) / std::max(std::abs(*predicted), 1e-300) : oracle;
            Row row;
            row.emplace_back("coupling", std::string(to_string(c)));
            put_params(row, p);
            row.emplace_back("observable", std::string(obs));
            row.emplace_back("oracle", oracle);
            row.emplace_back("predicted", opt_value(bool(predicted), predicted.value_or(0)));
            row.emplace_back("rel_error", opt_value(bool(predicted), err));
            row.emplace_back("tolerance", t);
            row.emplace_back("pass", err <= t);
            out.push_back(std::move(row));
        };
        add("photons_a", h.photons_a, mf.n() + m.adag_a, tol);
        add("homodyne_mean", h.mean, mf.homodyne_mean(), tol);
        add("homodyne_variance", h.variance, 1.0 + 2.0 * m.adag_a, tol);
        add("photons_a_half_dims", tc.photons_coarse, tc.photons_fine, 0.01);
        add("top_population", tc.fine.top_population, std::nullopt, OracleOptions{}.top_threshold);
        for (const auto& w : tc.fine.warnings) spdlog::warn("{}", w);
        return out;
    });
    std::vector<Row> rows;
    for (auto& g : groups)
        for (auto& r : g) {
            if (!std::get<bool>(r.back().second)) breached = true;
            rows.push_back(std::move(r));
        }
    return rows;
}

}  // namespace

int main(int argc, char** argv) {
    auto logger = spdlog::stderr_color_mt("optograv");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* lv = std::getenv("OPTOGRAV_LOG")) {
        const std::string s = lv;
        if (s == "error" || s == "warn" || s == "info" || s == "debug") spdlog::set_level(spdlog::level::from_str(s));
        else spdlog::warn("ignoring OPTOGRAV_LOG={}", s);
    }

    CLI::App app{"optograv: gravimetry with a dissipatively coupled optomechanical cavity"};
    app.fallthrough();
    app.set_config("--config", "", "flat key = value file, flags override it");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1, 1);
    auto* steady_cmd = app.add_subcommand("steady", "mean-field amplitudes, drift spectrum and covariance");
    auto* unc_cmd = app.add_subcommand("uncertainty", "homodyne gravimetric uncertainty");
    auto* fig2_cmd = app.add_subcommand("fig2", "weak-drive R_w grid over kappa and gamma_a");
    auto* qfi_cmd = app.add_subcommand("qfi", "weak-drive quantum Fisher information");
    auto* val_cmd = app.add_subcommand("validate", "Lindblad oracle against mean-field + linearized predictions");

    RunConfig cfg;
    std::map<std::string, double> raw;
    for (const auto& name : param_names) {
        app.add_option_function<double>("--" + name, [&raw, name](double v) { raw[name] = v; }, "system parameter " + name)
            ->group("Parameters");
    }
    app.add_option("--sweep", cfg.sweeps, "axis name:min:max:count[:log|lin], repeatable, first is outermost");
    app.add_option("--regime", cfg.regime, "nonreciprocal_single, reciprocal_single, *_two_photon, *_mpa");
    app.add_option("--out", cfg.out, "output path, - for stdout");
    app.add_option("--format", cfg.format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));
    app.add_option("--jobs", cfg.jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--dims", cfg.dims, "Fock truncation A,B[,C]");
    app.add_option("--preset", cfg.preset, "uncertainty preset: ratio or two_photon_scaling");
    app.add_option("--provenance", cfg.provenance, "analytic or linearized_numeric");
    app.add_option("--ratios", cfg.ratios, "chi / chi_c values for two_photon_scaling")->delimiter(',');
    app.add_option("--chi-sign", cfg.chi_sign, "branch of chi for two_photon_scaling")->check(CLI::IsMember({1.0, -1.0}));
    app.add_flag("--oracle", cfg.oracle, "also run the Lindblad oracle where supported");
    app.add_flag("--amplitude", cfg.amplitude, "fig2: add the numeric amplitude R_w surface");
    app.add_option("--tolerance", cfg.tolerance, "relative tolerance for qfi flags and validate")->check(CLI::PositiveNumber);
    app.add_option("--seed", cfg.seed, "reserved, all computations are deterministic");
    app.add_option("--kappa-min", cfg.grid.kappa_min)->group("Grid");
    app.add_option("--kappa-max", cfg.grid.kappa_max)->group("Grid");
    app.add_option("--gamma-a-min", cfg.grid.gamma_a_min)->group("Grid");
    app.add_option("--gamma-a-max", cfg.grid.gamma_a_max)->group("Grid");
    app.add_option("--n-kappa", cfg.grid.n_kappa)->group("Grid");
    app.add_option("--n-gamma-a", cfg.grid.n_gamma_a)->group("Grid");
    app.add_option("--spacing", cfg.spacing, "log or lin")->group("Grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    cfg.params = raw;
    if (cfg.params.count("g") && cfg.params.count("G")) {
        std::cerr << "config error: set either g or G, not both\n";
        return 2;
    }

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (cfg.out != "-") {
        file.open(cfg.out, std::ios::binary);
        if (!file) {
            std::cerr << "config error: cannot write " << cfg.out << "\n";
            return 2;
        }
        os = &file;
    }

    bool breached = false;
    std::vector<Row> rows;
    try {
        if (*steady_cmd) rows = cmd_steady(cfg);
        else if (*unc_cmd) rows = cmd_uncertainty(cfg);
        else if (*fig2_cmd) rows = cmd_fig2(cfg);
        else if (*qfi_cmd) rows = cmd_qfi(cfg, parse_dims(cfg.dims, Dims{4, 4}));
        else if (*val_cmd) rows = cmd_validate(cfg, parse_dims(cfg.dims, Dims{6, 6}), breached);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParamError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    }

    Writer w(*os, cfg.format == "jsonl");
    for (const auto& r : rows) w.write(r);
    os->flush();
    spdlog::info("{} records written", rows.size());
    if (breached) {
        std::cerr << "validation: tolerance breached\n";
        return 1;
    }
    return 0;
}
