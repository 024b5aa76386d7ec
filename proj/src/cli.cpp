#include "layered/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "layered/bisfield.hpp"
#include "layered/csv.hpp"
#include "layered/errors.hpp"
#include "layered/hopping.hpp"
#include "layered/parallel.hpp"
#include "layered/topology.hpp"

namespace layered::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct UsageError : ConfigError {
    using ConfigError::ConfigError;
};

const std::vector<std::pair<std::string, std::string>> option_keys = {
    {"model", "monolayer model: qwz | haldane"},
    {"m", "mass parameter (accepts e.g. 2sqrt3)"},
    {"stacking", "abba | ba"},
    {"layers", "layer count N"},
    {"t", "interlayer hopping"},
    {"axis", "quench axis j (1, 2, 3)"},
    {"observable", "auto | global | subspace"},
    {"subspace", "ABBA subspace label r (0: all)"},
    {"grid", "momentum grid resolution per axis"},
    {"out", "output directory"},
    {"tol-bis", "BIS acceptance tolerance"},
    {"tol-deg", "relative degeneracy tolerance"},
    {"delta", "finite-difference step across the BIS"},
    {"threads", "worker threads (fallback: QT_THREADS)"},
    {"filled", "filled bands for chern (0: half filling)"},
    {"t-range", "t range a:b"},
    {"m-range", "m range a:b"},
    {"steps", "scan steps: n or nt,nm"},
    {"chern-grid", "Chern grid per cell"},
    {"sigma1", "measured <s1> at (pi/4, 0)"},
    {"sigma2", "measured <s2> at (0, pi/4)"},
    {"sigma3", "measured <s3> at (0, 0)"},
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, std::string v) {
    v = trim(v);
    double factor = 1.0;
    for (const std::string suffix : {"*sqrt3", "sqrt3", "*sqrt(3)", "sqrt(3)"}) {
        if (v.size() >= suffix.size() && v.compare(v.size() - suffix.size(), suffix.size(), suffix) == 0) {
            factor = std::sqrt(3.0);
            v = v.substr(0, v.size() - suffix.size());
            if (v.empty()) v = "1";
            break;
        }
    }
    try {
        size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
        return x * factor;
    } catch (const std::exception&) {
        throw ConfigError("invalid number for " + key + ": '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        int x = std::stoi(trim(v), &used);
        if (used != trim(v).size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("invalid integer for " + key + ": '" + v + "'");
    }
}

std::pair<double, double> parse_range(const std::string& key, const std::string& v) {
    auto c = v.find(':');
    if (c == std::string::npos) throw ConfigError(key + " must look like a:b, got '" + v + "'");
    double a = parse_double(key, v.substr(0, c)), b = parse_double(key, v.substr(c + 1));
    if (!(b >= a)) throw ConfigError(key + " must satisfy a <= b");
    return {a, b};
}

bool parse_bool(const std::string& key, const std::string& v) {
    std::string s = trim(v);
    if (s == "1" || s == "true" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "no") return false;
    throw ConfigError("invalid boolean for " + key + ": '" + v + "'");
}

int resolve_cli_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QT_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
    }
    return resolve_threads(0);
}

json config_json(const RunConfig& c) {
    // threads and out are left out: they do not change results
    return json{{"model", to_string(c.model)},
                {"m", c.m},
                {"stacking", to_string(c.stacking)},
                {"layers", c.layers},
                {"t", c.t},
                {"axis", c.axis},
                {"observable", c.observable},
                {"subspace", c.subspace},
                {"grid", c.grid},
                {"tol_bis", c.tol_bis},
                {"tol_deg", c.tol_deg},
                {"delta", c.delta},
                {"filled", c.filled},
                {"t_range", {c.t_min, c.t_max}},
                {"m_range", {c.m_min, c.m_max}},
                {"steps", {c.t_steps, c.m_steps}},
                {"chern_grid", c.chern_grid}};
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    f << text;
    if (!f) throw Error("failed writing " + p.string());
}

fs::path prepare_out(const RunConfig& c) {
    fs::path dir(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& c, json extra = {}) {
    json m{{"tool", "layered"}, {"version", version}, {"command", command}, {"config", config_json(c)}};
    for (auto& [k, v] : extra.items()) m[k] = v;
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

std::vector<TaspSource> bis_sources(const RunConfig& c) {
    LayeredConfig cfg = c.layered();
    std::string obs = c.observable;
    if (obs == "auto") obs = cfg.stacking == Stacking::ABBA && cfg.layers > 1 ? "subspace" : "global";
    if (obs == "global") return {TaspSource::global(cfg, c.axis)};
    if (obs != "subspace") throw ConfigError("unknown observable '" + c.observable + "'");
    if (cfg.stacking != Stacking::ABBA) throw ConfigError("subspace observables need abba stacking");
    if (c.subspace > cfg.layers) throw ConfigError("subspace label exceeds layer count");
    std::vector<TaspSource> out;
    for (int r = 1; r <= cfg.layers; ++r)
        if (c.subspace == 0 || c.subspace == r) out.push_back(TaspSource::subspace(cfg, r, c.axis));
    return out;
}

struct BisRun {
    std::vector<BisContour> contours;
    std::vector<WindingResult> windings;
    int rejected = 0;
    int total = 0;
    int layer_factor = 1;
};

BisRun run_bis(const RunConfig& c) {
    BisRun run;
    int threads = resolve_cli_threads(c.threads);
    for (const auto& src : bis_sources(c)) {
        auto grid = sample_grid(src, c.grid, c.grid, threads);
        auto rep = characterize(grid, c.tol_bis, c.delta);
        run.layer_factor = src.layer_factor();
        run.rejected += static_cast<int>(rep.extraction.rejected.size());
        run.total += rep.total;
        for (size_t i = 0; i < rep.extraction.accepted.size(); ++i) {
            run.contours.push_back(std::move(rep.extraction.accepted[i]));
            run.windings.push_back(rep.windings[i]);
        }
    }
    return run;
}

json bis_summary(const RunConfig& c, const BisRun& run, bool with_files) {
    json contours = json::array();
    for (size_t i = 0; i < run.contours.size(); ++i) {
        json e{{"index", i},
               {"component", run.contours[i].tag},
               {"points", run.contours[i].points.size()},
               {"winding", run.windings[i].value},
               {"raw", run.windings[i].raw},
               {"residual", run.windings[i].residual},
               {"wrap", run.contours[i].wrap}};
        if (with_files) {
            char name[32];
            std::snprintf(name, sizeof name, "contour_%03zu.csv", i);
            e["file"] = name;
        }
        contours.push_back(e);
    }
    return json{{"contours", contours},
                {"total_w", run.total},
                {"layer_factor", run.layer_factor},
                {"rejected", run.rejected},
                {"note", run.contours.empty() ? "no BIS" : ""},
                {"config", config_json(c)}};
}

int cmd_tasp(const RunConfig& c, std::ostream& out) {
    LayeredConfig cfg = c.layered();
    TaspSource src = TaspSource::global(cfg, c.axis);
    if (c.observable == "subspace") {
        src = TaspSource::subspace(cfg, c.subspace == 0 ? 1 : c.subspace, c.axis);
    } else if (c.observable != "auto" && c.observable != "global") {
        throw ConfigError("unknown observable '" + c.observable + "'");
    }
    auto grid = sample_grid(src, c.grid, c.grid, resolve_cli_threads(c.threads));
    fs::path dir = prepare_out(c);
    for (int comp = 1; comp <= 3; ++comp) {
        std::string text = "kx,ky,value\n";
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i) {
                Momentum k = grid.node(i, j);
                text += fmt17(k.kx) + ',' + fmt17(k.ky) + ',' + fmt17(grid.at(i, j)(comp)) + '\n';
            }
        write_text(dir / ("tasp_s" + std::to_string(comp) + ".csv"), text);
    }
    write_manifest(dir, "tasp", c, {{"observable_tag", src.tag()}});
    out << "wrote " << grid.nx * grid.ny << " rows per component to " << dir.string() << "\n";
    return 0;
}

int cmd_bis(const RunConfig& c, std::ostream& out) {
    BisRun run = run_bis(c);
    fs::path dir = prepare_out(c);
    for (size_t i = 0; i < run.contours.size(); ++i) {
        std::ostringstream os;
        write_contour_csv(os, run.contours[i]);
        char name[32];
        std::snprintf(name, sizeof name, "contour_%03zu.csv", i);
        write_text(dir / name, os.str());
    }
    json s = bis_summary(c, run, true);
    write_text(dir / "summary.json", s.dump(2) + "\n");
    out << "total_w = " << run.total << " from " << run.contours.size() << " contour(s)";
    if (run.contours.empty()) out << " (no BIS)";
    out << "\n";
    return 0;
}

int cmd_winding(const RunConfig& c, std::ostream& out) {
    BisRun run = run_bis(c);
    out << bis_summary(c, run, false).dump(2) << "\n";
    return 0;
}

int cmd_chern(const RunConfig& c, std::ostream& out) {
    LayeredConfig cfg = c.layered();
    int filled = c.filled > 0 ? c.filled : cfg.layers;
    auto res = chern_fhs_confirmed(cfg, filled, c.chern_grid, default_gap_tol, resolve_cli_threads(c.threads));
    json j{{"method", "fhs"}, {"chern", res.value}, {"raw", res.raw}, {"gap_min", res.gap_min},
           {"grid", res.grid}, {"filled", filled}, {"config", config_json(c)}};
    if (cfg.stacking == Stacking::ABBA && filled == cfg.layers) {
        auto tot = total_chern_abba(cfg, c.chern_grid);
        j["subsystem_sum"] = tot.value;
    }
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_phase(const RunConfig& c, std::ostream& out) {
    PhaseScan scan;
    scan.stacking = c.stacking;
    scan.model = c.model;
    scan.layers = c.layers;
    scan.t_min = c.t_min;
    scan.t_max = c.t_max;
    scan.m_min = c.m_min;
    scan.m_max = c.m_max;
    scan.t_steps = c.t_steps;
    scan.m_steps = c.m_steps;
    scan.grid_n = c.chern_grid;
    auto pd = phase_diagram(scan, resolve_cli_threads(c.threads));
    fs::path dir = prepare_out(c);
    std::ostringstream csv, mat;
    write_phase_csv(csv, pd);
    write_phase_matrix(mat, pd);
    write_text(dir / "phase.csv", csv.str());
    write_text(dir / "phase.dat", mat.str());
    write_manifest(dir, "phase-diagram", c);
    int boundary = 0;
    for (const auto& cell : pd.cells) boundary += !cell.chern;
    out << "wrote " << pd.cells.size() << " cells (" << boundary << " boundary) to " << dir.string() << "\n";
    return 0;
}

int cmd_estimate(const RunConfig& c, bool have_samples, std::ostream& out) {
    LayeredConfig cfg = c.layered();
    HoppingEstimate est;
    if (cfg.stacking == Stacking::BA) {
        BaSamples s{c.sigma1, c.sigma2, c.sigma3};
        if (c.self_generate) {
            s = ba_reference_samples(cfg.hopping);
        } else if (!have_samples) {
            throw UsageError("estimate-t on ba needs --sigma1/--sigma2/--sigma3 or --self-generate");
        }
        est = estimate_t_ba(s);
    } else {
        if (!c.self_generate)
            throw UsageError("estimate-t on abba works on generated GTASP data; pass --self-generate");
        GtaspMeasurement measure = [cfg](Momentum k) { return gtasp_abba(k, cfg, 3, 1); };
        est = estimate_t_abba(measure, cfg.monolayer, cfg.layers, std::min(c.grid, 128));
    }
    json j{{"t_hat", est.t_hat}, {"spread", est.spread}, {"residual", est.residual},
           {"method", est.method}, {"samples", est.samples}, {"config", config_json(c)}};
    fs::path dir = prepare_out(c);
    write_text(dir / "estimate.json", j.dump(2) + "\n");
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_selftest(std::ostream& out) {
    int failed = 0;
    auto check = [&](const std::string& name, const std::function<bool()>& fn) {
        bool ok = false;
        std::string why;
        try {
            ok = fn();
        } catch (const std::exception& e) {
            why = e.what();
        }
        out << (ok ? "PASS " : "FAIL ") << name << (why.empty() ? "" : " (" + why + ")") << "\n";
        failed += !ok;
    };
    const double pi = std::numbers::pi;
    check("spectra: analytic matches numeric", [] {
        for (auto st : {Stacking::ABBA, Stacking::BA})
            for (int n = 1; n <= 4; ++n) {
                LayeredConfig cfg{st, n, 0.4, MonolayerModel::qwz(1.0)};
                Momentum k{0.3, -1.1};
                auto num = numeric_spectrum(k, cfg);
                if (multiset_distance(num.energies, analytic_energies(cfg.monolayer.field(k), cfg)) > 1e-10)
                    return false;
            }
        return true;
    });
    check("quench: BA bilayer reference values", [pi] {
        LayeredConfig cfg{Stacking::BA, 2, 0.4, MonolayerModel::qwz(1.0)};
        double s1 = tasp_closed_form(Momentum{pi / 4, 0.0}, cfg, 3)(1);
        double s3 = tasp_closed_form(Momentum{0.0, 0.0}, cfg, 3)(3);
        return std::abs(s1 - 1.0 / 2.16) < 1e-12 && std::abs(s3 + 2.16 / 2.32) < 1e-12;
    });
    check("bisfield: ABBA bilayer winding -2", [] {
        LayeredConfig cfg{Stacking::ABBA, 2, 0.4, MonolayerModel::qwz(1.0)};
        int total = 0;
        for (int r = 1; r <= 2; ++r) total += characterize(sample_grid(TaspSource::subspace(cfg, r, 3), 128, 128)).total;
        return total == -2;
    });
    check("bisfield: BA bilayer winding -2", [] {
        LayeredConfig cfg{Stacking::BA, 2, 0.4, MonolayerModel::qwz(1.0)};
        return characterize(sample_grid(TaspSource::global(cfg, 3), 128, 128)).total == -2;
    });
    check("topology: QWZ m=1 Chern -1", [] {
        LayeredConfig cfg{Stacking::ABBA, 1, 0.0, MonolayerModel::qwz(1.0)};
        return chern_fhs(cfg, 1, 40).value == -1;
    });
    check("hopping: BA round trip", [] { return std::abs(estimate_t_ba(ba_reference_samples(0.4)).t_hat - 0.4) < 1e-6; });
    return failed ? 1 : 0;
}

}  // namespace

LayeredConfig RunConfig::layered() const {
    LayeredConfig cfg{stacking, layers, t, {model, m}};
    cfg.validate();
    return cfg;
}

void apply_setting(RunConfig& c, const std::string& key_in, const std::string& value) {
    const std::string key = trim(key_in);
    if (key == "model") c.model = parse_model(trim(value));
    else if (key == "m") c.m = parse_double(key, value);
    else if (key == "stacking") c.stacking = parse_stacking(trim(value));
    else if (key == "layers") {
        c.layers = parse_int(key, value);
        if (c.layers < 1) throw ConfigError("layers must be >= 1");
    } else if (key == "t") c.t = parse_double(key, value);
    else if (key == "axis") {
        c.axis = parse_int(key, value);
        if (c.axis < 1 || c.axis > 3) throw ConfigError("axis must be 1, 2 or 3");
    } else if (key == "observable") {
        c.observable = trim(value);
        if (c.observable != "auto" && c.observable != "global" && c.observable != "subspace")
            throw ConfigError("observable must be auto, global or subspace");
    } else if (key == "subspace") {
        c.subspace = parse_int(key, value);
        if (c.subspace < 0) throw ConfigError("subspace must be >= 0");
    } else if (key == "grid") {
        c.grid = parse_int(key, value);
        if (c.grid < 16) throw ConfigError("grid must be >= 16");
    } else if (key == "out") c.out = trim(value);
    else if (key == "tol-bis") c.tol_bis = parse_double(key, value);
    else if (key == "tol-deg") c.tol_deg = parse_double(key, value);
    else if (key == "delta") {
        c.delta = parse_double(key, value);
        if (!(c.delta > 0.0)) throw ConfigError("delta must be positive");
    } else if (key == "threads") {
        c.threads = parse_int(key, value);
        if (c.threads < 0) throw ConfigError("threads must be >= 0");
    } else if (key == "filled") c.filled = parse_int(key, value);
    else if (key == "t-range") std::tie(c.t_min, c.t_max) = parse_range(key, value);
    else if (key == "m-range") std::tie(c.m_min, c.m_max) = parse_range(key, value);
    else if (key == "steps") {
        auto comma = value.find(',');
        c.t_steps = parse_int(key, value.substr(0, comma));
        c.m_steps = comma == std::string::npos ? c.t_steps : parse_int(key, value.substr(comma + 1));
        if (c.t_steps < 1 || c.m_steps < 1) throw ConfigError("steps must be >= 1");
    } else if (key == "chern-grid") {
        c.chern_grid = parse_int(key, value);
        if (c.chern_grid < 4) throw ConfigError("chern-grid must be >= 4");
    } else if (key == "sigma1") c.sigma1 = parse_double(key, value);
    else if (key == "sigma2") c.sigma2 = parse_double(key, value);
    else if (key == "sigma3") c.sigma3 = parse_double(key, value);
    else if (key == "self-generate") c.self_generate = parse_bool(key, value);
    else throw ConfigError("unknown configuration key '" + key + "'");
}

void load_config_text(RunConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
    }
}

void load_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    load_config_text(cfg, ss.str());
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quench dynamics and topology of layered two-band models", "layered"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    struct Sub {
        CLI::App* app = nullptr;
        std::map<std::string, std::string> raw;
        std::string config;
        bool self_generate = false;
    };
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"tasp", "sample TASP over the Brillouin zone and write tasp_s{1,2,3}.csv"},
        {"bis", "extract BIS contours, dynamical fields and windings"},
        {"winding", "print the BIS winding summary without writing files"},
        {"phase-diagram", "scan (t, m) and write phase.csv / phase.dat"},
        {"chern", "lattice Chern number of the filled bands"},
        {"estimate-t", "estimate the interlayer hopping"},
        {"selftest", "run built-in consistency checks"},
    };
    std::map<std::string, Sub> subs;
    for (const auto& [name, help] : commands) {
        Sub& s = subs[name];
        s.app = app.add_subcommand(name, help);
        if (name == "selftest") continue;
        s.app->add_option("--config", s.config, "key=value configuration file");
        for (const auto& [key, khelp] : option_keys) s.app->add_option("--" + key, s.raw[key], khelp);
        s.app->add_flag("--self-generate", s.self_generate, "synthesize samples from --t");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    std::string name;
    for (auto& [n, s] : subs)
        if (s.app->parsed()) name = n;
    Sub& sub = subs[name];
    try {
        if (name == "selftest") return cmd_selftest(out);
        RunConfig cfg;
        if (!sub.config.empty()) load_config_file(cfg, sub.config);
        bool have_samples = false;
        for (const auto& [key, unused] : option_keys) {
            (void)unused;
            if (sub.app->get_option("--" + key)->count() == 0) continue;
            apply_setting(cfg, key, sub.raw[key]);
            if (key.rfind("sigma", 0) == 0) have_samples = true;
        }
        if (sub.self_generate) cfg.self_generate = true;
        have_samples = have_samples || cfg.sigma1 != 0.0 || cfg.sigma3 != 0.0;
        cfg.layered();
        if (name == "tasp") return cmd_tasp(cfg, out);
        if (name == "bis") return cmd_bis(cfg, out);
        if (name == "winding") return cmd_winding(cfg, out);
        if (name == "phase-diagram") return cmd_phase(cfg, out);
        if (name == "chern") return cmd_chern(cfg, out);
        if (name == "estimate-t") return cmd_estimate(cfg, have_samples, out);
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace layered::cli
