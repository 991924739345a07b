// Command-line frontend: every pipeline as a subcommand with config files
// and CSV/JSON outputs.
#include <chrono>
#include <cstdio>
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

#include "graze/config.hpp"
#include "graze/continuation.hpp"
#include "graze/io.hpp"
#include "graze/maps.hpp"
#include "graze/model.hpp"
#include "graze/mps.hpp"
#include "graze/scan.hpp"
#include "graze/theory.hpp"
#include "graze/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_args = 2;
constexpr int exit_domain = 3;
constexpr int exit_numeric = 4;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    int threads = 1;
    double zeta = 0.02;
    double epsilon = 0.9;
};

graze::IntegratorConfig integrator_opts(const CommonOpts& c) {
    graze::IntegratorConfig cfg;
    if (!c.config_path.empty()) {
        const auto kv = graze::parse_config_file(c.config_path);
        cfg = graze::integrator_from_config(kv);
    }
    return cfg;
}

/// Precedence: built-in defaults, then the config file, then explicit
/// command-line flags.
void resolve_model_params(CommonOpts& c, const CLI::App* sub, double flag_zeta, double flag_eps) {
    if (!c.config_path.empty()) {
        const auto kv = graze::parse_config_file(c.config_path);
        if (kv.count("zeta")) c.zeta = kv.at("zeta");
        if (kv.count("epsilon")) c.epsilon = kv.at("epsilon");
    }
    if (sub->count("--zeta")) c.zeta = flag_zeta;
    if (sub->count("--epsilon")) c.epsilon = flag_eps;
}

/// Resolve a value that may come from a flag or a config key; returns false
/// when neither is present.
bool resolve_value(const CommonOpts& c, const CLI::App* sub, const char* flag, const char* key,
                   double flag_value, double& out) {
    if (sub->count(flag)) {
        out = flag_value;
        return true;
    }
    if (!c.config_path.empty()) {
        const auto kv = graze::parse_config_file(c.config_path);
        if (kv.count(key)) {
            out = kv.at(key);
            return true;
        }
    }
    return false;
}

std::string out_file(const CommonOpts& c, const std::string& name) {
    if (c.out_dir.empty()) return name;
    fs::create_directories(c.out_dir);
    return (fs::path(c.out_dir) / name).string();
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void finish_manifest(const CommonOpts& c, graze::RunManifest m, const Timer& timer) {
    m.wall_time_s = timer.seconds();
    const std::string path = out_file(c, "manifest_" + m.command + ".json");
    graze::write_manifest(path, m);
}

std::map<std::string, std::string> base_config(const CommonOpts& c) {
    return {{"zeta", std::to_string(c.zeta)},
            {"epsilon", std::to_string(c.epsilon)},
            {"threads", std::to_string(c.threads)}};
}

// ---------------------------------------------------------------------------

int cmd_theory(const CommonOpts& c, int p, int n, bool numeric) {
    Timer timer;
    const graze::IntegratorConfig cfg = integrator_opts(c);
    const graze::CoeffSet cs = numeric
                                   ? graze::resonant_coeffs_numeric(p, n, c.zeta, c.epsilon, cfg)
                                   : graze::resonant_coeffs_osc(p, n, c.zeta, c.epsilon);
    const json doc = graze::to_json(cs, numeric ? "numeric" : "closed-form");
    std::cout << doc.dump(2) << "\n";
    if (!c.out_dir.empty()) {
        const std::string path = out_file(c, "coeffs.json");
        std::ofstream(path) << doc.dump(2) << "\n";
        graze::RunManifest m;
        m.command = "theory";
        m.config = base_config(c);
        m.config["p"] = std::to_string(p);
        m.config["n"] = std::to_string(n);
        m.config["numeric"] = numeric ? "1" : "0";
        m.outputs = {path};
        finish_manifest(c, m, timer);
    }
    return exit_ok;
}

int cmd_curves(const CommonOpts& c, int p, int n, const std::string& kind, double eta_max) {
    Timer timer;
    const graze::IntegratorConfig cfg = integrator_opts(c);
    graze::ResonantGrazing rg = graze::find_resonant_grazing(p, n, c.zeta, c.epsilon, cfg);
    const graze::HybridSystemDef sys =
        graze::make_oscillator_system(c.zeta, c.epsilon, rg.omega_star);
    graze::CurveOptions opt;
    opt.eta_max = eta_max;

    graze::RunManifest m;
    m.command = "curves";
    m.config = base_config(c);
    m.config["p"] = std::to_string(p);
    m.config["n"] = std::to_string(n);
    m.config["kind"] = kind;
    m.config["eta_max"] = std::to_string(eta_max);

    int rc = exit_ok;
    json report;
    report["omega_star"] = rg.omega_star;
    auto run_one = [&](graze::BifKind bk, const std::optional<graze::BifurcationRecord>& seed,
                       double c_closed, const std::string& tag) {
        if (!seed) {
            std::cerr << "curves: no admissible " << tag << " seed at this resonance\n";
            rc = exit_numeric;
            return;
        }
        try {
            const graze::CurveSample cs = graze::continue_curve(bk, p, *seed, sys, cfg, opt);
            const std::string csv = out_file(c, "curve_" + tag + ".csv");
            graze::write_curve_csv(csv, cs);
            m.outputs.push_back(csv);
            json meta = graze::curve_metadata(cs, json(m.config));
            meta["seed"] = {{"mu", seed->params.mu},
                            {"eta", seed->params.eta},
                            {"y_imp", seed->impact.y_imp},
                            {"z_imp", seed->impact.z_imp},
                            {"refinement_residual", seed->refinement_residual}};
            meta["closed_form_c"] = c_closed;
            meta["fit_deviation_rel"] =
                std::abs(cs.fitted_c / c_closed - 1.0);
            const std::string metaf = out_file(c, "curve_" + tag + "_meta.json");
            std::ofstream(metaf) << meta.dump(2) << "\n";
            m.outputs.push_back(metaf);
            report[tag] = meta;
            std::printf("%s: %zu points, fitted c = %.6g (closed form %.6g, deviation %.2f%%)\n",
                        tag.c_str(), cs.points.size(), cs.fitted_c, c_closed,
                        100.0 * std::abs(cs.fitted_c / c_closed - 1.0));
        } catch (const graze::CurveLost& e) {
            std::cerr << "curves: " << e.what() << "\n";
            rc = exit_numeric;
        }
    };
    if (kind == "sn" || kind == "both") run_one(graze::BifKind::SN, rg.sn, rg.coeffs.c_sn, "sn");
    if (kind == "pd" || kind == "both") run_one(graze::BifKind::PD, rg.pd, rg.coeffs.c_pd, "pd");
    finish_manifest(c, m, timer);
    return rc;
}

int cmd_grazing(const CommonOpts& c, double om_lo, double om_hi, int n_samples) {
    Timer timer;
    const graze::IntegratorConfig cfg = integrator_opts(c);
    const graze::HybridSystemDef sys =
        graze::make_oscillator_system(c.zeta, c.epsilon, 0.5 * (om_lo + om_hi));
    const graze::CurveSample cs = graze::grazing_curve(sys, {om_lo, om_hi}, n_samples, cfg);
    const std::string csv = out_file(c, "curve_grazing.csv");
    graze::write_curve_csv(csv, cs);
    std::printf("grazing curve: %zu samples written to %s\n", cs.points.size(), csv.c_str());
    graze::RunManifest m;
    m.command = "curves";
    m.config = base_config(c);
    m.config["kind"] = "grazing";
    m.config["omega_min"] = std::to_string(om_lo);
    m.config["omega_max"] = std::to_string(om_hi);
    m.config["samples"] = std::to_string(n_samples);
    m.outputs = {csv};
    finish_manifest(c, m, timer);
    return exit_ok;
}

int cmd_branch(const CommonOpts& c, int p, double omega, double mu_min, double mu_max,
               double mu_seed) {
    Timer timer;
    const graze::IntegratorConfig cfg = integrator_opts(c);
    const graze::HybridSystemDef sys = graze::make_oscillator_system(c.zeta, c.epsilon, omega);
    const graze::SectionPoint gz = graze::oscillator_grazing_point(sys, graze::ParamPoint{});

    // Seed near the grazing emanation; the side comes from the theory
    // prediction unless the caller supplied one.
    double mu0 = mu_seed;
    if (mu0 == 0.0) {
        const graze::MapDerivs d = graze::numeric_first_derivs(sys, graze::ParamPoint{}, gz, cfg);
        const graze::SpectralData sd = graze::spectral(d);
        const graze::CoeffSet cs =
            graze::unfolding_constants(sys, graze::ParamPoint{}, gz, d, sd, p);
        const graze::Side side = graze::emanation_side(p, cs, sd, d.a(0, 1));
        mu0 = (side == graze::Side::mu_negative) ? -1e-5 : 1e-5;
    }
    graze::MpsSolution start = graze::solve_mps(p, graze::ParamPoint{mu0, 0.0},
                                                graze::ImpactPoint{1e-3, gz.z}, sys, cfg);
    graze::BranchResult br = graze::continue_branch(p, 0.0, {mu_min, mu_max}, start, sys, cfg);

    const std::string csv = out_file(c, "branch_p" + std::to_string(p) + ".csv");
    graze::write_branch_csv(csv, br, sys);
    json events = json::array();
    for (const auto& e : br.events) events.push_back(graze::to_json(e, sys));
    json meta{{"p", p},
              {"omega", omega},
              {"a_graz", graze::grazing_amplitude(omega, c.zeta)},
              {"events", events},
              {"n_samples", br.samples.size()},
              {"termination", br.termination}};
    const std::string metaf = out_file(c, "branch_p" + std::to_string(p) + "_events.json");
    std::ofstream(metaf) << meta.dump(2) << "\n";
    std::printf("branch p=%d: %zu samples, %zu events -> %s\n", p, br.samples.size(),
                br.events.size(), csv.c_str());
    for (const auto& e : br.events)
        std::printf("  %s at amp=%.6f (mu=%+.3e, y_imp=%.4g)\n", graze::to_string(e.kind),
                    sys.osc(e.params).amp, e.params.mu, e.impact.y_imp);

    graze::RunManifest m;
    m.command = "branch";
    m.config = base_config(c);
    m.config["p"] = std::to_string(p);
    m.config["omega"] = std::to_string(omega);
    m.config["mu_min"] = std::to_string(mu_min);
    m.config["mu_max"] = std::to_string(mu_max);
    m.config["mu_seed"] = std::to_string(mu_seed);
    m.outputs = {csv, metaf};
    finish_manifest(c, m, timer);
    return exit_ok;
}

int cmd_mps(const CommonOpts& c, int p, double omega, double amp, double guess_y, double guess_z) {
    Timer timer;
    const graze::IntegratorConfig cfg = integrator_opts(c);
    const graze::HybridSystemDef sys = graze::make_oscillator_system(c.zeta, c.epsilon, omega);
    const double mu = amp - graze::grazing_amplitude(omega, c.zeta);
    const double gz = graze::grazing_phase(omega, c.zeta);
    const graze::ImpactPoint guess{guess_y, guess_z == 0.0 ? gz : guess_z};
    const graze::MpsSolution sol =
        graze::solve_mps(p, graze::ParamPoint{mu, 0.0}, guess, sys, cfg);
    const json doc = graze::to_json(sol);
    std::cout << doc.dump(2) << "\n";
    if (!c.out_dir.empty()) {
        const std::string path = out_file(c, "mps.json");
        std::ofstream(path) << doc.dump(2) << "\n";
        graze::RunManifest m;
        m.command = "mps";
        m.config = base_config(c);
        m.config["p"] = std::to_string(p);
        m.config["omega"] = std::to_string(omega);
        m.config["amp"] = std::to_string(amp);
        m.config["guess_y"] = std::to_string(guess_y);
        m.config["guess_z"] = std::to_string(guess_z);
        m.outputs = {path};
        finish_manifest(c, m, timer);
    }
    return exit_ok;
}

int cmd_scan(const CommonOpts& c, double omega, double amp_min, double amp_max, int n_amps,
             graze::ScanConfig sc) {
    Timer timer;
    const graze::IntegratorConfig cfg = integrator_opts(c);
    const graze::HybridSystemDef sys = graze::make_oscillator_system(c.zeta, c.epsilon, omega);
    const double ag = graze::grazing_amplitude(omega, c.zeta);
    std::vector<double> mu_grid;
    for (int i = 0; i < n_amps; ++i)
        mu_grid.push_back(amp_min + (amp_max - amp_min) * i / std::max(1, n_amps - 1) - ag);
    sc.threads = c.threads;
    const auto rows = graze::orbit_diagram(sys, 0.0, mu_grid, sc, cfg);

    const std::string csv = out_file(c, "scan.csv");
    graze::write_scan_csv(csv, rows);
    json sidecar = graze::scan_sidecar(sc);
    sidecar["omega"] = omega;
    sidecar["zeta"] = c.zeta;
    sidecar["epsilon"] = c.epsilon;
    json rows_json = json::array();
    for (const auto& row : rows) {
        json ats = json::array();
        for (const auto& at : row.attractors)
            ats.push_back(at.periodic ? json{{"period_q", at.period_q},
                                             {"records_per_cycle", at.records_per_cycle},
                                             {"impacts_per_cycle", at.impacts_per_cycle}}
                                      : json{{"aperiodic", true}});
        rows_json.push_back({{"amp", row.amp}, {"attractors", ats}});
    }
    sidecar["classification"] = rows_json;
    const std::string sidef = out_file(c, "scan_sidecar.json");
    std::ofstream(sidef) << sidecar.dump(2) << "\n";
    std::printf("scan: %zu amplitudes -> %s\n", rows.size(), csv.c_str());

    graze::RunManifest m;
    m.command = "scan";
    m.config = base_config(c);
    m.config["omega"] = std::to_string(omega);
    m.config["amp_min"] = std::to_string(amp_min);
    m.config["amp_max"] = std::to_string(amp_max);
    m.config["amps"] = std::to_string(n_amps);
    m.config["seed"] = std::to_string(sc.seed);
    m.config["n_initial"] = std::to_string(sc.n_initial);
    m.config["n_transient"] = std::to_string(sc.n_transient);
    m.config["n_record"] = std::to_string(sc.n_record);
    m.outputs = {csv, sidef};
    finish_manifest(c, m, timer);
    return exit_ok;
}

bool files_identical(const std::string& a, const std::string& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str();
}

int replay_manifest(const std::string& path, const CommonOpts& base) {
    const graze::RunManifest m = graze::read_manifest(path);
    CommonOpts c = base;
    c.zeta = std::stod(m.config.at("zeta"));
    c.epsilon = std::stod(m.config.at("epsilon"));
    const fs::path tmp = fs::temp_directory_path() / ("graze_replay_" + m.command);
    fs::remove_all(tmp);
    c.out_dir = tmp.string();
    auto cget = [&](const char* k) { return std::stod(m.config.at(k)); };
    int rc = exit_args;
    if (m.command == "scan") {
        graze::ScanConfig sc;
        sc.seed = static_cast<std::uint64_t>(std::stoull(m.config.at("seed")));
        sc.n_initial = static_cast<int>(cget("n_initial"));
        sc.n_transient = static_cast<int>(cget("n_transient"));
        sc.n_record = static_cast<int>(cget("n_record"));
        rc = cmd_scan(c, cget("omega"), cget("amp_min"), cget("amp_max"),
                      static_cast<int>(cget("amps")), sc);
    } else if (m.command == "branch") {
        rc = cmd_branch(c, static_cast<int>(cget("p")), cget("omega"), cget("mu_min"),
                        cget("mu_max"), cget("mu_seed"));
    } else if (m.command == "curves") {
        if (m.config.at("kind") == "grazing")
            rc = cmd_grazing(c, cget("omega_min"), cget("omega_max"),
                             static_cast<int>(cget("samples")));
        else
            rc = cmd_curves(c, static_cast<int>(cget("p")), static_cast<int>(cget("n")),
                            m.config.at("kind"), cget("eta_max"));
    } else if (m.command == "theory") {
        rc = cmd_theory(c, static_cast<int>(cget("p")), static_cast<int>(cget("n")),
                        m.config.at("numeric") == "1");
    } else if (m.command == "mps") {
        rc = cmd_mps(c, static_cast<int>(cget("p")), cget("omega"), cget("amp"), cget("guess_y"),
                     cget("guess_z"));
    } else {
        std::cerr << "verify: cannot replay command '" << m.command << "'\n";
        return exit_args;
    }
    if (rc != exit_ok) return rc;
    bool all_ok = true;
    for (const auto& orig : m.outputs) {
        const std::string replayed = (tmp / fs::path(orig).filename()).string();
        const bool same = files_identical(orig, replayed);
        std::printf("  %-50s %s\n", fs::path(orig).filename().string().c_str(),
                    same ? "reproduced" : "MISMATCH");
        if (!same) all_ok = false;
    }
    return all_ok ? exit_ok : 1;
}

int cmd_verify(const CommonOpts& c, bool fast, const std::string& manifest_path) {
    if (!manifest_path.empty()) return replay_manifest(manifest_path, c);
    const graze::IntegratorConfig cfg = integrator_opts(c);
    const auto rows = graze::run_verify(fast, cfg, c.threads);
    int n_fail = 0;
    std::printf("%-55s %-6s %14s %14s %10s\n", "check", "result", "measured", "expected", "error");
    for (const auto& r : rows) {
        if (!r.pass) ++n_fail;
        std::printf("%-55s %-6s %14.6g %14.6g %10.2e%s%s\n", r.name.c_str(),
                    r.pass ? "pass" : "FAIL", r.measured, r.expected, r.error,
                    r.note.empty() ? "" : "  ", r.note.c_str());
    }
    std::printf("%zu checks, %d failed\n", rows.size(), n_fail);
    return n_fail == 0 ? exit_ok : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"near-grazing dynamics toolkit for forced impact oscillators"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    CommonOpts common;
    app.add_option("--config", common.config_path, "key-value config file");
    app.add_option("--out", common.out_dir, "output directory");
    app.add_option("--threads", common.threads, "worker thread cap")->check(CLI::PositiveNumber);

    // theory
    auto* t = app.add_subcommand("theory", "resonant unfolding coefficients as JSON");
    int t_p = 1, t_n = 1;
    bool t_numeric = false;
    double t_zeta = 0.02, t_eps = 0.9;
    t->add_option("--p", t_p, "loop count")->required()->check(CLI::PositiveNumber);
    t->add_option("--n", t_n, "resonance index")->required()->check(CLI::PositiveNumber);
    t->add_option("--zeta", t_zeta, "damping ratio");
    t->add_option("--epsilon", t_eps, "coefficient of restitution");
    t->add_flag("--numeric", t_numeric, "finite-difference path instead of closed forms");

    // curves: SN/PD continuation from a resonant grazing point, or the
    // grazing-curve export over a frequency window
    auto* cv = app.add_subcommand("curves",
                                  "continue SN/PD curves from a resonance, or export the "
                                  "grazing curve (--kind grazing)");
    int c_p = 0, c_n = 0;
    std::string c_kind = "both";
    double c_eta_max = 3e-3, c_zeta = 0.02, c_eps = 0.9;
    double c_om_lo = 0.3, c_om_hi = 1.0;
    int c_samples = 141;
    cv->add_option("--p", c_p)->check(CLI::PositiveNumber);
    cv->add_option("--n", c_n)->check(CLI::PositiveNumber);
    cv->add_option("--kind", c_kind)->check(CLI::IsMember({"sn", "pd", "both", "grazing"}));
    cv->add_option("--eta-max", c_eta_max, "frequency window half-width about the resonance");
    cv->add_option("--omega-min", c_om_lo, "grazing-curve window");
    cv->add_option("--omega-max", c_om_hi, "grazing-curve window");
    cv->add_option("--samples", c_samples)->check(CLI::PositiveNumber);
    cv->add_option("--zeta", c_zeta);
    cv->add_option("--epsilon", c_eps);

    // branch
    auto* br = app.add_subcommand("branch", "one-parameter MPS branch with SN/PD/GZ events");
    int b_p = 3;
    double b_omega = 0.854, b_mu_min = -0.01, b_mu_max = 0.09, b_mu_seed = 0.0;
    double b_zeta = 0.02, b_eps = 0.9;
    br->add_option("--p", b_p)->required()->check(CLI::PositiveNumber);
    br->add_option("--omega", b_omega);
    br->add_option("--mu-min", b_mu_min);
    br->add_option("--mu-max", b_mu_max);
    br->add_option("--mu-seed", b_mu_seed, "seed offset from grazing (0 = automatic)");
    br->add_option("--zeta", b_zeta);
    br->add_option("--epsilon", b_eps);

    // mps
    auto* mp = app.add_subcommand("mps", "solve one maximal periodic solution");
    int m_p = 1;
    double m_omega = 0.854, m_amp = 0.28, m_gy = 1e-3, m_gz = 0.0;
    double m_zeta = 0.02, m_eps = 0.9;
    mp->add_option("--p", m_p)->required()->check(CLI::PositiveNumber);
    mp->add_option("--omega", m_omega);
    mp->add_option("--amp", m_amp);
    mp->add_option("--guess-y", m_gy);
    mp->add_option("--guess-z", m_gz);
    mp->add_option("--zeta", m_zeta);
    mp->add_option("--epsilon", m_eps);

    // scan
    auto* sc = app.add_subcommand("scan", "brute-force orbit diagram");
    double s_omega = 0.854, s_amp_min = 0.27, s_amp_max = 0.29;
    int s_amps = 21;
    double s_zeta = 0.02, s_eps = 0.9;
    graze::ScanConfig s_cfg;
    sc->add_option("--omega", s_omega);
    sc->add_option("--amp-min", s_amp_min)->required();
    sc->add_option("--amp-max", s_amp_max)->required();
    sc->add_option("--amps", s_amps)->check(CLI::PositiveNumber);
    sc->add_option("--seed", s_cfg.seed);
    sc->add_option("--n-initial", s_cfg.n_initial)->check(CLI::PositiveNumber);
    sc->add_option("--n-transient", s_cfg.n_transient);
    sc->add_option("--n-record", s_cfg.n_record)->check(CLI::PositiveNumber);
    sc->add_option("--zeta", s_zeta);
    sc->add_option("--epsilon", s_eps);

    // verify
    auto* vf = app.add_subcommand("verify", "run the oracle suite / check a manifest");
    bool v_fast = false;
    std::string v_manifest;
    vf->add_flag("--fast", v_fast, "skip the slow end-to-end checks");
    vf->add_option("--manifest", v_manifest, "re-run a recorded command and compare outputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_args;
    }

    try {
        if (t->parsed()) {
            resolve_model_params(common, t, t_zeta, t_eps);
            return cmd_theory(common, t_p, t_n, t_numeric);
        }
        if (cv->parsed()) {
            resolve_model_params(common, cv, c_zeta, c_eps);
            if (c_kind == "grazing") return cmd_grazing(common, c_om_lo, c_om_hi, c_samples);
            if (c_p < 1 || c_n < 1) {
                std::cerr << "curves: --p and --n are required for SN/PD continuation\n";
                return exit_args;
            }
            return cmd_curves(common, c_p, c_n, c_kind, c_eta_max);
        }
        if (br->parsed()) {
            resolve_model_params(common, br, b_zeta, b_eps);
            double omega;
            if (!resolve_value(common, br, "--omega", "omega", b_omega, omega)) {
                std::cerr << "branch: --omega (or an omega config key) is required\n";
                return exit_args;
            }
            return cmd_branch(common, b_p, omega, b_mu_min, b_mu_max, b_mu_seed);
        }
        if (mp->parsed()) {
            resolve_model_params(common, mp, m_zeta, m_eps);
            double omega, amp;
            if (!resolve_value(common, mp, "--omega", "omega", m_omega, omega) ||
                !resolve_value(common, mp, "--amp", "amp", m_amp, amp)) {
                std::cerr << "mps: --omega and --amp (or config keys) are required\n";
                return exit_args;
            }
            return cmd_mps(common, m_p, omega, amp, m_gy, m_gz);
        }
        if (sc->parsed()) {
            resolve_model_params(common, sc, s_zeta, s_eps);
            double omega;
            if (!resolve_value(common, sc, "--omega", "omega", s_omega, omega)) {
                std::cerr << "scan: --omega (or an omega config key) is required\n";
                return exit_args;
            }
            return cmd_scan(common, omega, s_amp_min, s_amp_max, s_amps, s_cfg);
        }
        if (vf->parsed()) return cmd_verify(common, v_fast, v_manifest);
    } catch (const graze::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_args;
    } catch (const graze::NotAtResonance& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_domain;
    } catch (const graze::NotGrazing& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_domain;
    } catch (const graze::TooCloseToGrazing& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_domain;
    } catch (const graze::NoResonanceInRange& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_domain;
    } catch (const graze::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    }
    return exit_args;
}
