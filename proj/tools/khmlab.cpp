// khmlab: command-line driver for the turbulence-law laboratory.
//
// Subcommands:
//   simulate           integrate a configured run, write ledger + snapshots
//   estimate           shell functionals and dissipation estimates of one snapshot
//   verify-identities  projector, projection-flux and Hall-rewrite checks
//   audit-khm          space-integrated two-point balances between two snapshots
//   scan-laws          separation scan + compensated-ratio plateau over a run dir
//   verify-constants   kernel radial moments and direction-quadrature isotropy
//   report             aggregate pass/fail of the artifacts in a run directory
//
// Exit codes: 0 all gates passed, 2 configuration or usage error,
// 3 a tolerance gate failed, 1 unexpected failure.

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "khm/config.hpp"
#include "khm/core.hpp"
#include "khm/field_io.hpp"
#include "khm/grid.hpp"
#include "khm/identities.hpp"
#include "khm/increments.hpp"
#include "khm/kernel.hpp"
#include "khm/laws.hpp"
#include "khm/manifest.hpp"
#include "khm/solver.hpp"
#include "khm/sphere.hpp"

namespace {

using namespace khm;
using nlohmann::json;

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_tolerance = 3;

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> sets;
    std::string output;
    int threads = 0;
    bool deterministic = false;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "configuration file (key = value lines)")
        ->envname("KHMLAB_CONFIG");
    sub->add_option("--set", args.sets, "override one key, e.g. --set solver.n=64")
        ->take_all();
    sub->add_option("--output", args.output, "output directory (overrides output.dir)");
    sub->add_option("--threads", args.threads, "worker threads (reductions stay deterministic)");
    sub->add_flag("--deterministic", args.deterministic,
                  "force deterministic mode regardless of the config");
}

Config build_config(const CommonArgs& args) {
    Config cfg;
    if (!args.config_path.empty()) cfg.load_file(args.config_path);
    for (const std::string& pair : args.sets) cfg.set_pair(pair);
    if (!args.output.empty()) cfg.set("output.dir", args.output);
    if (args.threads > 0) cfg.set("threads", std::to_string(args.threads));
    if (args.deterministic) cfg.set("deterministic", "true");
    cfg.validate();
    return cfg;
}

/// Output directory plus the manifest under construction.
struct RunContext {
    Config cfg;
    std::string dir;
    RunManifest manifest;
    std::vector<std::string> emitted;
};

RunContext open_run(Config cfg, const std::string& subcommand) {
    RunContext ctx;
    ctx.dir = cfg.get_string("output.dir");
    std::filesystem::create_directories(ctx.dir);
    ctx.manifest.tool = "khmlab";
    ctx.manifest.version = code_version();
    ctx.manifest.subcommand = subcommand;
    ctx.manifest.created_utc = utc_timestamp();
    ctx.manifest.config_hash = cfg.hash();
    {
        std::ofstream out(ctx.dir + "/config.resolved.txt");
        if (!out) throw ConfigError("cannot write to output directory '" + ctx.dir + "'");
        out << cfg.resolved();
    }
    ctx.emitted.push_back("config.resolved.txt");
    ctx.cfg = std::move(cfg);
    return ctx;
}

void emit_text(RunContext& ctx, const std::string& name, const std::string& body) {
    std::ofstream out(ctx.dir + "/" + name, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + ctx.dir + "/" + name + "'");
    out << body;
    ctx.emitted.push_back(name);
}

void emit_json(RunContext& ctx, const std::string& name, const json& j) {
    emit_text(ctx, name, j.dump(2) + "\n");
}

void close_run(RunContext& ctx) {
    for (const std::string& name : ctx.emitted) manifest_add_file(ctx.manifest, ctx.dir, name);
    std::ofstream out(ctx.dir + "/manifest.json");
    if (!out) throw ConfigError("cannot write '" + ctx.dir + "/manifest.json'");
    write_manifest_json(out, ctx.manifest);
}

MollifierKernel kernel_from(const Config& cfg) {
    return MollifierKernel(kernel_profile_from_string(cfg.get_string("kernel.profile")),
                           cfg.get_real("kernel.epsilon"));
}

DirectionSet directions_from(const Config& cfg) {
    return make_direction_set(cfg.get_string("quadrature.directions"),
                              static_cast<int>(cfg.get_int("quadrature.direction_count")));
}

std::string snapshot_name(real t) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "snapshot_%012.6f.khm", t);
    return buf;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const Config& cfg) {
    RunContext ctx = open_run(cfg, "simulate");
    const Grid g(static_cast<int>(cfg.get_int("solver.n")));
    Transformer t(g);

    InitialCondition ic = make_initial_condition(
        g, cfg.get_string("ic.kind"), static_cast<std::uint64_t>(cfg.get_int("ic.seed")),
        static_cast<int>(cfg.get_int("ic.kmax")), cfg.get_real("ic.amplitude"),
        solver_model_from_string(cfg.get_string("solver.model")));

    SolverState state;
    state.model = solver_model_from_string(cfg.get_string("solver.model"));
    state.d_i = cfg.get_real("solver.d_i");
    state.nu = cfg.get_real("solver.nu");
    state.eta = cfg.get_real("solver.eta");
    state.u = std::move(ic.u);
    state.b = std::move(ic.b);

    RunOptions opt;
    opt.dt = cfg.get_real("solver.dt");
    opt.t_end = cfg.get_real("solver.t_end");
    opt.ledger_stride = static_cast<int>(cfg.get_int("solver.ledger_stride"));
    opt.snapshot_interval = cfg.get_real("solver.snapshot_interval");
    opt.controls.cfl_safety = cfg.get_real("solver.cfl_safety");
    opt.on_snapshot = [&](const SolverState& s) {
        const std::string name = snapshot_name(s.t);
        write_snapshot(ctx.dir + "/" + name, make_snapshot(t, s));
        ctx.emitted.push_back(name);
    };

    const bool ideal = state.nu == 0 && state.eta == 0;
    const RunResult result = run(t, std::move(state), opt);

    {
        std::ostringstream os;
        write_ledger_csv(os, result.ledger);
        emit_text(ctx, "ledger.csv", os.str());
    }
    {
        std::ostringstream os;
        write_ledger_diagnostics_csv(os, result.ledger);
        emit_text(ctx, "ledger_diagnostics.csv", os.str());
    }

    json summary;
    summary["steps"] = result.steps;
    summary["final_t"] = result.final_state.t;
    summary["ledger_rows"] = result.ledger.rows.size();
    if (!result.ledger.rows.empty()) {
        const LedgerRow& first = result.ledger.rows.front();
        const LedgerRow& last = result.ledger.rows.back();
        summary["E_initial"] = first.E;
        summary["E_final"] = last.E;
        if (ideal && first.E > 0) {
            // conservation drifts, each normalized by the invariant scale E(0)
            summary["drift_E"] = std::abs(last.E - first.E) / first.E;
            summary["drift_H_M"] = std::abs(last.H_M - first.H_M) / first.E;
            summary["drift_H_G"] = std::abs(last.H_G - first.H_G) / first.E;
            summary["drift_H_C"] = std::abs(last.H_C - first.H_C) / first.E;
        }
    }
    summary["pass"] = true;
    emit_json(ctx, "run.json", summary);
    close_run(ctx);
    std::cout << "simulate: " << result.steps << " steps to t = " << result.final_state.t
              << ", outputs in " << ctx.dir << "\n";
    return exit_ok;
}

// ---------------------------------------------------------------------------
// estimate

int cmd_estimate(const Config& cfg, const std::string& snapshot_path) {
    RunContext ctx = open_run(cfg, "estimate");
    Snapshot snap = read_snapshot(snapshot_path);
    SolverState state = state_from_snapshot(snap);
    Transformer t(*snap.grid);

    const DirectionSet dirs = directions_from(cfg);
    const ShellQuad squad{&dirs, state.d_i};
    const SeparationScan scan =
        log_spaced_scan(cfg.get_real("scan.lambda_min"), cfg.get_real("scan.lambda_max"),
                        static_cast<int>(cfg.get_int("scan.lambda_count")), *snap.grid);

    std::vector<LawScanRecord> records;
    const SpectralVector* u = state.model == SolverModel::hallmhd ? &state.u : nullptr;
    for (real lambda : scan.lambdas) {
        const ShellFunctionals f = shell_functionals(state.b, u, lambda, squad);
        LawScanRecord rec;
        rec.lambda = lambda;
        rec.S_EL = f.S_EL;
        rec.S_ET = f.S_ET;
        rec.S_E_bar = f.S_E_bar;
        rec.S_EL_bar = f.S_EL_bar;
        rec.S_ET_bar = f.S_ET_bar;
        rec.S_ML = f.S_ML;
        rec.S_MT = f.S_MT;
        rec.S_HL = f.S_HL;
        rec.model = to_string(state.model);
        rec.t = snap.time;
        records.push_back(std::move(rec));
    }
    {
        std::ostringstream os;
        write_law_scan_csv(os, records);
        emit_text(ctx, "estimate.csv", os.str());
    }

    const MollifierKernel kernel = kernel_from(cfg);
    const DissipationQuad dquad{&kernel, &dirs,
                                static_cast<int>(cfg.get_int("quadrature.radial_nodes")),
                                state.d_i};
    const SpectralVector J = curl(state.b);
    DissipationEstimate d = d_energy(t.inverse(state.b), t.inverse(J), dquad);
    d.eps_E_measured = state.eta * spectral_mean_square(J);
    if (state.model == SolverModel::hallmhd) {
        d.eps_E_measured += state.nu * spectral_mean_grad_square(state.u);
    }

    json out;
    out["snapshot"] = snapshot_path;
    out["t"] = snap.time;
    out["model"] = to_string(state.model);
    out["epsilon_kernel"] = d.epsilon_kernel;
    out["D_EL"] = d.D_EL;
    out["D_ET"] = d.D_ET;
    out["D_ML"] = d.D_ML;
    out["D_MT"] = d.D_MT;
    out["eps_E_measured"] = d.eps_E_measured;
    out["pass"] = true;
    emit_json(ctx, "dissipation.json", out);
    close_run(ctx);
    std::cout << "estimate: " << records.size() << " separations, outputs in " << ctx.dir << "\n";
    return exit_ok;
}

// ---------------------------------------------------------------------------
// verify-identities

int cmd_verify_identities(const Config& cfg) {
    RunContext ctx = open_run(cfg, "verify-identities");
    const int n = static_cast<int>(cfg.get_int("solver.n"));
    const int kmax = static_cast<int>(cfg.get_int("identities.kmax"));
    if (3 * kmax > n / 2 - 1) {
        throw ConfigError("verify-identities: identities.kmax too large for solver.n; "
                          "need 3*kmax <= n/2 - 1 for alias-free products");
    }
    const Grid g(n);
    Transformer t(g);
    InitialCondition ic = make_initial_condition(
        g, "random_lowk", static_cast<std::uint64_t>(cfg.get_int("identities.seed")), kmax, 1.0,
        SolverModel::hallmhd);
    const VectorField E = t.inverse(ic.b);
    const VectorField F = t.inverse(ic.u);

    json out;
    bool all_pass = true;

    // projector-gradient contraction over a seeded batch of random tuples
    {
        std::uint64_t s = static_cast<std::uint64_t>(cfg.get_int("identities.seed")) * 0x9e3779b97f4a7c15ull + 1;
        auto next_unit = [&s]() {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            return static_cast<real>(s >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        };
        auto next_vec = [&] { return Vec3{next_unit(), next_unit(), next_unit()}; };
        const int samples = 10000;
        real worst = 0;
        for (int i = 0; i < samples; ++i) {
            Vec3 ell = next_vec();
            if (norm(ell) < 1e-3) ell.x += 1.0;
            const IdentityReport r = check_projector_gradient(next_vec(), next_vec(), next_vec(), ell);
            worst = std::max(worst, r.residual);
        }
        const real tol = cfg.get_real("tolerances.projector");
        out["projector"] = {{"samples", samples}, {"max_residual", worst}, {"tolerance", tol},
                            {"pass", worst <= tol}};
        all_pass = all_pass && worst <= tol;
    }

    // the four projection-flux identities on one quadrature sweep
    {
        const MollifierKernel kernel = kernel_from(cfg);
        kernel.require_resolvable(g.spacing());
        const DirectionSet dirs = directions_from(cfg);
        FluxIdentityResolution res;
        res.kernel = &kernel;
        res.directions = &dirs;
        res.radial_nodes = static_cast<int>(cfg.get_int("quadrature.radial_nodes"));
        res.samples_per_axis = static_cast<int>(cfg.get_int("identities.samples_per_axis"));
        const real tol = cfg.get_real("tolerances.identity_residual");
        json flux = json::array();
        for (const IdentityReport& r : check_projection_flux_identities(E, F, res)) {
            flux.push_back({{"name", r.identity_name}, {"lhs_norm", r.lhs_norm},
                            {"rhs_norm", r.rhs_norm}, {"residual", r.residual},
                            {"resolution", r.resolution}, {"pass", r.residual <= tol}});
            all_pass = all_pass && r.residual <= tol;
        }
        out["flux"] = std::move(flux);
        out["flux_tolerance"] = tol;
    }

    // spectral equivalence of the Hall-term rewrites
    {
        const real tol = cfg.get_real("tolerances.hall_rewrite");
        const IdentityReport r = check_hall_rewrites(E);
        out["hall_rewrites"] = {{"residual", r.residual}, {"tolerance", tol},
                                {"resolution", r.resolution}, {"pass", r.residual <= tol}};
        all_pass = all_pass && r.residual <= tol;
    }

    out["pass"] = all_pass;
    emit_json(ctx, "identities.json", out);
    close_run(ctx);
    std::cout << "verify-identities: " << (all_pass ? "pass" : "FAIL") << ", outputs in "
              << ctx.dir << "\n";
    return all_pass ? exit_ok : exit_tolerance;
}

// ---------------------------------------------------------------------------
// audit-khm

json report_to_json(const AuditReport& r, real tol) {
    return {{"balance", to_string(r.balance)}, {"lhs", r.lhs}, {"rhs", r.rhs},
            {"residual", r.residual}, {"floor", r.floor}, {"resolution", r.resolution},
            {"pass", r.residual <= tol}};
}

int cmd_audit(const Config& cfg, const std::string& first_path, const std::string& second_path) {
    RunContext ctx = open_run(cfg, "audit-khm");
    const Snapshot first = read_snapshot(first_path);
    const Snapshot second = read_snapshot(second_path);

    const MollifierKernel kernel = kernel_from(cfg);
    const DirectionSet dirs = directions_from(cfg);
    AuditOptions opt;
    opt.kernel = &kernel;
    opt.directions = &dirs;
    opt.radial_nodes = static_cast<int>(cfg.get_int("quadrature.radial_nodes"));
    opt.factor_scale = cfg.get_real("audit.factor_scale");

    const real tol = cfg.get_real("tolerances.audit_residual");
    const std::string which = cfg.get_string("audit.balance");

    json out;
    out["first"] = first_path;
    out["second"] = second_path;
    bool all_pass = true;
    json audits = json::array();
    if (which == "all") {
        for (const AuditReport& r : audit_khm_all(first, second, opt)) {
            audits.push_back(report_to_json(r, tol));
            all_pass = all_pass && r.residual <= tol;
        }
    } else {
        const AuditReport r = audit_khm(first, second, khm_balance_from_string(which), opt);
        audits.push_back(report_to_json(r, tol));
        all_pass = r.residual <= tol;
    }
    out["audits"] = std::move(audits);
    out["tolerance"] = tol;
    out["pass"] = all_pass;
    emit_json(ctx, "audit.json", out);
    close_run(ctx);
    std::cout << "audit-khm: " << (all_pass ? "pass" : "FAIL") << ", outputs in " << ctx.dir
              << "\n";
    return all_pass ? exit_ok : exit_tolerance;
}

// ---------------------------------------------------------------------------
// scan-laws

real window_average(const std::vector<LedgerRow>& rows, real t0, real t1,
                    real LedgerRow::*field) {
    std::vector<const LedgerRow*> in;
    for (const LedgerRow& r : rows) {
        if (r.t >= t0 - 1e-12 && r.t <= t1 + 1e-12) in.push_back(&r);
    }
    if (in.empty()) return 0;
    if (in.size() == 1) return in.front()->*field;
    real integral = 0;
    for (std::size_t i = 0; i + 1 < in.size(); ++i) {
        integral += 0.5 * (in[i]->*field + in[i + 1]->*field) * (in[i + 1]->t - in[i]->t);
    }
    const real span = in.back()->t - in.front()->t;
    return span > 0 ? integral / span : in.front()->*field;
}

int cmd_scan(const Config& cfg, const std::string& run_dir) {
    RunContext ctx = open_run(cfg, "scan-laws");
    const real t0 = cfg.get_real("scan.window_t0");
    const real t1 = cfg.get_real("scan.window_t1");

    std::vector<std::string> names;
    for (const auto& entry : std::filesystem::directory_iterator(run_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("snapshot_", 0) == 0 && name.size() > 4 &&
            name.substr(name.size() - 4) == ".khm") {
            names.push_back(name);
        }
    }
    std::sort(names.begin(), names.end());
    if (names.empty()) throw ConfigError("scan-laws: no snapshot_*.khm files in '" + run_dir + "'");

    std::vector<Snapshot> snaps;
    for (const std::string& name : names) {
        Snapshot s = read_snapshot(run_dir + "/" + name);
        if (s.time >= t0 - 1e-12 && s.time <= t1 + 1e-12) snaps.push_back(std::move(s));
    }
    if (snaps.empty()) {
        throw ConfigError("scan-laws: no snapshots inside the scan window [" +
                          std::to_string(t0) + ", " + std::to_string(t1) + "]");
    }

    // dissipation rates averaged over the same window, when a ledger exists
    real eps_E = 0;
    real eps_M = 0;
    bool have_ledger = false;
    {
        std::ifstream in(run_dir + "/ledger.csv");
        if (in) {
            InvariantLedger ledger = read_ledger_csv(in);
            std::ifstream din(run_dir + "/ledger_diagnostics.csv");
            if (din) merge_ledger_diagnostics_csv(din, ledger);
            eps_E = window_average(ledger.rows, t0, t1, &LedgerRow::eps_E);
            eps_M = window_average(ledger.rows, t0, t1, &LedgerRow::eps_M);
            have_ledger = true;
        }
    }

    const SeparationScan scan =
        log_spaced_scan(cfg.get_real("scan.lambda_min"), cfg.get_real("scan.lambda_max"),
                        static_cast<int>(cfg.get_int("scan.lambda_count")), *snaps.front().grid);
    const DirectionSet dirs = directions_from(cfg);
    ScanOptions opt;
    opt.directions = &dirs;
    opt.window.ratio_min = cfg.get_real("scan.ratio_min");
    opt.window.ratio_max = cfg.get_real("scan.ratio_max");
    opt.eps_E = eps_E;
    opt.eps_M = eps_M;

    std::vector<const Snapshot*> ptrs;
    ptrs.reserve(snaps.size());
    for (const Snapshot& s : snaps) ptrs.push_back(&s);
    const LawScan result = scan_laws(ptrs, scan, opt);

    {
        std::ostringstream os;
        write_law_scan_csv(os, result.records);
        emit_text(ctx, "scan.csv", os.str());
    }

    const PlateauReport& p = result.plateau;
    json out;
    out["run_dir"] = run_dir;
    out["snapshots"] = snaps.size();
    out["have_ledger"] = have_ledger;
    out["compensated"] = p.compensated;
    out["has_plateau"] = p.has_plateau;
    out["lambda_lo"] = p.lambda_lo;
    out["lambda_hi"] = p.lambda_hi;
    out["decades"] = p.decades;
    out["transverse_agreement"] = p.transverse_agreement;
    out["eps_E"] = p.eps_E;
    out["eps_M"] = p.eps_M;
    out["lambda"] = p.lambda;
    out["ratio_EL"] = p.ratio_EL;
    out["ratio_ET"] = p.ratio_ET;
    out["ratio_ML"] = p.ratio_ML;
    out["excluded_lambdas"] = result.excluded_lambdas;

    bool pass = true;
    if (cfg.get_bool("scan.require_plateau")) {
        pass = p.compensated && p.has_plateau && p.decades >= 0.5 &&
               p.transverse_agreement <= 0.2;
    }
    out["pass"] = pass;
    emit_json(ctx, "plateau.json", out);
    close_run(ctx);
    std::cout << "scan-laws: " << result.records.size() << " records, "
              << (pass ? "pass" : "FAIL") << ", outputs in " << ctx.dir << "\n";
    return pass ? exit_ok : exit_tolerance;
}

// ---------------------------------------------------------------------------
// verify-constants

int cmd_constants(const Config& cfg) {
    RunContext ctx = open_run(cfg, "verify-constants");
    const real tol = cfg.get_real("tolerances.constants");
    const real iso_tol = cfg.get_real("tolerances.isotropy");
    const DirectionSet dirs = directions_from(cfg);

    json out;
    bool all_pass = true;
    json profiles = json::array();
    for (const KernelProfile profile : {KernelProfile::bump, KernelProfile::gaussian}) {
        const MollifierKernel kernel(profile, 1.0);
        const CoareaConstants c = verify_coarea_constants(kernel);

        // direction-weighted second moment of the kernel: sum_d w_d m2 n (x) n
        // must reproduce I/3 for the transverse/longitudinal split to close
        real m[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
        for (std::size_t d = 0; d < dirs.n.size(); ++d) {
            const Vec3& v = dirs.n[d];
            const real comp[3] = {v.x, v.y, v.z};
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) m[i][j] += dirs.w[d] * comp[i] * comp[j];
            }
        }
        real iso = 0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const real target = i == j ? 1.0 / 3.0 : 0.0;
                iso = std::max(iso, std::abs(c.m2 * m[i][j] - target));
            }
        }

        const bool pass = c.worst_deviation <= tol && iso <= iso_tol;
        profiles.push_back({{"profile", to_string(profile)},
                            {"m2", c.m2},
                            {"m3_dphi", c.m3_dphi},
                            {"transverse_route", c.transverse_route},
                            {"longitudinal_route", c.longitudinal_route},
                            {"eliminated", c.eliminated},
                            {"mixed_weight", c.mixed_weight},
                            {"worst_deviation", c.worst_deviation},
                            {"isotropy_deviation", iso},
                            {"pass", pass}});
        all_pass = all_pass && pass;
    }
    out["profiles"] = std::move(profiles);
    out["tolerance"] = tol;
    out["isotropy_tolerance"] = iso_tol;
    out["directions"] = dirs.name;
    out["pass"] = all_pass;
    emit_json(ctx, "constants.json", out);
    close_run(ctx);
    std::cout << "verify-constants: " << (all_pass ? "pass" : "FAIL") << ", outputs in "
              << ctx.dir << "\n";
    return all_pass ? exit_ok : exit_tolerance;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const Config& cfg, std::string dir) {
    if (dir.empty()) dir = cfg.get_string("output.dir");
    json out;
    out["dir"] = dir;
    bool overall = true;

    std::vector<std::string> bad;
    bool manifest_ok = false;
    try {
        bad = verify_manifest(dir);
        manifest_ok = bad.empty();
    } catch (const ConfigError& e) {
        out["manifest_error"] = e.what();
    }
    out["manifest_ok"] = manifest_ok;
    out["altered_files"] = bad;
    overall = overall && manifest_ok;

    json artifacts = json::array();
    for (const char* name : {"run.json", "dissipation.json", "identities.json", "audit.json",
                             "plateau.json", "constants.json"}) {
        std::ifstream in(dir + "/" + std::string(name));
        if (!in) continue;
        json j;
        try {
            in >> j;
        } catch (const json::exception&) {
            artifacts.push_back({{"name", name}, {"pass", false}, {"error", "malformed JSON"}});
            overall = false;
            continue;
        }
        const bool pass = j.value("pass", false);
        artifacts.push_back({{"name", name}, {"pass", pass}});
        overall = overall && pass;
    }
    if (artifacts.empty()) {
        out["note"] = "no gate artifacts found";
        overall = false;
    }
    out["artifacts"] = std::move(artifacts);
    out["pass"] = overall;

    std::ofstream rep(dir + "/report.json");
    if (!rep) throw ConfigError("cannot write '" + dir + "/report.json'");
    rep << out.dump(2) << '\n';
    std::cout << "report: " << (overall ? "pass" : "FAIL") << " (" << dir << "/report.json)\n";
    return overall ? exit_ok : exit_tolerance;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"khmlab: scale-flux laws and two-point balances for EMHD / Hall-MHD"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string snapshot_path;
    std::string first_path;
    std::string second_path;
    std::string run_dir;
    std::string report_dir;

    CLI::App* sim = app.add_subcommand("simulate", "integrate a configured run");
    add_common(sim, args);

    CLI::App* est = app.add_subcommand("estimate", "shell + dissipation estimates of a snapshot");
    add_common(est, args);
    est->add_option("--snapshot", snapshot_path, "snapshot file (.khm)")->required();

    CLI::App* idn = app.add_subcommand("verify-identities", "algebraic identity checks");
    add_common(idn, args);

    CLI::App* aud = app.add_subcommand("audit-khm", "two-point balance audit between snapshots");
    add_common(aud, args);
    aud->add_option("--first", first_path, "earlier snapshot (.khm)")->required();
    aud->add_option("--second", second_path, "later snapshot (.khm)")->required();

    CLI::App* scn = app.add_subcommand("scan-laws", "separation scan over a run directory");
    add_common(scn, args);
    scn->add_option("--run", run_dir, "directory with snapshot_*.khm and ledger.csv")->required();

    CLI::App* cst = app.add_subcommand("verify-constants", "kernel moment and isotropy checks");
    add_common(cst, args);

    CLI::App* rep = app.add_subcommand("report", "aggregate pass/fail of a run directory");
    add_common(rep, args);
    rep->add_option("--dir", report_dir, "directory to aggregate (default: output dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    try {
        const Config cfg = build_config(args);
        if (sim->parsed()) return cmd_simulate(cfg);
        if (est->parsed()) return cmd_estimate(cfg, snapshot_path);
        if (idn->parsed()) return cmd_verify_identities(cfg);
        if (aud->parsed()) return cmd_audit(cfg, first_path, second_path);
        if (scn->parsed()) return cmd_scan(cfg, run_dir);
        if (cst->parsed()) return cmd_constants(cfg);
        if (rep->parsed()) return cmd_report(cfg, report_dir);
        std::cerr << "khmlab: no subcommand\n";
        return exit_config;
    } catch (const ConfigError& e) {
        std::cerr << "khmlab: " << e.what() << "\n";
        return exit_config;
    } catch (const PreconditionError& e) {
        std::cerr << "khmlab: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "khmlab: unexpected error: " << e.what() << "\n";
        return 1;
    }
}
