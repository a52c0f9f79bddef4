#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "config.hpp"
#include "pipelines.hpp"
#include "vfp/stationary_measure.hpp"

namespace fs = std::filesystem;
using namespace vfp;
using namespace vfp::cli;
namespace pl = vfp::pipelines;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { ok = 0, config_error = 2, numerical_error = 3, check_failed = 4 };

struct Run {
    std::string command;
    std::string config_path;
    std::string config_text;
    RunConfig cfg;
    std::uint64_t seed = 0;
    fs::path out;
    unsigned threads = 0;
    bool check = false;
    std::vector<std::string> artifacts;

    std::ofstream open(const std::string& name) {
        artifacts.push_back(name);
        std::ofstream f(out / name, std::ios::binary);
        if (!f) throw ConfigError("cannot write " + (out / name).string());
        f.precision(12);
        return f;
    }
    // gnuplot script plotting columns ys of csv against column x.
    void plot(const std::string& csv, int x, const std::vector<std::pair<int, std::string>>& ys, const std::string& title) {
        std::ofstream g = open(csv.substr(0, csv.rfind('.')) + ".gp");
        g << "set datafile separator ','\nset key autotitle columnhead\nset title '" << title << "'\n"
          << "set terminal pngcairo size 900,600\nset output '" << csv.substr(0, csv.rfind('.')) << ".png'\nplot ";
        for (std::size_t k = 0; k < ys.size(); ++k)
            g << (k ? ", " : "") << "'" << csv << "' using " << x << ":" << ys[k].first << " with linespoints title '"
              << ys[k].second << "'";
        g << "\n";
    }
    pl::Benchmark bench() const { return {cfg.params(), cfg.spec(), cfg.init, cfg.grid}; }
    SimConfig sim() const {
        SimConfig s = cfg.sim();
        s.seed = seed;
        return s;
    }
};

std::string file_sha1(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return sha1_hex(ss.str());
}

void write_manifest(Run& r, bool passed) {
    nlohmann::ordered_json m;
    m["command"] = r.command;
    m["version"] = kVersion;
    m["config_path"] = r.config_path;
    m["config_sha1"] = sha1_hex(r.config_text);
    m["seed"] = r.seed;
    m["check"] = r.check;
    m["check_passed"] = passed;
    nlohmann::ordered_json arts = nlohmann::ordered_json::object();
    for (const auto& a : r.artifacts) arts[a] = file_sha1(r.out / a);
    m["artifacts"] = arts;
    std::ofstream f(r.out / "manifest.json");
    f << m.dump(2) << "\n";
}

TrajectoryStore head(const TrajectoryStore& s, std::size_t n) {
    TrajectoryStore h = s;
    h.N = std::min(n, s.N);
    for (auto& x : h.xs) x.resize(h.N * s.d);
    for (auto& v : h.vs) v.resize(h.N * s.d);
    return h;
}

void energy_table(std::ostream& os, const std::vector<EnergyReport>& e) {
    write_energy_csv(os, e);
}

bool cmd_simulate(Run& r) {
    const pl::Benchmark b = r.bench();
    const SimResult res = simulate(r.sim(), b.spec, b.params);
    {
        auto f = r.open("trajectories.csv");
        write_trajectories_csv(f, head(res.store, r.cfg.csv_particles));
    }
    std::vector<EnergyReport> energy;
    for (std::size_t k = 0; k < res.store.size(); ++k) {
        const PhaseDensity f = kde_estimate(res.store.snapshot(k), b.grid, BandwidthPolicy::silverman());
        energy.push_back(energy_report(f, b.spec, b.params, res.store.times[k]));
        if (k == 0 || k + 1 == res.store.size()) {
            auto os = r.open("density_" + std::to_string(k) + ".csv");
            write_density_csv(os, f);
        }
    }
    {
        auto f = r.open("energy.csv");
        energy_table(f, energy);
    }
    r.plot("energy.csv", 1, {{2, "F"}, {3, "H"}, {4, "I"}}, "free energy and dissipation");
    // KDE noise allowance for the Lyapunov check.
    bool mono = true;
    for (std::size_t k = 1; k < energy.size(); ++k) mono = mono && energy[k].F <= energy[k - 1].F + 1e-2;
    std::printf("simulate: %zu particles, %zu snapshots, F %.6f -> %.6f, monotone F: %s\n", res.store.N,
                res.store.size(), energy.front().F, energy.back().F, mono ? "yes" : "no");
    return mono;
}

bool cmd_dissipation(Run& r) {
    const pl::Benchmark b = r.bench();
    const pl::PdeDissipation pde = pl::pde_dissipation(b, r.cfg.pde_dt, r.cfg.pde_t_end, r.cfg.pde_record_every);
    const pl::ParticleDissipation par = pl::particle_dissipation(b, r.sim(), true);
    auto table = [&](const std::string& name, const std::vector<pl::DissipationRow>& rows) {
        auto f = r.open(name);
        f << "t,dFdt,I,residual,tol,ok\n";
        for (const auto& x : rows) f << x.t << ',' << x.dFdt << ',' << x.I << ',' << x.residual << ',' << x.tol << ',' << x.ok << '\n';
        r.plot(name, 1, {{2, "dF/dt"}, {3, "I"}}, "dissipation identity");
    };
    table("dissipation_pde.csv", pde.rows);
    table("dissipation_particles.csv", par.rows);
    {
        auto f = r.open("energy_pde.csv");
        energy_table(f, pde.run.energy);
    }
    {
        auto f = r.open("variants.csv");
        f << "t,I,D_paper_V,D_derivation_Y2,tol,ok_paper_V,ok_derivation_Y2\n";
        for (const auto& v : par.variants)
            f << v.t << ',' << v.I << ',' << v.D_paper_V << ',' << v.D_derivation_Y2 << ',' << v.tol << ','
              << v.ok_paper_V << ',' << v.ok_derivation_Y2 << '\n';
        r.plot("variants.csv", 1, {{2, "I"}, {3, "-E D (paper_V)"}, {4, "-E D (derivation_Y2)"}}, "trajectorial rate");
    }
    bool pde_ok = true, par_ok = true, v_ok = true, y_ok = true;
    double worst = 0.0;
    for (const auto& x : pde.rows) pde_ok = pde_ok && x.ok, worst = std::max(worst, x.residual);
    for (const auto& x : par.rows) par_ok = par_ok && x.ok;
    for (const auto& v : par.variants) v_ok = v_ok && v.ok_paper_V, y_ok = y_ok && v.ok_derivation_Y2;
    std::printf("dissipation: PDE identity %s (max |dF/dt + I| = %.3e), particle identity %s\n", pde_ok ? "ok" : "FAIL",
                worst, par_ok ? "ok" : "FAIL");
    const char* arb = v_ok == y_ok ? "undecided" : variant_name(v_ok ? InteractionVariant::paper_V : InteractionVariant::derivation_Y2);
    std::printf("arbitrated interaction-term variant: %s\n", arb);
    return pde_ok && par_ok && v_ok != y_ok;
}

bool cmd_pullback(Run& r) {
    const auto rows = pl::pullback_consistency(r.bench(), r.sim(), r.cfg.flow_dt);
    auto f = r.open("pullback.csv");
    f << "t,F,F_tilde,I,I_tilde,ok_F,ok_I\n";
    bool all = true;
    for (const auto& x : rows) {
        f << x.t << ',' << x.F << ',' << x.F_tilde << ',' << x.I << ',' << x.I_tilde << ',' << x.ok_F << ',' << x.ok_I << '\n';
        all = all && x.ok_F && x.ok_I;
        std::printf("t %.3f  F %.6f  F~ %.6f  I %.6f  I~ %.6f\n", x.t, x.F, x.F_tilde, x.I, x.I_tilde);
    }
    f.close();
    r.plot("pullback.csv", 1, {{2, "F"}, {3, "F~"}, {4, "I"}, {5, "I~"}}, "pullback consistency");
    return all;
}

bool cmd_generic(Run& r) {
    const auto rows = pl::generic_comparison(r.bench(), 5, r.seed);
    auto f = r.open("generic.csv");
    f << "seed,rhs_diff,poisson_antisymmetry,onsager_symmetry,onsager_min_form,onsager_mass\n";
    bool all = true;
    for (const auto& x : rows) {
        f << x.seed << ',' << x.rhs_diff << ',' << x.checks.poisson_antisymmetry << ',' << x.checks.onsager_symmetry << ','
          << x.checks.onsager_min_form << ',' << x.checks.onsager_mass << '\n';
        all = all && x.rhs_diff <= 1e-10 && x.checks.poisson_antisymmetry <= 1e-8 && x.checks.onsager_symmetry <= 1e-8 &&
              x.checks.onsager_min_form >= -1e-8;
        std::printf("seed %llu  |generic - vfp|_inf %.3e  antisym %.3e  sym %.3e  min form %.3e\n",
                    static_cast<unsigned long long>(x.seed), x.rhs_diff, x.checks.poisson_antisymmetry,
                    x.checks.onsager_symmetry, x.checks.onsager_min_form);
    }
    return all;
}

bool cmd_hwi(Run& r) {
    const ModelParams p = r.cfg.params();
    const pl::HwiBattery bat = pl::hwi_battery(r.cfg.grid, p.beta * p.m, r.cfg.hwi_M, r.cfg.hwi_gaussian_pairs,
                                               r.cfg.hwi_perturbed_pairs, r.seed);
    {
        auto f = r.open("hwi.csv");
        write_hwi_csv(f, bat.rows);
    }
    r.plot("hwi.csv", 8, {{7, "lhs"}}, "HWI: lhs against rhs");
    int held = 0, degenerate = 0;
    for (const auto& x : bat.rows) held += x.holds, degenerate += x.degenerate;
    std::printf("hwi: kappa_M %.6f%s, %d/%zu pairs hold, %d degenerate (infinite W_J)\n", bat.kappa.kappa,
                bat.kappa.derivative_warning ? " (derivative warning)" : "", held, bat.rows.size(), degenerate);
    return held == static_cast<int>(bat.rows.size()) && degenerate >= 1;
}

bool cmd_stationary(Run& r) {
    const pl::Benchmark b = r.bench();
    const GibbsResult g = gibbs_fixed_point(b.spec, b.params, b.grid, r.cfg.gibbs_damping, r.cfg.gibbs_tol,
                                            r.cfg.gibbs_max_iter);
    {
        auto f = r.open("stationary.csv");
        write_density_csv(f, g.density);
    }
    {
        auto f = r.open("convergence.csv");
        f << "iteration,residual\n";
        for (std::size_t k = 0; k < g.residual_log.size(); ++k) f << k + 1 << ',' << g.residual_log[k] << '\n';
    }
    r.plot("convergence.csv", 1, {{2, "residual"}}, "fixed-point residual");
    const double I = dissipation_I(g.density, b.spec, b.params);
    std::printf("stationary: %d iterations, residual %.3e, I(f_inf) = %.3e\n", g.iterations, g.residual, I);
    return I <= 1e-6;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kinetic Vlasov-Fokker-Planck verification tool"};
    app.require_subcommand(1);
    Run run;
    std::optional<std::uint64_t> seed_flag;
    std::string out = "vfp_out";
    unsigned threads = 0;
    bool check = false;
    const std::vector<std::pair<std::string, std::string>> cmds = {
        {"simulate", "particle run with KDE free-energy series"},
        {"dissipation", "free-energy dissipation identity, PDE and particles, with variant arbitration"},
        {"pullback", "F = F~ and I = I~ along the pulled-back trajectories"},
        {"generic", "GENERIC assembly against the direct right-hand side"},
        {"hwi", "partial HWI battery on Gaussian-fiber pairs"},
        {"stationary", "self-consistent Gibbs state"}};
    for (const auto& [name, help] : cmds) {
        CLI::App* sc = app.add_subcommand(name, help);
        sc->add_option("--config", run.config_path, "config file")->required();
        sc->add_option("--seed", seed_flag, "seed (overrides VFP_SEED and [run] seed)");
        sc->add_option("--out", out, "artifact directory");
        sc->add_option("--threads", threads, "worker threads (0 = hardware)");
        sc->add_flag("--check", check, "exit 4 when the command's acceptance check fails");
        sc->callback([&run, n = name] { run.command = n; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? Exit::ok : Exit::config_error;
    }
    try {
        std::ifstream in(run.config_path, std::ios::binary);
        if (!in) throw ConfigError("cannot read config file '" + run.config_path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        run.config_text = ss.str();
        run.cfg = parse_config(run.config_text);
        run.seed = resolve_seed(run.cfg, seed_flag);
        run.cfg.seed = run.seed;
        run.threads = threads;
        run.check = check;
        if (threads) set_thread_count(threads);
        run.out = out;
        fs::create_directories(run.out);

        bool passed = false;
        if (run.command == "simulate") passed = cmd_simulate(run);
        else if (run.command == "dissipation") passed = cmd_dissipation(run);
        else if (run.command == "pullback") passed = cmd_pullback(run);
        else if (run.command == "generic") passed = cmd_generic(run);
        else if (run.command == "hwi") passed = cmd_hwi(run);
        else if (run.command == "stationary") passed = cmd_stationary(run);
        write_manifest(run, passed);
        std::printf("check: %s\n", passed ? "passed" : "FAILED");
        return check && !passed ? Exit::check_failed : Exit::ok;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return Exit::config_error;
    } catch (const ParameterDomainError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return Exit::config_error;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return Exit::numerical_error;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return Exit::numerical_error;
    }
}
