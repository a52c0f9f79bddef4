// One PASS/FAIL line per acceptance criterion; exit status 1 when any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "pipelines.hpp"
#include "vfp/hamiltonian_flow.hpp"
#include "vfp/stationary_measure.hpp"

using namespace vfp;
namespace pl = vfp::pipelines;

namespace {

// Tolerances and runtime budgets, in the order of the criteria.
constexpr double kDetTol = 1e-6;
constexpr double kEnergyDriftTol = 1e-4;
constexpr double kHDetectTol = 1e-3;  // per-trajectory h drift that counts as a detected failure
constexpr double kStationaryI = 1e-6, kStationaryL1 = 1e-6;
constexpr double kGenericRhs = 1e-10, kGenericStruct = 1e-8;
constexpr double kCrossL1 = 0.05;
constexpr double kBudget[10] = {10, 30, 120, 300, 300, 180, 30, 120, 120, 300};

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

SimConfig particles(double t_end = 1.0, std::uint64_t seed = 1) {
    SimConfig s;
    s.N = 100000;
    s.dt = 5e-3;
    s.t_end = t_end;
    s.record_every = 20;
    s.seed = seed;
    return s;
}

Outcome c1_volume() {
    const ModelParams p = derived_constants(1, 1, 1);
    const PotentialSpec spec = PotentialSpec::make(Potential::quartic_double_well(1.0, 1.0), Potential::zero(), 0.0);
    const FlowContext ctx{&spec, &p, nullptr, 1e-3};
    double worst = 0.0, fd_err = 0.0;
    for (double x0 : {-1.5, -0.3, 0.0, 0.8, 1.7})
        for (double v0 : {-1.0, 0.0, 0.6}) {
            double x = x0, v = v0, J[4] = {1, 0, 0, 1};
            for (int k = 0; k < 5000; ++k) {
                flow_1d(x, v, k * 1e-3, (k + 1) * 1e-3, ctx, J);
                worst = std::max(worst, std::abs(J[0] * J[3] - J[1] * J[2] - 1.0));
            }
            // Independent check that J is the derivative: central differences of the map.
            const double e = 1e-6;
            auto phi = [&](double a, double b) {
                flow_1d(a, b, 0.0, 5.0, ctx);
                return std::pair{a, b};
            };
            auto [xp, vp] = phi(x0 + e, v0);
            auto [xm, vm] = phi(x0 - e, v0);
            auto [xq, vq] = phi(x0, v0 + e);
            auto [xr, vr] = phi(x0, v0 - e);
            const double det_fd = ((xp - xm) * (vq - vr) - (xq - xr) * (vp - vm)) / (4 * e * e);
            fd_err = std::max(fd_err, std::abs(det_fd - (J[0] * J[3] - J[1] * J[2])));
        }
    return {worst <= kDetTol && fd_err <= 1e-4,
            fmt("max |det DPhi - 1| = %.2e over 15 points x 5000 steps; finite-difference det agrees to %.1e", worst,
                fd_err)};
}

Outcome c2_energy() {
    const ModelParams p = derived_constants(1, 1, 1);
    // Pure Phi transport of 1e4 samples with grad K = 0: H = E[v^2/2 + U] is conserved.
    const PotentialSpec quartic = PotentialSpec::make(Potential::quartic_double_well(1.0, 1.0), Potential::zero(), 0.0);
    const FlowContext ctx{&quartic, &p, nullptr, 1e-3};
    SimConfig s;
    s.N = 10000;
    s.init = InitialLaw{0.5, 0.0, 0.8, 0.7, {}, {}};
    const ParticleEnsemble e0 = initial_ensemble(s, 1);
    auto H = [&](const std::vector<double>& xs, const std::vector<double>& vs) {
        double acc = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) acc += 0.5 * vs[i] * vs[i] + quartic.U.value(&xs[i], 1) / p.m;
        return acc / static_cast<double>(xs.size());
    };
    std::vector<double> xs = e0.x, vs = e0.v;
    const double H0 = H(xs, vs);
    double drift = 0.0;
    for (int k = 0; k < 50; ++k) {
        for (std::size_t i = 0; i < xs.size(); ++i) flow_1d(xs[i], vs[i], 0.1 * k, 0.1 * (k + 1), ctx);
        drift = std::max(drift, std::abs(H(xs, vs) - H0) / std::abs(H0));
    }

    // With grad K != 0 the single-trajectory h_f along Phi is not conserved.
    auto per_trajectory = [&](const PotentialSpec& spec) {
        SimConfig c;
        c.N = 10000;
        c.dt = 2e-3;
        c.t_end = 5.0;
        c.record_every = 250;
        c.init = InitialLaw{1.0, 0.0, 1.5, 0.4, {}, {}};
        const SimResult sim = simulate(c, spec, p);
        // Leapfrog energy error scales as dt^2; 2.5e-4 keeps it below 1e-6 for the K = 0 control.
        const FlowContext fc{&spec, &p, spec.interaction_off ? nullptr : &sim.history, 2.5e-4};
        const ParticleEnsemble z0 = sim.store.snapshot(0);
        const MeanField1D mf0 = MeanField1D::from_ensemble(spec, z0);
        double worst = 0.0;
        for (std::size_t k = 1; k < sim.store.size(); ++k) {
            const MeanField1D mft = MeanField1D::from_ensemble(spec, sim.store.snapshot(k));
            for (std::size_t i = 0; i < 200; ++i) {
                double x = z0.x[i], v = z0.v[i];
                const double h0 = hamiltonian_at(x, v, mf0, spec, p, 1.0);
                flow_1d(x, v, 0.0, sim.store.times[k], fc);
                worst = std::max(worst, std::abs(hamiltonian_at(x, v, mft, spec, p, 1.0) - h0));
            }
        }
        return worst;
    };
    const double off = per_trajectory(PotentialSpec::make(Potential::quadratic(1.0), Potential::zero(), 0.5));
    const double on = per_trajectory(PotentialSpec::make(Potential::quadratic(1.0), Potential::quadratic(1.0), 0.5));
    return {drift <= kEnergyDriftTol && off <= 1e-6 && on > kHDetectTol,
            fmt("relative H drift %.2e; per-trajectory h drift %.1e with K = 0, %.3f with K = x^2/2 (detected)", drift,
                off, on)};
}

Outcome c3_stationary() {
    const pl::Benchmark b = pl::harmonic_benchmark();
    const GibbsResult g = gibbs_fixed_point(b.spec, b.params, b.grid);
    const double I = dissipation_I(g.density, b.spec, b.params);
    const pl::Benchmark a = pl::arbitration_benchmark();
    const double I_int = dissipation_I(gibbs_fixed_point(a.spec, a.params, a.grid).density, a.spec, a.params);
    EvolveConfig cfg;
    cfg.dt = 7e-4;  // below the 256^2 CFL limit
    cfg.t_end = 5.0;
    cfg.snapshot_every = 250;
    cfg.energy_every = 0;
    const EvolveResult r = evolve(g.density, b.spec, b.params, cfg);
    double l1 = 0.0;
    for (const auto& s : r.snapshots) l1 = std::max(l1, l1_distance(s, g.density));
    return {I <= kStationaryI && I_int <= kStationaryI && l1 <= kStationaryL1,
            fmt("I(f_inf) = %.1e (harmonic), %.1e (interacting); max L1 drift over %g snapshots to t = 5: %.1e", I,
                I_int, static_cast<double>(r.snapshots.size()), l1)};
}

Outcome c4_dissipation() {
    const pl::Benchmark b = pl::harmonic_benchmark();
    const pl::PdeDissipation pde = pl::pde_dissipation(b, 5e-4, 1.0, 100);
    const pl::ParticleDissipation par = pl::particle_dissipation(b, particles(), false);
    bool ok = !pde.rows.empty() && !par.rows.empty();
    double wp = 0.0, wk = 0.0;
    for (const auto& r : pde.rows) ok = ok && r.ok, wp = std::max(wp, r.residual / r.tol);
    for (const auto& r : par.rows) ok = ok && r.ok, wk = std::max(wk, r.residual / r.tol);
    return {ok, fmt("PDE: %g rows, worst residual/tol %.2f; particles: %g rows, worst residual/tol %.2f",
                    static_cast<double>(pde.rows.size()), wp, static_cast<double>(par.rows.size()), wk)};
}

Outcome c5_trajectorial() {
    const pl::Arbitration a = pl::arbitrate_variants(pl::arbitration_benchmark(), particles(), {1, 2, 3});
    bool ok = a.consistent && a.winner.has_value();
    double worst = 0.0;
    if (ok)
        for (const auto& table : a.tables)
            for (const auto& r : table) {
                const bool v = *a.winner == InteractionVariant::paper_V;
                ok = ok && (v ? r.ok_paper_V : r.ok_derivation_Y2);
                worst = std::max(worst, std::abs((v ? r.D_paper_V : r.D_derivation_Y2) + r.I) / r.tol);
            }
    std::string picks;
    for (const auto& s : a.selected) picks += std::string(picks.empty() ? "" : ",") + (s ? variant_name(*s) : "none");
    return {ok, "selected per seed {1,2,3}: " + picks + fmt("; worst |E D + I|/tol for the winner %.2f", worst)};
}

Outcome c6_pullback() {
    const auto rows = pl::pullback_consistency(pl::harmonic_benchmark(), particles(), 1e-2);
    int n = 0;
    bool ok = true;
    double dF = 0.0, dI = 0.0;
    for (const auto& r : rows) {
        if (r.t <= 0.0) continue;
        ++n;
        ok = ok && r.ok_F && r.ok_I;
        dF = std::max(dF, std::abs(r.F - r.F_tilde));
        dI = std::max(dI, std::abs(r.I - r.I_tilde) / (5e-2 * r.I + 1e-2));
    }
    return {ok && n >= 10, fmt("%g times, max |F - F~| = %.2e, worst |I - I~|/tol %.2f", n, dF, dI)};
}

Outcome c7_generic() {
    const auto rows = pl::generic_comparison(pl::harmonic_benchmark(), 5, 1);
    double rhs = 0.0, anti = 0.0, sym = 0.0, minf = 0.0;
    for (const auto& r : rows) {
        rhs = std::max(rhs, r.rhs_diff);
        anti = std::max(anti, r.checks.poisson_antisymmetry);
        sym = std::max(sym, r.checks.onsager_symmetry);
        minf = std::min(minf, r.checks.onsager_min_form);
    }
    return {rows.size() == 5 && rhs <= kGenericRhs && anti <= kGenericStruct && sym <= kGenericStruct &&
                minf >= -kGenericStruct,
            fmt("|generic - direct|_inf %.1e, antisymmetry %.1e, symmetry %.1e, min form %.1e", rhs, anti, sym, minf)};
}

Outcome c8_metric() {
    const auto rows = pl::metric_derivative_probe(pl::harmonic_benchmark(), 10, 0.1, 1e-3);
    bool ok = rows.size() == 10;
    double worst = 0.0, drift = 0.0;
    for (const auto& r : rows) {
        ok = ok && r.ok;
        worst = std::max(worst, std::abs(r.speed - r.sqrt_I) / (0.05 * r.sqrt_I + 1e-3));
        drift = std::max(drift, r.marginal_drift);
    }
    return {ok, fmt("10 probes, worst |speed - sqrt I~|/tol %.2f, sqrt I~ from %.3f to %.3f, marginal drift %.1e",
                    worst, rows.front().sqrt_I, rows.back().sqrt_I, drift)};
}

Outcome c9_hwi() {
    const pl::Benchmark b = pl::harmonic_benchmark();
    const double s = b.params.beta * b.params.m, M = 1.0;
    const pl::HwiBattery bat = pl::hwi_battery(b.grid, s, M, 200, 20, 9);
    int held = 0, g = 0, pert = 0, degenerate = 0;
    for (std::size_t k = 0; k < bat.rows.size(); ++k) {
        held += bat.rows[k].holds;
        g += bat.labels[k] == "gaussian";
        pert += bat.labels[k] == "perturbed";
        degenerate += bat.rows[k].degenerate && bat.labels[k] == "mismatched";
    }
    const bool kappa_ok = std::abs(bat.kappa.kappa - M * s) <= 1e-3 * M * s;
    return {held == static_cast<int>(bat.rows.size()) && g == 200 && pert == 20 && degenerate >= 1 && kappa_ok,
            fmt("%g/%g pairs hold, kappa_M = %.4f, infinite-distance pairs reported: %g", held,
                static_cast<double>(bat.rows.size()), bat.kappa.kappa, degenerate)};
}

Outcome c10_cross() {
    const pl::CrossSolver c = pl::cross_solver(pl::harmonic_benchmark(), particles(), 5e-4);
    return {c.l1 <= kCrossL1, fmt("L1(KDE, PDE) at t = 1: %.4f", c.l1)};
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[10] = {
        {"volume preservation", c1_volume},          {"reversible energy conservation", c2_energy},
        {"stationarity", c3_stationary},             {"dissipation identity", c4_dissipation},
        {"trajectorial identity in expectation", c5_trajectorial},
        {"pullback consistency", c6_pullback},       {"GENERIC assembly", c7_generic},
        {"metric derivative", c8_metric},            {"partial HWI", c9_hwi},
        {"cross-solver agreement", c10_cross}};
    int failed = 0;
    for (int k = 0; k < 10; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= kBudget[k];
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::printf("criterion %2d %-38s %s  (%.1f s of %.0f s)  %s\n", k + 1, criteria[k].first, pass ? "PASS" : "FAIL",
                    secs, kBudget[k], o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/10 criteria passed\n", 10 - failed);
    return failed ? 1 : 0;
}
