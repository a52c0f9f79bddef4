#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vfp/free_energy.hpp"
#include "vfp/generic_structure.hpp"
#include "vfp/kinetic_pde.hpp"
#include "vfp/onsager_transport.hpp"
#include "vfp/particle_langevin.hpp"

// Verification pipelines shared by the CLI and the acceptance suite.
namespace vfp::pipelines {

struct Benchmark {
    ModelParams params;
    PotentialSpec spec;
    InitialLaw init;
    GridSpec grid;
};

// U = x^2/2, K = 0, beta = m = gamma = 1, X0 ~ N(1, 1/2), V0 ~ N(0, 1/2), 256^2 grid on [-7, 7]^2.
Benchmark harmonic_benchmark();
// K = U = x^2/2, Var X0 = 2, Var V0 = 1/4: Cov(X, V) grows away from 0, separating the variants.
Benchmark arbitration_benchmark();

// Cell averages of the Gaussian product law init, renormalized on the grid.
PhaseDensity gaussian_density(const GridSpec& g, const InitialLaw& init);

// ---- dissipation identity ----
struct DissipationRow {
    double t = 0.0, dFdt = 0.0, I = 0.0, residual = 0.0, tol = 0.0;
    bool ok = false;
};
// dF/dt by central differences of the recorded series, compared with I at the centre.
std::vector<DissipationRow> dissipation_rows(const std::vector<EnergyReport>& e, double rel_tol, double abs_tol);

struct PdeDissipation {
    EvolveResult run;
    std::vector<DissipationRow> rows;
};
PdeDissipation pde_dissipation(const Benchmark& b, double dt, double t_end, int record_every);

struct VariantRow {
    double t = 0.0, I = 0.0, D_paper_V = 0.0, D_derivation_Y2 = 0.0, tol = 0.0;
    bool ok_paper_V = false, ok_derivation_Y2 = false;
};
struct ParticleDissipation {
    SimResult sim;
    std::vector<EnergyReport> energy;        // Silverman KDE per snapshot
    std::vector<DissipationRow> rows;        // tolerance 0.2 I + 1e-2
    std::vector<VariantRow> variants;        // cross-fitted ensemble means of D
};
ParticleDissipation particle_dissipation(const Benchmark& b, const SimConfig& sim, bool with_variants);

struct Arbitration {
    std::vector<std::uint64_t> seeds;
    std::vector<std::optional<InteractionVariant>> selected;  // per seed; empty when zero or two pass
    bool consistent = false;
    std::optional<InteractionVariant> winner;
    std::vector<std::vector<VariantRow>> tables;
};
Arbitration arbitrate_variants(const Benchmark& b, SimConfig sim, const std::vector<std::uint64_t>& seeds);

// ---- pullback ----
struct PullbackRow {
    double t = 0.0, F = 0.0, F_tilde = 0.0, I = 0.0, I_tilde = 0.0;
    bool ok_F = false, ok_I = false;  // 2e-2 and 5e-2 I + 1e-2
};
std::vector<PullbackRow> pullback_consistency(const Benchmark& b, const SimConfig& sim, double flow_dt);

// ---- GENERIC ----
// exp of a random low-mode trigonometric field times a Gaussian envelope, normalized.
PhaseDensity random_smooth_density(const GridSpec& g, std::uint64_t seed);
struct GenericRow {
    std::uint64_t seed = 0;
    double rhs_diff = 0.0;  // max |assemble_generic_rhs - vfp_rhs|
    GenericChecks checks;
};
std::vector<GenericRow> generic_comparison(const Benchmark& b, int count, std::uint64_t seed);

// ---- Otto-Onsager metric ----
struct HwiBattery {
    std::vector<HwiReport> rows;
    std::vector<std::string> labels;  // "gaussian", "perturbed" or "mismatched"
    KappaReport kappa;
};
// Gaussian fibers N(a(x), s(x)^2) over a shared x-marginal, reference N(0, 1/(beta m)) per fiber.
HwiBattery hwi_battery(const GridSpec& g, double beta_m, double M, int gaussian_pairs, int perturbed_pairs,
                       std::uint64_t seed);

struct MetricDerivativeRow {
    double t = 0.0, speed = 0.0, sqrt_I = 0.0;
    bool ok = false;  // |speed - sqrt_I| <= 0.05 sqrt_I + 1e-3
    double marginal_drift = 0.0;
};
// Onsager-only flow with J = diag(0, sigma^2/2) towards the Gibbs state of b; the speed is the
// W_J difference quotient over delta and I~ the pulled-back dissipation at t = 0 frame.
std::vector<MetricDerivativeRow> metric_derivative_probe(const Benchmark& b, int probes, double probe_spacing,
                                                         double delta);

// ---- cross-solver ----
struct CrossSolver {
    double l1 = 0.0;
    PhaseDensity pde, kde;
};
CrossSolver cross_solver(const Benchmark& b, const SimConfig& sim, double pde_dt);

}  // namespace vfp::pipelines
