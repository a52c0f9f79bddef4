#pragma once

#include <string>
#include <vector>

#include "vfp/free_energy.hpp"

namespace vfp {

// -v f_x + (1/m)(U' + (K*f)') f_v + (gamma/m)(v f)_v + (sigma^2/2) f_vv.
// Transport uses the entropic stream-function bracket, the velocity pair the
// Scharfetter-Gummel (Chang-Cooper) flux in log-mean form.
GridField vfp_rhs(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p);
GridField vfp_transport_rhs(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p);
GridField vfp_dissipative_rhs(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p);

struct CflReport {
    double dt_max = 0.0;
    std::string binding;  // "transport_x", "transport_v" or "diffusion_v"
    double limit_x = 0.0, limit_v = 0.0, limit_diff = 0.0;
};
// dt <= 0.5 min(dx / v_max, dv / force_max, dv^2 / sigma^2), force_max from f.
CflReport cfl_limit(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p);

struct EvolveConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    int snapshot_every = 0;  // 0 keeps only the initial and final densities
    int energy_every = 1;
    // Time weight of the implicit velocity half-steps; < 0 picks 1/2 when the explicit
    // part keeps positivity and 1 otherwise.
    double sg_theta = -1.0;
    bool second_order_transport = true;
};

struct EvolveResult {
    std::vector<double> snapshot_times;
    std::vector<PhaseDensity> snapshots;
    std::vector<EnergyReport> energy;
    double max_mass_defect = 0.0;  // largest |mass - 1| before renormalization
    double sg_theta = 1.0;
    int steps = 0;
};

// Strang splitting: half velocity drift-diffusion, full transport (SSP-RK2), half velocity step.
EvolveResult evolve(const PhaseDensity& f0, const PotentialSpec& spec, const ModelParams& p, const EvolveConfig& cfg);

}  // namespace vfp
