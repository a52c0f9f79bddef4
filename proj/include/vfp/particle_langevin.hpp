#pragma once

#include <iosfwd>
#include <vector>

#include "vfp/hamiltonian_flow.hpp"
#include "vfp/model_core.hpp"

namespace vfp {

struct InitialLaw {
    // Independent Gaussians N(mean_x, sx^2) x N(mean_v, sv^2) per coordinate unless samples are given.
    double mean_x = 0.0, mean_v = 0.0, sx = 1.0, sv = 1.0;
    std::vector<double> xs, vs;  // user samples (N*d each) override the Gaussian law
};

struct SimConfig {
    std::size_t N = 1000;
    double dt = 1e-2;
    double t_end = 1.0;
    std::uint64_t seed = 1;
    int record_every = 10;
    InitialLaw init;
    bool keep_particles = true;
    // x-grid of the recorded force-field history (d = 1, interaction on).
    double history_x_min = -8.0, history_x_max = 8.0;
    int history_nx = 257;
    // Diagnostic multiplier on the noise amplitude (0 gives the noiseless dynamics).
    double noise_scale = 1.0;

    void validate() const;
    std::size_t step_count() const;
    std::size_t snapshot_count() const;
};

struct Moments {
    double ex2 = 0.0, ev2 = 0.0, ex4 = 0.0, ev4 = 0.0;
};

struct TrajectoryStore {
    int d = 1;
    std::size_t N = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> xs;  // per snapshot N*d (empty when particles are not kept)
    std::vector<std::vector<double>> vs;
    std::vector<Moments> moments;

    std::size_t size() const { return times.size(); }
    ParticleEnsemble snapshot(std::size_t k) const;
};

Moments empirical_moments(const ParticleEnsemble& ens);

ParticleEnsemble initial_ensemble(const SimConfig& cfg, int d);

// One kick-drift-OU-kick step. The noise for particle i at step k comes from
// the counter (seed, stream_ids[i], k), so results do not depend on thread count.
void step(ParticleEnsemble& ens, const PotentialSpec& spec, const ModelParams& params, double dt,
          double noise_scale = 1.0);

struct SimResult {
    TrajectoryStore store;
    ForceFieldHistory history;
};

SimResult simulate(const SimConfig& cfg, const PotentialSpec& spec, const ModelParams& params);

// Applies Phi_{-t} to every particle of every snapshot.
TrajectoryStore pulled_back_trajectories(const TrajectoryStore& store, const PotentialSpec& spec,
                                         const ModelParams& params, const ForceFieldHistory& history,
                                         double flow_dt = 1e-3);

// gradK*rho tabulated on the history grid for a d = 1 ensemble.
std::vector<double> tabulate_mean_field(const PotentialSpec& spec, const ParticleEnsemble& ens,
                                        const std::vector<double>& x_grid);

void write_trajectories_csv(std::ostream& os, const TrajectoryStore& store);

}  // namespace vfp
