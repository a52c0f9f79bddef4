#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "vfp/kinetic_pde.hpp"
#include "vfp/particle_langevin.hpp"

namespace vfp::cli {

// Everything a run needs. Every field has a default except [params] m, gamma, kB_TB.
struct RunConfig {
    double m = 1.0, gamma = 1.0, kB_TB = 1.0;
    std::string U_kind = "quadratic", K_kind = "zero";
    double U_a = 1.0, U_b = 1.0, K_a = 1.0, K_b = 1.0;
    std::optional<double> kappa_U;  // defaults to the closed form when available
    InitialLaw init{1.0, 0.0, 0.7071067811865476, 0.7071067811865476, {}, {}};
    GridSpec grid{-7.0, 7.0, -7.0, 7.0, 256, 256};
    std::size_t N = 100000;
    double particle_dt = 5e-3, particle_t_end = 1.0;
    int particle_record_every = 20;
    std::size_t csv_particles = 1000;  // particles written to trajectories.csv
    double pde_dt = 5e-4, pde_t_end = 1.0;
    int pde_record_every = 100;
    double flow_dt = 1e-2;
    int hwi_gaussian_pairs = 200, hwi_perturbed_pairs = 20;
    double hwi_M = 1.0;
    double gibbs_damping = 0.5, gibbs_tol = 1e-12;
    int gibbs_max_iter = 1000;
    std::uint64_t seed = 1;

    ModelParams params() const;
    PotentialSpec spec() const;
    SimConfig sim() const;
};

// Sectioned "key = value" text. Syntax errors carry the line number, value and schema
// errors the "[section] key" they refer to; both throw ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// --seed beats VFP_SEED, which beats [run] seed.
std::uint64_t resolve_seed(const RunConfig& cfg, std::optional<std::uint64_t> flag);

std::string sha1_hex(const std::string& bytes);

}  // namespace vfp::cli
