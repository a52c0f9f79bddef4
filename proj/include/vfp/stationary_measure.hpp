#pragma once

#include <vector>

#include "vfp/phase_density.hpp"

namespace vfp {

struct GibbsResult {
    PhaseDensity density;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> residual_log;  // L1 update norm per iteration
};

// Damped Picard iteration on the x-factor of f = rho(x) e^{-beta m v^2/2} / Z_v:
// rho <- (1 - damping) rho + damping e^{-beta (U + K*rho)} / Z. Starts from e^{-beta U}.
GibbsResult gibbs_fixed_point(const PotentialSpec& spec, const ModelParams& params, const GridSpec& grid,
                              double damping = 0.5, double tol = 1e-12, int max_iter = 1000);

struct KramersMoments {
    double var_x = 0.0;
    double var_v = 0.0;
};

// Stationary variances for U = kappa_U x^2, K = 0.
KramersMoments kramers_reference(const ModelParams& params, double kappa_U);

}  // namespace vfp
