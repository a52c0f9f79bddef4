#include "vfp/stationary_measure.hpp"

#include <cmath>
#include <sstream>

#include "vfp/free_energy.hpp"

namespace vfp {

namespace {

// e^{-beta (U + K*rho)} normalized on the x-grid; rho is a per-x density with sum * dx = 1.
std::vector<double> gibbs_map(const PotentialSpec& spec, const ModelParams& p, const GridSpec& g,
                              const std::vector<double>& rho, bool with_interaction) {
    std::vector<double> Kc(g.nx, 0.0);
    if (with_interaction) {
        PhaseDensity tmp;
        tmp.grid = g;
        tmp.values.assign(g.size(), 0.0);
        // Single v-column carrying the marginal is enough for K*rho.
        for (int i = 0; i < g.nx; ++i) tmp.values[g.idx(i, 0)] = rho[i] / g.dv();
        MeanField1D mf = MeanField1D::from_density(spec, tmp);
        for (int i = 0; i < g.nx; ++i) Kc[i] = mf.conv(g.x(i));
    }
    std::vector<double> e(g.nx);
    double emin = INFINITY;
    for (int i = 0; i < g.nx; ++i) {
        e[i] = p.beta * (spec.U.value(g.x(i)) + Kc[i]);
        emin = std::min(emin, e[i]);
    }
    std::vector<double> out(g.nx);
    for (int i = 0; i < g.nx; ++i) out[i] = std::exp(-(e[i] - emin));
    const double Z = pairwise_sum(out) * g.dx();
    for (double& y : out) y /= Z;
    return out;
}

}  // namespace

GibbsResult gibbs_fixed_point(const PotentialSpec& spec, const ModelParams& params, const GridSpec& grid,
                              double damping, double tol, int max_iter) {
    if (!(damping > 0.0 && damping <= 1.0)) throw ParameterDomainError("gibbs_fixed_point: damping must lie in (0,1]");
    if (!(tol > 0.0)) throw ParameterDomainError("gibbs_fixed_point: tol must be positive");
    if (max_iter < 1) throw ParameterDomainError("gibbs_fixed_point: max_iter must be >= 1");
    grid.validate();
    const bool inter = !(spec.interaction_off || spec.K.is_zero());
    GibbsResult res;
    std::vector<double> rho = gibbs_map(spec, params, grid, {}, false);
    double r = 0.0;
    int it = 0;
    while (true) {
        ++it;
        std::vector<double> next = gibbs_map(spec, params, grid, rho, inter);
        r = 0.0;
        for (int i = 0; i < grid.nx; ++i) {
            const double y = (1.0 - damping) * rho[i] + damping * next[i];
            r += std::abs(y - rho[i]) * grid.dx();
            rho[i] = y;
        }
        res.residual_log.push_back(r);
        if (r < tol) break;
        if (it >= max_iter) {
            std::ostringstream os;
            os << "gibbs_fixed_point: no convergence after " << it << " iterations (last L1 update " << r << ")";
            throw NonConvergenceError(os.str(), r);
        }
    }
    const double s = params.beta * params.m;
    std::vector<double> phi(grid.nv);
    for (int j = 0; j < grid.nv; ++j) phi[j] = std::exp(-0.5 * s * grid.v(j) * grid.v(j));
    const double Zv = pairwise_sum(phi) * grid.dv();
    GridField vals(grid.size());
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.nv; ++j) vals[grid.idx(i, j)] = rho[i] * phi[j] / Zv;
    res.density = PhaseDensity::normalized(grid, std::move(vals));
    res.iterations = it;
    res.residual = r;
    return res;
}

KramersMoments kramers_reference(const ModelParams& params, double kappa_U) {
    if (!(kappa_U > 0.0)) throw ParameterDomainError("kramers_reference: kappa_U must be positive");
    return {1.0 / (2.0 * params.beta * kappa_U), 1.0 / (params.beta * params.m)};
}

}  // namespace vfp
