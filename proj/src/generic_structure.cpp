#include "vfp/generic_structure.hpp"

#include <algorithm>
#include <cmath>

namespace vfp {

GridField poisson_apply(const PhaseDensity& f, const GhostField& phi, BracketStencil stencil, double s) {
    GridField out = stencil == BracketStencil::arakawa ? arakawa_bracket(f.grid, f.values, phi)
                                                       : entropic_bracket(f.grid, f.values, phi, s);
    for (double& y : out) y = -y;
    return out;
}

GridField poisson_apply(const PhaseDensity& f, const GridField& phi, BracketStencil stencil, double s) {
    return poisson_apply(f, extrapolate_ghosts(f.grid, phi), stencil, s);
}

OnsagerMatrix default_onsager(const ModelParams& p) { return {0.0, 0.0, 0.5 * p.sigma * p.sigma}; }

GridField onsager_apply(const PhaseDensity& u, const GridField& psi, const OnsagerMatrix& J, const GridField* W) {
    return onsager_divergence(u.grid, u.values, psi, J, W);
}

GridField assemble_generic_rhs(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p) {
    const double s = p.beta * p.m;
    GridField rev = poisson_apply(f, hamiltonian_ghosted(f, spec, p, 1.0), BracketStencil::entropic, s);
    GridField h = hamiltonian_field(f, spec, p, 1.0);
    GridField dF(h.size()), W(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) {
        W[k] = s * h[k];
        dF[k] = f.values[k] > 0.0 ? std::log(f.values[k]) + W[k] : 0.0;
    }
    GridField irr = onsager_apply(f, dF, default_onsager(p), &W);
    for (std::size_t k = 0; k < rev.size(); ++k) rev[k] -= irr[k];
    return rev;
}

namespace {

double dot(const GridField& a, const GridField& b, double cell) {
    std::vector<double> t(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) t[k] = a[k] * b[k];
    return pairwise_sum(t) * cell;
}

}  // namespace

GenericChecks structure_checks(const PhaseDensity& f, const GridField& phi, const GridField& psi,
                               const OnsagerMatrix& J) {
    const double c = f.grid.cell();
    GenericChecks r;
    GridField Lphi = poisson_apply(f, phi), Lpsi = poisson_apply(f, psi);
    r.poisson_antisymmetry = std::abs(dot(psi, Lphi, c) + dot(phi, Lpsi, c));
    GridField Jphi = onsager_apply(f, phi, J), Jpsi = onsager_apply(f, psi, J);
    r.onsager_symmetry = std::abs(dot(phi, Jpsi, c) - dot(psi, Jphi, c));
    r.onsager_min_form = std::min(dot(psi, Jpsi, c), dot(phi, Jphi, c));
    r.onsager_mass = std::abs(pairwise_sum(Jpsi) * c);
    return r;
}

double reversible_free_energy_rate(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p) {
    const double s = p.beta * p.m;
    GridField rev = poisson_apply(f, hamiltonian_ghosted(f, spec, p, 1.0), BracketStencil::entropic, s);
    GridField h = hamiltonian_field(f, spec, p, 1.0);
    std::vector<double> t(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) {
        const double y = f.values[k];
        t[k] = y > 0.0 ? (std::log(y) + 1.0 + s * h[k]) * rev[k] : 0.0;
    }
    return pairwise_sum(t) * f.grid.cell();
}

double equilibrium_onsager_residual(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p) {
    const double s = p.beta * p.m;
    GridField h = hamiltonian_field(f, spec, p, 1.0);
    GridField psi(h.size()), W(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) {
        W[k] = s * h[k];
        psi[k] = f.values[k] > 0.0 ? std::log(f.values[k]) + W[k] : 0.0;
    }
    GridField J = onsager_apply(f, psi, default_onsager(p), &W);
    double m = 0.0;
    for (double y : J) m = std::max(m, std::abs(y));
    return m;
}

}  // namespace vfp
