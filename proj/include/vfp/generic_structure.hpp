#pragma once

#include "vfp/free_energy.hpp"

namespace vfp {

enum class BracketStencil { arakawa, entropic };

// L(f) phi = -{f, phi}. The entropic stencil needs s > 0 and is the one shared with vfp_rhs
// (s = beta m, phi = h_f); Arakawa is exactly antisymmetric in phi for compactly supported f.
// Ghost values of phi are linearly extrapolated.
GridField poisson_apply(const PhaseDensity& f, const GridField& phi, BracketStencil stencil = BracketStencil::arakawa,
                        double s = 0.0);
GridField poisson_apply(const PhaseDensity& f, const GhostField& phi, BracketStencil stencil, double s = 0.0);

// J = A/2 = diag(0, sigma^2/2) in d = 1.
OnsagerMatrix default_onsager(const ModelParams& p);

// -div(J u grad psi). W selects the Scharfetter-Gummel mobility (see onsager_divergence).
GridField onsager_apply(const PhaseDensity& u, const GridField& psi, const OnsagerMatrix& J,
                        const GridField* W = nullptr);

// d_t f = L(f) h_f - J(f)(ln f + beta m h_f). The constant in dF/df is dropped.
GridField assemble_generic_rhs(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p);

struct GenericChecks {
    double poisson_antisymmetry = 0.0;  // |<psi, L phi> + <phi, L psi>|
    double onsager_symmetry = 0.0;      // |<phi, J psi> - <psi, J phi>|
    double onsager_min_form = 0.0;      // min(<psi, J psi>, <phi, J phi>)
    double onsager_mass = 0.0;          // |int J psi|
};
GenericChecks structure_checks(const PhaseDensity& f, const GridField& phi, const GridField& psi,
                               const OnsagerMatrix& J);

// int (ln f + 1 + beta m h_f) L(f) h_f with the shared stencil.
double reversible_free_energy_rate(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p);

// max |J(f)(ln f + beta m h_f)|; zero at a Gibbs state.
double equilibrium_onsager_residual(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p);

}  // namespace vfp
