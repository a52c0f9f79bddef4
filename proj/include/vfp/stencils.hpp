#pragma once

#include <vector>

#include "vfp/phase_density.hpp"

namespace vfp {

// Fields with one ghost ring: (nx+2) x (nv+2), storage (i+1)*(nv+2) + (j+1).
struct GhostField {
    int nx = 0, nv = 0;
    std::vector<double> data;
    double operator()(int i, int j) const { return data[static_cast<std::size_t>(i + 1) * (nv + 2) + (j + 1)]; }
    double& operator()(int i, int j) { return data[static_cast<std::size_t>(i + 1) * (nv + 2) + (j + 1)]; }
};

// Ghost ring by linear extrapolation from the two outermost interior layers.
GhostField extrapolate_ghosts(const GridSpec& g, const GridField& a);

// (a - b) / (ln a - ln b), with L(a, a) = a and L(a, 0) = 0.
double log_mean(double a, double b);
// B(a) = a / (e^a - 1), B(0) = 1.
double bernoulli(double a);

// Approximations of the canonical bracket {a, b} = a_x b_v - a_v b_x on interior cells.
// Links across the outer boundary are dropped, so sum(result) = 0 exactly.

// Arakawa 9-point Jacobian in neighbour-flux form. Antisymmetric in b for
// compactly supported a: sum(c * J(a, b)) = -sum(b * J(a, c)).
GridField arakawa_bracket(const GridSpec& g, const GridField& a, const GhostField& b);

// Stream-function form with stream M = exp(-s b)/s and log-mean face values of a*exp(s b).
// Exact for a = exp(-s b) up to the dropped boundary links, and
// sum((ln a + s b) * J) = 0 for compactly supported a. Requires s > 0.
GridField entropic_bracket(const GridSpec& g, const GridField& a, const GhostField& b, double s);

// Symmetric dissipative operator -div(J u grad psi) for J = [[jxx, jxv], [jxv, jvv]].
// Diagonal J uses face fluxes with mobility B(dW) * L(u_k, e^{dW} u_{k+1}) (W = 0 gives the
// log-mean); off-diagonal J uses a corner stencil with 4-cell average mobility.
struct OnsagerMatrix {
    double jxx = 0.0, jxv = 0.0, jvv = 0.0;
    bool diagonal() const { return jxv == 0.0; }
    bool psd(double tol = 0.0) const;
};
GridField onsager_divergence(const GridSpec& g, const GridField& u, const GridField& psi, const OnsagerMatrix& J,
                             const GridField* W = nullptr);

}  // namespace vfp
