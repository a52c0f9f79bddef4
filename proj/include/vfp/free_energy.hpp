#pragma once

#include <iosfwd>
#include <vector>

#include "vfp/hamiltonian_flow.hpp"
#include "vfp/phase_density.hpp"
#include "vfp/stencils.hpp"

namespace vfp {

struct EnergyReport {
    double t = 0.0;
    double F = 0.0;        // free energy
    double H = 0.0;        // conservative energy, int f h_check
    double I = 0.0;        // dissipation, >= 0
    double entropy = 0.0;  // int f ln f
};

void write_energy_csv(std::ostream& os, const std::vector<EnergyReport>& series);

// The PotentialSpec passed to the factories must outlive the object.
// Position law as weighted atoms (x_k, w_k) with per-atom velocity mass wv_k = w_k * mean v.
// Quadratic K uses moments, so every query is O(1); other kernels sum over atoms.
class MeanField1D {
public:
    MeanField1D() = default;
    static MeanField1D from_density(const PotentialSpec& spec, const PhaseDensity& f);
    static MeanField1D from_ensemble(const PotentialSpec& spec, const ParticleEnsemble& ens);

    bool off() const { return off_; }
    double conv(double x) const;       // K*rho(x)
    double grad(double x) const;       // gradK*rho(x)
    double grad_vel(double x) const;   // int gradK(x - y1) y2 df(y)

private:
    const PotentialSpec* spec_ = nullptr;
    bool off_ = true;
    bool quadratic_ = false;
    double a_ = 0.0;
    double m0_ = 0.0, m1_ = 0.0, m2_ = 0.0, mv_ = 0.0, mxv_ = 0.0;
    std::vector<double> xs_, ws_, wv_;
    void finish();
};

// h_f = v^2/2 + U/m + K*f/m (weight 1) and h_check (weight 1/2) on the grid of f.
GridField hamiltonian_field(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p, double weight);
// Same, with analytic values on the ghost ring.
GhostField hamiltonian_ghosted(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p, double weight);

double h_check(const PhaseDensity& f, const PhasePoint& z, const PotentialSpec& spec, const ModelParams& p);
double h_full(const PhaseDensity& f, const PhasePoint& z, const PotentialSpec& spec, const ModelParams& p);
double hamiltonian_at(double x, double v, const MeanField1D& mf, const PotentialSpec& spec, const ModelParams& p,
                      double weight);

double entropy(const PhaseDensity& f);
double conservative_energy(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p);
double free_energy(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p);
// (sigma^2/2) int |d_v ln f + beta m v|^2 f.
double dissipation_I(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p);
EnergyReport energy_report(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p, double t);

// {f, g} = f_x g_v - f_v g_x by central differences (one-sided at the edges).
GridField poisson_bracket(const GridSpec& g, const GridField& f, const GridField& h);

// theta = ln f(z) + beta m h_check_f(z), with f floored at floor_eps * max f.
double energy_process_theta(const PhasePoint& z, const PhaseDensity& f, const PotentialSpec& spec,
                            const ModelParams& p, double floor_eps = 1e-12);

enum class InteractionVariant { paper_V, derivation_Y2 };
const char* variant_name(InteractionVariant v);

// Derivative fields of one density, reused across query points.
struct DensityFields {
    PhaseDensity f;
    LogDerivatives d;
    MeanField1D mf;  // law of the copy Y: the ensemble when given, else the grid density
};
DensityFields prepare_fields(const PhaseDensity& f, const PotentialSpec& spec, const ParticleEnsemble* ens = nullptr,
                             double floor_eps = 1e-12);

// 2g/m + (s^2/2) Dv f/f - b g v^2 + (s^2/2) Dv ln f - (b/2) <gradK*f(x), v> + (b/2) E<gradK(x - Y1), w>,
// w = v (paper_V) or w = Y2 (derivation_Y2). Dv f/f is taken as Dv ln f + (dv ln f)^2.
double trajectorial_rate_D(const PhasePoint& z, const DensityFields& fields, const PotentialSpec& spec,
                           const ModelParams& p, InteractionVariant variant);
// Ensemble mean of D over the particles of ens.
double mean_rate_D(const ParticleEnsemble& ens, const DensityFields& fields, const PotentialSpec& spec,
                   const ModelParams& p, InteractionVariant variant);

// Cross-fitted ensemble mean: fields (and the copy Y) from one half of the ensemble, D averaged
// over the other half, then swapped. Removes the self-kernel bias of evaluating ln f at the samples.
double mean_rate_D_crossfit(const ParticleEnsemble& ens, const GridSpec& grid, const BandwidthPolicy& policy,
                            const PotentialSpec& spec, const ModelParams& p, InteractionVariant variant);

// Phi_t and DPhi_t at every node of the pulled-back grid.
struct PullbackFrame {
    GridSpec grid;
    double t = 0.0;
    GridField x, v;
    GridField jac;  // 4 per node, row-major [xx, xv, vx, vv]
};
PullbackFrame build_pullback_frame(const GridSpec& g, double t, const FlowContext& ctx);

// F~_t(u) = int u ln u + beta m u h_check_{f_t}(Phi_t(z~)) by quadrature on the frame grid.
double pulled_back_free_energy(const PhaseDensity& u, const PullbackFrame& frame, const MeanField1D& mf_t,
                               const PotentialSpec& spec, const ModelParams& p);
// I~_t(u) = (1/2) int |grad(ln u + beta m h_check o Phi_t) DPhi_{-t} G|^2 u.
double pulled_back_dissipation(const PhaseDensity& u, const PullbackFrame& frame, const PotentialSpec& spec,
                               const ModelParams& p);

double theta_tilde(const PhasePoint& zt, const PhaseDensity& u, const FlowContext& ctx, double t,
                   const MeanField1D& mf_t, const PotentialSpec& spec, const ModelParams& p,
                   double floor_eps = 1e-12);

// Grid fields of the pulled-back frame needed by D~ (built once per time).
struct PullbackFields {
    GridSpec grid;
    double t = 0.0;
    GridField th_x, th_v, th_xx, th_xv, th_vv;  // derivatives of theta~
    GridField lu_x, lu_v;                        // grad ln u
    GridField hp_x, hp_v;                        // grad (h_check o Phi_t)
    GridField a_xx, a_xv, a_vv;                  // A~ = DPhi_{-t} A DPhi_{-t}^T
    GridField diva_x, diva_v;                    // row divergence of A~
};
PullbackFields prepare_pullback_fields(const PhaseDensity& u, const PullbackFrame& frame, const MeanField1D& mf_t,
                                       const PotentialSpec& spec, const ModelParams& p, double floor_eps = 1e-12);

// All four lines of the trajectorial rate in the pulled-back frame. The A~ grad(h o Phi) term
// enters with a minus sign so that t = 0, K = 0 reproduces trajectorial_rate_D.
double trajectorial_rate_D_tilde(const PhasePoint& zt, const PullbackFields& pf, const FlowContext& ctx,
                                 const MeanField1D& mf_t, const PotentialSpec& spec, const ModelParams& p,
                                 InteractionVariant variant, double gamma_fd_eps = 1e-4);

}  // namespace vfp
