#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "vfp/phase_density.hpp"

namespace vfp {

// Piecewise-linear quantile function on [0,1]. Repeated s values encode jumps
// (empty cells of the underlying density).
struct QuantileFunction {
    std::vector<double> s;
    std::vector<double> q;
};

// Quantile function of a piecewise-constant fiber density on cells v_min + [j, j+1) dv.
QuantileFunction fiber_quantile(const std::vector<double>& fiber, double v_min, double dv, double norm_tol = 1e-8);
// Cell averages of the law with quantile function Q on the given v-cells.
std::vector<double> quantile_to_density(const QuantileFunction& Q, double v_min, double dv, int nv);

// W_x^2 = (1/M) int_0^1 (Q0 - Q1)^2 ds, exact for piecewise-linear quantiles. Returns W_x.
double fiber_w2(const QuantileFunction& Q0, const QuantileFunction& Q1, double M);
double fiber_w2(const std::vector<double>& u0x, const std::vector<double>& u1x, double v_min, double dv, double M);

// Q_t = (1 - t) Q0 + t Q1 (the constant-speed geodesic for scalar M).
QuantileFunction displacement_interpolation(const QuantileFunction& Q0, const QuantileFunction& Q1, double t);
std::vector<double> displacement_interpolation(const std::vector<double>& u0x, const std::vector<double>& u1x,
                                               double t, double v_min, double dv);

struct WJResult {
    double value = 0.0;  // +inf when the x-marginals differ
    bool infinite = false;
    double marginal_l1 = 0.0;
    double excluded_mass = 0.0;  // common-marginal mass of starved fibers
};

// W_J^2 = int W_x^2 d(mean marginal). Fibers whose marginal is below fiber_floor in either
// measure are dropped and the remaining weights renormalized.
WJResult wj_distance(const PhaseDensity& mu0, const PhaseDensity& mu1, double M, double marginal_tol = 1e-6,
                     double fiber_floor = 1e-10);

// int u ln(u/u_inf); +inf when u > floor_rel * max u on a cell where u_inf == 0.
double relative_entropy(const PhaseDensity& mu, const PhaseDensity& mu_inf, double floor_rel = 1e-14);
// int M (d_v ln(u/u_inf))^2 u.
double partial_fisher(const PhaseDensity& mu, const PhaseDensity& mu_inf, double M, double floor_rel = 1e-14);

struct KappaReport {
    double kappa = 0.0;
    bool derivative_warning = false;
    std::string note;
};
// inf over probed nodes of -M d_v^2 ln u_inf (Ric = 0 and ln|M| constant for scalar constant M).
// Nodes are probed where the fiber exceeds probe_rel times its maximum.
KappaReport kappa_from_assumption(const PhaseDensity& mu_inf, double M, double probe_rel = 1e-8);

struct HwiReport {
    double H0 = 0.0, H1 = 0.0, I0 = 0.0, WJ = 0.0, kappa = 0.0;
    double lhs = 0.0, rhs = 0.0, slack = 0.0, margin = 0.0;  // margin = rhs + slack - lhs
    bool holds = false;
    bool degenerate = false;  // infinite W_J
};

// H(mu0|mu_inf) - H(mu1|mu_inf) <= sqrt(I(mu0|mu_inf)) W_J - kappa/2 W_J^2 with slack 1e-6 + 0.02|rhs|.
HwiReport hwi_check(const PhaseDensity& mu0, const PhaseDensity& mu1, const PhaseDensity& mu_inf, double M,
                    double kappa);

void write_hwi_csv(std::ostream& os, const std::vector<HwiReport>& rows);

// One step of d_t u = d_v(M u d_v ln(u/u_inf)) per x-column (theta-scheme, SG mobility).
// Column masses, hence the x-marginal, are preserved.
void onsager_step(PhaseDensity& u, const PhaseDensity& u_inf, double M, double dt, double theta = 0.5);

}  // namespace vfp
