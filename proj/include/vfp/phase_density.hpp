#pragma once

#include <iosfwd>
#include <vector>

#include "vfp/model_core.hpp"

namespace vfp {

// Cell-centred tensor grid on [x_min,x_max] x [v_min,v_max]; storage index i*nv + j.
struct GridSpec {
    double x_min = -6.0, x_max = 6.0, v_min = -6.0, v_max = 6.0;
    int nx = 64, nv = 64;

    double dx() const { return (x_max - x_min) / nx; }
    double dv() const { return (v_max - v_min) / nv; }
    double cell() const { return dx() * dv(); }
    double x(int i) const { return x_min + (i + 0.5) * dx(); }
    double v(int j) const { return v_min + (j + 0.5) * dv(); }
    std::size_t size() const { return static_cast<std::size_t>(nx) * nv; }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * nv + j; }
    void validate() const;
    bool same_as(const GridSpec& o) const;
};

using GridField = std::vector<double>;

struct PhaseDensity {
    GridSpec grid;
    GridField values;
    double mass_defect = 0.0;

    double mass() const;
    double at(int i, int j) const { return values[grid.idx(i, j)]; }
    // Clips negatives to zero and rescales to unit mass.
    static PhaseDensity normalized(const GridSpec& g, GridField values);
};

struct BandwidthPolicy {
    enum class Kind { silverman, fixed } kind = Kind::silverman;
    double hx = 0.0, hv = 0.0;  // used when kind == fixed
    double scale = 1.0;          // multiplies the Silverman bandwidths
    static BandwidthPolicy fixed(double hx, double hv) { return {Kind::fixed, hx, hv, 1.0}; }
    static BandwidthPolicy silverman(double scale = 1.0) { return {Kind::silverman, 0.0, 0.0, scale}; }
    // Silverman widened to the N^{-1/8} rate suited to second derivatives of ln f (scale N^{1/24}).
    static BandwidthPolicy derivative_rate(std::size_t N, double scale = 1.0);
};

// d = 1 ensembles only. Gaussian product kernel evaluated at cell centres.
PhaseDensity kde_estimate(const ParticleEnsemble& ens, const GridSpec& grid, BandwidthPolicy policy = {});
PhaseDensity kde_estimate(const std::vector<double>& xs, const std::vector<double>& vs, const GridSpec& grid,
                          BandwidthPolicy policy = {});
// Bandwidths actually used by the Silverman rule (robust spread, N^{-1/6}).
std::pair<double, double> silverman_bandwidth(const std::vector<double>& xs, const std::vector<double>& vs);
PhaseDensity histogram_estimate(const std::vector<double>& xs, const std::vector<double>& vs, const GridSpec& grid);
// Bounds at mean +- 6 standard deviations per axis.
GridSpec auto_grid(const std::vector<double>& xs, const std::vector<double>& vs, int nx, int nv);

struct LogDerivatives {
    GridField grad_v_log_f;
    GridField laplace_v_f;
    GridField laplace_v_log_f;
    GridField grad_x_log_f;
};

LogDerivatives log_derivatives(const PhaseDensity& f, double floor_eps = 1e-12);

// Second-order central differences along one axis (axis 0 = x, 1 = v), one-sided at the edges.
GridField diff_axis(const GridSpec& g, const GridField& a, int axis);
GridField diff2_axis(const GridSpec& g, const GridField& a, int axis);

std::vector<double> marginal_x(const PhaseDensity& f);

struct FiberFamily {
    GridSpec grid;
    std::vector<double> x_nodes;
    std::vector<double> marginal;     // per-x mass density, sum * dx = 1
    GridField fibers;                 // per-x fiber density on the v-grid, sum * dv = 1 where defined
    std::vector<char> defined;
};

FiberFamily disintegrate(const PhaseDensity& f, double fiber_floor = 1e-10);

// Bilinear interpolation of a grid field; clamped at the outer cell centres.
double interpolate(const GridSpec& g, const GridField& a, double x, double v);

void write_density_csv(std::ostream& os, const PhaseDensity& f);

double l1_distance(const PhaseDensity& a, const PhaseDensity& b);

}  // namespace vfp
