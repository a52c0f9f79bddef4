#include "vfp/phase_density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace vfp {

void GridSpec::validate() const {
    if (nx < 16 || nv < 16) throw ParameterDomainError("grid: nx and nv must be >= 16");
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(v_min) || !std::isfinite(v_max) ||
        !(x_min < x_max) || !(v_min < v_max))
        throw ParameterDomainError("grid: bounds must be finite with min < max");
}

bool GridSpec::same_as(const GridSpec& o) const {
    return nx == o.nx && nv == o.nv && x_min == o.x_min && x_max == o.x_max && v_min == o.v_min && v_max == o.v_max;
}

double PhaseDensity::mass() const { return pairwise_sum(values) * grid.cell(); }

PhaseDensity PhaseDensity::normalized(const GridSpec& g, GridField values) {
    g.validate();
    if (values.size() != g.size()) throw ParameterDomainError("density: value count does not match grid");
    for (double& a : values)
        if (!(a > 0.0)) a = 0.0;
    double m = pairwise_sum(values) * g.cell();
    if (!(m > 0.0) || !std::isfinite(m)) throw NumericalError("density: zero or non-finite mass");
    for (double& a : values) a /= m;
    PhaseDensity f{g, std::move(values), 0.0};
    f.mass_defect = std::abs(1.0 - f.mass());
    return f;
}

namespace {

double robust_spread(std::vector<double> a) {
    const std::size_t n = a.size();
    if (n < 2) return 0.0;
    double mean = pairwise_sum(a) / n;
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (a[i] - mean) * (a[i] - mean);
    double sd = std::sqrt(pairwise_sum(sq) / (n - 1));
    std::size_t q1 = n / 4, q3 = (3 * n) / 4;
    std::nth_element(a.begin(), a.begin() + q1, a.end());
    double lo = a[q1];
    std::nth_element(a.begin(), a.begin() + q3, a.end());
    double iqr = (a[q3] - lo) / 1.349;
    return iqr > 0.0 ? std::min(sd, iqr) : sd;
}

void check_outside(const std::vector<double>& xs, const std::vector<double>& vs, const GridSpec& g) {
    std::size_t out = 0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (xs[i] < g.x_min || xs[i] > g.x_max || vs[i] < g.v_min || vs[i] > g.v_max) ++out;
    double frac = xs.empty() ? 0.0 : static_cast<double>(out) / xs.size();
    if (frac > 1e-3) {
        std::ostringstream os;
        os << "density estimate: fraction " << frac << " of mass lies outside the grid";
        throw TruncationError(os.str(), frac);
    }
}

}  // namespace

BandwidthPolicy BandwidthPolicy::derivative_rate(std::size_t N, double scale) {
    return silverman(scale * std::pow(static_cast<double>(std::max<std::size_t>(N, 1)), 1.0 / 24.0));
}

std::pair<double, double> silverman_bandwidth(const std::vector<double>& xs, const std::vector<double>& vs) {
    double f = std::pow(static_cast<double>(xs.size()), -1.0 / 6.0);
    return {robust_spread(xs) * f, robust_spread(vs) * f};
}

PhaseDensity kde_estimate(const std::vector<double>& xs, const std::vector<double>& vs, const GridSpec& g,
                          BandwidthPolicy policy) {
    g.validate();
    if (xs.empty() || xs.size() != vs.size()) throw StateError("kde_estimate: empty or inconsistent sample");
    check_outside(xs, vs, g);
    double hx, hv;
    if (policy.kind == BandwidthPolicy::Kind::fixed) {
        hx = policy.hx;
        hv = policy.hv;
    } else {
        auto [a, b] = silverman_bandwidth(xs, vs);
        hx = a * policy.scale;
        hv = b * policy.scale;
    }
    if (!(hx >= 0.05 * g.dx()) || !(hv >= 0.05 * g.dv()) || !std::isfinite(hx) || !std::isfinite(hv)) {
        std::ostringstream os;
        os << "kde_estimate: degenerate bandwidth (hx=" << hx << ", hv=" << hv << ") below grid resolution";
        throw TruncationError(os.str(), 1.0);
    }
    GridField acc(g.size(), 0.0);
    const double dx = g.dx(), dv = g.dv();
    const double cx = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * hx);
    const double cv = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * hv);
    const int rx = static_cast<int>(std::ceil(6.0 * hx / dx)) + 1;
    const int rv = static_cast<int>(std::ceil(6.0 * hv / dv)) + 1;
    std::vector<double> wx(2 * rx + 1), wv(2 * rv + 1);
    for (std::size_t p = 0; p < xs.size(); ++p) {
        int ic = static_cast<int>(std::floor((xs[p] - g.x_min) / dx));
        int jc = static_cast<int>(std::floor((vs[p] - g.v_min) / dv));
        int i0 = std::max(0, ic - rx), i1 = std::min(g.nx - 1, ic + rx);
        int j0 = std::max(0, jc - rv), j1 = std::min(g.nv - 1, jc + rv);
        if (i0 > i1 || j0 > j1) continue;
        for (int i = i0; i <= i1; ++i) {
            double z = (g.x(i) - xs[p]) / hx;
            wx[i - i0] = cx * std::exp(-0.5 * z * z);
        }
        for (int j = j0; j <= j1; ++j) {
            double z = (g.v(j) - vs[p]) / hv;
            wv[j - j0] = cv * std::exp(-0.5 * z * z);
        }
        for (int i = i0; i <= i1; ++i) {
            double a = wx[i - i0];
            double* row = acc.data() + g.idx(i, 0);
            for (int j = j0; j <= j1; ++j) row[j] += a * wv[j - j0];
        }
    }
    return PhaseDensity::normalized(g, std::move(acc));
}

PhaseDensity kde_estimate(const ParticleEnsemble& ens, const GridSpec& grid, BandwidthPolicy policy) {
    if (ens.d != 1) throw ParameterDomainError("kde_estimate: grid estimators require d = 1");
    return kde_estimate(ens.x, ens.v, grid, policy);
}

PhaseDensity histogram_estimate(const std::vector<double>& xs, const std::vector<double>& vs, const GridSpec& g) {
    g.validate();
    if (xs.empty()) throw StateError("histogram_estimate: empty sample");
    check_outside(xs, vs, g);
    GridField acc(g.size(), 0.0);
    for (std::size_t p = 0; p < xs.size(); ++p) {
        int i = static_cast<int>(std::floor((xs[p] - g.x_min) / g.dx()));
        int j = static_cast<int>(std::floor((vs[p] - g.v_min) / g.dv()));
        if (i < 0 || j < 0 || i >= g.nx || j >= g.nv) continue;
        acc[g.idx(i, j)] += 1.0;
    }
    return PhaseDensity::normalized(g, std::move(acc));
}

GridSpec auto_grid(const std::vector<double>& xs, const std::vector<double>& vs, int nx, int nv) {
    auto stats = [](const std::vector<double>& a) {
        double mean = pairwise_sum(a) / a.size();
        std::vector<double> sq(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) sq[i] = (a[i] - mean) * (a[i] - mean);
        return std::pair{mean, std::sqrt(pairwise_sum(sq) / a.size())};
    };
    auto [mx, sx] = stats(xs);
    auto [mv, sv] = stats(vs);
    if (!(sx > 0.0) || !(sv > 0.0)) throw NumericalError("auto_grid: degenerate sample spread");
    GridSpec g{mx - 6 * sx, mx + 6 * sx, mv - 6 * sv, mv + 6 * sv, nx, nv};
    g.validate();
    return g;
}

GridField diff_axis(const GridSpec& g, const GridField& a, int axis) {
    GridField out(a.size());
    const int n = axis == 0 ? g.nx : g.nv;
    const int m = axis == 0 ? g.nv : g.nx;
    const double h = axis == 0 ? g.dx() : g.dv();
    for (int o = 0; o < m; ++o) {
        auto at = [&](int k) { return axis == 0 ? a[g.idx(k, o)] : a[g.idx(o, k)]; };
        auto put = [&](int k, double val) { (axis == 0 ? out[g.idx(k, o)] : out[g.idx(o, k)]) = val; };
        put(0, (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h));
        for (int k = 1; k < n - 1; ++k) put(k, (at(k + 1) - at(k - 1)) / (2.0 * h));
        put(n - 1, (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h));
    }
    return out;
}

GridField diff2_axis(const GridSpec& g, const GridField& a, int axis) {
    GridField out(a.size());
    const int n = axis == 0 ? g.nx : g.nv;
    const int m = axis == 0 ? g.nv : g.nx;
    const double h = axis == 0 ? g.dx() : g.dv();
    const double h2 = h * h;
    for (int o = 0; o < m; ++o) {
        auto at = [&](int k) { return axis == 0 ? a[g.idx(k, o)] : a[g.idx(o, k)]; };
        auto put = [&](int k, double val) { (axis == 0 ? out[g.idx(k, o)] : out[g.idx(o, k)]) = val; };
        put(0, (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / h2);
        for (int k = 1; k < n - 1; ++k) put(k, (at(k + 1) - 2.0 * at(k) + at(k - 1)) / h2);
        put(n - 1, (2.0 * at(n - 1) - 5.0 * at(n - 2) + 4.0 * at(n - 3) - at(n - 4)) / h2);
    }
    return out;
}

LogDerivatives log_derivatives(const PhaseDensity& f, double floor_eps) {
    if (!(floor_eps > 0.0)) throw ParameterDomainError("log_derivatives: floor_eps must be positive");
    const GridSpec& g = f.grid;
    double fmax = *std::max_element(f.values.begin(), f.values.end());
    double fl = floor_eps * fmax;
    GridField floored(f.values.size()), lg(f.values.size());
    for (std::size_t k = 0; k < floored.size(); ++k) {
        floored[k] = std::max(f.values[k], fl);
        lg[k] = std::log(floored[k]);
    }
    LogDerivatives d;
    d.grad_v_log_f = diff_axis(g, lg, 1);
    d.laplace_v_log_f = diff2_axis(g, lg, 1);
    d.grad_x_log_f = diff_axis(g, lg, 0);
    d.laplace_v_f = diff2_axis(g, floored, 1);
    return d;
}

std::vector<double> marginal_x(const PhaseDensity& f) {
    const GridSpec& g = f.grid;
    std::vector<double> m(g.nx);
    for (int i = 0; i < g.nx; ++i) m[i] = pairwise_sum(f.values.data() + g.idx(i, 0), g.nv) * g.dv();
    return m;
}

FiberFamily disintegrate(const PhaseDensity& f, double fiber_floor) {
    const GridSpec& g = f.grid;
    FiberFamily F;
    F.grid = g;
    F.marginal = marginal_x(f);
    F.x_nodes.resize(g.nx);
    F.fibers.assign(g.size(), 0.0);
    F.defined.assign(g.nx, 0);
    for (int i = 0; i < g.nx; ++i) {
        F.x_nodes[i] = g.x(i);
        double mi = F.marginal[i];
        if (!(mi > fiber_floor)) continue;
        F.defined[i] = 1;
        for (int j = 0; j < g.nv; ++j) F.fibers[g.idx(i, j)] = f.values[g.idx(i, j)] / mi;
    }
    return F;
}

double interpolate(const GridSpec& g, const GridField& a, double x, double v) {
    double sx = std::clamp((x - g.x_min) / g.dx() - 0.5, 0.0, g.nx - 1.0);
    double sv = std::clamp((v - g.v_min) / g.dv() - 0.5, 0.0, g.nv - 1.0);
    int i = std::min(static_cast<int>(sx), g.nx - 2);
    int j = std::min(static_cast<int>(sv), g.nv - 2);
    double tx = sx - i, tv = sv - j;
    return (1 - tx) * ((1 - tv) * a[g.idx(i, j)] + tv * a[g.idx(i, j + 1)]) +
           tx * ((1 - tv) * a[g.idx(i + 1, j)] + tv * a[g.idx(i + 1, j + 1)]);
}

void write_density_csv(std::ostream& os, const PhaseDensity& f) {
    os << "x,v,f\n";
    os.precision(12);
    for (int i = 0; i < f.grid.nx; ++i)
        for (int j = 0; j < f.grid.nv; ++j) os << f.grid.x(i) << ',' << f.grid.v(j) << ',' << f.at(i, j) << '\n';
}

double l1_distance(const PhaseDensity& a, const PhaseDensity& b) {
    if (!a.grid.same_as(b.grid)) throw ParameterDomainError("l1_distance: grids differ");
    GridField d(a.values.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = std::abs(a.values[k] - b.values[k]);
    return pairwise_sum(d) * a.grid.cell();
}

}  // namespace vfp
