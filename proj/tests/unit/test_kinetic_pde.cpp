#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "vfp/kinetic_pde.hpp"
#include "vfp/stationary_measure.hpp"

using namespace vfp;

namespace {
template <class F>
PhaseDensity sampled(const GridSpec& g, F f) {
    GridField a(g.size());
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nv; ++j) a[g.idx(i, j)] = f(g.x(i), g.v(j));
    return PhaseDensity::normalized(g, std::move(a));
}
double linf(const GridField& a) {
    double m = 0.0;
    for (double y : a) m = std::max(m, std::abs(y));
    return m;
}
PotentialSpec harmonic() { return PotentialSpec::make(Potential::quadratic(1.0), Potential::zero(), 0.5); }
}  // namespace

TEST_CASE("vfp_rhs vanishes at the Gibbs state and conserves mass") {
    auto p = derived_constants(1, 1, 1);
    GridSpec g{-7, 7, -7, 7, 256, 256};
    auto finf = gibbs_fixed_point(harmonic(), p, g).density;
    CHECK(linf(vfp_rhs(finf, harmonic(), p)) <= 1e-6);

    auto spec = PotentialSpec::make(Potential::quartic_double_well(1.0, 1.0), Potential::gaussian_kernel(0.5, 0.8), 0.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int k = 0; k < 3; ++k) {
        double a = U(rng), b = U(rng);
        auto f = sampled(g, [=](double x, double v) {
            return std::exp(-(x - a) * (x - a) / 1.5 - (v - b) * (v - b) / 2 + 0.3 * std::sin(x * v));
        });
        auto r = vfp_rhs(f, spec, p);
        CHECK(std::abs(pairwise_sum(r) * g.cell()) <= 1e-12);
    }
}

TEST_CASE("pure transport matches -{f, h_f}") {
    ModelParams p = derived_constants(1, 1, 1);
    p.gamma = 0.0;
    p.sigma = 0.0;
    GridSpec g{-7, 7, -7, 7, 256, 256};
    auto f = sampled(g, [](double x, double v) { return std::exp(-(x - 0.5) * (x - 0.5) / 1.2 - v * v / 0.8); });
    auto spec = PotentialSpec::make(Potential::quadratic(1.0), Potential::quadratic(0.5), 0.5);
    auto r = vfp_rhs(f, spec, p);
    auto br = poisson_bracket(g, f.values, hamiltonian_field(f, spec, p, 1.0));
    double e = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) e = std::max(e, std::abs(r[k] + br[k]));
    CHECK(e <= 1e-3);
    CHECK(linf(vfp_dissipative_rhs(f, spec, p)) == 0.0);
}

TEST_CASE("CFL limit and violation") {
    auto p = derived_constants(1, 1, 1);
    GridSpec g{-4, 4, -4, 4, 64, 64};
    auto f = sampled(g, [](double x, double v) { return std::exp(-x * x - v * v); });
    auto c = cfl_limit(f, harmonic(), p);
    CHECK(c.limit_x == doctest::Approx(0.5 * g.dx() / 4.0));
    CHECK(c.limit_diff == doctest::Approx(0.5 * g.dv() * g.dv() / 2.0));
    CHECK(c.dt_max == std::min({c.limit_x, c.limit_v, c.limit_diff}));
    EvolveConfig cfg;
    cfg.dt = 2.0 * c.dt_max;
    cfg.t_end = 10 * cfg.dt;
    try {
        evolve(f, harmonic(), p, cfg);
        FAIL("expected a CFL error");
    } catch (const CflError& e) {
        CHECK(std::string(e.what()).find(c.binding) != std::string::npos);
    }
}

TEST_CASE("displaced Gaussian follows the Kramers moment ODE") {
    auto p = derived_constants(1, 1, 1);
    GridSpec g{-7, 7, -7, 7, 256, 256};
    const double sx2 = 0.5, sv2 = 0.5;
    auto f0 = sampled(g, [&](double x, double v) { return std::exp(-(x - 1) * (x - 1) / (2 * sx2) - v * v / (2 * sv2)); });
    EvolveConfig cfg;
    cfg.dt = 5e-4;
    cfg.t_end = 1.0;
    cfg.snapshot_every = 400;
    cfg.energy_every = 1;
    auto r = evolve(f0, harmonic(), p, cfg);

    // Oracle: RK4 on (mx, mv, Cxx, Cxv, Cvv) of the linear SDE.
    double y[5] = {1.0, 0.0, sx2, 0.0, sv2};
    auto rhs = [&](const double* a, double* o) {
        o[0] = a[1];
        o[1] = -a[0] - a[1];
        o[2] = 2 * a[3];
        o[3] = a[4] - a[2] - a[3];
        o[4] = -2 * a[3] - 2 * a[4] + p.sigma * p.sigma;
    };
    double t = 0.0;
    const double h = 1e-4;
    for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
        while (t < r.snapshot_times[k] - 1e-12) {
            double k1[5], k2[5], k3[5], k4[5], tmp[5];
            rhs(y, k1);
            for (int i = 0; i < 5; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
            rhs(tmp, k2);
            for (int i = 0; i < 5; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
            rhs(tmp, k3);
            for (int i = 0; i < 5; ++i) tmp[i] = y[i] + h * k3[i];
            rhs(tmp, k4);
            for (int i = 0; i < 5; ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
            t += h;
        }
        const auto& f = r.snapshots[k];
        double mx = 0, mv = 0, xx = 0, xv = 0, vv = 0;
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.nv; ++j) {
                double w = f.at(i, j) * g.cell(), x = g.x(i), v = g.v(j);
                mx += w * x, mv += w * v, xx += w * x * x, xv += w * x * v, vv += w * v * v;
            }
        double Cxx = xx - mx * mx, Cxv = xv - mx * mv, Cvv = vv - mv * mv;
        CAPTURE(r.snapshot_times[k]);
        CHECK(std::abs(mx - y[0]) <= 1e-3);
        CHECK(std::abs(mv - y[1]) <= 1e-3);
        CHECK(std::abs(Cxx - y[2]) <= 1e-3);
        CHECK(std::abs(Cxv - y[3]) <= 1e-3);
        CHECK(std::abs(Cvv - y[4]) <= 1e-3);
    }
    // Lyapunov, mass and positivity along the same run.
    for (std::size_t k = 1; k < r.energy.size(); ++k) REQUIRE(r.energy[k].F <= r.energy[k - 1].F + 1e-10);
    CHECK(r.max_mass_defect <= 1e-12);
    for (const auto& s : r.snapshots) {
        CHECK(*std::min_element(s.values.begin(), s.values.end()) >= 0.0);
        CHECK(std::abs(s.mass() - 1.0) <= 1e-12);
    }
}

TEST_CASE("evolve from the Gibbs state stays put") {
    auto p = derived_constants(1, 1, 1);
    GridSpec g{-7, 7, -7, 7, 128, 128};
    auto finf = gibbs_fixed_point(harmonic(), p, g).density;
    EvolveConfig cfg;
    cfg.dt = 2.5e-3;
    cfg.t_end = 1.0;
    cfg.energy_every = 0;
    auto r = evolve(finf, harmonic(), p, cfg);
    CHECK(l1_distance(r.snapshots.back(), finf) <= 1e-6);
}

TEST_CASE("interacting run dissipates free energy") {
    auto p = derived_constants(1, 1, 1);
    GridSpec g{-3.5, 3.5, -5, 5, 128, 128};
    auto spec = PotentialSpec::make(Potential::quartic_double_well(1.0, 1.0), Potential::gaussian_kernel(-0.3, 1.0), 0.0);
    auto f0 = sampled(g, [](double x, double v) { return std::exp(-(x - 1.5) * (x - 1.5) - v * v / 0.6); });
    EvolveConfig cfg;
    cfg.dt = 8e-4;
    cfg.t_end = 0.5;
    auto r = evolve(f0, spec, p, cfg);
    for (std::size_t k = 1; k < r.energy.size(); ++k) REQUIRE(r.energy[k].F <= r.energy[k - 1].F + 1e-10);
    CHECK(r.energy.back().F < r.energy.front().F - 1e-2);
}
