#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "vfp/phase_density.hpp"

using namespace vfp;
using std::numbers::pi;

namespace {
template <class F>
PhaseDensity sampled(const GridSpec& g, F f) {
    GridField a(g.size());
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nv; ++j) a[g.idx(i, j)] = f(g.x(i), g.v(j));
    return PhaseDensity::normalized(g, std::move(a));
}
double central_max(const GridSpec& g, const GridField& a, double (*exact)(double, double)) {
    double e = 0.0;
    for (int i = g.nx / 4; i < 3 * g.nx / 4; ++i)
        for (int j = g.nv / 4; j < 3 * g.nv / 4; ++j)
            e = std::max(e, std::abs(a[g.idx(i, j)] - exact(g.x(i), g.v(j))));
    return e;
}
}  // namespace

TEST_CASE("KDE of 1e6 standard Gaussian pairs is within 0.02 in L1") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    const std::size_t N = 1000000;
    std::vector<double> xs(N), vs(N);
    for (std::size_t i = 0; i < N; ++i) xs[i] = n(rng), vs[i] = n(rng);
    GridSpec g{-6, 6, -6, 6, 128, 128};
    auto f = kde_estimate(xs, vs, g);
    auto exact = sampled(g, [](double x, double v) { return std::exp(-(x * x + v * v) / 2) / (2 * pi); });
    CHECK(l1_distance(f, exact) <= 0.02);
    CHECK(std::abs(f.mass() - 1.0) <= 1e-12);
    auto h = histogram_estimate(xs, vs, g);
    CHECK(std::abs(h.mass() - 1.0) <= 1e-12);
    CHECK(l1_distance(h, exact) <= 0.1);
}

TEST_CASE("KDE edge cases") {
    GridSpec g{-4, 4, -4, 4, 64, 64};
    auto one = kde_estimate(std::vector<double>{0.5}, std::vector<double>{-1.0}, g, BandwidthPolicy::fixed(0.4, 0.3));
    CHECK(std::abs(one.mass() - 1.0) <= 1e-12);
    std::size_t arg = std::max_element(one.values.begin(), one.values.end()) - one.values.begin();
    CHECK(std::abs(g.x(arg / g.nv) - 0.5) <= g.dx());
    CHECK(std::abs(g.v(arg % g.nv) + 1.0) <= g.dv());
    double mx = 0, mv = 0;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nv; ++j) mx += g.x(i) * one.at(i, j) * g.cell(), mv += g.v(j) * one.at(i, j) * g.cell();
    CHECK(mx == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(mv == doctest::Approx(-1.0).epsilon(1e-6));

    std::vector<double> same(100, 0.3);
    CHECK_THROWS_AS(kde_estimate(same, same, g, BandwidthPolicy::fixed(1e-6, 1e-6)), TruncationError);
    CHECK_THROWS_AS(kde_estimate(same, same, g), TruncationError);  // zero Silverman spread

    std::vector<double> xs(1000), vs(1000);
    for (int i = 0; i < 1000; ++i) xs[i] = -2.0 + 0.004 * i, vs[i] = 1.0 - 0.002 * i;
    xs[0] = 10.0;
    CHECK_NOTHROW(kde_estimate(xs, vs, g));  // 0.1% outside is tolerated
    xs[1] = 11.0;
    try {
        kde_estimate(xs, vs, g);
        FAIL("expected a truncation error");
    } catch (const TruncationError& e) {
        CHECK(e.fraction == doctest::Approx(0.002));
    }
}

TEST_CASE("log_derivatives of a Gaussian and of a constant") {
    GridSpec g{-6, 6, -6, 6, 256, 256};
    auto f = sampled(g, [](double x, double v) { return std::exp(-(x * x + v * v) / 2); });
    auto d = log_derivatives(f);
    CHECK(central_max(g, d.grad_v_log_f, [](double, double v) { return -v; }) <= 1e-3);
    CHECK(central_max(g, d.laplace_v_log_f, [](double, double) { return -1.0; }) <= 1e-3);
    CHECK(central_max(g, d.grad_x_log_f, [](double x, double) { return -x; }) <= 1e-3);

    auto c = sampled(g, [](double, double) { return 1.0; });
    auto dc = log_derivatives(c);
    for (const auto* a : {&dc.grad_v_log_f, &dc.laplace_v_f, &dc.laplace_v_log_f, &dc.grad_x_log_f})
        CHECK(*std::max_element(a->begin(), a->end(), [](double p, double q) { return std::abs(p) < std::abs(q); }) ==
              doctest::Approx(0.0));
    CHECK_THROWS_AS(log_derivatives(c, 0.0), ParameterDomainError);
}

TEST_CASE("derivative fields converge at second order") {
    // ln f = -x^2/2 - v^2/2 - 0.075 v^4 + 0.2 sin v, so no stencil is exact.
    auto lf = [](double x, double v) { return -x * x / 2 - v * v / 2 - 0.075 * std::pow(v, 4) + 0.2 * std::sin(v); };
    double errs[3][3];
    int n = 32;
    for (int l = 0; l < 3; ++l, n *= 2) {
        GridSpec g{-4, 4, -4, 4, n, n};
        auto f = sampled(g, [&](double x, double v) { return std::exp(lf(x, v)); });
        auto d = log_derivatives(f);
        errs[l][0] = central_max(g, d.grad_v_log_f,
                                 [](double, double v) { return -v - 0.3 * v * v * v + 0.2 * std::cos(v); });
        errs[l][1] = central_max(g, d.laplace_v_log_f,
                                 [](double, double v) { return -1.0 - 0.9 * v * v - 0.2 * std::sin(v); });
        // laplace_v_f relative to the density scale.
        double fmax = *std::max_element(f.values.begin(), f.values.end());
        GridField rel = d.laplace_v_f;
        for (auto& r : rel) r /= fmax;
        GridField ex(g.size());
        double Z = f.at(n / 2, n / 2) / std::exp(lf(g.x(n / 2), g.v(n / 2)));  // normalization constant, f = Z e^{lf}
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double v = g.v(j), x = g.x(i);
                double a = -v - 0.3 * v * v * v + 0.2 * std::cos(v), b = -1.0 - 0.9 * v * v - 0.2 * std::sin(v);
                ex[g.idx(i, j)] = Z * std::exp(lf(x, v)) * (a * a + b) / fmax;
            }
        double e = 0.0;
        for (int i = n / 4; i < 3 * n / 4; ++i)
            for (int j = n / 4; j < 3 * n / 4; ++j) e = std::max(e, std::abs(rel[g.idx(i, j)] - ex[g.idx(i, j)]));
        errs[l][2] = e;
    }
    for (int k = 0; k < 3; ++k) {
        double p1 = std::log2(errs[0][k] / errs[1][k]), p2 = std::log2(errs[1][k] / errs[2][k]);
        CAPTURE(k);
        CHECK(p1 >= 1.8);
        CHECK(p2 >= 1.8);
    }
}

TEST_CASE("disintegration") {
    GridSpec g{-5, 5, -5, 5, 64, 48};
    auto f = sampled(g, [](double x, double v) { return std::exp(-x * x / 2 - (v - 0.5) * (v - 0.5) / 0.8); });
    auto F = disintegrate(f);
    double fiber_diff = 0.0, recon = 0.0, msum = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        REQUIRE(F.defined[i]);
        msum += F.marginal[i] * g.dx();
        double s = 0.0;
        for (int j = 0; j < g.nv; ++j) {
            fiber_diff = std::max(fiber_diff, std::abs(F.fibers[g.idx(i, j)] - F.fibers[g.idx(g.nx / 2, j)]));
            recon = std::max(recon, std::abs(F.marginal[i] * F.fibers[g.idx(i, j)] - f.at(i, j)));
            s += F.fibers[g.idx(i, j)] * g.dv();
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(fiber_diff <= 1e-12);
    CHECK(recon <= 1e-14);
    CHECK(msum == doctest::Approx(1.0).epsilon(1e-12));

    GridField v = f.values;
    for (int j = 0; j < g.nv; ++j) v[g.idx(3, j)] = 0.0;
    auto starved = disintegrate(PhaseDensity::normalized(g, v));
    CHECK_FALSE(starved.defined[3]);
    CHECK(starved.defined[4]);
}

TEST_CASE("grid helpers") {
    std::vector<double> xs = {1, 2, 3, 4}, vs = {0, 0, 2, 2};
    auto g = auto_grid(xs, vs, 32, 32);
    double sx = std::sqrt(1.25), sv = 1.0;  // population deviations
    CHECK(g.x_min == doctest::Approx(2.5 - 6 * sx));
    CHECK(g.v_max == doctest::Approx(1.0 + 6 * sv));
    CHECK_THROWS_AS((GridSpec{-1, 1, -1, 1, 8, 32}.validate()), ParameterDomainError);

    GridSpec s{0, 1, 0, 1, 16, 16};
    auto f = sampled(s, [](double x, double v) { return 1.0 + x + 2 * v; });
    CHECK(interpolate(s, f.values, 0.5, 0.5) == doctest::Approx(1.0));  // (1 + x + 2v) / 2.5 at the centre
    std::ostringstream os;
    write_density_csv(os, f);
    CHECK(os.str().rfind("x,v,f\n", 0) == 0);
    CHECK(l1_distance(f, f) == 0.0);
}
