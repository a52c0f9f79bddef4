#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "vfp/free_energy.hpp"
#include "vfp/stationary_measure.hpp"

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
PhaseDensity gaussian(const GridSpec& g, double mx, double sx, double mv, double sv) {
    return sampled(g, [=](double x, double v) {
        return std::exp(-0.5 * ((x - mx) * (x - mx) / (sx * sx) + (v - mv) * (v - mv) / (sv * sv)));
    });
}
PotentialSpec harmonic() { return PotentialSpec::make(Potential::quadratic(1.0), Potential::zero(), 0.5); }
const GridSpec G{-8, 8, -8, 8, 256, 256};
}  // namespace

TEST_CASE("h_check and h_full") {
    auto p = derived_constants(1, 1, 1);
    auto f = gaussian(G, 0.3, 1.0, 0.0, 1.0);
    PhasePoint z{{0.7}, {-0.4}};
    CHECK(h_check(f, z, harmonic(), p) == h_full(f, z, harmonic(), p));
    auto zero = PotentialSpec::make(Potential::zero(), Potential::zero(), 0.0);
    CHECK(h_full(f, PhasePoint{{0.0}, {0.0}}, zero, p) == 0.0);

    // Narrow position law at 0 (width 0.02) on a fine x-grid: K*f(1) = 1/2 + 2e-4.
    GridSpec fine{-1.5, 1.5, -6, 6, 600, 32};
    auto narrow = gaussian(fine, 0.0, 0.02, 0.0, 1.0);
    auto Kq = PotentialSpec::make(Potential::zero(), Potential::quadratic(1.0), 0.0);
    PhasePoint z1{{1.0}, {0.0}};
    CHECK(std::abs(h_full(narrow, z1, Kq, p) - 0.5) <= 1e-3);
    CHECK(std::abs(h_check(narrow, z1, Kq, p) - 0.25) <= 1e-3);
    // Same through the generic kernel path (Gaussian K with matching curvature is not quadratic, so
    // compare against the closed-form convolution of a Gaussian kernel with a Gaussian law).
    auto Kg = PotentialSpec::make(Potential::zero(), Potential::gaussian_kernel(1.0, 0.5), 0.0);
    double s2 = 0.25 + 0.02 * 0.02;
    double conv = std::sqrt(0.25 / s2) * std::exp(-1.0 / (2 * s2));
    CHECK(h_full(narrow, z1, Kg, p) == doctest::Approx(conv).epsilon(2e-3));
}

TEST_CASE("free energy of closed-form densities") {
    auto p = derived_constants(1, 1, 1);
    // Oracle: direct midpoint quadrature of the closed-form point density on a finer grid.
    auto oracle = [&](double sx, double sv) {
        const int n = 2000;
        const double L = 10.0, h = 2 * L / n;
        double acc = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double x = -L + (i + 0.5) * h, v = -L + (j + 0.5) * h;
                double lf = -0.5 * (x * x / (sx * sx) + v * v / (sv * sv)) - std::log(2 * pi * sx * sv);
                acc += std::exp(lf) * (lf + 0.5 * v * v + 0.5 * x * x);
            }
        return acc * h * h;
    };
    double F11 = oracle(1.0, 1.0);
    CHECK(F11 == doctest::Approx(-std::log(2 * pi)).epsilon(1e-9));  // entropy -(1 + ln 2 pi) plus energy 1
    CHECK(free_energy(gaussian(G, 0, 1, 0, 1), harmonic(), p) == doctest::Approx(F11).epsilon(1e-4));
    CHECK(free_energy(gaussian(G, 0, 0.8, 0, 1.3), harmonic(), p) == doctest::Approx(oracle(0.8, 1.3)).epsilon(1e-4));

    // Uniform density on [-1, 2] x [-1, 1]: F = -ln 6 + mean(v^2 / 2) = -ln 6 + 1/6.
    GridSpec box{-1, 2, -1, 1, 300, 200};
    auto u = sampled(box, [](double, double) { return 1.0; });
    auto zero = PotentialSpec::make(Potential::zero(), Potential::zero(), 0.0);
    CHECK(free_energy(u, zero, p) == doctest::Approx(-std::log(6.0) + 1.0 / 6.0).epsilon(1e-5));
    CHECK(entropy(u) == doctest::Approx(-std::log(6.0)).epsilon(1e-12));
}

TEST_CASE("the Gibbs density minimizes F over a Gaussian family") {
    auto p = derived_constants(1, 1, 1);
    auto spec = harmonic();
    auto finf = gibbs_fixed_point(spec, p, G).density;
    auto F = [&](double s) { return free_energy(gaussian(G, 0, s, 0, s), spec, p); };
    // Golden-section search over the common standard deviation.
    const double r = (std::sqrt(5.0) - 1) / 2;
    double a = 0.5, b = 2.0, c = b - r * (b - a), d = a + r * (b - a);
    double fc = F(c), fd = F(d);
    while (b - a > 1e-5) {
        if (fc < fd) b = d, d = c, fd = fc, c = b - r * (b - a), fc = F(c);
        else a = c, c = d, fc = fd, d = a + r * (b - a), fd = F(d);
    }
    double smin = 0.5 * (a + b);
    CHECK(smin == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(free_energy(finf, spec, p) <= F(smin) + 1e-9);
    CHECK(free_energy(finf, spec, p) == doctest::Approx(F(smin)).epsilon(1e-6));
}

TEST_CASE("dissipation I") {
    auto p = derived_constants(1, 1, 1);
    auto spec = harmonic();
    auto finf = gibbs_fixed_point(spec, p, G).density;
    CHECK(dissipation_I(finf, spec, p) <= 1e-6);
    // Oracle: I = (sigma^2/2) E[(-v/s^2 + v)^2] = (sigma^2/2) (1 - 1/s^2)^2 s^2.
    for (double s : {0.5, std::sqrt(0.5), 1.5}) {
        double exact = 0.5 * p.sigma * p.sigma * std::pow(1 - 1 / (s * s), 2) * s * s;
        CHECK(dissipation_I(gaussian(G, 0.4, 1.2, 0.0, s), spec, p) == doctest::Approx(exact).epsilon(2e-3));
    }
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int k = 0; k < 20; ++k) {
        double a = U(rng), b = U(rng), c = U(rng);
        auto f = sampled(G, [=](double x, double v) {
            return std::exp(-x * x / 2 - v * v / 2 + a * std::sin(x + 2 * v) + b * std::cos(3 * v) + c * x * v / 4);
        });
        CHECK(dissipation_I(f, spec, p) >= 0.0);
    }
    auto rep = energy_report(finf, spec, p, 2.5);
    CHECK(rep.t == 2.5);
    CHECK(rep.F == doctest::Approx(rep.entropy + rep.H));
    std::ostringstream os;
    write_energy_csv(os, {rep});
    CHECK(os.str().rfind("t,F,H,I,entropy\n", 0) == 0);
}

TEST_CASE("energy process theta") {
    auto p = derived_constants(1, 1, 1);
    GridSpec box{-1, 2, -1, 1, 60, 40};
    auto u = sampled(box, [](double, double) { return 1.0; });
    auto zero = PotentialSpec::make(Potential::zero(), Potential::zero(), 0.0);
    PhasePoint z{{0.3}, {0.6}};
    CHECK(energy_process_theta(z, u, zero, p) == doctest::Approx(-std::log(6.0) + 0.18).epsilon(1e-12));

    // E[theta(Z, f)] = F(f) for Z ~ f, here with a Gaussian interaction kernel.
    auto spec = PotentialSpec::make(Potential::quadratic(1.0), Potential::gaussian_kernel(0.8, 1.0), 0.5);
    GridSpec g{-7, 7, -7, 7, 128, 128};
    auto f = gaussian(g, 0.5, 1.1, -0.2, 0.8);
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nx(0.5, 1.1), nv(-0.2, 0.8);
    const int n = 20000;
    std::vector<double> th(n), sq(n);
    for (int k = 0; k < n; ++k) th[k] = energy_process_theta(PhasePoint{{nx(rng)}, {nv(rng)}}, f, spec, p);
    double mean = pairwise_sum(th) / n;
    for (int k = 0; k < n; ++k) sq[k] = (th[k] - mean) * (th[k] - mean);
    double se = std::sqrt(pairwise_sum(sq) / (n - 1) / n);
    CHECK(std::abs(mean - free_energy(f, spec, p)) <= 4 * se + 2e-3);
}

TEST_CASE("trajectorial rate D") {
    auto p = derived_constants(1, 1, 1);
    auto spec = harmonic();
    auto finf = gibbs_fixed_point(spec, p, G).density;
    auto fields = prepare_fields(finf, spec);
    PhasePoint origin{{0.0}, {0.0}};
    // 2 gamma/m + (sigma^2/2)(Dv f / f + Dv ln f) at v = 0 is 2 - 1 - 1.
    CHECK(std::abs(trajectorial_rate_D(origin, fields, spec, p, InteractionVariant::paper_V)) <= 1e-3);

    auto f = gaussian(G, 0.5, 1.0, 0.3, 0.6);
    auto ff = prepare_fields(f, spec);
    for (double x : {-1.0, 0.2, 1.4})
        for (double v : {-0.8, 0.0, 0.5}) {
            PhasePoint z{{x}, {v}};
            CHECK(trajectorial_rate_D(z, ff, spec, p, InteractionVariant::paper_V) ==
                  trajectorial_rate_D(z, ff, spec, p, InteractionVariant::derivation_Y2));
        }

    // Under Z ~ f the mean of D is -I(f): grid quadrature of D against f.
    auto mean_D = [&](const PhaseDensity& h, const PotentialSpec& s) {
        auto fd = prepare_fields(h, s);
        double acc = 0.0;
        for (int i = 0; i < G.nx; ++i)
            for (int j = 0; j < G.nv; ++j)
                acc += h.at(i, j) *
                       trajectorial_rate_D(PhasePoint{{G.x(i)}, {G.v(j)}}, fd, s, p, InteractionVariant::paper_V);
        return acc * G.cell();
    };
    CHECK(std::abs(mean_D(finf, spec)) <= 1e-3);
    double I = dissipation_I(f, spec, p);
    CHECK(mean_D(f, spec) == doctest::Approx(-I).epsilon(0.02));
}

TEST_CASE("pulled-back functionals") {
    auto p = derived_constants(1, 1, 1);
    auto spec = harmonic();
    FlowContext ctx{&spec, &p, nullptr, 1e-3};
    GridSpec g{-7, 7, -7, 7, 192, 192};
    auto f = gaussian(g, 0.8, 0.9, -0.3, 0.6);
    auto mf = MeanField1D::from_density(spec, f);

    auto frame0 = build_pullback_frame(g, 0.0, ctx);
    CHECK(pulled_back_free_energy(f, frame0, mf, spec, p) == doctest::Approx(free_energy(f, spec, p)).epsilon(1e-10));
    CHECK(pulled_back_dissipation(f, frame0, spec, p) == doctest::Approx(dissipation_I(f, spec, p)).epsilon(1e-3));

    // u = f_t o Phi_t has F~_t(u) = F(f_t) and I~_t(u) = I(f_t).
    const double t = 0.7;
    auto frame = build_pullback_frame(g, t, ctx);
    auto exact = [&](double x, double v) {
        return std::exp(-0.5 * ((x - 0.8) * (x - 0.8) / 0.81 + (v + 0.3) * (v + 0.3) / 0.36));
    };
    GridField uv(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) uv[k] = exact(frame.x[k], frame.v[k]);
    auto u = PhaseDensity::normalized(g, uv);
    CHECK(pulled_back_free_energy(u, frame, mf, spec, p) == doctest::Approx(free_energy(f, spec, p)).epsilon(2e-3));
    double I = dissipation_I(f, spec, p);
    CHECK(std::abs(pulled_back_dissipation(u, frame, spec, p) - I) <= 5e-2 * I);

    // Pullback of the Gibbs state dissipates nothing.
    auto finf = gibbs_fixed_point(spec, p, g).density;
    GridField wv(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) wv[k] = std::exp(-0.5 * (frame.x[k] * frame.x[k] + frame.v[k] * frame.v[k]));
    auto w = PhaseDensity::normalized(g, wv);
    CHECK(pulled_back_dissipation(w, frame, spec, p) <= 1e-4);
    CHECK(dissipation_I(finf, spec, p) <= 1e-6);
}

TEST_CASE("D tilde at t = 0 reduces to D; theta tilde to theta") {
    auto p = derived_constants(1, 1, 1);
    auto spec = PotentialSpec::make(Potential::quartic_double_well(1.0, 1.0), Potential::zero(), 0.0);
    FlowContext ctx{&spec, &p, nullptr, 1e-3};
    auto f = gaussian(G, 0.2, 1.0, 0.1, 0.7);
    auto mf = MeanField1D::from_density(spec, f);
    auto frame = build_pullback_frame(G, 0.0, ctx);
    auto pf = prepare_pullback_fields(f, frame, mf, spec, p);
    auto fd = prepare_fields(f, spec);
    double worst = 0.0;
    for (double x : {-1.0, 0.0, 0.9})
        for (double v : {-0.7, 0.2, 1.1}) {
            PhasePoint z{{x}, {v}};
            double a = trajectorial_rate_D_tilde(z, pf, ctx, mf, spec, p, InteractionVariant::paper_V);
            double b = trajectorial_rate_D(z, fd, spec, p, InteractionVariant::paper_V);
            worst = std::max(worst, std::abs(a - b));
            CHECK(theta_tilde(z, f, ctx, 0.0, mf, spec, p) == doctest::Approx(energy_process_theta(z, f, spec, p)));
        }
    CHECK(worst <= 1e-6);
}

TEST_CASE("poisson bracket") {
    GridSpec g{-3, 3, -3, 3, 120, 120};
    GridField f(g.size()), h(g.size()), a(g.size());
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nv; ++j) {
            double x = g.x(i), v = g.v(j);
            f[g.idx(i, j)] = x * v;
            h[g.idx(i, j)] = v * v / 2;
            a[g.idx(i, j)] = std::sin(x) * std::exp(-v * v) + x * x * v;
        }
    auto self = poisson_bracket(g, a, a);
    CHECK(*std::max_element(self.begin(), self.end(), [](double p, double q) { return std::abs(p) < std::abs(q); }) ==
          doctest::Approx(0.0).epsilon(1e-14));
    for (double s : self) REQUIRE(std::abs(s) <= 1e-14);
    auto b = poisson_bracket(g, f, h);
    for (int i = g.nx / 4; i < 3 * g.nx / 4; ++i)
        for (int j = g.nv / 4; j < 3 * g.nv / 4; ++j) REQUIRE(std::abs(b[g.idx(i, j)] - g.v(j) * g.v(j)) <= 1e-3);

    // int {f, h^2/2} = 0 for compactly supported f.
    auto p = derived_constants(1, 1, 1);
    auto fd = gaussian(G, 0.3, 0.7, -0.2, 0.8);
    auto hf = hamiltonian_field(fd, harmonic(), p, 1.0);
    for (auto& x : hf) x = 0.5 * x * x;
    auto br = poisson_bracket(G, fd.values, hf);
    CHECK(std::abs(pairwise_sum(br) * G.cell()) <= 1e-6);
}
