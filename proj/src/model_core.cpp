#include "vfp/model_core.hpp"

#include <algorithm>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <cmath>
#include <limits>
#include <sstream>

namespace vfp {

using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

ModelParams derived_constants(double m, double gamma, double kB_TB, int dim) {
    if (!(m > 0.0) || !(gamma > 0.0) || !(kB_TB > 0.0) || !std::isfinite(m) || !std::isfinite(gamma) ||
        !std::isfinite(kB_TB)) {
        std::ostringstream os;
        os << "parameter domain: m, gamma, kB_TB must be positive and finite (got m=" << m << ", gamma=" << gamma
           << ", kB_TB=" << kB_TB << ")";
        throw ParameterDomainError(os.str());
    }
    if (dim < 1) throw ParameterDomainError("parameter domain: dim must be a positive integer");
    ModelParams p;
    p.m = m;
    p.gamma = gamma;
    p.kB_TB = kB_TB;
    p.beta = 1.0 / kB_TB;
    p.sigma = std::sqrt(2.0 * gamma / (p.beta * m * m));
    p.dim = dim;
    return p;
}

Potential Potential::zero() { return Potential(); }

Potential Potential::quadratic(double a) {
    Potential p;
    p.kind_ = PotentialKind::quadratic;
    p.a_ = a;
    return p;
}

Potential Potential::quartic_double_well(double a, double b) {
    if (!(a > 0.0)) throw ParameterDomainError("quartic_double_well: a must be positive");
    Potential p;
    p.kind_ = PotentialKind::quartic_double_well;
    p.a_ = a;
    p.b_ = b;
    return p;
}

Potential Potential::gaussian_kernel(double a, double width) {
    if (!(width > 0.0)) throw ParameterDomainError("gaussian_kernel: width must be positive");
    Potential p;
    p.kind_ = PotentialKind::gaussian_kernel;
    p.a_ = a;
    p.b_ = width;
    return p;
}

Potential Potential::tabulated(std::vector<double> values, double x0, double h) {
    if (values.size() < 4 || !(h > 0.0)) throw ParameterDomainError("tabulated potential: need >= 4 nodes and h > 0");
    Potential p;
    p.kind_ = PotentialKind::tabulated;
    p.spline_ = std::make_shared<const Spline>(values.data(), values.size(), x0, h);
    p.x_lo_ = x0;
    p.x_hi_ = x0 + h * static_cast<double>(values.size() - 1);
    return p;
}

Potential Potential::custom(std::function<double(double)> value, std::function<double(double)> grad,
                            std::function<double(double)> hess, std::string name) {
    Potential p;
    p.kind_ = PotentialKind::custom;
    p.fv_ = std::move(value);
    p.fg_ = std::move(grad);
    p.fh_ = std::move(hess);
    p.name_ = std::move(name);
    return p;
}

std::string Potential::name() const {
    switch (kind_) {
        case PotentialKind::zero: return "zero";
        case PotentialKind::quadratic: return "quadratic";
        case PotentialKind::quartic_double_well: return "quartic_double_well";
        case PotentialKind::gaussian_kernel: return "gaussian_kernel";
        case PotentialKind::tabulated: return "tabulated";
        case PotentialKind::custom: return name_;
    }
    return "unknown";
}

double Potential::value(double x) const {
    switch (kind_) {
        case PotentialKind::zero: return 0.0;
        case PotentialKind::quadratic: return 0.5 * a_ * x * x;
        case PotentialKind::quartic_double_well: {
            double r2 = x * x;
            return 0.25 * a_ * r2 * r2 - 0.5 * b_ * r2 + b_ * b_ / (4.0 * a_);
        }
        case PotentialKind::gaussian_kernel: return a_ * std::exp(-x * x / (2.0 * b_ * b_));
        case PotentialKind::tabulated:
            if (x < x_lo_) return (*spline_)(x_lo_) + spline_->prime(x_lo_) * (x - x_lo_);
            if (x > x_hi_) return (*spline_)(x_hi_) + spline_->prime(x_hi_) * (x - x_hi_);
            return (*spline_)(x);
        case PotentialKind::custom: return fv_(x);
    }
    return 0.0;
}

double Potential::grad(double x) const {
    switch (kind_) {
        case PotentialKind::zero: return 0.0;
        case PotentialKind::quadratic: return a_ * x;
        case PotentialKind::quartic_double_well: return a_ * x * x * x - b_ * x;
        case PotentialKind::gaussian_kernel: return -a_ * x / (b_ * b_) * std::exp(-x * x / (2.0 * b_ * b_));
        case PotentialKind::tabulated: return spline_->prime(std::clamp(x, x_lo_, x_hi_));
        case PotentialKind::custom: return fg_(x);
    }
    return 0.0;
}

double Potential::hess(double x) const {
    switch (kind_) {
        case PotentialKind::zero: return 0.0;
        case PotentialKind::quadratic: return a_;
        case PotentialKind::quartic_double_well: return 3.0 * a_ * x * x - b_;
        case PotentialKind::gaussian_kernel: {
            double s2 = b_ * b_;
            return a_ / s2 * (x * x / s2 - 1.0) * std::exp(-x * x / (2.0 * s2));
        }
        case PotentialKind::tabulated:
            if (x < x_lo_ || x > x_hi_) return 0.0;
            return spline_->double_prime(x);
        case PotentialKind::custom: return fh_(x);
    }
    return 0.0;
}

namespace {
double norm2(const double* x, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += x[i] * x[i];
    return s;
}
void require_1d(PotentialKind k, int d) {
    if (d != 1 && (k == PotentialKind::tabulated || k == PotentialKind::custom))
        throw ParameterDomainError("tabulated/custom potentials require d = 1");
}
}  // namespace

double Potential::value(const double* x, int d) const {
    if (d == 1) return value(x[0]);
    require_1d(kind_, d);
    double r2 = norm2(x, d);
    switch (kind_) {
        case PotentialKind::quadratic: return 0.5 * a_ * r2;
        case PotentialKind::quartic_double_well: return 0.25 * a_ * r2 * r2 - 0.5 * b_ * r2 + b_ * b_ / (4.0 * a_);
        case PotentialKind::gaussian_kernel: return a_ * std::exp(-r2 / (2.0 * b_ * b_));
        default: return 0.0;
    }
}

void Potential::grad(const double* x, int d, double* g) const {
    if (d == 1) {
        g[0] = grad(x[0]);
        return;
    }
    require_1d(kind_, d);
    double r2 = norm2(x, d);
    double c = 0.0;
    switch (kind_) {
        case PotentialKind::quadratic: c = a_; break;
        case PotentialKind::quartic_double_well: c = a_ * r2 - b_; break;
        case PotentialKind::gaussian_kernel: c = -a_ / (b_ * b_) * std::exp(-r2 / (2.0 * b_ * b_)); break;
        default: c = 0.0;
    }
    for (int i = 0; i < d; ++i) g[i] = c * x[i];
}

void Potential::hess(const double* x, int d, double* H) const {
    if (d == 1) {
        H[0] = hess(x[0]);
        return;
    }
    require_1d(kind_, d);
    double r2 = norm2(x, d);
    // H = c I + e x x^T
    double c = 0.0, e = 0.0;
    switch (kind_) {
        case PotentialKind::quadratic: c = a_; break;
        case PotentialKind::quartic_double_well:
            c = a_ * r2 - b_;
            e = 2.0 * a_;
            break;
        case PotentialKind::gaussian_kernel: {
            double s2 = b_ * b_;
            double g = a_ * std::exp(-r2 / (2.0 * s2));
            c = -g / s2;
            e = g / (s2 * s2);
            break;
        }
        default: break;
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) H[i * d + j] = (i == j ? c : 0.0) + e * x[i] * x[j];
}

PotentialSpec PotentialSpec::make(Potential U, Potential K, double kappa_U) {
    PotentialSpec s;
    s.U = std::move(U);
    s.K = std::move(K);
    s.kappa_U = kappa_U;
    s.interaction_off = s.K.is_zero();
    auto lip = [](const Potential& p) {
        switch (p.kind()) {
            case PotentialKind::quadratic: return std::abs(p.a());
            case PotentialKind::gaussian_kernel: return std::abs(p.a()) / (p.b() * p.b());
            default: return 0.0;
        }
    };
    s.lipschitz_gradU = lip(s.U);
    s.lipschitz_gradK = lip(s.K);
    return s;
}

ParticleEnsemble::ParticleEnsemble(std::size_t n, int dim, std::uint64_t seed_)
    : N(n), d(dim), x(n * dim, 0.0), v(n * dim, 0.0), seed(seed_), stream_ids(n) {
    for (std::size_t i = 0; i < n; ++i) stream_ids[i] = i;
}

bool ParticleEnsemble::finite() const {
    for (double a : x)
        if (!std::isfinite(a)) return false;
    for (double a : v)
        if (!std::isfinite(a)) return false;
    return true;
}

PhasePoint ParticleEnsemble::point(std::size_t i) const {
    PhasePoint p;
    p.x.assign(x.begin() + i * d, x.begin() + (i + 1) * d);
    p.v.assign(v.begin() + i * d, v.begin() + (i + 1) * d);
    return p;
}

ValidationReport validate_assumptions(const PotentialSpec& spec, const std::vector<std::vector<double>>& probe) {
    if (probe.empty()) throw StateError("validate_assumptions: empty probe grid");
    const int d = static_cast<int>(probe.front().size());
    ValidationReport r;
    std::vector<double> mx(d), g1(d), g2(d);
    for (const auto& p : probe) {
        for (int i = 0; i < d; ++i) mx[i] = -p[i];
        double sym = std::abs(spec.K.value(p.data(), d) - spec.K.value(mx.data(), d));
        spec.K.grad(p.data(), d, g1.data());
        spec.K.grad(mx.data(), d, g2.data());
        double odd = 0.0;
        for (int i = 0; i < d; ++i) odd = std::max(odd, std::abs(g1[i] + g2[i]));
        double lb = spec.kappa_U * norm2(p.data(), d) - spec.U.value(p.data(), d);
        r.symmetry_violation = std::max(r.symmetry_violation, sym);
        r.oddness_violation = std::max(r.oddness_violation, odd);
        r.lower_bound_violation = std::max(r.lower_bound_violation, lb);
    }
    // Difference quotients over all probe pairs.
    auto lipschitz = [&](const Potential& P) {
        double L = 0.0;
        for (std::size_t a = 0; a < probe.size(); ++a) {
            P.grad(probe[a].data(), d, g1.data());
            for (std::size_t b = a + 1; b < probe.size(); ++b) {
                P.grad(probe[b].data(), d, g2.data());
                double num = 0.0, den = 0.0;
                for (int i = 0; i < d; ++i) {
                    num += (g1[i] - g2[i]) * (g1[i] - g2[i]);
                    den += (probe[a][i] - probe[b][i]) * (probe[a][i] - probe[b][i]);
                }
                if (den > 0.0) L = std::max(L, std::sqrt(num / den));
            }
        }
        return L;
    };
    r.lipschitz_gradU = lipschitz(spec.U);
    r.lipschitz_gradK = lipschitz(spec.K);
    if (d == 1) {
        const double h = 1e-4;
        for (const auto& p : probe) {
            double x = p[0];
            r.sup_hessU = std::max(r.sup_hessU, std::abs(spec.U.hess(x)));
            r.sup_third_U = std::max(r.sup_third_U, std::abs(spec.U.hess(x + h) - spec.U.hess(x - h)) / (2 * h));
        }
    }
    const double tol = 1e-12;
    auto scale = [&](double v) { return tol * std::max(1.0, std::abs(v)); };
    r.symmetric = r.symmetry_violation <= scale(r.symmetry_violation);
    r.odd = r.oddness_violation <= scale(r.oddness_violation);
    r.lower_bound = r.lower_bound_violation <= tol;
    return r;
}

ValidationReport validate_assumptions(const PotentialSpec& spec, const std::vector<double>& probe_1d) {
    std::vector<std::vector<double>> p;
    p.reserve(probe_1d.size());
    for (double x : probe_1d) p.push_back({x});
    return validate_assumptions(spec, p);
}

std::vector<double> mean_field_force(const PotentialSpec& spec, const ParticleEnsemble& ens,
                                     const std::vector<double>& q) {
    if (ens.N == 0) throw StateError("mean_field_force: empty ensemble");
    const int d = ens.d;
    std::vector<double> out(d, 0.0);
    if (spec.interaction_off) return out;
    std::vector<double> buf(ens.N);
    if (spec.K.kind() == PotentialKind::quadratic) {
        // gradK(q - x) = a (q - x): exact in O(N).
        for (int k = 0; k < d; ++k) {
            for (std::size_t j = 0; j < ens.N; ++j) buf[j] = ens.x[j * d + k];
            out[k] = spec.K.a() * (q[k] - pairwise_sum(buf) / static_cast<double>(ens.N));
        }
        return out;
    }
    std::vector<double> diff(d), g(d);
    std::vector<std::vector<double>> comps(d, std::vector<double>(ens.N));
    for (std::size_t j = 0; j < ens.N; ++j) {
        for (int k = 0; k < d; ++k) diff[k] = q[k] - ens.x[j * d + k];
        spec.K.grad(diff.data(), d, g.data());
        for (int k = 0; k < d; ++k) comps[k][j] = g[k];
    }
    for (int k = 0; k < d; ++k) out[k] = pairwise_sum(comps[k]) / static_cast<double>(ens.N);
    return out;
}

void mean_field_at_particles(const PotentialSpec& spec, const ParticleEnsemble& ens, std::vector<double>& out) {
    if (ens.N == 0) throw StateError("mean_field_force: empty ensemble");
    const int d = ens.d;
    const std::size_t N = ens.N;
    out.assign(N * d, 0.0);
    if (spec.interaction_off) return;
    if (spec.K.kind() == PotentialKind::quadratic) {
        std::vector<double> buf(N);
        for (int k = 0; k < d; ++k) {
            for (std::size_t j = 0; j < N; ++j) buf[j] = ens.x[j * d + k];
            double mean = pairwise_sum(buf) / static_cast<double>(N);
            for (std::size_t i = 0; i < N; ++i) out[i * d + k] = spec.K.a() * (ens.x[i * d + k] - mean);
        }
        return;
    }
    parallel_for(N, [&](std::size_t b, std::size_t e) {
        std::vector<double> diff(d), g(d);
        std::vector<std::vector<double>> comps(d, std::vector<double>(N));
        for (std::size_t i = b; i < e; ++i) {
            for (std::size_t j = 0; j < N; ++j) {
                for (int k = 0; k < d; ++k) diff[k] = ens.x[i * d + k] - ens.x[j * d + k];
                spec.K.grad(diff.data(), d, g.data());
                for (int k = 0; k < d; ++k) comps[k][j] = g[k];
            }
            for (int k = 0; k < d; ++k) out[i * d + k] = pairwise_sum(comps[k]) / static_cast<double>(N);
        }
    });
}

std::vector<double> mean_field_on_points(const PotentialSpec& spec, const double* xs, std::size_t n,
                                         const std::vector<double>& points) {
    if (n == 0) throw StateError("mean_field_force: empty ensemble");
    std::vector<double> out(points.size(), 0.0);
    if (spec.interaction_off) return out;
    if (spec.K.kind() == PotentialKind::quadratic) {
        double mean = pairwise_sum(xs, n) / static_cast<double>(n);
        for (std::size_t i = 0; i < points.size(); ++i) out[i] = spec.K.a() * (points[i] - mean);
        return out;
    }
    parallel_for(points.size(), [&](std::size_t b, std::size_t e) {
        std::vector<double> buf(n);
        for (std::size_t i = b; i < e; ++i) {
            for (std::size_t j = 0; j < n; ++j) buf[j] = spec.K.grad(points[i] - xs[j]);
            out[i] = pairwise_sum(buf) / static_cast<double>(n);
        }
    });
    return out;
}

}  // namespace vfp
