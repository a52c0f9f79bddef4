#include "vfp/hamiltonian_flow.hpp"

#include <algorithm>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <cmath>
#include <sstream>

namespace vfp {

struct ForceFieldHistory::Slice {
    boost::math::interpolators::cardinal_cubic_b_spline<double> spline;
};

ForceFieldHistory::ForceFieldHistory(double x0, double dx, std::size_t nx) : x0_(x0), dx_(dx), nx_(nx) {
    if (nx < 4 || !(dx > 0.0)) throw ParameterDomainError("ForceFieldHistory: need >= 4 grid points and dx > 0");
}

void ForceFieldHistory::append(double t, std::vector<double> values) {
    if (values.size() != nx_) throw ParameterDomainError("ForceFieldHistory: table size does not match x-grid");
    if (!times_.empty() && !(t > times_.back()))
        throw ParameterDomainError("ForceFieldHistory: times must be strictly increasing");
    auto s = std::make_shared<Slice>();
    s->spline = boost::math::interpolators::cardinal_cubic_b_spline<double>(values.data(), values.size(), x0_, dx_);
    times_.push_back(t);
    tables_.push_back(std::move(values));
    slices_.push_back(std::move(s));
}

std::vector<double> ForceFieldHistory::x_grid() const {
    std::vector<double> g(nx_);
    for (std::size_t i = 0; i < nx_; ++i) g[i] = x0_ + dx_ * static_cast<double>(i);
    return g;
}

bool ForceFieldHistory::covers(double t) const {
    if (times_.empty()) return false;
    const double eps = 1e-9 * std::max(1.0, std::abs(times_.back()));
    return t >= times_.front() - eps && t <= times_.back() + eps;
}

double ForceFieldHistory::slice_eval(std::size_t k, double x, double& dfdx) const {
    const auto& sp = slices_[k]->spline;
    double lo = x0_, hi = x0_ + dx_ * static_cast<double>(nx_ - 1);
    if (x < lo) {
        dfdx = sp.prime(lo);
        return sp(lo) + dfdx * (x - lo);
    }
    if (x > hi) {
        dfdx = sp.prime(hi);
        return sp(hi) + dfdx * (x - hi);
    }
    dfdx = sp.prime(x);
    return sp(x);
}

double ForceFieldHistory::eval(double t, double x, double* dfdx) const {
    if (!covers(t)) {
        std::ostringstream os;
        os << "force-field history does not cover t=" << t;
        throw CoverageError(os.str());
    }
    std::size_t k = std::upper_bound(times_.begin(), times_.end(), t) - times_.begin();
    double d0 = 0.0, d1 = 0.0;
    if (k == 0 || times_.size() == 1) {
        double f = slice_eval(0, x, d0);
        if (dfdx) *dfdx = d0;
        return f;
    }
    if (k >= times_.size()) {
        double f = slice_eval(times_.size() - 1, x, d0);
        if (dfdx) *dfdx = d0;
        return f;
    }
    double w = (t - times_[k - 1]) / (times_[k] - times_[k - 1]);
    double f0 = slice_eval(k - 1, x, d0);
    double f1 = slice_eval(k, x, d1);
    if (dfdx) *dfdx = (1 - w) * d0 + w * d1;
    return (1 - w) * f0 + w * f1;
}

double FlowRecord::det() const {
    const int n = 2 * d;
    if (jacobian.size() != static_cast<std::size_t>(n * n)) return 0.0;
    if (n == 2) return jacobian[0] * jacobian[3] - jacobian[1] * jacobian[2];
    // LU with partial pivoting for d > 1.
    std::vector<double> a = jacobian;
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int p = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(a[r * n + c]) > std::abs(a[p * n + c])) p = r;
        if (a[p * n + c] == 0.0) return 0.0;
        if (p != c) {
            for (int k = 0; k < n; ++k) std::swap(a[p * n + k], a[c * n + k]);
            det = -det;
        }
        det *= a[c * n + c];
        for (int r = c + 1; r < n; ++r) {
            double f = a[r * n + c] / a[c * n + c];
            for (int k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
        }
    }
    return det;
}

namespace {

void check_context(const FlowContext& ctx, double t_from, double t_to, int d) {
    if (!ctx.spec || !ctx.params) throw StateError("flow: context lacks spec or params");
    if (!(ctx.dt > 0.0)) throw ParameterDomainError("flow: dt must be positive");
    if (!ctx.spec->interaction_off) {
        if (d != 1) throw ParameterDomainError("flow: interaction requires d = 1");
        if (!ctx.history || !ctx.history->covers(t_from) || !ctx.history->covers(t_to)) {
            std::ostringstream os;
            os << "flow: time interval [" << std::min(t_from, t_to) << ", " << std::max(t_from, t_to)
               << "] not covered by the force-field history";
            throw CoverageError(os.str());
        }
    }
}

inline double accel_1d(const FlowContext& ctx, double x, double t, double& da) {
    double g = ctx.spec->U.grad(x);
    double h = ctx.spec->U.hess(x);
    if (!ctx.spec->interaction_off) {
        double mf_x = 0.0;
        g += ctx.history->eval(t, x, &mf_x);
        h += mf_x;
    }
    const double inv_m = 1.0 / ctx.params->m;
    da = -h * inv_m;
    return -g * inv_m;
}

}  // namespace

void flow_1d(double& x, double& v, double t_from, double t_to, const FlowContext& ctx, double* J) {
    const double span = t_to - t_from;
    if (span == 0.0) return;
    const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(span) / ctx.dt - 1e-9)));
    const double h = span / static_cast<double>(n);
    const double hh = 0.5 * h;
    double da = 0.0;
    for (long k = 0; k < n; ++k) {
        const double tm = t_from + (static_cast<double>(k) + 0.5) * h;
        double a = accel_1d(ctx, x, tm, da);
        v += hh * a;
        if (J) {
            J[2] += hh * da * J[0];
            J[3] += hh * da * J[1];
        }
        x += h * v;
        if (J) {
            J[0] += h * J[2];
            J[1] += h * J[3];
        }
        a = accel_1d(ctx, x, tm, da);
        v += hh * a;
        if (J) {
            J[2] += hh * da * J[0];
            J[3] += hh * da * J[1];
        }
    }
}

FlowRecord integrate_segment(const PhasePoint& z0, double t_from, double t_to, const FlowContext& ctx,
                             bool with_jacobian) {
    const int d = static_cast<int>(z0.x.size());
    if (d < 1 || z0.v.size() != z0.x.size()) throw ParameterDomainError("flow: malformed phase point");
    check_context(ctx, t_from, t_to, d);
    FlowRecord r;
    r.base_time = t_from;
    r.target_time = t_to;
    r.z0 = z0;
    r.phi = z0;
    r.d = d;
    const int n2 = 2 * d;
    if (with_jacobian) {
        r.jacobian.assign(n2 * n2, 0.0);
        for (int k = 0; k < n2; ++k) r.jacobian[k * n2 + k] = 1.0;
    }
    if (d == 1) {
        flow_1d(r.phi.x[0], r.phi.v[0], t_from, t_to, ctx, with_jacobian ? r.jacobian.data() : nullptr);
        return r;
    }
    const double span = t_to - t_from;
    if (span == 0.0) return r;
    const long n = std::max(1L, static_cast<long>(std::ceil(std::abs(span) / ctx.dt - 1e-9)));
    const double h = span / static_cast<double>(n);
    const double inv_m = 1.0 / ctx.params->m;
    std::vector<double> g(d), H(d * d);
    std::vector<double>& J = r.jacobian;
    auto kick = [&](double tau) {
        ctx.spec->U.grad(r.phi.x.data(), d, g.data());
        for (int i = 0; i < d; ++i) r.phi.v[i] -= tau * inv_m * g[i];
        if (!with_jacobian) return;
        ctx.spec->U.hess(r.phi.x.data(), d, H.data());
        // J_v += -tau/m * H * J_x, column by column.
        for (int c = 0; c < n2; ++c)
            for (int i = 0; i < d; ++i) {
                double s = 0.0;
                for (int k = 0; k < d; ++k) s += H[i * d + k] * J[k * n2 + c];
                J[(d + i) * n2 + c] -= tau * inv_m * s;
            }
    };
    for (long k = 0; k < n; ++k) {
        kick(0.5 * h);
        for (int i = 0; i < d; ++i) r.phi.x[i] += h * r.phi.v[i];
        if (with_jacobian)
            for (int c = 0; c < n2; ++c)
                for (int i = 0; i < d; ++i) J[i * n2 + c] += h * J[(d + i) * n2 + c];
        kick(0.5 * h);
    }
    return r;
}

FlowRecord integrate_flow(const PhasePoint& z0, double t, const FlowContext& ctx, bool with_jacobian) {
    if (t >= 0.0) return integrate_segment(z0, 0.0, t, ctx, with_jacobian);
    return integrate_segment(z0, -t, 0.0, ctx, with_jacobian);
}

std::vector<double> jacobian_along(const PhasePoint& z0, double t, const FlowContext& ctx) {
    return integrate_flow(z0, t, ctx, true).jacobian;
}

std::vector<double> gamma_term(const PhasePoint& z, double t, const FlowContext& ctx, double fd_eps) {
    if (!(fd_eps > 0.0)) throw ParameterDomainError("gamma_term: fd_eps must be positive");
    const int d = static_cast<int>(z.x.size());
    const int n2 = 2 * d;
    const double s2 = ctx.params->sigma * ctx.params->sigma;
    std::vector<double> G(n2, 0.0);
    for (int i = 0; i < d; ++i) {
        PhasePoint zp = z, zm = z;
        zp.v[i] += fd_eps;
        zm.v[i] -= fd_eps;
        auto Jp = jacobian_along(zp, -t, ctx);
        auto Jm = jacobian_along(zm, -t, ctx);
        for (int a = 0; a < n2; ++a) G[a] += s2 * (Jp[a * n2 + d + i] - Jm[a * n2 + d + i]) / (2.0 * fd_eps);
    }
    return G;
}

PhasePoint pullback_point(const PhasePoint& Zt, double t, const FlowContext& ctx) {
    return integrate_flow(Zt, -t, ctx, false).phi;
}

}  // namespace vfp
