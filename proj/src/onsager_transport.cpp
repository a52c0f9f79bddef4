#include "vfp/onsager_transport.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "vfp/common.hpp"
#include "vfp/stencils.hpp"

namespace vfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Walks the segments of a quantile function over increasing, disjoint s-intervals.
struct SegmentCursor {
    const QuantileFunction& Q;
    std::size_t k = 0;
    explicit SegmentCursor(const QuantileFunction& q) : Q(q) {}
    // Left and right limits of Q over (a, b), b > a.
    std::pair<double, double> values(double a, double b) {
        const std::size_t n = Q.s.size();
        while (k + 2 < n && Q.s[k + 1] <= a) ++k;
        const double s0 = Q.s[k], s1 = Q.s[k + 1];
        const double slope = s1 > s0 ? (Q.q[k + 1] - Q.q[k]) / (s1 - s0) : 0.0;
        return {Q.q[k] + slope * (a - s0), Q.q[k] + slope * (b - s0)};
    }
};

std::vector<double> merged_breaks(const QuantileFunction& A, const QuantileFunction& B) {
    std::vector<double> s;
    s.reserve(A.s.size() + B.s.size());
    std::merge(A.s.begin(), A.s.end(), B.s.begin(), B.s.end(), std::back_inserter(s));
    s.erase(std::unique(s.begin(), s.end()), s.end());
    return s;
}

void check_quantile(const QuantileFunction& Q) {
    if (Q.s.size() < 2 || Q.s.size() != Q.q.size() || Q.s.front() != 0.0 || Q.s.back() != 1.0)
        throw ParameterDomainError("quantile function must span s in [0, 1]");
}

}  // namespace

QuantileFunction fiber_quantile(const std::vector<double>& fiber, double v_min, double dv, double norm_tol) {
    if (fiber.empty() || !(dv > 0.0)) throw ParameterDomainError("fiber_quantile: empty fiber or dv <= 0");
    double mass = 0.0;
    for (double u : fiber) {
        if (!(u >= 0.0)) throw ParameterDomainError("fiber_quantile: negative or non-finite fiber value");
        mass += u * dv;
    }
    if (!(std::abs(mass - 1.0) <= norm_tol))
        throw ParameterDomainError("fiber_quantile: fiber mass " + std::to_string(mass) + " is not 1");
    QuantileFunction Q;
    Q.s.reserve(fiber.size() + 1);
    Q.q.reserve(fiber.size() + 1);
    Q.s.push_back(0.0);
    Q.q.push_back(v_min);
    double cum = 0.0;
    for (std::size_t j = 0; j < fiber.size(); ++j) {
        cum += fiber[j] * dv / mass;
        Q.s.push_back(std::min(cum, 1.0));
        Q.q.push_back(v_min + (j + 1) * dv);
    }
    Q.s.back() = 1.0;
    return Q;
}

std::vector<double> quantile_to_density(const QuantileFunction& Q, double v_min, double dv, int nv) {
    check_quantile(Q);
    std::vector<double> mass(nv, 0.0);
    auto cell_of = [&](double y) { return std::clamp(static_cast<int>(std::floor((y - v_min) / dv)), 0, nv - 1); };
    for (std::size_t k = 0; k + 1 < Q.s.size(); ++k) {
        const double ds = Q.s[k + 1] - Q.s[k];
        if (ds <= 0.0) continue;
        const double q0 = Q.q[k], q1 = Q.q[k + 1];
        if (q1 <= q0) {  // atom
            mass[cell_of(q0)] += ds;
            continue;
        }
        // Uniform spread of ds over [q0, q1]; mass beyond the grid goes to the end cells.
        const int c0 = cell_of(q0), c1 = cell_of(q1);
        for (int c = c0; c <= c1; ++c) {
            double lo = c == 0 ? -kInf : v_min + c * dv;
            double hi = c == nv - 1 ? kInf : v_min + (c + 1) * dv;
            double overlap = std::min(hi, q1) - std::max(lo, q0);
            if (overlap > 0.0) mass[c] += ds * overlap / (q1 - q0);
        }
    }
    for (double& m : mass) m /= dv;
    return mass;
}

double fiber_w2(const QuantileFunction& Q0, const QuantileFunction& Q1, double M) {
    if (!(M > 0.0)) throw ParameterDomainError("fiber_w2: M must be positive");
    check_quantile(Q0);
    check_quantile(Q1);
    const std::vector<double> s = merged_breaks(Q0, Q1);
    SegmentCursor c0(Q0), c1(Q1);
    std::vector<double> parts;
    parts.reserve(s.size());
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        const double a = s[k], b = s[k + 1];
        auto [l0, r0] = c0.values(a, b);
        auto [l1, r1] = c1.values(a, b);
        const double da = l0 - l1, db = r0 - r1;
        // exact integral of a squared linear function
        parts.push_back((b - a) * (da * da + da * db + db * db) / 3.0);
    }
    return std::sqrt(std::max(pairwise_sum(parts), 0.0) / M);
}

double fiber_w2(const std::vector<double>& u0x, const std::vector<double>& u1x, double v_min, double dv, double M) {
    return fiber_w2(fiber_quantile(u0x, v_min, dv), fiber_quantile(u1x, v_min, dv), M);
}

QuantileFunction displacement_interpolation(const QuantileFunction& Q0, const QuantileFunction& Q1, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw ParameterDomainError("displacement_interpolation: t outside [0, 1]");
    check_quantile(Q0);
    check_quantile(Q1);
    const std::vector<double> s = merged_breaks(Q0, Q1);
    SegmentCursor c0(Q0), c1(Q1);
    QuantileFunction Q;
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        const double a = s[k], b = s[k + 1];
        auto [l0, r0] = c0.values(a, b);
        auto [l1, r1] = c1.values(a, b);
        const double l = (1.0 - t) * l0 + t * l1, r = (1.0 - t) * r0 + t * r1;
        if (Q.s.empty() || Q.q.back() != l || Q.s.back() != a) {
            Q.s.push_back(a);
            Q.q.push_back(l);
        }
        Q.s.push_back(b);
        Q.q.push_back(r);
    }
    return Q;
}

std::vector<double> displacement_interpolation(const std::vector<double>& u0x, const std::vector<double>& u1x,
                                               double t, double v_min, double dv) {
    const QuantileFunction Q =
        displacement_interpolation(fiber_quantile(u0x, v_min, dv), fiber_quantile(u1x, v_min, dv), t);
    return quantile_to_density(Q, v_min, dv, static_cast<int>(u0x.size()));
}

WJResult wj_distance(const PhaseDensity& mu0, const PhaseDensity& mu1, double M, double marginal_tol,
                     double fiber_floor) {
    if (!mu0.grid.same_as(mu1.grid)) throw ParameterDomainError("wj_distance: grids differ");
    if (!(M > 0.0)) throw ParameterDomainError("wj_distance: M must be positive");
    const GridSpec& g = mu0.grid;
    const std::vector<double> r0 = marginal_x(mu0), r1 = marginal_x(mu1);
    WJResult res;
    std::vector<double> l1(g.nx);
    for (int i = 0; i < g.nx; ++i) l1[i] = std::abs(r0[i] - r1[i]) * g.dx();
    res.marginal_l1 = pairwise_sum(l1);
    if (res.marginal_l1 > marginal_tol) {
        res.infinite = true;
        res.value = kInf;
        return res;
    }
    std::vector<double> w2(g.nx, 0.0), wt(g.nx, 0.0), dropped(g.nx, 0.0);
    parallel_for(g.nx, [&](std::size_t b, std::size_t e) {
        std::vector<double> a(g.nv), c(g.nv);
        for (std::size_t i = b; i < e; ++i) {
            const double w = 0.5 * (r0[i] + r1[i]) * g.dx();
            if (!(r0[i] > fiber_floor && r1[i] > fiber_floor)) {
                dropped[i] = w;
                continue;
            }
            for (int j = 0; j < g.nv; ++j) {
                a[j] = std::max(mu0.at(i, j), 0.0) / r0[i];
                c[j] = std::max(mu1.at(i, j), 0.0) / r1[i];
            }
            // Fibers are normalized by construction up to clipping; renormalize silently.
            const double W = fiber_w2(fiber_quantile(a, g.v_min, g.dv(), 1e-6), fiber_quantile(c, g.v_min, g.dv(), 1e-6), M);
            w2[i] = w * W * W;
            wt[i] = w;
        }
    });
    res.excluded_mass = pairwise_sum(dropped);
    const double total = pairwise_sum(wt);
    res.value = total > 0.0 ? std::sqrt(pairwise_sum(w2) / total) : 0.0;
    return res;
}

double relative_entropy(const PhaseDensity& mu, const PhaseDensity& mu_inf, double floor_rel) {
    if (!mu.grid.same_as(mu_inf.grid)) throw ParameterDomainError("relative_entropy: grids differ");
    const double floor = floor_rel * *std::max_element(mu.values.begin(), mu.values.end());
    GridField t(mu.values.size(), 0.0);
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double u = mu.values[k], r = mu_inf.values[k];
        if (!(u > floor)) continue;
        if (!(r > 0.0)) return kInf;
        t[k] = u * std::log(u / r);
    }
    return pairwise_sum(t) * mu.grid.cell();
}

double partial_fisher(const PhaseDensity& mu, const PhaseDensity& mu_inf, double M, double floor_rel) {
    if (!mu.grid.same_as(mu_inf.grid)) throw ParameterDomainError("partial_fisher: grids differ");
    const double fu = floor_rel * *std::max_element(mu.values.begin(), mu.values.end());
    const double fr = floor_rel * *std::max_element(mu_inf.values.begin(), mu_inf.values.end());
    GridField psi(mu.values.size());
    for (std::size_t k = 0; k < psi.size(); ++k)
        psi[k] = std::log(std::max(mu.values[k], fu)) - std::log(std::max(mu_inf.values[k], fr));
    const GridField d = diff_axis(mu.grid, psi, 1);
    GridField t(psi.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = M * d[k] * d[k] * std::max(mu.values[k], 0.0);
    return pairwise_sum(t) * mu.grid.cell();
}

KappaReport kappa_from_assumption(const PhaseDensity& mu_inf, double M, double probe_rel) {
    const GridSpec& g = mu_inf.grid;
    const double h2 = g.dv() * g.dv();
    const std::vector<double> rho = marginal_x(mu_inf);
    KappaReport rep;
    rep.kappa = kInf;
    int probed = 0;
    for (int i = 0; i < g.nx; ++i) {
        if (!(rho[i] > 1e-10)) continue;
        double cmax = 0.0;
        for (int j = 0; j < g.nv; ++j) cmax = std::max(cmax, mu_inf.at(i, j));
        for (int j = 1; j + 1 < g.nv; ++j) {
            const double a = mu_inf.at(i, j - 1), b = mu_inf.at(i, j), c = mu_inf.at(i, j + 1);
            if (!(b > probe_rel * cmax)) continue;
            if (!(a > 0.0 && c > 0.0)) {
                rep.derivative_warning = true;
                continue;
            }
            const double k = -M * (std::log(c) - 2.0 * std::log(b) + std::log(a)) / h2;
            if (!std::isfinite(k)) {
                rep.derivative_warning = true;
                continue;
            }
            rep.kappa = std::min(rep.kappa, k);
            ++probed;
        }
    }
    if (probed == 0) {
        rep.kappa = 0.0;
        rep.derivative_warning = true;
        rep.note = "no probe nodes";
    } else if (rep.derivative_warning) {
        rep.note = "zero neighbours inside the probed region; second derivative unreliable";
    }
    return rep;
}

HwiReport hwi_check(const PhaseDensity& mu0, const PhaseDensity& mu1, const PhaseDensity& mu_inf, double M,
                    double kappa) {
    HwiReport r;
    r.kappa = kappa;
    const WJResult w = wj_distance(mu0, mu1, M);
    r.WJ = w.value;
    r.H0 = relative_entropy(mu0, mu_inf);
    r.H1 = relative_entropy(mu1, mu_inf);
    r.I0 = partial_fisher(mu0, mu_inf, M);
    r.lhs = r.H0 - r.H1;
    if (w.infinite) {
        r.degenerate = true;
        r.holds = true;
        r.rhs = kInf;
        r.slack = 0.0;
        r.margin = kInf;
        return r;
    }
    r.rhs = std::sqrt(r.I0) * r.WJ - 0.5 * kappa * r.WJ * r.WJ;
    r.slack = 1e-6 + 0.02 * std::abs(r.rhs);
    r.margin = r.rhs + r.slack - r.lhs;
    r.holds = r.margin >= 0.0;
    return r;
}

void write_hwi_csv(std::ostream& os, const std::vector<HwiReport>& rows) {
    os << "pair_id,H0,H1,I0,WJ,kappa,lhs,rhs,holds\n";
    os.precision(12);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const HwiReport& r = rows[k];
        os << k << ',' << r.H0 << ',' << r.H1 << ',' << r.I0 << ',' << r.WJ << ',' << r.kappa << ',' << r.lhs << ','
           << r.rhs << ',' << (r.holds ? 1 : 0) << '\n';
    }
}

void onsager_step(PhaseDensity& u, const PhaseDensity& u_inf, double M, double dt, double theta) {
    if (!u.grid.same_as(u_inf.grid)) throw ParameterDomainError("onsager_step: grids differ");
    if (!(M > 0.0) || !(dt > 0.0) || !(theta >= 0.0 && theta <= 1.0))
        throw ParameterDomainError("onsager_step: need M > 0, dt > 0, theta in [0, 1]");
    const GridSpec& g = u.grid;
    const int nv = g.nv;
    const double c = M / (g.dv() * g.dv());
    parallel_for(g.nx, [&](std::size_t b, std::size_t e) {
        // Face coefficients: flux_{j+1/2} = c dv [ap_j u_j - am_j u_{j+1}].
        std::vector<double> ap(nv, 0.0), am(nv, 0.0), lo(nv), di(nv), up(nv), rhs(nv), x(nv);
        for (std::size_t i = b; i < e; ++i) {
            for (int j = 0; j + 1 < nv; ++j) {
                const double w0 = std::log(std::max(u_inf.at(i, j), 1e-300));
                const double w1 = std::log(std::max(u_inf.at(i, j + 1), 1e-300));
                const double a = w0 - w1;  // W_{j+1} - W_j with W = -ln u_inf
                ap[j] = c * bernoulli(a);
                am[j] = c * bernoulli(-a);
            }
            // du_j/dt = -(flux_{j+1/2} - flux_{j-1/2}) / dv, zero flux at both ends.
            auto apply = [&](int j, const std::vector<double>& v) {
                double out = 0.0;
                if (j + 1 < nv) out -= ap[j] * v[j] - am[j] * v[j + 1];
                if (j > 0) out += ap[j - 1] * v[j - 1] - am[j - 1] * v[j];
                return out;
            };
            std::vector<double> col(nv);
            for (int j = 0; j < nv; ++j) col[j] = u.at(i, j);
            for (int j = 0; j < nv; ++j) {
                rhs[j] = col[j] + (1.0 - theta) * dt * apply(j, col);
                const double d = (j + 1 < nv ? ap[j] : 0.0) + (j > 0 ? am[j - 1] : 0.0);
                di[j] = 1.0 + theta * dt * d;
                lo[j] = j > 0 ? -theta * dt * ap[j - 1] : 0.0;
                up[j] = j + 1 < nv ? -theta * dt * am[j] : 0.0;
            }
            // Thomas
            for (int j = 1; j < nv; ++j) {
                const double w = lo[j] / di[j - 1];
                di[j] -= w * up[j - 1];
                rhs[j] -= w * rhs[j - 1];
            }
            x[nv - 1] = rhs[nv - 1] / di[nv - 1];
            for (int j = nv - 2; j >= 0; --j) x[j] = (rhs[j] - up[j] * x[j + 1]) / di[j];
            for (int j = 0; j < nv; ++j) u.values[g.idx(i, j)] = x[j];
        }
    });
}

}  // namespace vfp
