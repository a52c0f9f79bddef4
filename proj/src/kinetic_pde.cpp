#include "vfp/kinetic_pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vfp/stencils.hpp"

namespace vfp {

GridField vfp_transport_rhs(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p) {
    GhostField h = hamiltonian_ghosted(f, spec, p, 1.0);
    GridField out = entropic_bracket(f.grid, f.values, h, p.beta * p.m);
    for (double& y : out) y = -y;
    return out;
}

GridField vfp_dissipative_rhs(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p) {
    const double s = p.beta * p.m;
    GridField h = hamiltonian_field(f, spec, p, 1.0);
    GridField psi(h.size()), W(h.size());
    for (std::size_t k = 0; k < h.size(); ++k) {
        W[k] = s * h[k];
        psi[k] = f.values[k] > 0.0 ? std::log(f.values[k]) + W[k] : 0.0;
    }
    OnsagerMatrix J{0.0, 0.0, 0.5 * p.sigma * p.sigma};
    GridField out = onsager_divergence(f.grid, f.values, psi, J, &W);
    for (double& y : out) y = -y;
    return out;
}

GridField vfp_rhs(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p) {
    GridField a = vfp_transport_rhs(f, spec, p);
    GridField b = vfp_dissipative_rhs(f, spec, p);
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
    return a;
}

CflReport cfl_limit(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p) {
    const GridSpec& g = f.grid;
    MeanField1D mf = MeanField1D::from_density(spec, f);
    double fmax = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        const double x = g.x(i);
        fmax = std::max(fmax, std::abs(spec.U.grad(x) + mf.grad(x)) / p.m);
    }
    const double vmax = std::max(std::abs(g.v_min), std::abs(g.v_max));
    CflReport r;
    r.limit_x = vmax > 0.0 ? 0.5 * g.dx() / vmax : INFINITY;
    r.limit_v = fmax > 0.0 ? 0.5 * g.dv() / fmax : INFINITY;
    r.limit_diff = p.sigma > 0.0 ? 0.5 * g.dv() * g.dv() / (p.sigma * p.sigma) : INFINITY;
    r.dt_max = r.limit_x;
    r.binding = "transport_x";
    if (r.limit_v < r.dt_max) {
        r.dt_max = r.limit_v;
        r.binding = "transport_v";
    }
    if (r.limit_diff < r.dt_max) {
        r.dt_max = r.limit_diff;
        r.binding = "diffusion_v";
    }
    return r;
}

namespace {

inline double minmod(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return std::abs(a) < std::abs(b) ? a : b;
}

// Upwind face value of g (scaled by the reference cell of the face) from the four
// scaled neighbours G[-1], G[0], G[1], G[2]; first order where a neighbour is missing.
// The value is clipped to the log-mean whenever the upwind side is the smaller one,
// which keeps the semi-discrete free-energy production nonpositive.
inline double face_value(double w, double Gm, bool has_m, double G0, double G1, double Gpp, bool has_pp,
                         bool second_order) {
    double up, other;
    double ghat;
    if (w > 0.0) {
        up = G0;
        other = G1;
        ghat = G0 + (second_order && has_m ? 0.5 * minmod(G0 - Gm, G1 - G0) : 0.0);
    } else {
        up = G1;
        other = G0;
        ghat = G1 - (second_order && has_pp ? 0.5 * minmod(G1 - G0, Gpp - G1) : 0.0);
    }
    if (ghat > up && other > up) ghat = std::min(ghat, log_mean(G0, G1));
    return ghat;
}

// Face data of the entropic transport stencil for a fixed Hamiltonian.
struct TransportFaces {
    int nx = 0, nv = 0;
    double dx = 1.0, dv = 1.0;
    // x-faces (i+1/2, j) at index i*nv + j; v-faces (i, j+1/2) at index i*(nv-1) + j.
    std::vector<double> wx, xm, xp, xpp;
    std::vector<double> wv, vm, vp, vpp;
};

inline double expdiff(double s, double d1, double d2) { return (std::expm1(-s * d1) - std::expm1(-s * d2)) / s; }

TransportFaces build_faces(const GridSpec& g, const GhostField& h, double s) {
    TransportFaces T;
    T.nx = g.nx;
    T.nv = g.nv;
    T.dx = g.dx();
    T.dv = g.dv();
    const int nx = g.nx, nv = g.nv;
    auto corner = [&](int i, int j) { return 0.25 * (h(i, j) + h(i + 1, j) + h(i, j + 1) + h(i + 1, j + 1)); };
    const std::size_t nxf = static_cast<std::size_t>(nx - 1) * nv, nvf = static_cast<std::size_t>(nx) * (nv - 1);
    T.wx.resize(nxf);
    T.xm.resize(nxf);
    T.xp.resize(nxf);
    T.xpp.resize(nxf);
    T.wv.resize(nvf);
    T.vm.resize(nvf);
    T.vp.resize(nvf);
    T.vpp.resize(nvf);
    for (int i = 0; i + 1 < nx; ++i)
        for (int j = 0; j < nv; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * nv + j;
            const double r = h(i, j);
            T.wx[k] = -expdiff(s, corner(i, j) - r, corner(i, j - 1) - r) / T.dv;
            T.xm[k] = i >= 1 ? std::exp(s * (h(i - 1, j) - r)) : 0.0;
            T.xp[k] = std::exp(s * (h(i + 1, j) - r));
            T.xpp[k] = i + 2 < nx ? std::exp(s * (h(i + 2, j) - r)) : 0.0;
        }
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j + 1 < nv; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * (nv - 1) + j;
            const double r = h(i, j);
            T.wv[k] = expdiff(s, corner(i, j) - r, corner(i - 1, j) - r) / T.dx;
            T.vm[k] = j >= 1 ? std::exp(s * (h(i, j - 1) - r)) : 0.0;
            T.vp[k] = std::exp(s * (h(i, j + 1) - r));
            T.vpp[k] = j + 2 < nv ? std::exp(s * (h(i, j + 2) - r)) : 0.0;
        }
    return T;
}

// out = -div F for the upwind stencil.
void transport_apply(const TransportFaces& T, const GridField& f, GridField& out, bool second_order) {
    const int nx = T.nx, nv = T.nv;
    std::fill(out.begin(), out.end(), 0.0);
    auto id = [nv](int i, int j) { return static_cast<std::size_t>(i) * nv + j; };
    for (int i = 0; i + 1 < nx; ++i)
        for (int j = 0; j < nv; ++j) {
            const std::size_t k = id(i, j);
            const double w = T.wx[k];
            if (w == 0.0) continue;
            const bool hm = i >= 1, hpp = i + 2 < nx;
            const double G = face_value(w, hm ? f[id(i - 1, j)] * T.xm[k] : 0.0, hm, f[k], f[id(i + 1, j)] * T.xp[k],
                                        hpp ? f[id(i + 2, j)] * T.xpp[k] : 0.0, hpp, second_order);
            const double F = w * G / T.dx;
            out[k] -= F;
            out[id(i + 1, j)] += F;
        }
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j + 1 < nv; ++j) {
            const std::size_t kf = static_cast<std::size_t>(i) * (nv - 1) + j;
            const std::size_t k = id(i, j);
            const double w = T.wv[kf];
            if (w == 0.0) continue;
            const bool hm = j >= 1, hpp = j + 2 < nv;
            const double G = face_value(w, hm ? f[k - 1] * T.vm[kf] : 0.0, hm, f[k], f[k + 1] * T.vp[kf],
                                        hpp ? f[k + 2] * T.vpp[kf] : 0.0, hpp, second_order);
            const double F = w * G / T.dv;
            out[k] -= F;
            out[k + 1] += F;
        }
}

// theta-scheme for one column of the velocity drift-diffusion, factored once (Thomas).
struct VelocitySolver {
    int nv = 0;
    std::vector<double> lo, di, up;  // operator A
    std::vector<double> cp, den;     // factorization of I - theta tau A
    double theta = 1.0, tau = 0.0;

    VelocitySolver(const GridSpec& g, const ModelParams& p, double tau_, double theta_req) : nv(g.nv), tau(tau_) {
        const double s = p.beta * p.m;
        const double D = 0.5 * p.sigma * p.sigma;
        const double c = D / (g.dv() * g.dv());
        lo.assign(nv, 0.0);
        di.assign(nv, 0.0);
        up.assign(nv, 0.0);
        for (int j = 0; j + 1 < nv; ++j) {
            const double a = 0.5 * s * (g.v(j + 1) * g.v(j + 1) - g.v(j) * g.v(j));
            const double bp = bernoulli(a), bm = bernoulli(-a);
            // Flux F = c dv (bp f_j - bm f_{j+1}) leaves cell j and enters j+1.
            di[j] -= c * bp;
            up[j] += c * bm;
            lo[j + 1] += c * bp;
            di[j + 1] -= c * bm;
        }
        if (theta_req < 0.0) {
            double worst = 0.0;
            for (int j = 0; j < nv; ++j) worst = std::max(worst, -di[j]);
            theta = 0.5 * tau * worst <= 1.0 ? 0.5 : 1.0;
        } else {
            theta = theta_req;
        }
        cp.assign(nv, 0.0);
        den.assign(nv, 0.0);
        const double q = theta * tau;
        double prev_cp = 0.0;
        for (int j = 0; j < nv; ++j) {
            const double b = 1.0 - q * di[j];
            const double a = j > 0 ? -q * lo[j] : 0.0;
            den[j] = b - a * prev_cp;
            cp[j] = j + 1 < nv ? (-q * up[j]) / den[j] : 0.0;
            prev_cp = cp[j];
        }
    }

    void solve(double* col, std::vector<double>& rhs) const {
        const double e = (1.0 - theta) * tau;
        for (int j = 0; j < nv; ++j) {
            double y = col[j] + e * di[j] * col[j];
            if (j > 0) y += e * lo[j] * col[j - 1];
            if (j + 1 < nv) y += e * up[j] * col[j + 1];
            rhs[j] = y;
        }
        const double q = theta * tau;
        for (int j = 0; j < nv; ++j) {
            const double a = j > 0 ? -q * lo[j] : 0.0;
            rhs[j] = (rhs[j] - (j > 0 ? a * rhs[j - 1] : 0.0)) / den[j];
        }
        for (int j = nv - 2; j >= 0; --j) rhs[j] -= cp[j] * rhs[j + 1];
        for (int j = 0; j < nv; ++j) col[j] = rhs[j];
    }
};

void velocity_half_step(const VelocitySolver& S, const GridSpec& g, GridField& f) {
    parallel_for(static_cast<std::size_t>(g.nx), [&](std::size_t b, std::size_t e) {
        std::vector<double> rhs(g.nv);
        for (std::size_t i = b; i < e; ++i) S.solve(&f[i * g.nv], rhs);
    });
}

}  // namespace

EvolveResult evolve(const PhaseDensity& f0, const PotentialSpec& spec, const ModelParams& p, const EvolveConfig& cfg) {
    const GridSpec& g = f0.grid;
    g.validate();
    if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0)) throw ConfigError("evolve: dt and t_end must be positive");
    if (cfg.energy_every < 0 || cfg.snapshot_every < 0) throw ConfigError("evolve: negative recording interval");
    const double s = p.beta * p.m;
    if (!(s > 0.0)) throw ParameterDomainError("evolve: beta m must be positive");
    const int n = std::max(1, static_cast<int>(std::ceil(cfg.t_end / cfg.dt - 1e-9)));
    const double dt = cfg.t_end / n;
    CflReport cfl = cfl_limit(f0, spec, p);
    if (dt > cfl.dt_max * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "CFL violation: dt=" << dt << " exceeds " << cfl.dt_max << " (binding constraint " << cfl.binding
           << "; limits x=" << cfl.limit_x << ", v=" << cfl.limit_v << ", diffusion=" << cfl.limit_diff << ")";
        throw CflError(os.str());
    }
    const bool interacting = !(spec.interaction_off || spec.K.is_zero());

    EvolveResult res;
    PhaseDensity f = f0;
    VelocitySolver S(g, p, 0.5 * dt, cfg.sg_theta);
    res.sg_theta = S.theta;
    res.snapshot_times.push_back(0.0);
    res.snapshots.push_back(f);
    if (cfg.energy_every > 0) res.energy.push_back(energy_report(f, spec, p, 0.0));

    TransportFaces faces;
    bool faces_valid = false;
    auto refresh = [&](const PhaseDensity& cur) {
        if (faces_valid && !interacting) return;
        faces = build_faces(g, hamiltonian_ghosted(cur, spec, p, 1.0), s);
        faces_valid = true;
    };
    GridField L(g.size()), f1(g.size());
    const double cell = g.cell();
    for (int step = 1; step <= n; ++step) {
        velocity_half_step(S, g, f.values);
        // SSP-RK2 transport.
        refresh(f);
        transport_apply(faces, f.values, L, cfg.second_order_transport);
        for (std::size_t k = 0; k < f1.size(); ++k) f1[k] = f.values[k] + dt * L[k];
        if (interacting) {
            PhaseDensity tmp{g, f1, 0.0};
            refresh(tmp);
        }
        transport_apply(faces, f1, L, cfg.second_order_transport);
        for (std::size_t k = 0; k < f1.size(); ++k)
            f.values[k] = 0.5 * f.values[k] + 0.5 * (f1[k] + dt * L[k]);
        velocity_half_step(S, g, f.values);
        for (double& y : f.values)
            if (y < 0.0) y = 0.0;
        const double mass = pairwise_sum(f.values) * cell;
        if (!(mass > 0.0) || !std::isfinite(mass)) throw NumericalError("evolve: mass lost or non-finite");
        res.max_mass_defect = std::max(res.max_mass_defect, std::abs(mass - 1.0));
        for (double& y : f.values) y /= mass;
        f.mass_defect = mass - 1.0;
        const double t = step * dt;
        if (cfg.energy_every > 0 && (step % cfg.energy_every == 0 || step == n))
            res.energy.push_back(energy_report(f, spec, p, t));
        if ((cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0) || step == n) {
            res.snapshot_times.push_back(t);
            res.snapshots.push_back(f);
        }
    }
    res.steps = n;
    return res;
}

}  // namespace vfp
