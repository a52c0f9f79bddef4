#include "vfp/free_energy.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace vfp {

void write_energy_csv(std::ostream& os, const std::vector<EnergyReport>& series) {
    os << "t,F,H,I,entropy\n";
    os.precision(12);
    for (const auto& r : series) os << r.t << ',' << r.F << ',' << r.H << ',' << r.I << ',' << r.entropy << '\n';
}

MeanField1D MeanField1D::from_density(const PotentialSpec& spec, const PhaseDensity& f) {
    MeanField1D mf;
    mf.spec_ = &spec;
    const GridSpec& g = f.grid;
    const double dx = g.dx(), dv = g.dv();
    mf.xs_.resize(g.nx);
    mf.ws_.resize(g.nx);
    mf.wv_.resize(g.nx);
    for (int i = 0; i < g.nx; ++i) {
        double w = 0.0, wv = 0.0;
        for (int j = 0; j < g.nv; ++j) {
            w += f.at(i, j);
            wv += f.at(i, j) * g.v(j);
        }
        mf.xs_[i] = g.x(i);
        mf.ws_[i] = w * dx * dv;
        mf.wv_[i] = wv * dx * dv;
    }
    mf.finish();
    return mf;
}

MeanField1D MeanField1D::from_ensemble(const PotentialSpec& spec, const ParticleEnsemble& ens) {
    if (ens.d != 1) throw ParameterDomainError("MeanField1D: d = 1 ensembles only");
    if (ens.N == 0) throw StateError("MeanField1D: empty ensemble");
    MeanField1D mf;
    mf.spec_ = &spec;
    const double w = ens.weight();
    mf.xs_ = ens.x;
    mf.ws_.assign(ens.N, w);
    mf.wv_.resize(ens.N);
    for (std::size_t i = 0; i < ens.N; ++i) mf.wv_[i] = w * ens.v[i];
    mf.finish();
    return mf;
}

void MeanField1D::finish() {
    off_ = spec_->interaction_off || spec_->K.is_zero();
    if (off_) return;
    if (spec_->K.kind() == PotentialKind::quadratic) {
        quadratic_ = true;
        a_ = spec_->K.a();
        const std::size_t n = xs_.size();
        std::vector<double> t0(n), t1(n), t2(n), t3(n), t4(n);
        for (std::size_t k = 0; k < n; ++k) {
            t0[k] = ws_[k];
            t1[k] = ws_[k] * xs_[k];
            t2[k] = ws_[k] * xs_[k] * xs_[k];
            t3[k] = wv_[k];
            t4[k] = wv_[k] * xs_[k];
        }
        m0_ = pairwise_sum(t0);
        m1_ = pairwise_sum(t1);
        m2_ = pairwise_sum(t2);
        mv_ = pairwise_sum(t3);
        mxv_ = pairwise_sum(t4);
    }
}

double MeanField1D::conv(double x) const {
    if (off_) return 0.0;
    if (quadratic_) return 0.5 * a_ * (m0_ * x * x - 2.0 * x * m1_ + m2_);
    double s = 0.0;
    for (std::size_t k = 0; k < xs_.size(); ++k) s += ws_[k] * spec_->K.value(x - xs_[k]);
    return s;
}

double MeanField1D::grad(double x) const {
    if (off_) return 0.0;
    if (quadratic_) return a_ * (m0_ * x - m1_);
    double s = 0.0;
    for (std::size_t k = 0; k < xs_.size(); ++k) s += ws_[k] * spec_->K.grad(x - xs_[k]);
    return s;
}

double MeanField1D::grad_vel(double x) const {
    if (off_) return 0.0;
    if (quadratic_) return a_ * (x * mv_ - mxv_);
    double s = 0.0;
    for (std::size_t k = 0; k < xs_.size(); ++k) s += wv_[k] * spec_->K.grad(x - xs_[k]);
    return s;
}

double hamiltonian_at(double x, double v, const MeanField1D& mf, const PotentialSpec& spec, const ModelParams& p,
                      double weight) {
    return 0.5 * v * v + spec.U.value(x) / p.m + weight * mf.conv(x) / p.m;
}

GridField hamiltonian_field(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p, double weight) {
    const GridSpec& g = f.grid;
    MeanField1D mf = MeanField1D::from_density(spec, f);
    GridField h(g.size());
    for (int i = 0; i < g.nx; ++i) {
        const double xpart = spec.U.value(g.x(i)) / p.m + weight * mf.conv(g.x(i)) / p.m;
        for (int j = 0; j < g.nv; ++j) h[g.idx(i, j)] = 0.5 * g.v(j) * g.v(j) + xpart;
    }
    return h;
}

GhostField hamiltonian_ghosted(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p, double weight) {
    const GridSpec& g = f.grid;
    MeanField1D mf = MeanField1D::from_density(spec, f);
    GhostField h;
    h.nx = g.nx;
    h.nv = g.nv;
    h.data.resize(static_cast<std::size_t>(g.nx + 2) * (g.nv + 2));
    for (int i = -1; i <= g.nx; ++i) {
        const double x = g.x(i);
        const double xpart = spec.U.value(x) / p.m + weight * mf.conv(x) / p.m;
        for (int j = -1; j <= g.nv; ++j) h(i, j) = 0.5 * g.v(j) * g.v(j) + xpart;
    }
    return h;
}

double h_check(const PhaseDensity& f, const PhasePoint& z, const PotentialSpec& spec, const ModelParams& p) {
    MeanField1D mf = MeanField1D::from_density(spec, f);
    return hamiltonian_at(z.x.at(0), z.v.at(0), mf, spec, p, 0.5);
}

double h_full(const PhaseDensity& f, const PhasePoint& z, const PotentialSpec& spec, const ModelParams& p) {
    MeanField1D mf = MeanField1D::from_density(spec, f);
    return hamiltonian_at(z.x.at(0), z.v.at(0), mf, spec, p, 1.0);
}

double entropy(const PhaseDensity& f) {
    std::vector<double> t(f.values.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double y = f.values[k];
        t[k] = y > 0.0 ? y * std::log(y) : 0.0;
    }
    return pairwise_sum(t) * f.grid.cell();
}

double conservative_energy(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p) {
    GridField h = hamiltonian_field(f, spec, p, 0.5);
    for (std::size_t k = 0; k < h.size(); ++k) h[k] *= f.values[k];
    return pairwise_sum(h) * f.grid.cell();
}

double free_energy(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p) {
    return entropy(f) + p.beta * p.m * conservative_energy(f, spec, p);
}

double dissipation_I(const PhaseDensity& f, const PotentialSpec& /*spec*/, const ModelParams& p) {
    const GridSpec& g = f.grid;
    LogDerivatives d = log_derivatives(f);
    const double s = p.beta * p.m;
    std::vector<double> t(g.size());
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nv; ++j) {
            std::size_t k = g.idx(i, j);
            double r = d.grad_v_log_f[k] + s * g.v(j);
            t[k] = f.values[k] * r * r;
        }
    return 0.5 * p.sigma * p.sigma * pairwise_sum(t) * g.cell();
}

EnergyReport energy_report(const PhaseDensity& f, const PotentialSpec& spec, const ModelParams& p, double t) {
    EnergyReport r;
    r.t = t;
    r.entropy = entropy(f);
    r.H = conservative_energy(f, spec, p);
    r.F = r.entropy + p.beta * p.m * r.H;
    r.I = dissipation_I(f, spec, p);
    return r;
}

GridField poisson_bracket(const GridSpec& g, const GridField& f, const GridField& h) {
    GridField fx = diff_axis(g, f, 0), fv = diff_axis(g, f, 1);
    GridField hx = diff_axis(g, h, 0), hv = diff_axis(g, h, 1);
    GridField out(g.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = fx[k] * hv[k] - fv[k] * hx[k];
    return out;
}

namespace {

double floored_log_at(const PhaseDensity& f, double x, double v, double floor_eps) {
    const double fmax = *std::max_element(f.values.begin(), f.values.end());
    return std::log(std::max(interpolate(f.grid, f.values, x, v), floor_eps * fmax));
}

}  // namespace

double energy_process_theta(const PhasePoint& z, const PhaseDensity& f, const PotentialSpec& spec,
                            const ModelParams& p, double floor_eps) {
    MeanField1D mf = MeanField1D::from_density(spec, f);
    const double x = z.x.at(0), v = z.v.at(0);
    return floored_log_at(f, x, v, floor_eps) + p.beta * p.m * hamiltonian_at(x, v, mf, spec, p, 0.5);
}

const char* variant_name(InteractionVariant v) {
    return v == InteractionVariant::paper_V ? "paper_V" : "derivation_Y2";
}

DensityFields prepare_fields(const PhaseDensity& f, const PotentialSpec& spec, const ParticleEnsemble* ens,
                             double floor_eps) {
    DensityFields d;
    d.f = f;
    d.d = log_derivatives(f, floor_eps);
    d.mf = ens ? MeanField1D::from_ensemble(spec, *ens) : MeanField1D::from_density(spec, f);
    return d;
}

namespace {

double rate_D(double x, double v, const DensityFields& fd, const ModelParams& p, InteractionVariant variant) {
    const GridSpec& g = fd.f.grid;
    const double L = interpolate(g, fd.d.laplace_v_log_f, x, v);
    const double gl = interpolate(g, fd.d.grad_v_log_f, x, v);
    const double s2 = p.sigma * p.sigma;
    double D = 2.0 * p.gamma / p.m + 0.5 * s2 * (L + gl * gl) - p.beta * p.gamma * v * v + 0.5 * s2 * L;
    if (!fd.mf.off()) {
        const double gK = fd.mf.grad(x);
        D -= 0.5 * p.beta * gK * v;
        D += 0.5 * p.beta * (variant == InteractionVariant::paper_V ? gK * v : fd.mf.grad_vel(x));
    }
    return D;
}

}  // namespace

double trajectorial_rate_D(const PhasePoint& z, const DensityFields& fields, const PotentialSpec& /*spec*/,
                           const ModelParams& p, InteractionVariant variant) {
    return rate_D(z.x.at(0), z.v.at(0), fields, p, variant);
}

double mean_rate_D(const ParticleEnsemble& ens, const DensityFields& fields, const PotentialSpec& /*spec*/,
                   const ModelParams& p, InteractionVariant variant) {
    if (ens.d != 1) throw ParameterDomainError("mean_rate_D: d = 1 ensembles only");
    if (ens.N == 0) throw StateError("mean_rate_D: empty ensemble");
    std::vector<double> vals(ens.N);
    parallel_for(ens.N, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) vals[i] = rate_D(ens.x[i], ens.v[i], fields, p, variant);
    });
    return pairwise_sum(vals) / static_cast<double>(ens.N);
}

double mean_rate_D_crossfit(const ParticleEnsemble& ens, const GridSpec& grid, const BandwidthPolicy& policy,
                            const PotentialSpec& spec, const ModelParams& p, InteractionVariant variant) {
    if (ens.d != 1) throw ParameterDomainError("mean_rate_D_crossfit: d = 1 ensembles only");
    if (ens.N < 4) throw StateError("mean_rate_D_crossfit: need at least 4 particles");
    ParticleEnsemble half[2];
    for (int h = 0; h < 2; ++h) {
        half[h].d = 1;
        for (std::size_t i = h; i < ens.N; i += 2) {
            half[h].x.push_back(ens.x[i]);
            half[h].v.push_back(ens.v[i]);
        }
        half[h].N = half[h].x.size();
        half[h].time = ens.time;
    }
    double acc = 0.0;
    for (int h = 0; h < 2; ++h) {
        const DensityFields fields = prepare_fields(kde_estimate(half[h], grid, policy), spec, &half[h]);
        acc += mean_rate_D(half[1 - h], fields, spec, p, variant) * static_cast<double>(half[1 - h].N);
    }
    return acc / static_cast<double>(ens.N);
}

PullbackFrame build_pullback_frame(const GridSpec& g, double t, const FlowContext& ctx) {
    g.validate();
    if (t < 0.0) throw ParameterDomainError("pullback frame: t must be nonnegative");
    // Validates the context (coverage, spec) once on a representative node.
    PhasePoint z0{{g.x(0)}, {g.v(0)}};
    integrate_flow(z0, t, ctx, false);
    PullbackFrame fr;
    fr.grid = g;
    fr.t = t;
    fr.x.resize(g.size());
    fr.v.resize(g.size());
    fr.jac.resize(4 * g.size());
    parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b; k < e; ++k) {
            const int i = static_cast<int>(k / g.nv), j = static_cast<int>(k % g.nv);
            double x = g.x(i), v = g.v(j);
            double J[4] = {1.0, 0.0, 0.0, 1.0};
            flow_1d(x, v, 0.0, t, ctx, J);
            fr.x[k] = x;
            fr.v[k] = v;
            std::copy(J, J + 4, fr.jac.begin() + 4 * k);
        }
    });
    return fr;
}

double pulled_back_free_energy(const PhaseDensity& u, const PullbackFrame& frame, const MeanField1D& mf_t,
                               const PotentialSpec& spec, const ModelParams& p) {
    if (!u.grid.same_as(frame.grid)) throw ParameterDomainError("pulled_back_free_energy: grid mismatch");
    const double s = p.beta * p.m;
    std::vector<double> t(u.values.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double y = u.values[k];
        if (y <= 0.0) {
            t[k] = 0.0;
            continue;
        }
        t[k] = y * std::log(y) + s * y * hamiltonian_at(frame.x[k], frame.v[k], mf_t, spec, p, 0.5);
    }
    return pairwise_sum(t) * u.grid.cell();
}

double pulled_back_dissipation(const PhaseDensity& u, const PullbackFrame& frame, const PotentialSpec& /*spec*/,
                               const ModelParams& p) {
    if (!u.grid.same_as(frame.grid)) throw ParameterDomainError("pulled_back_dissipation: grid mismatch");
    LogDerivatives d = log_derivatives(u);
    const double s = p.beta * p.m;
    std::vector<double> t(u.values.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double* J = &frame.jac[4 * k];
        const double det = J[0] * J[3] - J[1] * J[2];
        // v-column of DPhi_{-t}(Phi_t(z~)) = DPhi_t(z~)^{-1}.
        const double cx = -J[1] / det, cv = J[0] / det;
        const double r = d.grad_x_log_f[k] * cx + d.grad_v_log_f[k] * cv + s * frame.v[k];
        t[k] = u.values[k] * r * r;
    }
    return 0.5 * p.sigma * p.sigma * pairwise_sum(t) * u.grid.cell();
}

double theta_tilde(const PhasePoint& zt, const PhaseDensity& u, const FlowContext& ctx, double t,
                   const MeanField1D& mf_t, const PotentialSpec& spec, const ModelParams& p, double floor_eps) {
    FlowRecord r = integrate_flow(zt, t, ctx, false);
    return floored_log_at(u, zt.x.at(0), zt.v.at(0), floor_eps) +
           p.beta * p.m * hamiltonian_at(r.phi.x[0], r.phi.v[0], mf_t, spec, p, 0.5);
}

PullbackFields prepare_pullback_fields(const PhaseDensity& u, const PullbackFrame& frame, const MeanField1D& mf_t,
                                       const PotentialSpec& spec, const ModelParams& p, double floor_eps) {
    const GridSpec& g = u.grid;
    if (!g.same_as(frame.grid)) throw ParameterDomainError("prepare_pullback_fields: grid mismatch");
    const double s = p.beta * p.m;
    const double s2 = p.sigma * p.sigma;
    const double fmax = *std::max_element(u.values.begin(), u.values.end());
    GridField lnu(g.size()), hp(g.size()), th(g.size());
    GridField axx(g.size()), axv(g.size()), avv(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        lnu[k] = std::log(std::max(u.values[k], floor_eps * fmax));
        hp[k] = hamiltonian_at(frame.x[k], frame.v[k], mf_t, spec, p, 0.5);
        th[k] = lnu[k] + s * hp[k];
        const double* J = &frame.jac[4 * k];
        const double det = J[0] * J[3] - J[1] * J[2];
        const double cx = -J[1] / det, cv = J[0] / det;
        axx[k] = s2 * cx * cx;
        axv[k] = s2 * cx * cv;
        avv[k] = s2 * cv * cv;
    }
    PullbackFields pf;
    pf.grid = g;
    pf.t = frame.t;
    pf.lu_x = diff_axis(g, lnu, 0);
    pf.lu_v = diff_axis(g, lnu, 1);
    pf.hp_x = diff_axis(g, hp, 0);
    pf.hp_v = diff_axis(g, hp, 1);
    pf.th_x = diff_axis(g, th, 0);
    pf.th_v = diff_axis(g, th, 1);
    pf.th_xx = diff2_axis(g, th, 0);
    pf.th_vv = diff2_axis(g, th, 1);
    pf.th_xv = diff_axis(g, pf.th_x, 1);
    pf.a_xx = axx;
    pf.a_xv = axv;
    pf.a_vv = avv;
    GridField dxx = diff_axis(g, axx, 0), dxv_x = diff_axis(g, axv, 0), dxv_v = diff_axis(g, axv, 1),
              dvv = diff_axis(g, avv, 1);
    pf.diva_x.resize(g.size());
    pf.diva_v.resize(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
        pf.diva_x[k] = dxx[k] + dxv_v[k];
        pf.diva_v[k] = dxv_x[k] + dvv[k];
    }
    return pf;
}

double trajectorial_rate_D_tilde(const PhasePoint& zt, const PullbackFields& pf, const FlowContext& ctx,
                                 const MeanField1D& mf_t, const PotentialSpec& spec, const ModelParams& p,
                                 InteractionVariant variant, double gamma_fd_eps) {
    const GridSpec& g = pf.grid;
    const double x = zt.x.at(0), v = zt.v.at(0);
    auto at = [&](const GridField& a) { return interpolate(g, a, x, v); };
    const double s = p.beta * p.m;
    const double axx = at(pf.a_xx), axv = at(pf.a_xv), avv = at(pf.a_vv);
    const double thx = at(pf.th_x), thv = at(pf.th_v);
    const double lux = at(pf.lu_x), luv = at(pf.lu_v);
    const double hpx = at(pf.hp_x), hpv = at(pf.hp_v);

    PhasePoint Z = integrate_flow(zt, pf.t, ctx, false).phi;
    std::vector<double> Gam = pf.t == 0.0 ? std::vector<double>{0.0, 0.0} : gamma_term(Z, pf.t, ctx, gamma_fd_eps);

    const double bx = at(pf.diva_x) + axx * lux + axv * luv - s * (axx * hpx + axv * hpv) + Gam[0];
    const double bv = at(pf.diva_v) + axv * lux + avv * luv - s * (axv * hpx + avv * hpv) + Gam[1];
    double D = 0.5 * (thx * bx + thv * bv);
    D += axx * at(pf.th_xx) + 2.0 * axv * at(pf.th_xv) + avv * at(pf.th_vv);

    const double X = Z.x[0], V = Z.v[0];
    const double gK = mf_t.grad(X);
    const double dU = spec.U.grad(X) / p.m;
    // beta m grad h_check(Z) . b_H(Z)
    D += s * ((dU + 0.5 * gK / p.m) * V + V * (-dU - gK / p.m));
    if (!mf_t.off()) D += 0.5 * p.beta * (variant == InteractionVariant::paper_V ? gK * V : mf_t.grad_vel(X));
    return D;
}

}  // namespace vfp
