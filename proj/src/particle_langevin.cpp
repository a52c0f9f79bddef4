#include "vfp/particle_langevin.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace vfp {

void SimConfig::validate() const {
    if (N < 2) throw ConfigError("simulation: N must be >= 2");
    if (!(dt > 0.0)) throw ConfigError("simulation: dt must be positive");
    if (!(t_end > 0.0)) throw ConfigError("simulation: t_end must be positive");
    if (record_every < 1) throw ConfigError("simulation: record_every must be >= 1");
    if (!init.xs.empty() && init.xs.size() != init.vs.size()) throw ConfigError("simulation: sample sizes differ");
}

std::size_t SimConfig::step_count() const { return static_cast<std::size_t>(std::floor(t_end / dt + 1e-9)); }

std::size_t SimConfig::snapshot_count() const {
    return static_cast<std::size_t>(std::floor(t_end / (dt * record_every) + 1e-9)) + 1;
}

ParticleEnsemble TrajectoryStore::snapshot(std::size_t k) const {
    if (k >= xs.size()) throw StateError("trajectory store: particles were not kept for this snapshot");
    ParticleEnsemble e(N, d, 0);
    e.x = xs[k];
    e.v = vs[k];
    e.time = times[k];
    return e;
}

Moments empirical_moments(const ParticleEnsemble& ens) {
    const std::size_t N = ens.N;
    const int d = ens.d;
    std::vector<double> a(N), b(N), c(N), e(N);
    for (std::size_t i = 0; i < N; ++i) {
        double rx = 0.0, rv = 0.0;
        for (int k = 0; k < d; ++k) {
            rx += ens.x[i * d + k] * ens.x[i * d + k];
            rv += ens.v[i * d + k] * ens.v[i * d + k];
        }
        a[i] = rx;
        b[i] = rv;
        c[i] = rx * rx;
        e[i] = rv * rv;
    }
    double n = static_cast<double>(N);
    return {pairwise_sum(a) / n, pairwise_sum(b) / n, pairwise_sum(c) / n, pairwise_sum(e) / n};
}

ParticleEnsemble initial_ensemble(const SimConfig& cfg, int d) {
    ParticleEnsemble e(cfg.N, d, cfg.seed);
    if (!cfg.init.xs.empty()) {
        if (cfg.init.xs.size() != cfg.N * d) throw ConfigError("simulation: user samples do not match N*d");
        e.x = cfg.init.xs;
        e.v = cfg.init.vs;
        return e;
    }
    // Counter 2^40 is reserved for initial draws; step counters stay below it.
    const std::uint64_t init_counter = std::uint64_t{1} << 40;
    parallel_for(cfg.N, [&](std::size_t b, std::size_t en) {
        std::vector<double> z(2 * d);
        for (std::size_t i = b; i < en; ++i) {
            CounterRng rng(cfg.seed, e.stream_ids[i]);
            rng.normals(init_counter, z.data(), 2 * d);
            for (int k = 0; k < d; ++k) {
                e.x[i * d + k] = cfg.init.mean_x + cfg.init.sx * z[k];
                e.v[i * d + k] = cfg.init.mean_v + cfg.init.sv * z[d + k];
            }
        }
    });
    return e;
}

namespace {

void force_field(const ParticleEnsemble& ens, const PotentialSpec& spec, std::vector<double>& F) {
    const int d = ens.d;
    mean_field_at_particles(spec, ens, F);
    std::vector<double> g(d);
    for (std::size_t i = 0; i < ens.N; ++i) {
        spec.U.grad(&ens.x[i * d], d, g.data());
        for (int k = 0; k < d; ++k) F[i * d + k] += g[k];
    }
}

void check_finite(const ParticleEnsemble& ens) {
    const int d = ens.d;
    for (std::size_t i = 0; i < ens.N; ++i)
        for (int k = 0; k < d; ++k)
            if (!std::isfinite(ens.x[i * d + k]) || !std::isfinite(ens.v[i * d + k])) {
                std::ostringstream os;
                os << "blow-up: particle " << i << " non-finite at t=" << ens.time;
                throw BlowUpError(os.str(), i, ens.time);
            }
}

// F holds grad U + mean field at the current positions on entry and at the new positions on exit.
void step_cached(ParticleEnsemble& ens, const PotentialSpec& spec, const ModelParams& p, double dt, double noise_scale,
                 std::vector<double>& F) {
    const int d = ens.d;
    const std::size_t N = ens.N;
    const double inv_m = 1.0 / p.m;
    const double decay = std::exp(-p.gamma * dt / p.m);
    // OU variance sigma^2 m (1 - e^{-2 gamma dt/m}) / (2 gamma); the gamma = 0 limit has no noise.
    const double amp = p.gamma > 0.0 ? noise_scale * p.sigma * std::sqrt((1.0 - decay * decay) * p.m / (2.0 * p.gamma))
                                     : 0.0;
    const std::uint64_t counter = ens.step_index;
    parallel_for(N, [&](std::size_t b, std::size_t e) {
        std::vector<double> xi(d);
        for (std::size_t i = b; i < e; ++i) {
            CounterRng rng(ens.seed, ens.stream_ids[i]);
            rng.normals(counter, xi.data(), d);
            for (int k = 0; k < d; ++k) {
                std::size_t q = i * d + k;
                double v = ens.v[q] - 0.5 * dt * inv_m * F[q];
                ens.x[q] += dt * v;
                ens.v[q] = decay * v + amp * xi[k];
            }
        }
    });
    force_field(ens, spec, F);
    for (std::size_t q = 0; q < N * d; ++q) ens.v[q] -= 0.5 * dt * inv_m * F[q];
    ens.step_index += 1;
    ens.time = static_cast<double>(ens.step_index) * dt;
    check_finite(ens);
}

}  // namespace

void step(ParticleEnsemble& ens, const PotentialSpec& spec, const ModelParams& params, double dt, double noise_scale) {
    if (ens.N == 0) throw StateError("step: empty ensemble");
    if (!(dt > 0.0)) throw ParameterDomainError("step: dt must be positive");
    std::vector<double> F;
    force_field(ens, spec, F);
    step_cached(ens, spec, params, dt, noise_scale, F);
}

std::vector<double> tabulate_mean_field(const PotentialSpec& spec, const ParticleEnsemble& ens,
                                        const std::vector<double>& x_grid) {
    if (ens.d != 1) throw ParameterDomainError("force-field history requires d = 1");
    return mean_field_on_points(spec, ens.x.data(), ens.N, x_grid);
}

SimResult simulate(const SimConfig& cfg, const PotentialSpec& spec, const ModelParams& params) {
    cfg.validate();
    const int d = params.dim;
    SimResult res;
    ParticleEnsemble ens = initial_ensemble(cfg, d);
    const bool tabulate = !spec.interaction_off && d == 1;
    std::vector<double> hgrid;
    if (tabulate) {
        if (cfg.history_nx < 4 || !(cfg.history_x_max > cfg.history_x_min))
            throw ConfigError("simulation: invalid history grid");
        double hdx = (cfg.history_x_max - cfg.history_x_min) / (cfg.history_nx - 1);
        res.history = ForceFieldHistory(cfg.history_x_min, hdx, cfg.history_nx);
        hgrid = res.history.x_grid();
    }
    TrajectoryStore& st = res.store;
    st.d = d;
    st.N = cfg.N;
    auto record = [&]() {
        st.times.push_back(ens.time);
        st.moments.push_back(empirical_moments(ens));
        if (cfg.keep_particles) {
            st.xs.push_back(ens.x);
            st.vs.push_back(ens.v);
        }
        if (tabulate) res.history.append(ens.time, tabulate_mean_field(spec, ens, hgrid));
    };
    record();
    std::vector<double> F;
    force_field(ens, spec, F);
    const std::size_t steps = cfg.step_count();
    for (std::size_t k = 1; k <= steps; ++k) {
        step_cached(ens, spec, params, cfg.dt, cfg.noise_scale, F);
        if (k % cfg.record_every == 0) record();
    }
    return res;
}

TrajectoryStore pulled_back_trajectories(const TrajectoryStore& store, const PotentialSpec& spec,
                                         const ModelParams& params, const ForceFieldHistory& history, double flow_dt) {
    TrajectoryStore out = store;
    FlowContext ctx{&spec, &params, &history, flow_dt};
    for (std::size_t k = 0; k < store.xs.size(); ++k) {
        const double t = store.times[k];
        if (t == 0.0) continue;
        if (!spec.interaction_off && (!history.covers(t) || !history.covers(0.0))) {
            std::ostringstream os;
            os << "pullback: history does not cover snapshot time " << t;
            throw CoverageError(os.str());
        }
        auto& X = out.xs[k];
        auto& V = out.vs[k];
        if (store.d == 1) {
            parallel_for(store.N, [&](std::size_t b, std::size_t e) {
                for (std::size_t i = b; i < e; ++i) flow_1d(X[i], V[i], t, 0.0, ctx);
            });
        } else {
            const int d = store.d;
            for (std::size_t i = 0; i < store.N; ++i) {
                PhasePoint z;
                z.x.assign(X.begin() + i * d, X.begin() + (i + 1) * d);
                z.v.assign(V.begin() + i * d, V.begin() + (i + 1) * d);
                auto r = integrate_segment(z, t, 0.0, ctx, false);
                std::copy(r.phi.x.begin(), r.phi.x.end(), X.begin() + i * d);
                std::copy(r.phi.v.begin(), r.phi.v.end(), V.begin() + i * d);
            }
        }
        ParticleEnsemble tmp(store.N, store.d, 0);
        tmp.x = X;
        tmp.v = V;
        out.moments[k] = empirical_moments(tmp);
    }
    return out;
}

void write_trajectories_csv(std::ostream& os, const TrajectoryStore& store) {
    const int d = store.d;
    os << "t,particle_id";
    for (int k = 0; k < d; ++k) os << (d == 1 ? ",x" : ",x" + std::to_string(k + 1));
    for (int k = 0; k < d; ++k) os << (d == 1 ? ",v" : ",v" + std::to_string(k + 1));
    os << '\n';
    os.precision(12);
    for (std::size_t s = 0; s < store.xs.size(); ++s)
        for (std::size_t i = 0; i < store.N; ++i) {
            os << store.times[s] << ',' << i;
            for (int k = 0; k < d; ++k) os << ',' << store.xs[s][i * d + k];
            for (int k = 0; k < d; ++k) os << ',' << store.vs[s][i * d + k];
            os << '\n';
        }
}

}  // namespace vfp
