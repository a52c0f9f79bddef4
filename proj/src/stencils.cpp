#include "vfp/stencils.hpp"

#include <algorithm>
#include <cmath>

namespace vfp {

GhostField extrapolate_ghosts(const GridSpec& g, const GridField& a) {
    GhostField b;
    b.nx = g.nx;
    b.nv = g.nv;
    b.data.assign(static_cast<std::size_t>(g.nx + 2) * (g.nv + 2), 0.0);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.nv; ++j) b(i, j) = a[g.idx(i, j)];
    for (int i = 0; i < g.nx; ++i) {
        b(i, -1) = 2.0 * b(i, 0) - b(i, 1);
        b(i, g.nv) = 2.0 * b(i, g.nv - 1) - b(i, g.nv - 2);
    }
    // Rows in x include the v-ghosts just filled, so corners are consistent.
    for (int j = -1; j <= g.nv; ++j) {
        b(-1, j) = 2.0 * b(0, j) - b(1, j);
        b(g.nx, j) = 2.0 * b(g.nx - 1, j) - b(g.nx - 2, j);
    }
    return b;
}

double log_mean(double a, double b) {
    if (a <= 0.0 || b <= 0.0) return 0.0;
    double r = b / a - 1.0;
    if (std::abs(r) < 1e-4) return a * (1.0 + r * (0.5 + r * (-1.0 / 12.0 + r / 24.0)));
    return (b - a) / std::log1p(r);
}

double bernoulli(double a) {
    if (std::abs(a) < 1e-6) return 1.0 - 0.5 * a;
    return a / std::expm1(a);
}

GridField arakawa_bracket(const GridSpec& g, const GridField& a, const GhostField& b) {
    const int nx = g.nx, nv = g.nv;
    GridField out(g.size(), 0.0);
    const double scale = 1.0 / (12.0 * g.dx() * g.dv());
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < nv; ++j) {
            const double aij = a[g.idx(i, j)];
            const double bn = b(i, j + 1), bs = b(i, j - 1), be = b(i + 1, j), bw = b(i - 1, j);
            const double bne = b(i + 1, j + 1), bnw = b(i - 1, j + 1), bse = b(i + 1, j - 1), bsw = b(i - 1, j - 1);
            double acc = 0.0;
            auto link = [&](int di, int dj, double c) {
                int k = i + di, l = j + dj;
                if (k < 0 || k >= nx || l < 0 || l >= nv) return;
                acc += c * (a[g.idx(k, l)] + aij);
            };
            link(1, 0, (bn - bs) + (bne - bse));
            link(-1, 0, -(bn - bs) - (bnw - bsw));
            link(0, 1, -(be - bw) - (bne - bnw));
            link(0, -1, (be - bw) + (bse - bsw));
            link(1, 1, bn - be);
            link(-1, 1, bw - bn);
            link(1, -1, be - bs);
            link(-1, -1, bs - bw);
            out[g.idx(i, j)] = acc * scale;
        }
    }
    return out;
}

namespace {

// (e^{-s d1} - e^{-s d2}) / s, accurate for small s d.
inline double exp_diff(double s, double d1, double d2) { return (std::expm1(-s * d1) - std::expm1(-s * d2)) / s; }

inline double corner(const GhostField& b, int i, int j) {
    // Corner (i+1/2, j+1/2).
    return 0.25 * (b(i, j) + b(i + 1, j) + b(i, j + 1) + b(i + 1, j + 1));
}

}  // namespace

GridField entropic_bracket(const GridSpec& g, const GridField& a, const GhostField& b, double s) {
    if (!(s > 0.0)) throw ParameterDomainError("entropic_bracket: s must be positive");
    const int nx = g.nx, nv = g.nv;
    const double dx = g.dx(), dv = g.dv();
    GridField out(g.size(), 0.0);
    // x-faces (i+1/2, j): flux ~ a b_v, stream difference along v over the face.
    for (int i = 0; i + 1 < nx; ++i) {
        for (int j = 0; j < nv; ++j) {
            const double r = b(i, j);
            const double w = -exp_diff(s, corner(b, i, j) - r, corner(b, i, j - 1) - r) / dv;
            const double ghat = log_mean(a[g.idx(i, j)], a[g.idx(i + 1, j)] * std::exp(s * (b(i + 1, j) - r)));
            const double F = w * ghat / dx;
            out[g.idx(i, j)] += F;
            out[g.idx(i + 1, j)] -= F;
        }
    }
    // v-faces (i, j+1/2): flux ~ -a b_x.
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j + 1 < nv; ++j) {
            const double r = b(i, j);
            const double w = exp_diff(s, corner(b, i, j) - r, corner(b, i - 1, j) - r) / dx;
            const double ghat = log_mean(a[g.idx(i, j)], a[g.idx(i, j + 1)] * std::exp(s * (b(i, j + 1) - r)));
            const double F = w * ghat / dv;
            out[g.idx(i, j)] += F;
            out[g.idx(i, j + 1)] -= F;
        }
    }
    return out;
}

bool OnsagerMatrix::psd(double tol) const {
    return jxx >= -tol && jvv >= -tol && jxx * jvv - jxv * jxv >= -tol;
}

GridField onsager_divergence(const GridSpec& g, const GridField& u, const GridField& psi, const OnsagerMatrix& J,
                             const GridField* W) {
    if (!J.psd()) throw ConfigError("onsager: J matrix is not positive semidefinite");
    const int nx = g.nx, nv = g.nv;
    const double dx = g.dx(), dv = g.dv();
    GridField out(g.size(), 0.0);
    auto mobility = [&](std::size_t p, std::size_t q) {
        if (!W) return log_mean(u[p], u[q]);
        const double da = (*W)[q] - (*W)[p];
        return log_mean(bernoulli(da) * u[p], bernoulli(-da) * u[q]);
    };
    if (J.diagonal()) {
        if (J.jxx != 0.0) {
            for (int i = 0; i + 1 < nx; ++i)
                for (int j = 0; j < nv; ++j) {
                    std::size_t p = g.idx(i, j), q = g.idx(i + 1, j);
                    double mob = mobility(p, q);
                    if (mob == 0.0) continue;
                    double F = J.jxx * mob * (psi[q] - psi[p]) / (dx * dx);
                    out[p] += F;
                    out[q] -= F;
                }
        }
        if (J.jvv != 0.0) {
            for (int i = 0; i < nx; ++i)
                for (int j = 0; j + 1 < nv; ++j) {
                    std::size_t p = g.idx(i, j), q = g.idx(i, j + 1);
                    double mob = mobility(p, q);
                    if (mob == 0.0) continue;
                    double F = J.jvv * mob * (psi[q] - psi[p]) / (dv * dv);
                    out[p] += F;
                    out[q] -= F;
                }
        }
        // out = div(J u grad psi); the operator is its negative.
        for (double& x : out) x = -x;
        return out;
    }
    // Corner stencil: sum_ij phi_ij out_ij = sum_c u_c (grad_c phi)^T J (grad_c psi).
    for (int i = 0; i + 1 < nx; ++i)
        for (int j = 0; j + 1 < nv; ++j) {
            std::size_t p00 = g.idx(i, j), p10 = g.idx(i + 1, j), p01 = g.idx(i, j + 1), p11 = g.idx(i + 1, j + 1);
            double uc = 0.25 * (u[p00] + u[p10] + u[p01] + u[p11]);
            double gx = (psi[p10] + psi[p11] - psi[p00] - psi[p01]) / (2.0 * dx);
            double gv = (psi[p01] + psi[p11] - psi[p00] - psi[p10]) / (2.0 * dv);
            double qx = uc * (J.jxx * gx + J.jxv * gv);
            double qv = uc * (J.jxv * gx + J.jvv * gv);
            double cx = qx / (2.0 * dx), cv = qv / (2.0 * dv);
            out[p00] += -cx - cv;
            out[p10] += cx - cv;
            out[p01] += -cx + cv;
            out[p11] += cx + cv;
        }
    return out;
}

}  // namespace vfp
