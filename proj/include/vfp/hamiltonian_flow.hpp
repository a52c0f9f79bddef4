#pragma once

#include <memory>
#include <vector>

#include "vfp/model_core.hpp"

namespace vfp {

// x -> gradK*f_t(x) tabulated on one equispaced x-grid at increasing times.
// Evaluation is cubic-spline in x (linear continuation outside the grid) and linear in t.
class ForceFieldHistory {
public:
    ForceFieldHistory() = default;
    ForceFieldHistory(double x0, double dx, std::size_t nx);

    void append(double t, std::vector<double> values);
    bool empty() const { return times_.empty(); }
    const std::vector<double>& times() const { return times_; }
    const std::vector<std::vector<double>>& tables() const { return tables_; }
    std::vector<double> x_grid() const;
    bool covers(double t) const;

    // Returns the field and writes its x-derivative to *dfdx when non-null.
    double eval(double t, double x, double* dfdx = nullptr) const;

private:
    struct Slice;
    double x0_ = 0.0, dx_ = 1.0;
    std::size_t nx_ = 0;
    std::vector<double> times_;
    std::vector<std::vector<double>> tables_;
    std::vector<std::shared_ptr<const Slice>> slices_;
    double slice_eval(std::size_t k, double x, double& dfdx) const;
};

// Integrator for the reversible field b_H with a recorded mean-field history.
struct FlowContext {
    const PotentialSpec* spec = nullptr;
    const ModelParams* params = nullptr;
    const ForceFieldHistory* history = nullptr;  // may be null when interaction is off
    double dt = 1e-3;
};

struct FlowRecord {
    double base_time = 0.0;
    double target_time = 0.0;
    PhasePoint z0;
    PhasePoint phi;
    std::vector<double> jacobian;  // row-major 2d x 2d, ordering (x..., v...)
    int d = 1;
    double det() const;
};

// Phi_t(z0) for t >= 0 (integration 0 -> t). For t < 0 the inverse map of Phi_{|t|}
// (integration |t| -> 0), which is the pullback map of a time-|t| state.
FlowRecord integrate_flow(const PhasePoint& z0, double t, const FlowContext& ctx, bool with_jacobian = false);

// General segment t_from -> t_to of the non-autonomous flow.
FlowRecord integrate_segment(const PhasePoint& z0, double t_from, double t_to, const FlowContext& ctx,
                             bool with_jacobian);

std::vector<double> jacobian_along(const PhasePoint& z0, double t, const FlowContext& ctx);

// Gamma^alpha = sigma^2 sum_i d^2 Phi^alpha_{-t} / dv_i^2 at z, by central differences of the Jacobian.
std::vector<double> gamma_term(const PhasePoint& z, double t, const FlowContext& ctx, double fd_eps = 1e-4);

PhasePoint pullback_point(const PhasePoint& Zt, double t, const FlowContext& ctx);

// Fast d = 1 kernels used by the ensemble-level routines.
void flow_1d(double& x, double& v, double t_from, double t_to, const FlowContext& ctx, double* J = nullptr);

}  // namespace vfp
