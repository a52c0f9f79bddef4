#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vfp/common.hpp"

namespace boost::math::interpolators {
template <class Real>
class cardinal_cubic_b_spline;
}

namespace vfp {

struct ModelParams {
    double m = 1.0;
    double gamma = 1.0;
    double kB_TB = 1.0;
    double beta = 1.0;
    double sigma = 1.4142135623730951;
    int dim = 1;
};

// beta = 1/kB_TB, sigma = sqrt(2 gamma / (beta m^2)).
ModelParams derived_constants(double m, double gamma, double kB_TB, int dim = 1);

enum class PotentialKind { zero, quadratic, quartic_double_well, gaussian_kernel, tabulated, custom };

// Radial-or-separable potential on R^d. Parameter meaning per kind:
//   quadratic            a|x|^2/2
//   quartic_double_well  a|x|^4/4 - b|x|^2/2 + b^2/(4a)   (min value 0)
//   gaussian_kernel      a exp(-|x|^2/(2 b^2))
//   tabulated, custom    d = 1 only
class Potential {
public:
    Potential() = default;
    static Potential zero();
    static Potential quadratic(double a = 1.0);
    static Potential quartic_double_well(double a = 1.0, double b = 1.0);
    static Potential gaussian_kernel(double a = 1.0, double width = 1.0);
    // Cubic spline through values at x0 + i*h; linear continuation outside.
    static Potential tabulated(std::vector<double> values, double x0, double h);
    static Potential custom(std::function<double(double)> value, std::function<double(double)> grad,
                            std::function<double(double)> hess, std::string name = "custom");

    PotentialKind kind() const { return kind_; }
    double a() const { return a_; }
    double b() const { return b_; }
    std::string name() const;
    bool is_zero() const { return kind_ == PotentialKind::zero || (kind_ == PotentialKind::quadratic && a_ == 0.0); }

    double value(double x) const;
    double grad(double x) const;
    double hess(double x) const;

    double value(const double* x, int d) const;
    void grad(const double* x, int d, double* g) const;
    // Row-major d x d.
    void hess(const double* x, int d, double* H) const;

private:
    PotentialKind kind_ = PotentialKind::zero;
    double a_ = 0.0, b_ = 0.0;
    std::shared_ptr<const boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
    double x_lo_ = 0.0, x_hi_ = 0.0;
    std::function<double(double)> fv_, fg_, fh_;
    std::string name_;
};

struct PotentialSpec {
    Potential U;
    Potential K;
    double kappa_U = 0.0;
    double lipschitz_gradU = 0.0;
    double lipschitz_gradK = 0.0;
    bool interaction_off = true;

    // Sets interaction_off from K and fills Lipschitz bounds from closed forms
    // where available (0 is left for kinds without a global bound).
    static PotentialSpec make(Potential U, Potential K, double kappa_U);
};

struct PhasePoint {
    std::vector<double> x;
    std::vector<double> v;
};

struct ParticleEnsemble {
    std::size_t N = 0;
    int d = 1;
    std::vector<double> x;  // N*d
    std::vector<double> v;  // N*d
    double time = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t step_index = 0;
    std::vector<std::uint64_t> stream_ids;

    ParticleEnsemble() = default;
    ParticleEnsemble(std::size_t n, int dim, std::uint64_t seed);
    double weight() const { return N ? 1.0 / static_cast<double>(N) : 0.0; }
    bool finite() const;
    PhasePoint point(std::size_t i) const;
};

struct ValidationReport {
    double symmetry_violation = 0.0;      // max |K(x) - K(-x)|
    double oddness_violation = 0.0;       // max |gradK(x) + gradK(-x)|
    double lower_bound_violation = 0.0;   // max (kappa_U |x|^2 - U(x))_+
    double lipschitz_gradU = 0.0;
    double lipschitz_gradK = 0.0;
    double sup_hessU = 0.0;                // reported only
    double sup_third_U = 0.0;              // reported only
    bool symmetric = true;
    bool odd = true;
    bool lower_bound = true;
    bool passed() const { return symmetric && odd && lower_bound; }
};

ValidationReport validate_assumptions(const PotentialSpec& spec, const std::vector<std::vector<double>>& probe_grid);
ValidationReport validate_assumptions(const PotentialSpec& spec, const std::vector<double>& probe_grid_1d);

// (1/N) sum_j gradK(q - x_j).
std::vector<double> mean_field_force(const PotentialSpec& spec, const ParticleEnsemble& ens, const std::vector<double>& query_x);

// Same quantity for every particle position, written to out (N*d).
void mean_field_at_particles(const PotentialSpec& spec, const ParticleEnsemble& ens, std::vector<double>& out);

// d = 1: gradK*rho evaluated at the given points.
std::vector<double> mean_field_on_points(const PotentialSpec& spec, const double* xs, std::size_t n,
                                         const std::vector<double>& points);

}  // namespace vfp
