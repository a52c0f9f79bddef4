#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vfp {

struct ParameterDomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct StateError : std::logic_error {
    using std::logic_error::logic_error;
};
struct CoverageError : std::out_of_range {
    using std::out_of_range::out_of_range;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failures (blow-up, non-convergence, truncation) share a base so
// the CLI can map them to one exit code.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BlowUpError : NumericalError {
    BlowUpError(const std::string& what, std::size_t particle, double t)
        : NumericalError(what), particle(particle), time(t) {}
    std::size_t particle;
    double time;
};
struct NonConvergenceError : NumericalError {
    NonConvergenceError(const std::string& what, double residual)
        : NumericalError(what), residual(residual) {}
    double residual;
};
struct TruncationError : NumericalError {
    TruncationError(const std::string& what, double fraction)
        : NumericalError(what), fraction(fraction) {}
    double fraction;
};
struct CflError : ConfigError {
    using ConfigError::ConfigError;
};

// Recursive halving; the association order depends only on n.
double pairwise_sum(const double* a, std::size_t n);
inline double pairwise_sum(const std::vector<double>& a) { return pairwise_sum(a.data(), a.size()); }

void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(begin, end) over static contiguous chunks. Results must not
// depend on the chunking; callers write to disjoint slots only.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

// Philox4x32-10 counter-based generator keyed on (seed, stream).
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}
    // Four uniforms in (0,1) for the given counter.
    void uniforms(std::uint64_t counter, double out[4]) const;
    // Standard normals by Box-Muller; up to 2 per counter, more take consecutive sub-counters.
    void normals(std::uint64_t counter, double* out, std::size_t n) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
};

}  // namespace vfp
