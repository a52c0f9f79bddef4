#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "vfp/common.hpp"

using namespace vfp;

namespace {
std::uint32_t word(double u) { return static_cast<std::uint32_t>(std::floor(u * 0x1p32)); }
}  // namespace

TEST_CASE("pairwise_sum is exact on integers and order independent of threads") {
    std::vector<double> a(100000);
    std::iota(a.begin(), a.end(), 1.0);
    CHECK(pairwise_sum(a) == 100000.0 * 100001.0 / 2.0);
    CHECK(pairwise_sum(a.data(), 0) == 0.0);
    std::vector<double> tiny(1 << 20, 0.1);
    // Naive summation drifts by ~1e-6 here; halving keeps the error near n*eps*log n.
    CHECK(std::abs(pairwise_sum(tiny) - 0.1 * (1 << 20)) < 1e-8);
}

TEST_CASE("Philox4x32-10 known answers") {
    // Reference vectors of the Random123 distribution. Counter words are
    // (counter lo, counter hi, stream lo, stream hi); key words are (seed lo, seed hi).
    double u[4];
    CounterRng(0, 0).uniforms(0, u);
    CHECK(word(u[0]) == 0x6627e8d5u);
    CHECK(word(u[1]) == 0xe169c58du);
    CHECK(word(u[2]) == 0xbc57ac4cu);
    CHECK(word(u[3]) == 0x9b00dbd8u);

    CounterRng(~0ull, ~0ull).uniforms(~0ull, u);
    CHECK(word(u[0]) == 0x408f276du);
    CHECK(word(u[1]) == 0x41c83b0eu);
    CHECK(word(u[2]) == 0xa20bc7c6u);
    CHECK(word(u[3]) == 0x6d5451fdu);

    CounterRng(0x299f31d0a4093822ull, 0x0370734413198a2eull).uniforms(0x85a308d3243f6a88ull, u);
    CHECK(word(u[0]) == 0xd16cfe09u);
    CHECK(word(u[1]) == 0x94fdccebu);
    CHECK(word(u[2]) == 0x5001e420u);
    CHECK(word(u[3]) == 0x24126ea1u);
}

TEST_CASE("normals have unit variance and distinct streams differ") {
    CounterRng r(42, 3);
    const std::size_t n = 200000;
    std::vector<double> z(n);
    for (std::size_t k = 0; k < n / 2; ++k) r.normals(k, &z[2 * k], 2);
    double mean = pairwise_sum(z) / n;
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (z[i] - mean) * (z[i] - mean);
    double var = pairwise_sum(sq) / (n - 1);
    CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / n));

    double a[4], b[4];
    CounterRng(42, 3).uniforms(7, a);
    CounterRng(42, 4).uniforms(7, b);
    CHECK(a[0] != b[0]);
    CounterRng(42, 3).uniforms(7, b);
    CHECK(a[0] == b[0]);
}

TEST_CASE("parallel_for results do not depend on the thread count") {
    auto run = [](unsigned t) {
        set_thread_count(t);
        std::vector<double> out(10000);
        parallel_for(out.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                double u[4];
                CounterRng(5, i).uniforms(0, u);
                out[i] = u[0];
            }
        });
        set_thread_count(1);
        return out;
    };
    CHECK(run(1) == run(4));
    CHECK(thread_count() == 1);
}
