#include "vfp/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace vfp {

namespace {
std::atomic<unsigned> g_threads{1};

double pairwise_rec(const double* a, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += a[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_rec(a, h) + pairwise_rec(a + h, n - h);
}

inline std::uint32_t mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    return static_cast<std::uint32_t>(p);
}
}  // namespace

double pairwise_sum(const double* a, std::size_t n) { return pairwise_rec(a, n); }

void set_thread_count(unsigned n) { g_threads = std::max(1u, n); }
unsigned thread_count() { return g_threads; }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    unsigned nt = std::min<std::size_t>(g_threads, std::max<std::size_t>(1, n / 256));
    if (nt <= 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (n + nt - 1) / nt;
    for (unsigned t = 0; t < nt; ++t) {
        std::size_t b = t * chunk, e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back(body, b, e);
    }
    for (auto& th : pool) th.join();
}

void CounterRng::uniforms(std::uint64_t counter, double out[4]) const {
    std::uint32_t c[4] = {static_cast<std::uint32_t>(counter), static_cast<std::uint32_t>(counter >> 32),
                          static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    std::uint32_t k[2] = {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    for (int r = 0; r < 10; ++r) {
        std::uint32_t hi0, hi1;
        std::uint32_t lo0 = mulhilo(0xD2511F53u, c[0], hi0);
        std::uint32_t lo1 = mulhilo(0xCD9E8D57u, c[2], hi1);
        c[0] = hi1 ^ c[1] ^ k[0];
        c[1] = lo1;
        c[2] = hi0 ^ c[3] ^ k[1];
        c[3] = lo0;
        k[0] += 0x9E3779B9u;
        k[1] += 0xBB67AE85u;
    }
    for (int i = 0; i < 4; ++i) out[i] = (static_cast<double>(c[i]) + 0.5) * 0x1p-32;
}

void CounterRng::normals(std::uint64_t counter, double* out, std::size_t n) const {
    std::size_t done = 0;
    std::uint64_t sub = 0;
    while (done < n) {
        double u[4];
        // 53-bit uniforms from pairs of 32-bit words.
        uniforms(counter * 64 + sub++, u);
        double u1 = (std::floor(u[0] * 0x1p32) * 0x1p21 + std::floor(u[1] * 0x1p21) + 0.5) * 0x1p-53;
        double u2 = u[2] + (u[3] - 0.5) * 0x1p-32;
        double r = std::sqrt(-2.0 * std::log(u1));
        double th = 2.0 * std::numbers::pi * u2;
        out[done++] = r * std::cos(th);
        if (done < n) out[done++] = r * std::sin(th);
    }
}

}  // namespace vfp
