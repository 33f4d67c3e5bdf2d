#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace trajfb {

// Stream seeds are derived from (master seed, agent tag, episode, purpose) so that
// adding or removing an agent never shifts another agent's draws, and so that the
// draws inside one episode do not depend on how many draws earlier episodes used.
//
// Derivation: fold each component into a 64-bit state with splitmix64 finalizers
// (tags are hashed with FNV-1a first). Purely arithmetic, identical on every
// platform.
enum class StreamPurpose : std::uint64_t {
    EnvTransition = 1,
    EnvReward = 2,
    AgentNoise = 3,
    AgentPolicy = 4,
    EnvGen = 5,
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

inline std::uint64_t derive_stream_seed(std::uint64_t master, std::string_view tag,
                                        std::uint64_t episode, StreamPurpose purpose) {
    std::uint64_t h = detail::splitmix64(master);
    h = detail::splitmix64(h ^ detail::fnv1a(tag));
    h = detail::splitmix64(h ^ episode);
    h = detail::splitmix64(h ^ static_cast<std::uint64_t>(purpose));
    return h;
}

// mt19937_64 with hand-rolled output transforms. The standard distribution
// objects are implementation-defined, which would break bit-for-bit
// reproducibility across toolchains, so we only use the raw generator.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    // [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // uniform on {0, ..., n-1}; n is tiny here (action counts), so the
    // truncation bias of the multiply is irrelevant
    int uniform_int(int n) {
        int v = static_cast<int>(uniform() * n);
        return v >= n ? n - 1 : v;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller, one value per call. Wastes the sibling value on purpose:
    // a cached spare would make the draw sequence depend on call parity.
    double gaussian() {
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

    std::vector<double> gaussian_vector(int n) {
        std::vector<double> z(static_cast<std::size_t>(n));
        for (auto& v : z) v = gaussian();
        return z;
    }

    // inverse-CDF draw from an explicit probability row; sub-stochastic rows
    // are not expected here (environment kernels are validated stochastic)
    int categorical(const double* p, int n) {
        double u = uniform();
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += p[i];
            if (u < acc) return i;
        }
        return n - 1;
    }

    std::uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
};

} // namespace trajfb
