#ifndef NETREC_RANDOM_HPP
#define NETREC_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <limits>

namespace netrec {

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ mix64(b));
}

/// Counter-based splittable generator. Every random decision in the library
/// derives from a single 64-bit seed through `split`, so results do not
/// depend on thread count or evaluation order.
class SplitRng {
public:
    using result_type = std::uint64_t;

    explicit SplitRng(std::uint64_t seed = 0) : key_(mix64(seed)), ctr_(0) {}

    result_type operator()() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++ctr_); }

    /// Independent stream identified by `stream`; deterministic in (seed, stream).
    SplitRng split(std::uint64_t stream) const {
        SplitRng r;
        r.key_ = mix64(key_, stream);
        r.ctr_ = 0;
        return r;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // rejection-free 128-bit multiply (Lemire); bias is negligible for n << 2^64
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>((*this)()) * n) >> 64);
    }

    // standard normal via Box-Muller (deterministic two-call form)
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t ctr_;
};

}  // namespace netrec

#endif
