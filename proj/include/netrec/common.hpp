#ifndef NETREC_COMMON_HPP
#define NETREC_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace netrec {

using NodeId = std::int32_t;

/// Unordered node pair with its search distance; always stored canonically
/// with i < j so one record serves both directions.
struct CandidateEdge {
    NodeId i;
    NodeId j;
    double dist;
};

inline bool candidate_less(const CandidateEdge& a, const CandidateEdge& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
}

inline CandidateEdge make_candidate(NodeId a, NodeId b, double dist) {
    if (a > b) std::swap(a, b);
    return CandidateEdge{a, b, dist};
}

/// Canonical 64-bit key for an unordered pair (used by caches and dedup sets).
inline std::uint64_t pair_key(NodeId a, NodeId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

// log(2 cosh(z)) without overflow: |z| + log1p(exp(-2|z|))
inline double log_2cosh(double z) {
    const double a = std::fabs(z);
    return a + std::log1p(std::exp(-2.0 * a));
}

// logistic function, stable on both tails
inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace netrec

#endif
