#ifndef NETREC_FIND_BEST_HPP
#define NETREC_FIND_BEST_HPP

#include <algorithm>
#include <cstdint>
#include <mutex>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "netrec/common.hpp"
#include "netrec/knn.hpp"
#include "netrec/parallel.hpp"
#include "netrec/random.hpp"

namespace netrec {

struct TraceLevel {
    int level;
    std::size_t nodes;    // N_t
    int k;                // 0 on the exhaustive level
    bool exhaustive;
    int knn_sweeps;
    std::size_t dedup_size;  // |D|; 0 on the exhaustive level
};

struct RecursionTrace {
    std::vector<TraceLevel> levels;

    /// N_{t+1} <= N_t / 2 between consecutive recursive levels.
    bool halving_ok() const {
        for (std::size_t t = 0; t + 1 < levels.size(); ++t)
            if (levels[t + 1].nodes * 2 > levels[t].nodes) return false;
        return true;
    }
};

struct BestPairsResult {
    std::vector<CandidateEdge> pairs;  // ascending by (dist, i, j), canonical i < j
    RecursionTrace trace;
    bool short_count = false;  // m exceeded the number of available pairs
};

struct FindBestParams {
    double knn_eps = 1e-3;
    int threads = 1;
    std::uint64_t seed = 0;
};

inline std::string trace_to_text(const RecursionTrace& tr) {
    std::string out = "t\tN_t\tk_t\texhaustive\n";
    for (const auto& lv : tr.levels) {
        out += std::to_string(lv.level) + "\t" + std::to_string(lv.nodes) + "\t" +
               std::to_string(lv.k) + "\t" + (lv.exhaustive ? "1" : "0") + "\n";
    }
    return out;
}

namespace detail {

// keep the m smallest candidates, sorted ascending
inline void select_and_sort(std::vector<CandidateEdge>& v, std::size_t m) {
    if (v.size() > m) {
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m) - 1, v.end(),
                         candidate_less);
        v.resize(m);
    }
    std::sort(v.begin(), v.end(), candidate_less);
}

template <class Dist>
std::vector<CandidateEdge> all_pairs_scan(std::span<const NodeId> s, Dist&& d, int threads) {
    const std::size_t n = s.size();
    std::vector<CandidateEdge> pairs;
    pairs.resize(n * (n - 1) / 2);
    // row-major upper triangle offsets
    std::vector<std::size_t> offset(n, 0);
    for (std::size_t a = 1; a < n; ++a) offset[a] = offset[a - 1] + (n - a);
    parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t a = b; a < e; ++a)
            for (std::size_t c = a + 1; c < n; ++c)
                pairs[offset[a] + (c - a - 1)] = make_candidate(s[a], s[c], d(s[a], s[c]));
    });
    return pairs;
}

template <class Dist>
BestPairsResult find_best_impl(std::size_t m, std::span<const NodeId> s, Dist&& d,
                               const FindBestParams& p, int level) {
    BestPairsResult res;
    if (s.size() < 2) return res;  // no pairs possible; recursion tail

    const std::size_t total = s.size() * (s.size() - 1) / 2;
    if (m > total) res.short_count = true;
    const std::size_t want = std::min(m, total);

    // base case: the node set is small enough for an exhaustive scan
    if (s.size() * s.size() <= 4 * m) {
        res.pairs = all_pairs_scan(s, d, p.threads);
        select_and_sort(res.pairs, want);
        res.trace.levels.push_back({level, s.size(), 0, true, 0, 0});
        return res;
    }

    const int k = static_cast<int>((4 * m + s.size() - 1) / s.size());  // ceil(4m/|S|)
    KnnParams kp;
    kp.eps = p.knn_eps;
    kp.threads = p.threads;
    kp.seed = mix64(p.seed, static_cast<std::uint64_t>(level));
    KnnResult knn = find_knn(k, s, d, kp);
    const KnnGraph& g = knn.graph;

    // D+: the 2m smallest directed edges of the KNN digraph
    struct Directed {
        NodeId src, dst;
        double dist;
    };
    std::vector<Directed> directed;
    directed.reserve(g.size() * static_cast<std::size_t>(g.k()));
    for (std::size_t li = 0; li < g.size(); ++li)
        for (const KnnEntry& e : g.neighbors(li)) directed.push_back({s[li], e.id, e.dist});
    auto directed_less = [](const Directed& a, const Directed& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.src != b.src) return a.src < b.src;
        return a.dst < b.dst;
    };
    const std::size_t dplus = std::min<std::size_t>(2 * m, directed.size());
    std::nth_element(directed.begin(), directed.begin() + static_cast<std::ptrdiff_t>(dplus) - 1,
                     directed.end(), directed_less);
    directed.resize(dplus);

    // D: unique undirected pairs of D+  (m <= |D| <= 2m)
    std::unordered_set<std::uint64_t> dset;
    std::unordered_set<std::uint64_t> dplus_set;  // directed membership
    dset.reserve(dplus * 2);
    dplus_set.reserve(dplus * 2);
    std::vector<CandidateEdge> dpairs;
    dpairs.reserve(dplus);
    for (const auto& de : directed) {
        dplus_set.insert((static_cast<std::uint64_t>(static_cast<std::uint32_t>(de.src)) << 32) |
                         static_cast<std::uint32_t>(de.dst));
        if (dset.insert(pair_key(de.src, de.dst)).second)
            dpairs.push_back(make_candidate(de.src, de.dst, de.dist));
    }

    // S': nodes whose every directed out-edge survives in D+ (saturated
    // nodes). Directed membership is what bounds |S'| by |D+|/k = 2m/k, i.e.
    // the guaranteed halving of the node set per level.
    std::vector<NodeId> saturated;
    for (std::size_t li = 0; li < g.size(); ++li) {
        bool all_in = true;
        for (const KnnEntry& e : g.neighbors(li)) {
            const std::uint64_t dk =
                (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s[li])) << 32) |
                static_cast<std::uint32_t>(e.id);
            if (!dplus_set.count(dk)) {
                all_in = false;
                break;
            }
        }
        if (all_in) saturated.push_back(s[li]);
    }

    res.trace.levels.push_back({level, s.size(), k, false, knn.sweeps, dpairs.size()});

    BestPairsResult rec = find_best_impl(m, std::span<const NodeId>(saturated), d, p, level + 1);
    for (const auto& lv : rec.trace.levels) res.trace.levels.push_back(lv);

    // merge D with the recursive result, dropping duplicates
    res.pairs = std::move(dpairs);
    for (const auto& e : rec.pairs)
        if (!dset.count(pair_key(e.i, e.j))) res.pairs.push_back(e);
    select_and_sort(res.pairs, want);
    return res;
}

}  // namespace detail

/// The m closest pairs of S under the distance oracle d, by recursive
/// KNN-based candidate generation: k = ceil(4m/|S|) approximate nearest
/// neighbors per node, keep the 2m best directed edges, recurse on the nodes
/// whose whole neighbor list survived, and fall back to an exhaustive scan
/// once |S|^2 <= 4m. The result is approximate (its quality is measured by
/// recall), but every returned pair was actually probed.
template <class Dist>
BestPairsResult find_best(std::size_t m, std::span<const NodeId> s, Dist&& d,
                          const FindBestParams& p = {}) {
    if (m < 1) throw std::invalid_argument("find_best: m must be >= 1");
    if (s.size() < 2) throw std::invalid_argument("find_best: need at least two nodes");
    return detail::find_best_impl(m, s, d, p, 0);
}

/// Exact m closest pairs by a full O(|S|^2) scan; the oracle for recall
/// measurements and the same code path find_best uses at its base case.
template <class Dist>
BestPairsResult find_best_exhaustive(std::size_t m, std::span<const NodeId> s, Dist&& d,
                                     int threads = 1) {
    if (m < 1) throw std::invalid_argument("find_best_exhaustive: m must be >= 1");
    if (s.size() < 2) throw std::invalid_argument("find_best_exhaustive: need two nodes");
    BestPairsResult res;
    const std::size_t total = s.size() * (s.size() - 1) / 2;
    if (m > total) res.short_count = true;
    res.pairs = detail::all_pairs_scan(s, d, threads);
    detail::select_and_sort(res.pairs, std::min(m, total));
    res.trace.levels.push_back({0, s.size(), 0, true, 0, 0});
    return res;
}

/// Cumulative recall: entry r is |top-r(exact) ∩ top-r(approx)| / (r+1).
inline std::vector<double> recall_curve(const BestPairsResult& exact,
                                        const BestPairsResult& approx) {
    if (exact.pairs.size() != approx.pairs.size())
        throw std::invalid_argument("recall_curve: result lengths differ");
    const std::size_t m = exact.pairs.size();
    std::vector<double> curve(m);
    std::unordered_set<std::uint64_t> se, sa;
    se.reserve(m * 2);
    sa.reserve(m * 2);
    std::size_t common = 0;
    for (std::size_t r = 0; r < m; ++r) {
        const std::uint64_t ke = pair_key(exact.pairs[r].i, exact.pairs[r].j);
        const std::uint64_t ka = pair_key(approx.pairs[r].i, approx.pairs[r].j);
        if (sa.count(ke)) ++common;
        se.insert(ke);
        if (se.count(ka)) ++common;
        sa.insert(ka);
        curve[r] = static_cast<double>(common) / static_cast<double>(r + 1);
    }
    return curve;
}

}  // namespace netrec

#endif
