#ifndef NETREC_KNN_HPP
#define NETREC_KNN_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "netrec/common.hpp"
#include "netrec/parallel.hpp"
#include "netrec/random.hpp"

namespace netrec {

struct KnnEntry {
    NodeId id;    // global node id of the neighbor
    double dist;
};

// worst-first ordering: larger (dist, id) is worse; ties broken by id so
// results are deterministic
inline bool entry_better(const KnnEntry& a, const KnnEntry& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return a.id < b.id;
}

/// Directed k-out-neighbor graph over an arbitrary node set. Each node keeps
/// exactly k distinct out-neighbors in a small binary max-heap keyed by
/// (dist, id): worst-entry lookup is O(1), replacement O(log k).
class KnnGraph {
public:
    KnnGraph(std::vector<NodeId> nodes, int k)
        : nodes_(std::move(nodes)), k_(k),
          entries_(nodes_.size() * static_cast<std::size_t>(k)) {}

    std::size_t size() const { return nodes_.size(); }
    int k() const { return k_; }
    const std::vector<NodeId>& nodes() const { return nodes_; }

    std::span<const KnnEntry> neighbors(std::size_t local) const {
        return {entries_.data() + local * k_, static_cast<std::size_t>(k_)};
    }
    std::span<const KnnEntry> all_entries() const { return {entries_.data(), entries_.size()}; }
    std::span<KnnEntry> mutable_neighbors(std::size_t local) {
        return {entries_.data() + local * k_, static_cast<std::size_t>(k_)};
    }

    const KnnEntry& worst(std::size_t local) const { return entries_[local * k_]; }

    bool contains(std::size_t local, NodeId id) const {
        const KnnEntry* seg = entries_.data() + local * k_;
        for (int t = 0; t < k_; ++t)
            if (seg[t].id == id) return true;
        return false;
    }

    /// Replaces the current worst out-neighbor when e is strictly better.
    bool replace_worst_if_better(std::size_t local, KnnEntry e) {
        KnnEntry* seg = entries_.data() + local * k_;
        if (!entry_better(e, seg[0])) return false;
        seg[0] = e;
        sift_down(seg, 0);
        return true;
    }

    void heapify(std::size_t local) {
        KnnEntry* seg = entries_.data() + local * k_;
        for (int t = k_ / 2 - 1; t >= 0; --t) sift_down(seg, t);
    }

private:
    void sift_down(KnnEntry* seg, int idx) const {
        for (;;) {
            const int l = 2 * idx + 1, r = l + 1;
            int big = idx;
            if (l < k_ && entry_better(seg[big], seg[l])) big = l;
            if (r < k_ && entry_better(seg[big], seg[r])) big = r;
            if (big == idx) return;
            std::swap(seg[idx], seg[big]);
            idx = big;
        }
    }

    std::vector<NodeId> nodes_;
    int k_;
    std::vector<KnnEntry> entries_;
};

struct KnnParams {
    double eps = 1e-3;     // stop when the per-sweep churn ratio falls below this
    int threads = 1;
    std::uint64_t seed = 0;
    int max_sweeps = 100;  // safety cap; empirically ~2*ceil(log_2k N) suffices
    int scan_floor = 8;    // U lists are capped at max(width, scan_floor) entries
    // Minimum working out-degree for the descent sweeps. Below ~4 the random
    // initial digraph fragments and second-neighbor scans cannot cross
    // components, so tiny k would stall at poor fixed points; the extra
    // entries are dropped again before returning. Constant, so the O(k^2 N)
    // sweep cost story is unchanged.
    int width_floor = 4;
};

struct KnnResult {
    KnnGraph graph;
    int sweeps = 0;
    std::vector<double> sweep_churn;  // changed-entry ratio per sweep
    int sweep_count() const { return sweeps; }
};

namespace detail {

// exact k-NN digraph by exhaustive scan; the k >= |V|-1 fallback and the
// oracle for tests
template <class Dist>
KnnResult knn_exhaustive(int k, std::span<const NodeId> nodes, Dist&& d, int threads) {
    const std::size_t n = nodes.size();
    KnnGraph g(std::vector<NodeId>(nodes.begin(), nodes.end()), k);
    parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
        std::vector<KnnEntry> all;
        for (std::size_t li = b; li < e; ++li) {
            all.clear();
            all.reserve(n - 1);
            for (std::size_t lj = 0; lj < n; ++lj)
                if (lj != li) all.push_back({nodes[lj], d(nodes[li], nodes[lj])});
            std::nth_element(all.begin(), all.begin() + (k - 1), all.end(), entry_better);
            auto seg = g.mutable_neighbors(li);
            std::copy(all.begin(), all.begin() + k, seg.begin());
            g.heapify(li);
        }
    });
    return {std::move(g), 0, {}};
}

}  // namespace detail

/// Approximate k-nearest-neighbor digraph by NNDescent: start from random
/// out-neighbors per node, then repeatedly scan neighbors-of-neighbors in the
/// undirected view of the sweep-start graph, replacing each node's worst
/// entry whenever a scanned candidate is closer. Adjacency lists of the
/// undirected view are capped so one sweep is O(k^2 N) regardless of
/// in-degree structure. Stops when the fraction of out-entries changed in a
/// sweep drops below eps.
///
/// Within a sweep every node's update depends only on the sweep-start
/// snapshot and its own out-list, so the result is independent of node visit
/// order and thread count.
template <class Dist>
KnnResult find_knn(int k, std::span<const NodeId> nodes, Dist&& d, const KnnParams& p = {}) {
    const std::size_t n = nodes.size();
    if (n < 2) throw std::invalid_argument("find_knn: need at least two nodes");
    if (k < 1) throw std::invalid_argument("find_knn: k must be >= 1");
    if (!(p.eps > 0.0)) throw std::invalid_argument("find_knn: eps must be > 0");
    if (static_cast<std::size_t>(k) + 1 >= n)
        return detail::knn_exhaustive(static_cast<int>(std::min<std::size_t>(k, n - 1)), nodes,
                                      d, p.threads);
    // descend at a floored working width; the surplus is dropped on return
    const int kw = std::max(k, p.width_floor);
    if (static_cast<std::size_t>(kw) + 1 >= n) {
        KnnResult r = detail::knn_exhaustive(k, nodes, d, p.threads);
        return r;
    }

    KnnGraph g(std::vector<NodeId>(nodes.begin(), nodes.end()), kw);
    std::unordered_map<NodeId, std::int32_t> local;
    local.reserve(n * 2);
    for (std::size_t li = 0; li < n; ++li) local.emplace(nodes[li], static_cast<std::int32_t>(li));

    // independent initial out-neighbors per node: k distinct targets sampled
    // uniformly over the id-sorted node set, keyed by (seed, node id), so the
    // initial graph is a function of the node set alone — the same for any
    // visit order or thread count
    std::vector<NodeId> sorted_ids(nodes.begin(), nodes.end());
    std::sort(sorted_ids.begin(), sorted_ids.end());
    const SplitRng root(p.seed);
    parallel_for(n, p.threads, [&](std::size_t b, std::size_t e) {
        std::vector<std::size_t> picks;
        for (std::size_t li = b; li < e; ++li) {
            SplitRng r = root.split(static_cast<std::uint64_t>(nodes[li]) + 1);
            const std::size_t self = static_cast<std::size_t>(
                std::lower_bound(sorted_ids.begin(), sorted_ids.end(), nodes[li]) -
                sorted_ids.begin());
            picks.clear();
            // Floyd's sampling of kw distinct values in [0, n-2]
            for (std::size_t t = n - 1 - static_cast<std::size_t>(kw); t < n - 1; ++t) {
                std::size_t v = r.below(t + 1);
                if (std::find(picks.begin(), picks.end(), v) != picks.end()) v = t;
                picks.push_back(v);
            }
            auto seg = g.mutable_neighbors(li);
            for (int t = 0; t < kw; ++t) {
                std::size_t rank = picks[static_cast<std::size_t>(t)];
                if (rank >= self) ++rank;  // skip self
                seg[t] = {sorted_ids[rank], d(nodes[li], sorted_ids[rank])};
            }
            g.heapify(li);
        }
    });

    // U lists are truncated to `cap` entries so one sweep costs O(cap^2 N)
    // no matter how skewed the in-degrees get; the floor keeps exploration
    // alive when k is very small
    const int cap = std::max(kw, p.scan_floor);
    KnnResult res{std::move(g), 0, {}};
    std::vector<KnnEntry> snapshot;
    std::vector<std::int32_t> adj;      // capped undirected adjacency, n*cap
    std::vector<std::int32_t> adj_len;  // actual list lengths
    std::vector<KnnEntry> scratch;

    for (int sweep = 0; sweep < p.max_sweeps; ++sweep) {
        snapshot.assign(res.graph.all_entries().begin(), res.graph.all_entries().end());

        // undirected view U of the snapshot: out-edges first (ascending
        // (dist, id)), then in-edges
        adj.assign(n * static_cast<std::size_t>(cap), -1);
        adj_len.assign(n, 0);
        auto push_cap = [&](std::size_t lt, std::int32_t ls) {
            std::int32_t& len = adj_len[lt];
            if (len >= cap) return;
            std::int32_t* row = adj.data() + lt * static_cast<std::size_t>(cap);
            for (std::int32_t t = 0; t < len; ++t)
                if (row[t] == ls) return;
            row[len++] = ls;
        };
        scratch.resize(static_cast<std::size_t>(kw));
        for (std::size_t li = 0; li < n; ++li) {
            const KnnEntry* seg = snapshot.data() + li * static_cast<std::size_t>(kw);
            std::copy(seg, seg + kw, scratch.begin());
            std::sort(scratch.begin(), scratch.end(), entry_better);
            for (int t = 0; t < kw; ++t) push_cap(li, local.find(scratch[t].id)->second);
        }
        // in-edges, grouped by target, ordered by (dist, source id)
        {
            std::vector<std::vector<KnnEntry>> in(n);
            for (std::size_t li = 0; li < n; ++li) {
                const KnnEntry* seg = snapshot.data() + li * static_cast<std::size_t>(kw);
                for (int t = 0; t < kw; ++t)
                    in[static_cast<std::size_t>(local.find(seg[t].id)->second)].push_back(
                        {nodes[li], seg[t].dist});
            }
            for (std::size_t lt = 0; lt < n; ++lt) {
                std::sort(in[lt].begin(), in[lt].end(), entry_better);
                for (const auto& e : in[lt]) push_cap(lt, local.find(e.id)->second);
            }
        }

        // second-neighbor scan against the snapshot; replacements land in the
        // working graph, each node's own list only
        parallel_for(n, p.threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t li = b; li < e; ++li) {
                const NodeId gi = nodes[li];
                const std::int32_t* row_i = adj.data() + li * static_cast<std::size_t>(cap);
                const std::int32_t len_i = adj_len[li];
                for (std::int32_t a = 0; a < len_i; ++a) {
                    const std::size_t lj = static_cast<std::size_t>(row_i[a]);
                    const std::int32_t* row_j = adj.data() + lj * static_cast<std::size_t>(cap);
                    const std::int32_t len_j = adj_len[lj];
                    for (std::int32_t b2 = 0; b2 < len_j; ++b2) {
                        const std::size_t lv = static_cast<std::size_t>(row_j[b2]);
                        if (lv == li) continue;
                        const NodeId gv = nodes[lv];
                        if (res.graph.contains(li, gv)) continue;
                        const KnnEntry cand{gv, d(gi, gv)};
                        res.graph.replace_worst_if_better(li, cand);
                    }
                }
            }
        });
        ++res.sweeps;

        // churn: out-entries not present in the sweep-start snapshot
        std::size_t changed = 0;
        for (std::size_t li = 0; li < n; ++li) {
            const KnnEntry* before = snapshot.data() + li * static_cast<std::size_t>(kw);
            for (const KnnEntry& e : res.graph.neighbors(li)) {
                bool found = false;
                for (int t = 0; t < kw; ++t)
                    if (before[t].id == e.id) {
                        found = true;
                        break;
                    }
                if (!found) ++changed;
            }
        }
        const double ratio = static_cast<double>(changed) /
                             (static_cast<double>(kw) * static_cast<double>(n));
        res.sweep_churn.push_back(ratio);
        if (ratio < p.eps) break;
    }
    if (kw == k) return res;

    // keep only the k best entries per node
    KnnGraph out(std::vector<NodeId>(nodes.begin(), nodes.end()), k);
    std::vector<KnnEntry> buf(static_cast<std::size_t>(kw));
    for (std::size_t li = 0; li < n; ++li) {
        const auto nb = res.graph.neighbors(li);
        std::copy(nb.begin(), nb.end(), buf.begin());
        std::nth_element(buf.begin(), buf.begin() + (k - 1), buf.end(), entry_better);
        auto seg = out.mutable_neighbors(li);
        std::copy(buf.begin(), buf.begin() + k, seg.begin());
        out.heapify(li);
    }
    return {std::move(out), res.sweeps, std::move(res.sweep_churn)};
}

/// Exact k-NN digraph (exhaustive O(N^2) scan); the oracle counterpart of find_knn.
template <class Dist>
KnnResult find_knn_exhaustive(int k, std::span<const NodeId> nodes, Dist&& d, int threads = 1) {
    if (nodes.size() < 2) throw std::invalid_argument("find_knn_exhaustive: need two nodes");
    const int keff = static_cast<int>(std::min<std::size_t>(k, nodes.size() - 1));
    return detail::knn_exhaustive(keff, nodes, d, threads);
}

}  // namespace netrec

#endif
