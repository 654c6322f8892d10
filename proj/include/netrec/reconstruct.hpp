#ifndef NETREC_RECONSTRUCT_HPP
#define NETREC_RECONSTRUCT_HPP

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <vector>

#include "netrec/common.hpp"
#include "netrec/find_best.hpp"
#include "netrec/model.hpp"
#include "netrec/parallel.hpp"

namespace netrec {

struct IterationRecord {
    int iter;
    double delta;           // sum of |w' - w| over this iteration's updates
    double seconds;         // wall-clock spent in this iteration
    std::size_t candidates; // number of candidate pairs updated
    double objective;       // log-posterior after the iteration
};

struct ConvergenceTrace {
    std::vector<IterationRecord> iterations;
};

inline std::string trace_to_text(const ConvergenceTrace& tr) {
    std::string out = "iter\tdelta\tseconds\tcandidates\n";
    for (const auto& r : tr.iterations) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%d\t%.17g\t%.6f\t%zu\n", r.iter, r.delta, r.seconds,
                      r.candidates);
        out += buf;
    }
    return out;
}

struct ReconstructionConfig {
    double kappa = 1.0;
    double eps = -1.0;  // < 0 selects the default 1e-6 * N
    int max_iters = 1000;
    DistanceMode mode = DistanceMode::exact;
    double knn_eps = 1e-3;
    int threads = 1;
    std::uint64_t seed = 0;
    // test hook: may edit the candidate list before updates are applied
    std::function<void(int iter, std::vector<CandidateEdge>&)> candidate_hook;
};

struct ReconstructionResult {
    bool converged = false;
    ConvergenceTrace trace;
};

namespace detail {

/// Applies a 1-D posterior maximization to each candidate pair. With one
/// thread the candidates are processed in order; with more, workers must own
/// both endpoints (non-blocking per-node locks) before touching a pair, and
/// pairs that lost the race are revisited in a later round. Only edges
/// incident to an independent vertex set update truly concurrently, so the
/// cached sums stay consistent.
inline double apply_edge_updates(PseudoLikelihood& model,
                                 const std::vector<CandidateEdge>& candidates, int threads) {
    SparseWeights& state = model.state();
    const SampleMatrix& X = model.samples();
    if (threads <= 1) {
        double delta = 0.0;
        for (const auto& c : candidates) {
            const EdgeOpt r = model.optimize_edge(c.i, c.j);
            delta += std::fabs(r.w - state.weight(c.i, c.j));
            state.set_edge(c.i, c.j, r.w, X);
        }
        return delta;
    }
    const std::size_t n = static_cast<std::size_t>(state.num_nodes());
    std::unique_ptr<std::mutex[]> locks(new std::mutex[n]);
    std::vector<CandidateEdge> pending = candidates;
    std::atomic<double> delta{0.0};
    while (!pending.empty()) {
        std::vector<CandidateEdge> deferred;
        std::mutex dmu;
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            double local = 0.0;
            std::vector<CandidateEdge> mine;
            for (;;) {
                const std::size_t idx = next.fetch_add(1);
                if (idx >= pending.size()) break;
                const CandidateEdge c = pending[idx];
                std::unique_lock<std::mutex> li(locks[static_cast<std::size_t>(c.i)],
                                                std::try_to_lock);
                if (!li.owns_lock()) {
                    mine.push_back(c);
                    continue;
                }
                std::unique_lock<std::mutex> lj(locks[static_cast<std::size_t>(c.j)],
                                                std::try_to_lock);
                if (!lj.owns_lock()) {
                    mine.push_back(c);
                    continue;
                }
                const EdgeOpt r = model.optimize_edge(c.i, c.j);
                local += std::fabs(r.w - state.weight(c.i, c.j));
                state.set_edge(c.i, c.j, r.w, X);
            }
            delta.fetch_add(local);
            if (!mine.empty()) {
                std::lock_guard<std::mutex> g(dmu);
                deferred.insert(deferred.end(), mine.begin(), mine.end());
            }
        };
        std::vector<std::thread> pool;
        for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();
        pending = std::move(deferred);
    }
    return delta.load();
}

inline void theta_pass(PseudoLikelihood& model, int threads) {
    SparseWeights& state = model.state();
    parallel_for(static_cast<std::size_t>(state.num_nodes()), threads,
                 [&](std::size_t b, std::size_t e) {
                     for (std::size_t i = b; i < e; ++i) {
                         const NodeId node = static_cast<NodeId>(i);
                         state.set_theta(node, model.optimize_theta(node));
                     }
                 });
}

}  // namespace detail

/// Greedy coordinate descent: each iteration asks FindBest for the
/// floor-round(kappa*N) most promising pairs, re-optimizes them in ascending
/// distance order, then runs one theta pass, and stops once the accumulated
/// weight movement drops below eps. Distances are cached per iteration while
/// W is frozen. Hitting max_iters returns converged = false rather than
/// throwing.
inline ReconstructionResult reconstruct_gcd(PseudoLikelihood& model,
                                            const ReconstructionConfig& cfg) {
    if (!(cfg.kappa > 0.0)) throw std::invalid_argument("reconstruct_gcd: kappa must be > 0");
    const NodeId n = model.state().num_nodes();
    const double eps = cfg.eps > 0.0 ? cfg.eps : 1e-6 * n;
    // round-half-to-even, the |_ kappa*N _| of the driver loop
    const std::size_t m = static_cast<std::size_t>(
        std::max(1.0, std::nearbyint(cfg.kappa * static_cast<double>(n))));
    std::vector<NodeId> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);

    DistanceCache cache;
    const ModelDistance dist(model, cache, cfg.mode);
    ReconstructionResult res;
    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        const auto t0 = std::chrono::steady_clock::now();
        cache.begin_generation();
        FindBestParams fp;
        fp.knn_eps = cfg.knn_eps;
        fp.threads = cfg.threads;
        fp.seed = mix64(cfg.seed, static_cast<std::uint64_t>(iter));
        BestPairsResult best = find_best(m, std::span<const NodeId>(all), dist, fp);
        if (cfg.candidate_hook) cfg.candidate_hook(iter, best.pairs);
        const double delta = detail::apply_edge_updates(model, best.pairs, cfg.threads);
        detail::theta_pass(model, cfg.threads);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.trace.iterations.push_back({iter, delta, secs, best.pairs.size(), model.log_posterior()});
        if (delta < eps) {
            res.converged = true;
            break;
        }
    }
    return res;
}

/// Coordinate descent baseline: full sweeps over all pairs i < j, theta pass
/// per sweep, stop when the sweep's weight movement drops below eps.
inline ReconstructionResult reconstruct_cd(PseudoLikelihood& model, double eps = -1.0,
                                           int max_iters = 1000, int threads = 1) {
    const NodeId n = model.state().num_nodes();
    const double eps_eff = eps > 0.0 ? eps : 1e-6 * n;
    std::vector<CandidateEdge> all_pairs;
    all_pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = i + 1; j < n; ++j) all_pairs.push_back({i, j, 0.0});

    ReconstructionResult res;
    for (int iter = 1; iter <= max_iters; ++iter) {
        const auto t0 = std::chrono::steady_clock::now();
        const double delta = detail::apply_edge_updates(model, all_pairs, threads);
        detail::theta_pass(model, threads);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.trace.iterations.push_back({iter, delta, secs, all_pairs.size(), model.log_posterior()});
        if (delta < eps_eff) {
            res.converged = true;
            break;
        }
    }
    return res;
}

}  // namespace netrec

#endif
