#ifndef NETREC_BENCH_HPP
#define NETREC_BENCH_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "netrec/find_best.hpp"
#include "netrec/model.hpp"
#include "netrec/reconstruct.hpp"
#include "netrec/synth.hpp"

namespace netrec {

// ---------------------------------------------------------------------------
// FindBest runtime scaling (the Fig.-2-style measurement)

struct ScalingRow {
    NodeId n;
    double kappa;
    std::uint64_t seed;
    double seconds;            // wall-clock around find_best only
    std::uint64_t dist_evals;  // distance computations (cache misses)
    int levels;
    bool halving_ok;           // N_{t+1} <= N_t/2 held on every level
};

struct ScalingReport {
    std::vector<ScalingRow> rows;
    std::vector<NodeId> n_values;
    std::map<double, std::vector<double>> mean_seconds;  // kappa -> per-N mean
    std::map<double, double> exponent;                   // kappa -> log-log slope
    bool all_halving_ok = true;
};

struct BenchModelConfig {
    ModelKind kind = ModelKind::gaussian;
    double lambda = 0.0;
    DistanceMode mode = DistanceMode::exact;
    double knn_eps = 1e-3;
    int threads = 1;
    GeneratorSpec gen;  // n and seed are overridden per run
};

/// Least-squares slope of log(sec) vs log(n) over the upper half of the N
/// range (small-N constants pollute the slope). Needs >= 3 points.
inline double fit_scaling_exponent(const std::vector<NodeId>& n_values,
                                   const std::vector<double>& seconds) {
    if (n_values.size() != seconds.size())
        throw std::invalid_argument("fit_scaling_exponent: length mismatch");
    if (n_values.size() < 3)
        throw std::invalid_argument("fit_scaling_exponent: need at least 3 points");
    const std::size_t half = (n_values.size() + 1) / 2;
    const std::size_t from = n_values.size() - std::max<std::size_t>(half, 3);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    for (std::size_t t = from; t < n_values.size(); ++t) {
        const double lx = std::log(static_cast<double>(n_values[t]));
        const double ly = std::log(std::max(seconds[t], 1e-9));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
    }
    const double c = static_cast<double>(cnt);
    return (c * sxy - sx * sy) / (c * sxx - sx * sx);
}

/// Times find_best(round(kappa*N)) on the empty initial state of a synthetic
/// Gaussian instance per (N, kappa, seed). M stays small (Fig. 2 uses 10) so
/// data generation is negligible; timing covers find_best alone.
inline ScalingReport bench_findbest_scaling(const std::vector<NodeId>& n_list,
                                            const std::vector<double>& kappas, int num_seeds,
                                            int M, const BenchModelConfig& cfg) {
    if (n_list.size() < 3)
        throw std::invalid_argument("bench_findbest_scaling: need at least 3 N values");
    for (std::size_t t = 1; t < n_list.size(); ++t)
        if (n_list[t] <= n_list[t - 1])
            throw std::invalid_argument("bench_findbest_scaling: N values must increase");

    ScalingReport rep;
    rep.n_values = n_list;
    for (const double kappa : kappas) {
        std::vector<double> means;
        for (const NodeId n : n_list) {
            double acc = 0.0;
            for (int s = 0; s < num_seeds; ++s) {
                GeneratorSpec gs = cfg.gen;
                gs.n = n;
                gs.seed = mix64(static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(n));
                const SparseWeights truth = gen_er_precision(gs);
                const SampleMatrix x = sample_gaussian(truth, M, mix64(gs.seed, 1));
                SparseWeights state = make_empty_state(cfg.kind, x);
                const PseudoLikelihood model(cfg.kind, cfg.lambda, x, state);
                DistanceCache cache;
                const ModelDistance dist(model, cache, cfg.mode);
                std::vector<NodeId> nodes(static_cast<std::size_t>(n));
                std::iota(nodes.begin(), nodes.end(), 0);
                const std::size_t m = static_cast<std::size_t>(
                    std::max(1.0, std::nearbyint(kappa * static_cast<double>(n))));
                FindBestParams fp;
                fp.knn_eps = cfg.knn_eps;
                fp.threads = cfg.threads;
                fp.seed = gs.seed;
                const auto t0 = std::chrono::steady_clock::now();
                const BestPairsResult r = find_best(m, std::span<const NodeId>(nodes), dist, fp);
                const double secs =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                const bool ok = r.trace.halving_ok();
                rep.rows.push_back({n, kappa, gs.seed, secs, cache.misses(),
                                    static_cast<int>(r.trace.levels.size()), ok});
                rep.all_halving_ok = rep.all_halving_ok && ok;
                acc += secs;
            }
            means.push_back(acc / num_seeds);
        }
        rep.exponent[kappa] = fit_scaling_exponent(n_list, means);
        rep.mean_seconds[kappa] = std::move(means);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// FindBest recall (the Fig.-3-style measurement)

struct RecallReport {
    std::vector<double> kappas;
    std::vector<std::vector<double>> mean_curves;    // per kappa, averaged over seeds
    std::vector<std::vector<double>> rank1_by_seed;  // per kappa, rank-1 recall per seed
};

/// Recall of find_best against the exhaustive oracle on synthetic Gaussian
/// instances with the empty initial state. Both sides share one frozen cache
/// generation per seed, so they rank identical distance values.
inline RecallReport bench_recall(NodeId n, const std::vector<double>& kappas, int num_seeds,
                                 int M, const BenchModelConfig& cfg) {
    RecallReport rep;
    rep.kappas = kappas;
    rep.mean_curves.resize(kappas.size());
    rep.rank1_by_seed.assign(kappas.size(), {});
    for (int s = 0; s < num_seeds; ++s) {
        GeneratorSpec gs = cfg.gen;
        gs.n = n;
        gs.seed = mix64(static_cast<std::uint64_t>(s), 0x5eedULL);
        const SparseWeights truth = gen_er_precision(gs);
        const SampleMatrix x = sample_gaussian(truth, M, mix64(gs.seed, 1));
        SparseWeights state = make_empty_state(cfg.kind, x);
        const PseudoLikelihood model(cfg.kind, cfg.lambda, x, state);
        DistanceCache cache;
        cache.begin_generation();
        const ModelDistance dist(model, cache, cfg.mode);
        std::vector<NodeId> nodes(static_cast<std::size_t>(n));
        std::iota(nodes.begin(), nodes.end(), 0);

        for (std::size_t ki = 0; ki < kappas.size(); ++ki) {
            const std::size_t m = static_cast<std::size_t>(
                std::max(1.0, std::nearbyint(kappas[ki] * static_cast<double>(n))));
            const BestPairsResult exact =
                find_best_exhaustive(m, std::span<const NodeId>(nodes), dist, cfg.threads);
            FindBestParams fp;
            fp.knn_eps = cfg.knn_eps;
            fp.threads = cfg.threads;
            fp.seed = gs.seed;
            const BestPairsResult approx = find_best(m, std::span<const NodeId>(nodes), dist, fp);
            const std::vector<double> curve = recall_curve(exact, approx);
            auto& mean = rep.mean_curves[ki];
            if (mean.empty()) mean.assign(curve.size(), 0.0);
            for (std::size_t r = 0; r < curve.size(); ++r) mean[r] += curve[r] / num_seeds;
            rep.rank1_by_seed[ki].push_back(curve.front());
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// CD / GCD convergence (the Fig.-4/5-style measurement)

struct ConvergenceRun {
    std::string label;
    double kappa;  // 0 for the CD baseline
    ReconstructionResult result;
    double final_objective;
    double total_seconds;
};

/// Convergence traces for GCD at each kappa (and optionally the CD baseline)
/// on one shared synthetic Gaussian instance.
inline std::vector<ConvergenceRun> bench_convergence(NodeId n, int M,
                                                     const std::vector<double>& kappas,
                                                     bool with_cd, double eps, int max_iters,
                                                     std::uint64_t seed,
                                                     const BenchModelConfig& cfg) {
    GeneratorSpec gs = cfg.gen;
    gs.n = n;
    gs.seed = seed;
    const SparseWeights truth = gen_er_precision(gs);
    const SampleMatrix x = sample_gaussian(truth, M, mix64(seed, 1));

    std::vector<ConvergenceRun> runs;
    auto total_secs = [](const ReconstructionResult& r) {
        double t = 0;
        for (const auto& it : r.trace.iterations) t += it.seconds;
        return t;
    };
    if (with_cd) {
        SparseWeights state = make_empty_state(cfg.kind, x);
        PseudoLikelihood model(cfg.kind, cfg.lambda, x, state);
        ReconstructionResult r = reconstruct_cd(model, eps, max_iters, cfg.threads);
        const double obj = model.log_posterior();
        runs.push_back({"cd", 0.0, std::move(r), obj, 0.0});
        runs.back().total_seconds = total_secs(runs.back().result);
    }
    for (const double kappa : kappas) {
        SparseWeights state = make_empty_state(cfg.kind, x);
        PseudoLikelihood model(cfg.kind, cfg.lambda, x, state);
        ReconstructionConfig rc;
        rc.kappa = kappa;
        rc.eps = eps;
        rc.max_iters = max_iters;
        rc.mode = cfg.mode;
        rc.knn_eps = cfg.knn_eps;
        rc.threads = cfg.threads;
        rc.seed = mix64(seed, 2);
        ReconstructionResult r = reconstruct_gcd(model, rc);
        const double obj = model.log_posterior();
        runs.push_back({"gcd", kappa, std::move(r), obj, 0.0});
        runs.back().total_seconds = total_secs(runs.back().result);
    }
    return runs;
}

// ---------------------------------------------------------------------------
// Reconstruction quality vs ground truth

struct ReconstructionMetrics {
    double precision;
    double recall;
    double f1;
    double rmse;  // over the union support
    std::size_t truth_edges;
    std::size_t estimate_edges;
    std::size_t common_edges;
};

/// Support metrics treat any stored (nonzero) entry as an edge; RMSE is
/// computed over the union of the two supports.
inline ReconstructionMetrics eval_reconstruction(const SparseWeights& estimate,
                                                 const SparseWeights& truth) {
    if (estimate.num_nodes() != truth.num_nodes())
        throw std::invalid_argument("eval_reconstruction: node counts differ");
    std::size_t common = 0;
    double sq = 0.0;
    std::size_t uni = 0;
    estimate.for_each_edge([&](NodeId i, NodeId j, double w) {
        const double wt = truth.weight(i, j);
        if (wt != 0.0) ++common;
        sq += (w - wt) * (w - wt);
        ++uni;
    });
    truth.for_each_edge([&](NodeId i, NodeId j, double w) {
        if (!estimate.has_edge(i, j)) {
            sq += w * w;
            ++uni;
        }
    });
    ReconstructionMetrics m{};
    m.truth_edges = truth.edge_count();
    m.estimate_edges = estimate.edge_count();
    m.common_edges = common;
    m.precision = m.estimate_edges ? static_cast<double>(common) / m.estimate_edges : 1.0;
    m.recall = m.truth_edges ? static_cast<double>(common) / m.truth_edges : 1.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    m.rmse = uni ? std::sqrt(sq / static_cast<double>(uni)) : 0.0;
    return m;
}

}  // namespace netrec

#endif
