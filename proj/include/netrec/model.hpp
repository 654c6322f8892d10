#ifndef NETREC_MODEL_HPP
#define NETREC_MODEL_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "netrec/common.hpp"
#include "netrec/line_search.hpp"
#include "netrec/random.hpp"
#include "netrec/sample_matrix.hpp"
#include "netrec/sparse_weights.hpp"

namespace netrec {

enum class ModelKind { ising, gaussian };
enum class DistanceMode { exact, gradient };

inline const char* to_string(ModelKind k) { return k == ModelKind::ising ? "ising" : "gaussian"; }
inline const char* to_string(DistanceMode m) { return m == DistanceMode::exact ? "exact" : "gradient"; }

struct EdgeOpt {
    double w;       // 1-D maximizer of the posterior over W_ij
    double gain;    // objective improvement over the current W_ij, >= 0
    bool warning;   // bracketing trouble; best point found is still returned
};

/// Pairwise distance cache for one search window. Distances are only valid
/// while W is frozen, so every FindBest invocation starts a new generation
/// (begin_generation), which drops all entries and the cached posterior base.
/// get_or_compute is a linearizable get-or-compute over lock-striped shards.
class DistanceCache {
public:
    explicit DistanceCache(unsigned shards = 64) : shards_(shards) {}

    void begin_generation() {
        for (auto& s : shards_) {
            std::lock_guard<std::mutex> g(s.mu);
            s.map.clear();
        }
        {
            std::lock_guard<std::mutex> g(base_mu_);
            base_set_ = false;
        }
        ++gen_;
    }

    std::uint64_t generation() const { return gen_; }

    template <class F>
    double get_or_compute(NodeId i, NodeId j, F&& compute) {
        const std::uint64_t key = pair_key(i, j);
        Shard& s = shards_[mix64(key) % shards_.size()];
        {
            std::lock_guard<std::mutex> g(s.mu);
            auto it = s.map.find(key);
            if (it != s.map.end()) {
                hits_.fetch_add(1, std::memory_order_relaxed);
                return it->second;
            }
        }
        const double v = compute();
        misses_.fetch_add(1, std::memory_order_relaxed);
        std::lock_guard<std::mutex> g(s.mu);
        return s.map.try_emplace(key, v).first->second;  // first writer wins
    }

    /// Per-generation scalar (the frozen-state log-posterior for exact mode).
    template <class F>
    double base(F&& compute) {
        std::lock_guard<std::mutex> g(base_mu_);
        if (!base_set_) {
            base_ = compute();
            base_set_ = true;
        }
        return base_;
    }

    std::uint64_t hits() const { return hits_.load(std::memory_order_relaxed); }
    std::uint64_t misses() const { return misses_.load(std::memory_order_relaxed); }

private:
    struct Shard {
        std::mutex mu;
        std::unordered_map<std::uint64_t, double> map;
    };
    std::vector<Shard> shards_;
    std::mutex base_mu_;
    bool base_set_ = false;
    double base_ = 0.0;
    std::uint64_t gen_ = 0;
    std::atomic<std::uint64_t> hits_{0}, misses_{0};
};

/// Pseudolikelihood MAP objective with a Laplace (L1) prior, for the Ising and
/// Gaussian graphical models. All evaluations drop the same state-independent
/// constants, so differences of log_posterior are exact.
///
/// Per node-sample terms:
///   ising:    x_im (m_i + theta_i) - log 2cosh(m_i + theta_i)
///   gaussian: -(X_im + theta_i^2 m_i)^2 / (2 theta_i^2) - log theta_i
/// plus -lambda |W_ij| per stored edge, with m_i the cached neighbor sums.
class PseudoLikelihood {
public:
    static constexpr double kThetaMaxIsing = 20.0;    // bounds conditionals on separable columns
    static constexpr double kThetaMinGaussian = 1e-8;
    static constexpr double kArgTol = 1e-8;           // golden-section argument tolerance

    PseudoLikelihood(ModelKind kind, double lambda, const SampleMatrix& X, SparseWeights& state)
        : kind_(kind), lambda_(lambda), x_(&X), state_(&state) {
        if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
        if (X.num_nodes() != state.num_nodes() || X.num_samples() != state.num_samples())
            throw std::invalid_argument("model: sample matrix and state shapes differ");
        if (kind == ModelKind::ising && !X.spin_valued())
            throw std::invalid_argument("ising model requires +/-1 data");
        if (kind == ModelKind::gaussian)
            for (NodeId i = 0; i < state.num_nodes(); ++i)
                if (!(state.theta(i) > 0.0))
                    throw std::invalid_argument("gaussian model requires theta > 0");
    }

    ModelKind kind() const { return kind_; }
    double lambda() const { return lambda_; }
    const SampleMatrix& samples() const { return *x_; }
    SparseWeights& state() { return *state_; }
    const SparseWeights& state() const { return *state_; }

    /// Full log-posterior (up to dropped constants), O(N*M + E) via cached sums.
    double log_posterior() const {
        count_eval();
        const SparseWeights& s = *state_;
        const int M = x_->num_samples();
        double acc = 0.0;
        for (NodeId i = 0; i < s.num_nodes(); ++i) {
            const double ti = s.theta(i);
            const auto xi = x_->row(i);
            const auto si = s.sums_row(i);
            if (kind_ == ModelKind::ising) {
                for (int m = 0; m < M; ++m) {
                    const double z = si[m] + ti;
                    acc += xi[m] * z - log_2cosh(z);
                }
            } else {
                const double t2 = ti * ti;
                double node = 0.0;
                for (int m = 0; m < M; ++m) {
                    const double r = xi[m] + t2 * si[m];
                    node += r * r;
                }
                acc += -node / (2.0 * t2) - M * std::log(ti);
            }
        }
        double prior = 0.0;
        s.for_each_edge([&](NodeId, NodeId, double w) { prior += std::fabs(w); });
        acc -= lambda_ * prior;
        if (!std::isfinite(acc)) throw std::overflow_error("log_posterior is not finite");
        return acc;
    }

    /// 1-D restriction of the log-posterior to W_ij = w: the sample terms of
    /// nodes i and j plus the (i,j) prior term. Terms constant in w are
    /// dropped consistently, so differences match log_posterior differences.
    double edge_objective(NodeId i, NodeId j, double w) const {
        Slice sl = make_slice(i, j);
        return slice_value(sl, w);
    }

    /// Analytic d log_posterior / d W_ij at the current value. The prior
    /// contributes -lambda*sign(W_ij) with sign(0) = 0, matching the central
    /// finite difference through the kink.
    double edge_gradient(NodeId i, NodeId j) const {
        check_pair(i, j);
        count_eval();
        const SparseWeights& s = *state_;
        const int M = x_->num_samples();
        const auto xi = x_->row(i), xj = x_->row(j);
        const auto si = s.sums_row(i), sj = s.sums_row(j);
        double g = 0.0;
        if (kind_ == ModelKind::ising) {
            const double ti = s.theta(i), tj = s.theta(j);
            for (int m = 0; m < M; ++m)
                g += 2.0 * xi[m] * xj[m] - xj[m] * std::tanh(si[m] + ti) -
                     xi[m] * std::tanh(sj[m] + tj);
        } else {
            const double t2i = s.theta(i) * s.theta(i);
            const double t2j = s.theta(j) * s.theta(j);
            for (int m = 0; m < M; ++m)
                g += -(xi[m] + t2i * si[m]) * xj[m] - (xj[m] + t2j * sj[m]) * xi[m];
        }
        return g - lambda_ * sign(s.weight(i, j));
    }

    /// Maximizes the 1-D restriction over W_ij. The L1 kink is resolved by the
    /// one-sided derivatives at zero before any bracketing, so exact zeros are
    /// exact; otherwise golden-section search runs on the side that can hold
    /// the optimum.
    EdgeOpt optimize_edge(NodeId i, NodeId j) const {
        Slice sl = make_slice(i, j);
        const double f_cur = slice_value(sl, sl.w_cur);
        const double g0 = slice_likelihood_derivative(sl, 0.0);
        if (std::fabs(g0) <= lambda_) {
            double gain = slice_value(sl, 0.0) - f_cur;
            if (gain < 0.0) gain = 0.0;  // float noise when w_cur == 0 already optimal
            return {0.0, gain, false};
        }
        const double dir = g0 > 0.0 ? 1.0 : -1.0;
        auto f = [&](double w) { return slice_value(sl, w); };
        LineSearchResult r = expand_and_golden_max(f, dir, kArgTol);
        if (r.bracket_failed) count_warning();
        double gain = r.f - f_cur;
        if (gain < 0.0) return {sl.w_cur, 0.0, r.bracket_failed};
        return {r.x, gain, r.bracket_failed};
    }

    /// Maximizes the log-posterior over theta_i. Ising thetas live in
    /// [-20, 20]; Gaussian thetas in [1e-8, inf), with boundary optima clamped
    /// (and counted as warnings for the Gaussian lower bound).
    double optimize_theta(NodeId i) const {
        const SparseWeights& s = *state_;
        const int M = x_->num_samples();
        if (M == 0) return s.theta(i);
        const auto xi = x_->row(i);
        const auto si = s.sums_row(i);
        if (kind_ == ModelKind::ising) {
            auto f = [&](double th) {
                count_eval();
                double acc = 0.0;
                for (int m = 0; m < M; ++m) {
                    const double z = si[m] + th;
                    acc += xi[m] * z - log_2cosh(z);
                }
                return acc;
            };
            return golden_max(f, -kThetaMaxIsing, kThetaMaxIsing, 1e-10).x;
        }
        // gaussian: the slice collapses to -A/(2 th^2) - B th^2/2 - M log th
        double A = 0.0, B = 0.0;
        for (int m = 0; m < M; ++m) {
            A += xi[m] * xi[m];
            B += si[m] * si[m];
        }
        if (A == 0.0) {
            count_warning();
            return kThetaMinGaussian;
        }
        auto f = [&](double th) {
            count_eval();
            return -A / (2.0 * th * th) - 0.5 * B * th * th - M * std::log(th);
        };
        double hi = 1.0;
        double f_prev = f(hi);
        for (int it = 0; it < 64; ++it) {
            const double f_next = f(hi * 2.0);
            hi *= 2.0;  // the maximum lies at or below the first non-improving endpoint
            if (f_next <= f_prev) break;
            f_prev = f_next;
        }
        const double th = golden_max(f, kThetaMinGaussian, hi, 1e-10).x;
        if (th <= kThetaMinGaussian * (1.0 + 1e-6)) {
            count_warning();
            return kThetaMinGaussian;
        }
        return th;
    }

    std::uint64_t likelihood_evals() const { return evals_.load(std::memory_order_relaxed); }
    std::uint64_t warning_count() const { return warnings_.load(std::memory_order_relaxed); }

private:
    struct Slice {
        NodeId i, j;
        double w_cur;
        double ti, tj;       // thetas (gaussian: squared below)
        double t2i, t2j;
        const double* xi;
        const double* xj;
        const double* bi;    // neighbor sums with the (i,j) contribution removed
        const double* bj;
        int M;
    };

    Slice make_slice(NodeId i, NodeId j) const {
        check_pair(i, j);
        const SparseWeights& s = *state_;
        const int M = x_->num_samples();
        Slice sl;
        sl.i = i;
        sl.j = j;
        sl.w_cur = s.weight(i, j);
        sl.ti = s.theta(i);
        sl.tj = s.theta(j);
        sl.t2i = sl.ti * sl.ti;
        sl.t2j = sl.tj * sl.tj;
        sl.xi = x_->row(i).data();
        sl.xj = x_->row(j).data();
        sl.M = M;
        thread_local std::vector<double> bi_buf, bj_buf;
        bi_buf.resize(static_cast<std::size_t>(M));
        bj_buf.resize(static_cast<std::size_t>(M));
        const auto si = s.sums_row(i), sj = s.sums_row(j);
        for (int m = 0; m < M; ++m) {
            bi_buf[m] = si[m] - sl.w_cur * sl.xj[m];
            bj_buf[m] = sj[m] - sl.w_cur * sl.xi[m];
        }
        sl.bi = bi_buf.data();
        sl.bj = bj_buf.data();
        return sl;
    }

    double slice_value(const Slice& sl, double w) const {
        count_eval();
        double acc = 0.0;
        if (kind_ == ModelKind::ising) {
            for (int m = 0; m < sl.M; ++m) {
                const double zi = sl.bi[m] + w * sl.xj[m] + sl.ti;
                const double zj = sl.bj[m] + w * sl.xi[m] + sl.tj;
                acc += sl.xi[m] * zi - log_2cosh(zi) + sl.xj[m] * zj - log_2cosh(zj);
            }
        } else {
            for (int m = 0; m < sl.M; ++m) {
                const double ri = sl.xi[m] + sl.t2i * (sl.bi[m] + w * sl.xj[m]);
                const double rj = sl.xj[m] + sl.t2j * (sl.bj[m] + w * sl.xi[m]);
                acc += -ri * ri / (2.0 * sl.t2i) - rj * rj / (2.0 * sl.t2j);
            }
        }
        acc -= lambda_ * std::fabs(w);
        if (!std::isfinite(acc)) throw std::overflow_error("edge objective is not finite");
        return acc;
    }

    // derivative of the likelihood part of the slice (prior excluded)
    double slice_likelihood_derivative(const Slice& sl, double w) const {
        count_eval();
        double g = 0.0;
        if (kind_ == ModelKind::ising) {
            for (int m = 0; m < sl.M; ++m) {
                const double zi = sl.bi[m] + w * sl.xj[m] + sl.ti;
                const double zj = sl.bj[m] + w * sl.xi[m] + sl.tj;
                g += 2.0 * sl.xi[m] * sl.xj[m] - sl.xj[m] * std::tanh(zi) -
                     sl.xi[m] * std::tanh(zj);
            }
        } else {
            for (int m = 0; m < sl.M; ++m) {
                const double ri = sl.xi[m] + sl.t2i * (sl.bi[m] + w * sl.xj[m]);
                const double rj = sl.xj[m] + sl.t2j * (sl.bj[m] + w * sl.xi[m]);
                g += -ri * sl.xj[m] - rj * sl.xi[m];
            }
        }
        return g;
    }

    void check_pair(NodeId i, NodeId j) const {
        if (i == j) throw std::invalid_argument("pair operations need i != j");
        if (i < 0 || j < 0 || i >= state_->num_nodes() || j >= state_->num_nodes())
            throw std::out_of_range("node id out of range");
    }

    void count_eval() const { evals_.fetch_add(1, std::memory_order_relaxed); }
    void count_warning() const { warnings_.fetch_add(1, std::memory_order_relaxed); }

    ModelKind kind_;
    double lambda_;
    const SampleMatrix* x_;
    SparseWeights* state_;
    mutable std::atomic<std::uint64_t> evals_{0};
    mutable std::atomic<std::uint64_t> warnings_{0};
};

/// Candidate score d(i,j) for the frozen state. Exact mode is the negated
/// best reachable log-posterior over W_ij, -(log_posterior + gain); gradient
/// mode is -|d log_posterior / d W_ij|, a cheaper proxy. Memoized per cache
/// generation.
inline double distance(const PseudoLikelihood& model, NodeId i, NodeId j, DistanceMode mode,
                       DistanceCache& cache) {
    return cache.get_or_compute(i, j, [&] {
        if (mode == DistanceMode::exact) {
            const double base = cache.base([&] { return model.log_posterior(); });
            return -(base + model.optimize_edge(i, j).gain);
        }
        return -std::fabs(model.edge_gradient(i, j));
    });
}

/// Callable oracle binding model + cache + mode, for the search algorithms.
class ModelDistance {
public:
    ModelDistance(const PseudoLikelihood& model, DistanceCache& cache, DistanceMode mode)
        : model_(&model), cache_(&cache), mode_(mode) {}
    double operator()(NodeId i, NodeId j) const { return distance(*model_, i, j, mode_, *cache_); }
    DistanceCache& cache() const { return *cache_; }

private:
    const PseudoLikelihood* model_;
    DistanceCache* cache_;
    DistanceMode mode_;
};

/// Empty reconstruction state W = 0 with the model's theta convention:
/// zeros for Ising, per-row RMS for Gaussian (the single-node maximizer).
inline SparseWeights make_empty_state(ModelKind kind, const SampleMatrix& X) {
    SparseWeights s(X.num_nodes(), X.num_samples());
    if (kind == ModelKind::gaussian) {
        const int M = X.num_samples();
        for (NodeId i = 0; i < X.num_nodes(); ++i) {
            double a = 0.0;
            for (int m = 0; m < M; ++m) a += X(i, m) * X(i, m);
            const double rms = M > 0 ? std::sqrt(a / M) : 1.0;
            s.set_theta(i, std::max(rms, PseudoLikelihood::kThetaMinGaussian));
        }
    }
    return s;
}

}  // namespace netrec

#endif
