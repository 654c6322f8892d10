// netrec: sparse network reconstruction from observational data.
//
// Subcommands compose through files: generate a ground-truth network, sample
// observations from it, reconstruct a network from the samples, evaluate the
// estimate against the truth, and run the benchmark harnesses.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "netrec/netrec.hpp"

using namespace netrec;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNotConverged = 3;

ModelKind parse_kind(const std::string& s) {
    if (s == "ising") return ModelKind::ising;
    if (s == "gaussian") return ModelKind::gaussian;
    throw CLI::ValidationError("--model must be ising or gaussian");
}

DistanceMode parse_mode(const std::string& s) {
    if (s == "exact") return DistanceMode::exact;
    if (s == "gradient") return DistanceMode::gradient;
    throw CLI::ValidationError("--distance must be exact or gradient");
}

void require_input(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw std::runtime_error("input file does not exist: " + path);
}

std::string config_line(const std::string& text) { return "# config: " + text + "\n"; }

int cmd_generate(NodeId n, double mean_deg, double mu, double sigma, double eps,
                 std::uint64_t seed, const std::string& out) {
    GeneratorSpec gs{n, mean_deg, mu, sigma, eps, seed};
    const SparseWeights truth = gen_er_precision(gs);
    write_weights(truth, out);
    std::printf("generate: n=%d edges=%zu -> %s\n", n, truth.edge_count(), out.c_str());
    return 0;
}

int cmd_sample(const std::string& truth_path, const std::string& model, int m, int burn_in,
               int thin, std::uint64_t seed, const std::string& out) {
    require_input(truth_path);
    const SparseWeights truth = read_weights(truth_path);
    const ModelKind kind = parse_kind(model);
    SampleMatrix x = kind == ModelKind::gaussian
                         ? sample_gaussian(truth, m, seed)
                         : sample_ising(truth, m, GibbsParams{burn_in, thin}, seed);
    write_samples(x, out);
    std::printf("sample: %s n=%d m=%d -> %s\n", model.c_str(), truth.num_nodes(), m, out.c_str());
    return 0;
}

int cmd_reconstruct(const std::string& in, const std::string& out, const std::string& trace_path,
                    const std::string& model, const std::string& algorithm, double lambda,
                    double kappa, double eps, const std::string& distance, std::uint64_t seed,
                    int threads, int max_iters) {
    require_input(in);
    const SampleMatrix x = read_samples(in);
    const ModelKind kind = parse_kind(model);
    SparseWeights state = make_empty_state(kind, x);
    PseudoLikelihood objective(kind, lambda, x, state);

    ReconstructionResult res;
    if (algorithm == "cd") {
        res = reconstruct_cd(objective, eps, max_iters, threads);
    } else if (algorithm == "gcd") {
        ReconstructionConfig rc;
        rc.kappa = kappa;
        rc.eps = eps;
        rc.max_iters = max_iters;
        rc.mode = parse_mode(distance);
        rc.seed = seed;
        rc.threads = threads;
        res = reconstruct_gcd(objective, rc);
    } else {
        throw CLI::ValidationError("--algorithm must be gcd or cd");
    }
    write_weights(state, out);
    if (!trace_path.empty()) atomic_write(trace_path, trace_to_text(res.trace));
    std::printf("reconstruct: %s/%s iters=%zu edges=%zu objective=%.10g converged=%d\n",
                algorithm.c_str(), model.c_str(), res.trace.iterations.size(),
                state.edge_count(), objective.log_posterior(), res.converged ? 1 : 0);
    if (objective.warning_count() > 0)
        std::fprintf(stderr, "reconstruct: %llu optimization warnings\n",
                     static_cast<unsigned long long>(objective.warning_count()));
    return res.converged ? 0 : kExitNotConverged;
}

int cmd_eval(const std::string& est_path, const std::string& truth_path, const std::string& out) {
    require_input(est_path);
    require_input(truth_path);
    const SparseWeights est = read_weights(est_path);
    const SparseWeights truth = read_weights(truth_path);
    const ReconstructionMetrics m = eval_reconstruction(est, truth);
    std::ostringstream table;
    table << config_line("eval estimate=" + est_path + " truth=" + truth_path);
    table << "precision\trecall\tf1\trmse\ttruth_edges\testimate_edges\tcommon\n";
    char row[256];
    std::snprintf(row, sizeof(row), "%.6f\t%.6f\t%.6f\t%.17g\t%zu\t%zu\t%zu\n", m.precision,
                  m.recall, m.f1, m.rmse, m.truth_edges, m.estimate_edges, m.common_edges);
    table << row;
    if (out.empty())
        std::fputs(table.str().c_str(), stdout);
    else
        atomic_write(out, table.str());
    return 0;
}

int cmd_scaling(const std::vector<NodeId>& n_list, const std::vector<double>& kappas, int seeds,
                int m_samples, double lambda, const std::string& distance, double knn_eps,
                int threads, const std::string& out) {
    BenchModelConfig cfg;
    cfg.lambda = lambda;
    cfg.mode = parse_mode(distance);
    cfg.knn_eps = knn_eps;
    cfg.threads = threads;
    const ScalingReport rep = bench_findbest_scaling(n_list, kappas, seeds, m_samples, cfg);
    std::ostringstream table;
    std::ostringstream cfgs;
    cfgs << "scaling-bench seeds=" << seeds << " M=" << m_samples << " lambda=" << lambda
         << " distance=" << distance;
    table << config_line(cfgs.str());
    table << "n\tkappa\tseed\tseconds\tdist_evals\tlevels\thalving_ok\n";
    for (const auto& r : rep.rows) {
        char row[256];
        std::snprintf(row, sizeof(row), "%d\t%g\t%llu\t%.6f\t%llu\t%d\t%d\n", r.n, r.kappa,
                      static_cast<unsigned long long>(r.seed), r.seconds,
                      static_cast<unsigned long long>(r.dist_evals), r.levels,
                      r.halving_ok ? 1 : 0);
        table << row;
    }
    for (const auto& [kappa, expo] : rep.exponent) {
        table << "# fitted_exponent kappa=" << kappa << ": " << expo << "\n";
        std::printf("scaling-bench: kappa=%g fitted exponent %.4f (halving %s)\n", kappa, expo,
                    rep.all_halving_ok ? "ok" : "VIOLATED");
    }
    if (out.empty())
        std::fputs(table.str().c_str(), stdout);
    else
        atomic_write(out, table.str());
    return rep.all_halving_ok ? 0 : kExitData;
}

int cmd_recall(NodeId n, const std::vector<double>& kappas, int seeds, int m_samples,
               double lambda, const std::string& distance, int threads, const std::string& out) {
    BenchModelConfig cfg;
    cfg.lambda = lambda;
    cfg.mode = parse_mode(distance);
    cfg.threads = threads;
    const RecallReport rep = bench_recall(n, kappas, seeds, m_samples, cfg);
    std::ostringstream table;
    std::ostringstream cfgs;
    cfgs << "recall-bench n=" << n << " seeds=" << seeds << " M=" << m_samples
         << " lambda=" << lambda << " distance=" << distance;
    table << config_line(cfgs.str());
    table << "kappa\trank\tmean_recall\n";
    for (std::size_t ki = 0; ki < rep.kappas.size(); ++ki)
        for (std::size_t r = 0; r < rep.mean_curves[ki].size(); ++r) {
            char row[128];
            std::snprintf(row, sizeof(row), "%g\t%zu\t%.6f\n", rep.kappas[ki], r + 1,
                          rep.mean_curves[ki][r]);
            table << row;
        }
    for (std::size_t ki = 0; ki < rep.kappas.size(); ++ki) {
        double r1 = 0;
        for (double v : rep.rank1_by_seed[ki]) r1 += v;
        std::printf("recall-bench: kappa=%g mean rank-1 recall %.3f\n", rep.kappas[ki],
                    r1 / rep.rank1_by_seed[ki].size());
    }
    if (out.empty())
        std::fputs(table.str().c_str(), stdout);
    else
        atomic_write(out, table.str());
    return 0;
}

int cmd_convergence(NodeId n, int m_samples, const std::vector<double>& kappas, bool with_cd,
                    double lambda, const std::string& distance, double eps, int max_iters,
                    std::uint64_t seed, int threads, const std::string& out) {
    BenchModelConfig cfg;
    cfg.lambda = lambda;
    cfg.mode = parse_mode(distance);
    cfg.threads = threads;
    const auto runs = bench_convergence(n, m_samples, kappas, with_cd, eps, max_iters, seed, cfg);
    std::ostringstream table;
    std::ostringstream cfgs;
    cfgs << "convergence-bench n=" << n << " M=" << m_samples << " lambda=" << lambda
         << " distance=" << distance << " seed=" << seed;
    table << config_line(cfgs.str());
    table << "algorithm\tkappa\titer\tdelta\tseconds\tcandidates\tobjective\n";
    for (const auto& run : runs) {
        for (const auto& it : run.result.trace.iterations) {
            char row[256];
            std::snprintf(row, sizeof(row), "%s\t%g\t%d\t%.17g\t%.6f\t%zu\t%.17g\n",
                          run.label.c_str(), run.kappa, it.iter, it.delta, it.seconds,
                          it.candidates, it.objective);
            table << row;
        }
        std::printf("convergence-bench: %s kappa=%g iters=%zu total=%.2fs objective=%.10g\n",
                    run.label.c_str(), run.kappa, run.result.trace.iterations.size(),
                    run.total_seconds, run.final_objective);
    }
    if (out.empty())
        std::fputs(table.str().c_str(), stdout);
    else
        atomic_write(out, table.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse network reconstruction in subquadratic time"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "generate a ground-truth precision network");
    NodeId g_n = 100;
    double g_deg = 5.0, g_mu = -1e3, g_sigma = 10.0, g_eps = 1e-3;
    std::uint64_t g_seed = 0;
    std::string g_out;
    gen->add_option("--n", g_n, "nodes")->required();
    gen->add_option("--mean-deg", g_deg, "mean degree");
    gen->add_option("--mu", g_mu, "weight mean");
    gen->add_option("--sigma", g_sigma, "weight stddev");
    gen->add_option("--eps", g_eps, "diagonal dominance slack in (0,1)");
    gen->add_option("--seed", g_seed, "rng seed");
    gen->add_option("--out", g_out, "output edge list")->required();

    // sample
    auto* smp = app.add_subcommand("sample", "draw samples from a ground-truth network");
    std::string s_truth, s_model = "gaussian", s_out;
    int s_m = 100, s_burn = 1000, s_thin = 10;
    std::uint64_t s_seed = 0;
    smp->add_option("--truth", s_truth, "ground-truth edge list")->required();
    smp->add_option("--model", s_model, "ising|gaussian");
    smp->add_option("--m", s_m, "number of samples")->required();
    smp->add_option("--burn-in", s_burn, "Gibbs burn-in sweeps (ising)");
    smp->add_option("--thin", s_thin, "Gibbs sweeps between samples (ising)");
    smp->add_option("--seed", s_seed, "rng seed");
    smp->add_option("--out", s_out, "output sample matrix")->required();

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct", "reconstruct a network from samples");
    std::string r_in, r_out, r_trace, r_model = "gaussian", r_alg = "gcd", r_dist = "exact";
    double r_lambda = 0.0, r_kappa = 1.0, r_eps = -1.0;
    std::uint64_t r_seed = 0;
    int r_threads = 1, r_max = 1000;
    rec->add_option("--in", r_in, "sample matrix")->required();
    rec->add_option("--out", r_out, "output edge list")->required();
    rec->add_option("--trace", r_trace, "per-iteration trace output");
    rec->add_option("--model", r_model, "ising|gaussian");
    rec->add_option("--algorithm", r_alg, "gcd|cd");
    rec->add_option("--l1", r_lambda, "L1 penalty lambda");
    rec->add_option("--kappa", r_kappa, "greediness factor");
    rec->add_option("--eps", r_eps, "convergence criterion (default 1e-6*N)");
    rec->add_option("--distance", r_dist, "exact|gradient");
    rec->add_option("--seed", r_seed, "rng seed");
    rec->add_option("--threads", r_threads, "worker threads");
    rec->add_option("--max-iters", r_max, "iteration cap");

    // eval
    auto* evl = app.add_subcommand("eval", "compare an estimate against ground truth");
    std::string e_est, e_truth, e_out;
    evl->add_option("--estimate", e_est, "estimated edge list")->required();
    evl->add_option("--truth", e_truth, "ground-truth edge list")->required();
    evl->add_option("--out", e_out, "output table (stdout if omitted)");

    // scaling-bench
    auto* scl = app.add_subcommand("scaling-bench", "FindBest runtime scaling");
    std::vector<NodeId> b_n;
    std::vector<double> b_kappa{1.0};
    int b_seeds = 10, b_m = 10, b_threads = 1;
    double b_lambda = 0.0, b_knn_eps = 1e-3;
    std::string b_dist = "gradient", b_out;
    scl->add_option("--n-list", b_n, "node counts, increasing")->required();
    scl->add_option("--kappa-list", b_kappa, "kappa values");
    scl->add_option("--seeds", b_seeds, "instances per point");
    scl->add_option("--m-samples", b_m, "samples per instance");
    scl->add_option("--l1", b_lambda, "L1 penalty");
    scl->add_option("--distance", b_dist, "exact|gradient");
    scl->add_option("--knn-eps", b_knn_eps, "NNDescent convergence eps");
    scl->add_option("--threads", b_threads, "worker threads");
    scl->add_option("--out", b_out, "output table");

    // recall-bench
    auto* rcl = app.add_subcommand("recall-bench", "FindBest recall curves");
    NodeId c_n = 500;
    std::vector<double> c_kappa{1.0, 5.0};
    int c_seeds = 10, c_m = 100, c_threads = 1;
    double c_lambda = 0.0;
    std::string c_dist = "exact", c_out;
    rcl->add_option("--n", c_n, "nodes (exhaustive oracle is O(N^2))");
    rcl->add_option("--kappa-list", c_kappa, "kappa values");
    rcl->add_option("--seeds", c_seeds, "instances");
    rcl->add_option("--m-samples", c_m, "samples per instance");
    rcl->add_option("--l1", c_lambda, "L1 penalty");
    rcl->add_option("--distance", c_dist, "exact|gradient");
    rcl->add_option("--threads", c_threads, "worker threads");
    rcl->add_option("--out", c_out, "output table");

    // convergence-bench
    auto* cvg = app.add_subcommand("convergence-bench", "CD/GCD convergence traces");
    NodeId v_n = 1000;
    std::vector<double> v_kappa{1.0};
    int v_m = 100, v_max = 1000, v_threads = 1;
    double v_lambda = 0.0, v_eps = -1.0;
    bool v_cd = false;
    std::uint64_t v_seed = 0;
    std::string v_dist = "gradient", v_out;
    cvg->add_option("--n", v_n, "nodes");
    cvg->add_option("--m-samples", v_m, "samples");
    cvg->add_option("--kappa-list", v_kappa, "kappa values");
    cvg->add_flag("--with-cd", v_cd, "include the CD baseline");
    cvg->add_option("--l1", v_lambda, "L1 penalty");
    cvg->add_option("--distance", v_dist, "exact|gradient");
    cvg->add_option("--eps", v_eps, "convergence criterion (default 1e-6*N)");
    cvg->add_option("--max-iters", v_max, "iteration cap");
    cvg->add_option("--seed", v_seed, "rng seed");
    cvg->add_option("--threads", v_threads, "worker threads");
    cvg->add_option("--out", v_out, "output table");

    try {
        app.parse(argc, argv);
        if (*gen) return cmd_generate(g_n, g_deg, g_mu, g_sigma, g_eps, g_seed, g_out);
        if (*smp) return cmd_sample(s_truth, s_model, s_m, s_burn, s_thin, s_seed, s_out);
        if (*rec)
            return cmd_reconstruct(r_in, r_out, r_trace, r_model, r_alg, r_lambda, r_kappa,
                                   r_eps, r_dist, r_seed, r_threads, r_max);
        if (*evl) return cmd_eval(e_est, e_truth, e_out);
        if (*scl)
            return cmd_scaling(b_n, b_kappa, b_seeds, b_m, b_lambda, b_dist, b_knn_eps,
                               b_threads, b_out);
        if (*rcl) return cmd_recall(c_n, c_kappa, c_seeds, c_m, c_lambda, c_dist, c_threads, c_out);
        if (*cvg)
            return cmd_convergence(v_n, v_m, v_kappa, v_cd, v_lambda, v_dist, v_eps, v_max,
                                   v_seed, v_threads, v_out);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitUsage;
}
