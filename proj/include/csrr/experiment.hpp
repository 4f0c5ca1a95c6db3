#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "csrr/data_io.hpp"
#include "csrr/metrics.hpp"
#include "csrr/solver_bf.hpp"
#include "csrr/solver_nnm.hpp"

namespace csrr {

enum class SolverKind { CsrrI, CsrrII, CsrrE, PopRank, CsrrIV0 };

inline SolverKind solver_kind_from_string(const std::string& s) {
    if (s == "csrr-i") return SolverKind::CsrrI;
    if (s == "csrr-ii") return SolverKind::CsrrII;
    if (s == "csrr-e") return SolverKind::CsrrE;
    if (s == "poprank") return SolverKind::PopRank;
    if (s == "csrr-i-v0") return SolverKind::CsrrIV0;
    throw std::invalid_argument("unknown solver: " + s +
                                " (expected csrr-i, csrr-ii, csrr-e, poprank, csrr-i-v0)");
}

inline std::string to_string(SolverKind k) {
    switch (k) {
        case SolverKind::CsrrI: return "csrr-i";
        case SolverKind::CsrrII: return "csrr-ii";
        case SolverKind::CsrrE: return "csrr-e";
        case SolverKind::PopRank: return "poprank";
        case SolverKind::CsrrIV0: return "csrr-i-v0";
    }
    return "?";
}

struct ExperimentConfig {
    std::string dataset_path;
    RatingFormat format = RatingFormat::Tab;
    double binarize_threshold = 3.0;
    double split_fraction = 0.8;
    std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
    SolverKind solver = SolverKind::CsrrI;
    double eta = 0.1;
    double lambda1 = 2.0;
    double lambda2 = 0.1;
    double c_p = 0.9;  // alpha = c_p / (1 - c_p)
    Index max_iters = 60;
    double rel_tol = 1e-5;
    Index latent_dim = 10;
    Index inner_max_iters = 50;
    double inner_rel_tol = 1e-4;
    std::vector<Index> cutoffs{5, 10, 15};
    std::string output_path;  // CSV report; empty = stdout table only
};

inline SolverConfig make_solver_config(const ExperimentConfig& cfg, uint64_t seed) {
    SolverConfig sc;
    sc.eta = cfg.eta;
    sc.lambda1 = cfg.lambda1;
    sc.lambda2 = cfg.lambda2;
    sc.max_iters = cfg.max_iters;
    sc.rel_tol = cfg.rel_tol;
    sc.seed = seed;
    LossVariant variant =
        cfg.solver == SolverKind::CsrrII ? LossVariant::TypeII : LossVariant::TypeI;
    sc.cost = CostModel::from_costs(variant, cfg.c_p, 1.0 - cfg.c_p);
    sc.disable_v = cfg.solver == SolverKind::CsrrIV0;
    return sc;
}

/// Score matrix for one trained run.
inline Matrix train_scores(const ExperimentConfig& cfg, const ObservationMatrix& train,
                           uint64_t seed) {
    switch (cfg.solver) {
        case SolverKind::PopRank:
            return pop_rank_scores(train);
        case SolverKind::CsrrE: {
            BfConfig bc{make_solver_config(cfg, seed), cfg.latent_dim, cfg.inner_max_iters,
                        cfg.inner_rel_tol};
            return predict_bf(fit_bf(train, bc));
        }
        default:
            return predict(fit(train, make_solver_config(cfg, seed)));
    }
}

struct ExperimentResult {
    std::vector<std::pair<uint64_t, MetricsReport>> per_seed;
    MetricsReport mean;
    MetricsReport stddev;
};

/// Full protocol: binarize, per-seed split + train + rank, aggregate
/// mean and standard deviation over seeds.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       const ObservationMatrix& observations) {
    if (cfg.seeds.empty()) throw std::invalid_argument("at least one seed is required");
    ExperimentResult result;
    for (uint64_t seed : cfg.seeds) {
        Split split = split_per_user(observations, cfg.split_fraction, seed);
        Matrix scores = train_scores(cfg, split.train, seed);
        result.per_seed.emplace_back(
            seed, evaluate_ranking(scores, split.train, split.test, cfg.cutoffs));
    }
    double count = static_cast<double>(result.per_seed.size());
    for (Index n : cfg.cutoffs) {
        MetricValues mean, var;
        for (const auto& [seed, rep] : result.per_seed) {
            const MetricValues& v = rep.at(n);
            mean.precision += v.precision;
            mean.recall += v.recall;
            mean.f1 += v.f1;
            mean.ndcg += v.ndcg;
        }
        mean.precision /= count;
        mean.recall /= count;
        mean.f1 /= count;
        mean.ndcg /= count;
        for (const auto& [seed, rep] : result.per_seed) {
            const MetricValues& v = rep.at(n);
            var.precision += (v.precision - mean.precision) * (v.precision - mean.precision);
            var.recall += (v.recall - mean.recall) * (v.recall - mean.recall);
            var.f1 += (v.f1 - mean.f1) * (v.f1 - mean.f1);
            var.ndcg += (v.ndcg - mean.ndcg) * (v.ndcg - mean.ndcg);
        }
        result.mean[n] = mean;
        result.stddev[n] = MetricValues{std::sqrt(var.precision / count),
                                        std::sqrt(var.recall / count),
                                        std::sqrt(var.f1 / count),
                                        std::sqrt(var.ndcg / count)};
    }
    return result;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    RatingDataset ds = parse_ratings(cfg.dataset_path, cfg.format);
    ObservationMatrix a = binarize(ds, cfg.binarize_threshold);
    return run_experiment(cfg, a);
}

inline void write_csv_report(const ExperimentConfig& cfg, const ExperimentResult& res,
                             std::ostream& out) {
    out << "solver,seed,N,precision,recall,f1,ndcg\n";
    out << std::setprecision(10);
    for (const auto& [seed, rep] : res.per_seed)
        for (const auto& [n, v] : rep)
            out << to_string(cfg.solver) << ',' << seed << ',' << n << ',' << v.precision << ','
                << v.recall << ',' << v.f1 << ',' << v.ndcg << "\n";
    out << "# summary: mean then stddev over seeds\n";
    for (const auto& [n, v] : res.mean)
        out << to_string(cfg.solver) << ",mean," << n << ',' << v.precision << ',' << v.recall
            << ',' << v.f1 << ',' << v.ndcg << "\n";
    for (const auto& [n, v] : res.stddev)
        out << to_string(cfg.solver) << ",stddev," << n << ',' << v.precision << ',' << v.recall
            << ',' << v.f1 << ',' << v.ndcg << "\n";
}

inline void print_report_table(const ExperimentConfig& cfg, const ExperimentResult& res,
                               std::ostream& out) {
    out << "solver " << to_string(cfg.solver) << " (" << res.per_seed.size() << " seeds)\n";
    out << std::left << std::setw(6) << "N" << std::setw(20) << "P@N" << std::setw(20) << "R@N"
        << std::setw(20) << "F1@N" << std::setw(20) << "NDCG@N" << "\n";
    out << std::fixed << std::setprecision(4);
    for (const auto& [n, v] : res.mean) {
        const MetricValues& s = res.stddev.at(n);
        std::ostringstream p, r, f, d;
        p << std::fixed << std::setprecision(4) << v.precision << " +- " << s.precision;
        r << std::fixed << std::setprecision(4) << v.recall << " +- " << s.recall;
        f << std::fixed << std::setprecision(4) << v.f1 << " +- " << s.f1;
        d << std::fixed << std::setprecision(4) << v.ndcg << " +- " << s.ndcg;
        out << std::left << std::setw(6) << n << std::setw(20) << p.str() << std::setw(20)
            << r.str() << std::setw(20) << f.str() << std::setw(20) << d.str() << "\n";
    }
}

}  // namespace csrr
