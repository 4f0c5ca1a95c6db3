// Experiment runner for the cost-sensitive robust decomposition library.
//
// Subcommands:
//   fit         train one model on a dataset split and save it
//   evaluate    load a model and report ranking metrics on a fresh split
//   experiment  full multi-seed protocol with CSV report
//   synth-check generate synthetic data and report the size trend of the
//               thresholded cost

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "csrr/experiment.hpp"
#include "csrr/model_io.hpp"
#include "csrr/synth.hpp"

namespace {

using namespace csrr;

std::string default_data_dir() {
    const char* env = std::getenv("CSRR_DATA_DIR");
    return env ? env : "data";
}

// key = value lines; '#' starts a comment. Command-line flags override.
std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            size_t b = s.find_first_not_of(" \t\r");
            size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!key.empty()) kv[key] = value;
    }
    return kv;
}

void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
    auto kv = read_config_file(path);
    auto get = [&](const std::string& k) -> const std::string* {
        auto it = kv.find(k);
        return it == kv.end() ? nullptr : &it->second;
    };
    if (auto* v = get("dataset")) cfg.dataset_path = *v;
    if (auto* v = get("format")) cfg.format = (*v == "double-colon") ? RatingFormat::DoubleColon
                                                                     : RatingFormat::Tab;
    if (auto* v = get("binarize_threshold")) cfg.binarize_threshold = std::stod(*v);
    if (auto* v = get("split_fraction")) cfg.split_fraction = std::stod(*v);
    if (auto* v = get("solver")) cfg.solver = solver_kind_from_string(*v);
    if (auto* v = get("eta")) cfg.eta = std::stod(*v);
    if (auto* v = get("lambda1")) cfg.lambda1 = std::stod(*v);
    if (auto* v = get("lambda2")) cfg.lambda2 = std::stod(*v);
    if (auto* v = get("c_p")) cfg.c_p = std::stod(*v);
    if (auto* v = get("max_iters")) cfg.max_iters = std::stoll(*v);
    if (auto* v = get("rel_tol")) cfg.rel_tol = std::stod(*v);
    if (auto* v = get("latent_dim")) cfg.latent_dim = std::stoll(*v);
    if (auto* v = get("inner_max_iters")) cfg.inner_max_iters = std::stoll(*v);
    if (auto* v = get("inner_rel_tol")) cfg.inner_rel_tol = std::stod(*v);
    if (auto* v = get("output")) cfg.output_path = *v;
    if (auto* v = get("seeds")) {
        cfg.seeds.clear();
        std::istringstream ss(*v);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.seeds.push_back(std::stoull(tok));
    }
    if (auto* v = get("cutoffs")) {
        cfg.cutoffs.clear();
        std::istringstream ss(*v);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.cutoffs.push_back(std::stoll(tok));
    }
}

struct CommonOpts {
    std::string config_file;
    std::string format_name = "tab";
    std::string solver_name = "csrr-i";
    std::vector<uint64_t> seeds;
    ExperimentConfig cfg;
};

void add_common_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_file, "key = value config file");
    cmd->add_option("--dataset", o.cfg.dataset_path, "ratings file path");
    cmd->add_option("--format", o.format_name, "tab | double-colon")
        ->check(CLI::IsMember({"tab", "double-colon"}));
    cmd->add_option("--solver", o.solver_name, "csrr-i | csrr-ii | csrr-e | poprank | csrr-i-v0");
    cmd->add_option("--binarize-threshold", o.cfg.binarize_threshold,
                    "ratings strictly above this are positives");
    cmd->add_option("--split-fraction", o.cfg.split_fraction, "per-user train fraction");
    cmd->add_option("--eta", o.cfg.eta, "gradient step size");
    cmd->add_option("--lambda1", o.cfg.lambda1, "low-rank regularizer");
    cmd->add_option("--lambda2", o.cfg.lambda2, "sparse regularizer");
    cmd->add_option("--cp", o.cfg.c_p, "positive-class cost c_p in [0.5, 0.95]");
    cmd->add_option("--max-iters", o.cfg.max_iters, "outer iteration budget");
    cmd->add_option("--rel-tol", o.cfg.rel_tol, "relative objective stopping tolerance");
    cmd->add_option("--latent-dim", o.cfg.latent_dim, "inner dimension d (csrr-e)");
    cmd->add_option("--inner-max-iters", o.cfg.inner_max_iters, "P/Q alternation budget");
    cmd->add_option("--inner-rel-tol", o.cfg.inner_rel_tol, "P/Q alternation tolerance");
    cmd->add_option("--seeds", o.seeds, "split seeds")->delimiter(',');
    cmd->add_option("--cutoffs", o.cfg.cutoffs, "ranking cutoffs N")->delimiter(',');
    cmd->add_option("--output", o.cfg.output_path, "CSV report path");
}

ExperimentConfig finalize(CommonOpts& o, CLI::App* cmd) {
    ExperimentConfig cfg = o.cfg;
    if (!o.config_file.empty()) {
        // file first, then explicit command-line values override
        ExperimentConfig from_file = o.cfg;
        apply_config_file(from_file, o.config_file);
        ExperimentConfig defaults;
        cfg = from_file;
        auto overridden = [&](const std::string& flag) { return cmd->count(flag) > 0; };
        if (overridden("--dataset")) cfg.dataset_path = o.cfg.dataset_path;
        if (overridden("--binarize-threshold")) cfg.binarize_threshold = o.cfg.binarize_threshold;
        if (overridden("--split-fraction")) cfg.split_fraction = o.cfg.split_fraction;
        if (overridden("--eta")) cfg.eta = o.cfg.eta;
        if (overridden("--lambda1")) cfg.lambda1 = o.cfg.lambda1;
        if (overridden("--lambda2")) cfg.lambda2 = o.cfg.lambda2;
        if (overridden("--cp")) cfg.c_p = o.cfg.c_p;
        if (overridden("--max-iters")) cfg.max_iters = o.cfg.max_iters;
        if (overridden("--rel-tol")) cfg.rel_tol = o.cfg.rel_tol;
        if (overridden("--latent-dim")) cfg.latent_dim = o.cfg.latent_dim;
        if (overridden("--inner-max-iters")) cfg.inner_max_iters = o.cfg.inner_max_iters;
        if (overridden("--inner-rel-tol")) cfg.inner_rel_tol = o.cfg.inner_rel_tol;
        if (overridden("--cutoffs")) cfg.cutoffs = o.cfg.cutoffs;
        if (overridden("--output")) cfg.output_path = o.cfg.output_path;
    }
    if (cmd->count("--format") || o.config_file.empty())
        cfg.format = o.format_name == "double-colon" ? RatingFormat::DoubleColon
                                                     : RatingFormat::Tab;
    if (cmd->count("--solver") || o.config_file.empty())
        cfg.solver = solver_kind_from_string(o.solver_name);
    if (!o.seeds.empty()) cfg.seeds = o.seeds;
    if (cfg.dataset_path.empty())
        cfg.dataset_path = default_data_dir() + "/ml-100k/u.data";
    return cfg;
}

int cmd_fit(const ExperimentConfig& cfg, const std::string& model_path,
            const std::string& manifest_path) {
    RatingDataset ds = parse_ratings(cfg.dataset_path, cfg.format);
    ObservationMatrix a = binarize(ds, cfg.binarize_threshold);
    uint64_t seed = cfg.seeds.front();
    Split split = split_per_user(a, cfg.split_fraction, seed);
    if (!manifest_path.empty()) write_split_manifest(split, manifest_path);

    ModelFile mf;
    if (cfg.solver == SolverKind::CsrrE) {
        BfConfig bc{make_solver_config(cfg, seed), cfg.latent_dim, cfg.inner_max_iters,
                    cfg.inner_rel_tol};
        BfState s = fit_bf(split.train, bc);
        std::cout << "final objective " << s.objective << " after " << s.iter << " iterations\n";
        mf = model_from_bf(s, bc);
    } else if (cfg.solver == SolverKind::PopRank) {
        std::cerr << "poprank has no model to fit; use `experiment`\n";
        return 2;
    } else {
        SolverConfig sc = make_solver_config(cfg, seed);
        NnmState s = fit(split.train, sc);
        std::cout << "final objective " << s.objective << " after " << s.iter << " iterations\n";
        mf = model_from_nnm(s, sc);
    }
    save_model(mf, model_path);
    std::cout << "model written to " << model_path << "\n";
    return 0;
}

int cmd_evaluate(const ExperimentConfig& cfg, const std::string& model_path) {
    ModelFile mf = load_model(model_path);
    RatingDataset ds = parse_ratings(cfg.dataset_path, cfg.format);
    ObservationMatrix a = binarize(ds, cfg.binarize_threshold);
    if (a.rows() != mf.rows || a.cols() != mf.cols)
        throw FormatError("model dims do not match dataset");
    Split split = split_per_user(a, cfg.split_fraction, mf.seed);
    MetricsReport rep = evaluate_ranking(mf.predict(), split.train, split.test, cfg.cutoffs);
    std::cout << std::fixed << std::setprecision(4);
    for (const auto& [n, v] : rep)
        std::cout << "N=" << n << "  P=" << v.precision << "  R=" << v.recall
                  << "  F1=" << v.f1 << "  NDCG=" << v.ndcg << "\n";
    return 0;
}

int cmd_experiment(const ExperimentConfig& cfg) {
    ExperimentResult res = run_experiment(cfg);
    print_report_table(cfg, res, std::cout);
    if (!cfg.output_path.empty()) {
        std::ofstream out(cfg.output_path);
        if (!out) throw ParseError("cannot write report: " + cfg.output_path);
        write_csv_report(cfg, res, out);
        std::cout << "report written to " << cfg.output_path << "\n";
    }
    return 0;
}

int cmd_synth_check(const ExperimentConfig& cfg, Index small_n, Index small_m, Index big_n,
                    Index big_m, Index rank, double outlier_frac, double rho) {
    double alpha = cfg.c_p / (1.0 - cfg.c_p);
    auto mean_loss_per_entry = [&](Index n, Index m) {
        double total = 0;
        for (uint64_t seed : cfg.seeds) {
            SyntheticTruth t = generate(n, m, rank, outlier_frac, 0.5, rho, seed);
            SolverConfig sc = make_solver_config(cfg, seed);
            NnmState s = fit(t.a, sc);
            total += thresholded_loss(predict(s), t, alpha) /
                     static_cast<double>(n * m);
        }
        return total / static_cast<double>(cfg.seeds.size());
    };
    double small = mean_loss_per_entry(small_n, small_m);
    double big = mean_loss_per_entry(big_n, big_m);
    std::cout << std::setprecision(6) << "per-entry thresholded cost  " << small_n << "x"
              << small_m << ": " << small << "   " << big_n << "x" << big_m << ": " << big
              << "\n";
    std::cout << (big <= small ? "trend holds: larger instance has lower per-entry cost\n"
                               : "trend violated\n");
    return big <= small ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cost-sensitive robust matrix decomposition for implicit feedback"};
    app.require_subcommand(1);

    CommonOpts fit_opts, eval_opts, exp_opts, synth_opts;
    std::string model_path = "model.csrr";
    std::string manifest_path;

    CLI::App* fit_cmd = app.add_subcommand("fit", "train one model and save it");
    add_common_flags(fit_cmd, fit_opts);
    fit_cmd->add_option("--model", model_path, "output model file");
    fit_cmd->add_option("--split-manifest", manifest_path, "write split audit manifest");

    CLI::App* eval_cmd = app.add_subcommand("evaluate", "evaluate a saved model");
    add_common_flags(eval_cmd, eval_opts);
    eval_cmd->add_option("--model", model_path, "model file to load")->required();

    CLI::App* exp_cmd = app.add_subcommand("experiment", "multi-seed protocol with CSV report");
    add_common_flags(exp_cmd, exp_opts);

    Index small_n = 20, small_m = 16, big_n = 80, big_m = 64, rank = 2;
    double outlier_frac = 0.02, rho = 0.5;
    CLI::App* synth_cmd = app.add_subcommand("synth-check", "synthetic size-trend check");
    add_common_flags(synth_cmd, synth_opts);
    synth_cmd->add_option("--small-n", small_n);
    synth_cmd->add_option("--small-m", small_m);
    synth_cmd->add_option("--big-n", big_n);
    synth_cmd->add_option("--big-m", big_m);
    synth_cmd->add_option("--rank", rank);
    synth_cmd->add_option("--outlier-frac", outlier_frac);
    synth_cmd->add_option("--rho", rho);

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit_cmd->parsed()) return cmd_fit(finalize(fit_opts, fit_cmd), model_path, manifest_path);
        if (eval_cmd->parsed()) return cmd_evaluate(finalize(eval_opts, eval_cmd), model_path);
        if (exp_cmd->parsed()) return cmd_experiment(finalize(exp_opts, exp_cmd));
        if (synth_cmd->parsed())
            return cmd_synth_check(finalize(synth_opts, synth_cmd), small_n, small_m, big_n,
                                   big_m, rank, outlier_frac, rho);
    } catch (const csrr::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
