// Command-line driver: simulate / train / evaluate / select / replicate.
// Commands are plain functions over a parsed run configuration so they can be
// exercised directly from tests; main() is a thin argv wrapper.
#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "deepmrc/checkpoint.hpp"
#include "deepmrc/core.hpp"
#include "deepmrc/data.hpp"
#include "deepmrc/metrics.hpp"
#include "deepmrc/train.hpp"

namespace deepmrc {

struct RunConfig {
    std::optional<SimSpec> simulate;
    int n_valid = 0;  // simulate mode; 0 means same as n
    int n_test = 0;
    std::optional<std::string> data_path;
    std::optional<std::string> truth_path;
    double split_train = 0.7, split_valid = 0.1, split_test = 0.2;

    NetworkArchitecture arch{0, {64, 32}, 0.1};
    TrainConfig train;
    bool standardize = true;
    std::optional<TuneGrid> grid;

    std::vector<int> top_k;  // requested TOP-k counts; needs truth
    bool top_k_explicit = false;

    std::string output_dir = "out";
    std::uint64_t seed = 1;
    int replicates = 1;
};

inline ErrorKind parse_error_kind(const std::string& name, SimModel model) {
    if (name == "auto" || name.empty()) return default_error_kind(model);
    if (name == "normal") return ErrorKind::Normal;
    if (name == "contaminated") return ErrorKind::Contaminated;
    throw ConfigError("unknown error kind: " + name);
}

inline RunConfig parse_run_config(const json& j) {
    RunConfig rc;
    try {
        if (j.contains("simulate") == j.contains("data"))
            throw ConfigError("config must contain exactly one of 'simulate' or 'data'");

        if (j.contains("simulate")) {
            const auto& s = j["simulate"];
            SimSpec spec;
            spec.model = parse_sim_model(s.at("model").get<std::string>());
            spec.n = s.value("n", 1000);
            spec.p = s.value("p", 15);
            spec.rho = s.value("rho", 0.3);
            spec.error = parse_error_kind(s.value("error", "auto"), spec.model);
            rc.simulate = spec;
            rc.n_valid = s.value("n_valid", 0);
            rc.n_test = s.value("n_test", 0);
        } else {
            const auto& d = j["data"];
            rc.data_path = d.at("path").get<std::string>();
            if (d.contains("truth")) rc.truth_path = d["truth"].get<std::string>();
            if (d.contains("split")) {
                const auto sp = d["split"].get<std::vector<double>>();
                if (sp.size() != 3) throw ConfigError("data.split must have three fractions");
                rc.split_train = sp[0];
                rc.split_valid = sp[1];
                rc.split_test = sp[2];
            }
        }

        if (j.contains("arch")) {
            const auto& a = j["arch"];
            rc.arch.hidden_widths = a.value("hidden_widths", std::vector<int>{64, 32});
            rc.arch.dropout_rate = a.value("dropout", 0.1);
        }

        if (j.contains("train")) {
            const auto& t = j["train"];
            const std::string loss = t.value("loss", "drelu-rank");
            if (loss == "drelu-rank") {
                rc.train.loss_kind = LossKind::Rank;
            } else if (loss == "rank-exact-eval") {
                throw ConfigError("the exact rank objective is not differentiable; train with drelu-rank");
            } else {
                rc.train.loss_kind = LossKind::Baseline;
                rc.train.baseline.kind = parse_baseline_kind(loss);
                rc.train.baseline.iota = BaselineLossSpec::default_iota(rc.train.baseline.kind);
                if (t.contains("iota")) rc.train.baseline.iota = t["iota"].get<double>();
            }
            rc.train.surrogate.kind = parse_surrogate_kind(t.value("surrogate", "drelu"));
            rc.train.surrogate.omega = t.value("omega", 0.5);
            rc.train.lambda = t.value("lambda", 0.0);
            rc.train.batch_size = t.value("batch_size", 100);
            rc.train.max_epochs = t.value("max_epochs", 200);
            rc.standardize = t.value("standardize", true);
            if (t.contains("omega_grid") || t.contains("lambda_grid")) {
                TuneGrid g;
                if (t.contains("omega_grid")) g.omegas = t["omega_grid"].get<Vec>();
                if (t.contains("lambda_grid")) g.lambdas = t["lambda_grid"].get<Vec>();
                rc.grid = std::move(g);
            }
        }

        if (j.contains("optimizer")) {
            const auto& o = j["optimizer"];
            auto& oc = rc.train.optimizer;
            oc.learning_rate = o.value("lr", oc.learning_rate);
            oc.beta1 = o.value("beta1", oc.beta1);
            oc.beta2 = o.value("beta2", oc.beta2);
            oc.epsilon = o.value("epsilon", oc.epsilon);
            oc.weight_decay = o.value("weight_decay", oc.weight_decay);
            oc.lr_decay_factor = o.value("lr_decay_factor", oc.lr_decay_factor);
            oc.lr_decay_every = o.value("lr_decay_every", oc.lr_decay_every);
            oc.patience = o.value("patience", oc.patience);
        }

        if (j.contains("metrics") && j["metrics"].contains("top_k")) {
            rc.top_k = j["metrics"]["top_k"].get<std::vector<int>>();
            rc.top_k_explicit = true;
        }

        rc.output_dir = j.value("output_dir", "out");
        rc.seed = j.value("seed", std::uint64_t{1});
        rc.replicates = j.value("replicates", 1);
        if (rc.replicates < 1) throw ConfigError("replicates must be >= 1");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }

    rc.train.validate();
    if (rc.simulate) rc.simulate->validate();
    return rc;
}

namespace detail {

inline constexpr std::uint64_t kTrainDataSalt = 11;
inline constexpr std::uint64_t kValidDataSalt = 12;
inline constexpr std::uint64_t kTestDataSalt = 13;
inline constexpr std::uint64_t kSplitSalt = 14;
inline constexpr std::uint64_t kFitSalt = 20;

}  // namespace detail

struct Experiment {
    Dataset train, valid, test;
    std::optional<Standardizer> standardizer;
    bool censored = false;
    std::optional<TruthInfo> truth;
};

// Materialize the three splits for one run, either by simulation (three
// independently seeded draws) or by splitting a CSV file.
inline Experiment prepare_experiment(const RunConfig& rc, std::uint64_t run_seed) {
    Experiment ex;
    if (rc.simulate) {
        SimSpec spec = *rc.simulate;
        spec.seed = derive_seed(run_seed, detail::kTrainDataSalt);
        ex.train = gen_model(spec);
        SimSpec vs = spec;
        vs.n = rc.n_valid > 0 ? rc.n_valid : spec.n;
        vs.seed = derive_seed(run_seed, detail::kValidDataSalt);
        ex.valid = gen_model(vs);
        SimSpec ts = spec;
        ts.n = rc.n_test > 0 ? rc.n_test : spec.n;
        ts.seed = derive_seed(run_seed, detail::kTestDataSalt);
        ex.test = gen_model(ts);
        ex.truth = ex.train.truth;
    } else {
        const Dataset full = load_csv(*rc.data_path);
        auto parts = split(full, rc.split_train, rc.split_valid, rc.split_test,
                           derive_seed(run_seed, detail::kSplitSalt));
        ex.train = std::move(parts.train);
        ex.valid = std::move(parts.valid);
        ex.test = std::move(parts.test);
        if (rc.truth_path) {
            const json tj = read_json_file(*rc.truth_path);
            TruthInfo t;
            t.model = tj.value("model", "");
            for (int q : tj.at("important").get<std::vector<int>>()) t.important.push_back(q - 1);
            ex.truth = std::move(t);
        }
    }
    ex.censored = ex.train.delta.has_value();
    if (rc.standardize) {
        Standardizer st = Standardizer::fit(ex.train);
        st.apply(ex.train);
        st.apply(ex.valid);
        st.apply(ex.test);
        ex.standardizer = std::move(st);
    }
    return ex;
}

// Test-set evaluation of a fitted model: calibrated losses, the scenario rank
// metric, and selection counts when ground truth is known. Censored scenarios
// restrict the pointwise losses and calibration to uncensored samples.
inline MetricsReport evaluate_fit(const FitResult& fr, const Dataset& test,
                                  const std::optional<TruthInfo>& truth,
                                  const std::vector<int>& top_k_list) {
    const Vec scores = predict_scores(fr, test.X);
    Vec yhat(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        yhat[i] = fr.calibration_slope * scores[i] + fr.calibration_intercept;

    MetricsReport report;
    report.n_test = static_cast<int>(test.n());
    if (test.delta) {
        report.rank_is_cindex = true;
        report.rank = c_index(test.y, *test.delta, scores);
        Vec ys, yh;
        for (std::size_t i = 0; i < test.n(); ++i)
            if ((*test.delta)[i] == 1) {
                ys.push_back(test.y[i]);
                yh.push_back(yhat[i]);
            }
        if (ys.size() < 1) throw DataError("no uncensored test samples");
        const auto losses = prediction_losses(ys, yh);
        report.mse = losses.mse;
        report.lad = losses.lad;
        report.cauchy = losses.cauchy;
        report.huber = losses.huber;
        std::size_t censored_count = 0;
        for (int d : *test.delta) censored_count += d == 0 ? 1 : 0;
        report.censoring_fraction = static_cast<double>(censored_count) / static_cast<double>(test.n());
    } else {
        report.rank = spearman(test.y, scores);
        const auto losses = prediction_losses(test.y, yhat);
        report.mse = losses.mse;
        report.lad = losses.lad;
        report.cauchy = losses.cauchy;
        report.huber = losses.huber;
    }

    if (truth && !truth->important.empty()) {
        const Vec norms = first_layer_norms(fr.best_params);
        for (int k : top_k_list) {
            if (k > static_cast<int>(norms.size())) continue;
            if (k == 10) report.top10 = top_k(norms, truth->important, k);
            if (k == 20) report.top20 = top_k(norms, truth->important, k);
        }
    }

    if (fr.threshold && is_binary(test.y))
        report.classification_err = classification_error(test.y, scores, *fr.threshold);
    return report;
}

struct RunOutcome {
    FitResult fit;
    MetricsReport report;
};

inline RunOutcome run_single(const RunConfig& rc, std::uint64_t run_seed) {
    Experiment ex = prepare_experiment(rc, run_seed);
    NetworkArchitecture arch = rc.arch;
    arch.input_dim = static_cast<int>(ex.train.p());

    TrainConfig tc = rc.train;
    tc.censored = ex.censored;
    tc.seed = derive_seed(run_seed, detail::kFitSalt);
    if (tc.batch_size > static_cast<int>(ex.train.n()))
        tc.batch_size = static_cast<int>(ex.train.n());

    RunOutcome out;
    if (rc.grid) {
        out.fit = tune(ex.train, ex.valid, arch, *rc.grid, tc).fit;
    } else {
        out.fit = fit(ex.train, ex.valid, arch, tc);
    }

    std::vector<int> topk = rc.top_k;
    if (!rc.top_k_explicit && ex.truth &&
        ex.train.p() > ex.truth->important.size())
        topk = {10, 20};
    out.report = evaluate_fit(out.fit, ex.test, ex.truth, topk);
    return out;
}

inline int cmd_simulate(const std::string& model, int n, int p, double rho, const std::string& error,
                        std::uint64_t seed, const std::string& out_path) {
    SimSpec spec;
    spec.model = parse_sim_model(model);
    spec.n = n;
    spec.p = p;
    spec.rho = rho;
    spec.error = parse_error_kind(error, spec.model);
    spec.seed = seed;
    spec.validate();

    const Dataset ds = gen_model(spec);
    save_csv(ds, out_path);

    std::string truth_path = out_path;
    if (truth_path.size() > 4 && truth_path.substr(truth_path.size() - 4) == ".csv")
        truth_path = truth_path.substr(0, truth_path.size() - 4);
    truth_path += ".truth.json";
    write_json_file(truth_to_json(*ds.truth, seed), truth_path);

    std::cout << "wrote " << out_path << " (" << ds.n() << " rows, " << ds.p() << " features"
              << (ds.delta ? ", censored" : "") << ") and " << truth_path << "\n";
    return 0;
}

inline int cmd_train(const RunConfig& rc) {
    std::filesystem::create_directories(rc.output_dir);
    const auto outdir = std::filesystem::path(rc.output_dir);

    Experiment ex = prepare_experiment(rc, rc.seed);
    NetworkArchitecture arch = rc.arch;
    arch.input_dim = static_cast<int>(ex.train.p());
    TrainConfig tc = rc.train;
    tc.censored = ex.censored;
    tc.seed = derive_seed(rc.seed, detail::kFitSalt);
    if (tc.batch_size > static_cast<int>(ex.train.n()))
        tc.batch_size = static_cast<int>(ex.train.n());

    FitResult fr = rc.grid ? tune(ex.train, ex.valid, arch, *rc.grid, tc).fit
                           : fit(ex.train, ex.valid, arch, tc);

    Checkpoint ck;
    ck.arch = fr.arch;
    ck.params = fr.best_params;
    ck.seed = rc.seed;
    ck.calibration = {{fr.calibration_slope, fr.calibration_intercept}};
    ck.threshold = fr.threshold;
    ck.standardization = ex.standardizer;
    save_checkpoint(ck, (outdir / "checkpoint.json").string());
    write_json_file(history_to_json(fr), (outdir / "history.json").string());
    write_json_file(selection_to_json(fr, ex.train.names), (outdir / "selection.json").string());

    if (rc.simulate) {
        // Persist the generated splits (unstandardized would be preferable for
        // re-use, so regenerate them raw) plus the truth sidecar.
        RunConfig raw = rc;
        raw.standardize = false;
        Experiment raw_ex = prepare_experiment(raw, rc.seed);
        save_csv(raw_ex.train, (outdir / "train.csv").string());
        save_csv(raw_ex.valid, (outdir / "valid.csv").string());
        save_csv(raw_ex.test, (outdir / "test.csv").string());
        write_json_file(truth_to_json(*raw_ex.truth, rc.seed), (outdir / "truth.json").string());
    }

    std::vector<int> topk = rc.top_k;
    if (!rc.top_k_explicit && ex.truth && ex.train.p() > ex.truth->important.size()) topk = {10, 20};
    const MetricsReport report = evaluate_fit(fr, ex.test, ex.truth, topk);
    write_json_file(report_to_json(report), (outdir / "report.json").string());

    std::cout << "best epoch " << fr.best_epoch << ", " << fr.selected.size()
              << " selected inputs; outputs in " << rc.output_dir << "\n";
    return 0;
}

inline int cmd_evaluate(const std::string& checkpoint_path, const std::string& data_path,
                        const std::optional<std::string>& truth_path,
                        const std::optional<std::string>& out_path) {
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    Dataset data = load_csv(data_path);
    if (data.p() != static_cast<std::size_t>(ck.arch.input_dim))
        throw DataError("checkpoint expects " + std::to_string(ck.arch.input_dim) +
                        " features, data has " + std::to_string(data.p()));
    if (ck.standardization) ck.standardization->apply(data);

    FitResult fr;
    fr.arch = ck.arch;
    fr.best_params = ck.params;
    fr.calibration_slope = ck.calibration ? ck.calibration->first : 1.0;
    fr.calibration_intercept = ck.calibration ? ck.calibration->second : 0.0;
    fr.threshold = ck.threshold;
    fr.selected = select_variables(ck.params);

    std::optional<TruthInfo> truth;
    std::vector<int> topk;
    if (truth_path) {
        const json tj = read_json_file(*truth_path);
        TruthInfo t;
        t.model = tj.value("model", "");
        for (int q : tj.at("important").get<std::vector<int>>()) t.important.push_back(q - 1);
        truth = std::move(t);
        topk = {10, 20};
    }

    const MetricsReport report = evaluate_fit(fr, data, truth, topk);
    const json j = report_to_json(report);
    if (out_path) write_json_file(j, *out_path);
    std::cout << j.dump(2) << "\n";
    return 0;
}

inline int cmd_select(const std::string& checkpoint_path, const std::optional<std::string>& out_path) {
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    FitResult fr;
    fr.selected = select_variables(ck.params);
    std::vector<std::string> names;
    for (int j = 0; j < ck.arch.input_dim; ++j) names.push_back("x" + std::to_string(j + 1));
    const json j = selection_to_json(fr, names);
    if (out_path) write_json_file(j, *out_path);
    std::cout << j.dump(2) << "\n";
    return 0;
}

// Replicate seeds use a fixed odd stride so each replicate can be reproduced
// in isolation.
inline std::uint64_t replicate_seed(std::uint64_t base, int replicate_index) {
    return base + static_cast<std::uint64_t>(replicate_index) * 10007ULL;
}

inline int cmd_replicate(const RunConfig& rc, int jobs) {
    if (jobs < 1) jobs = 1;
    std::filesystem::create_directories(rc.output_dir);
    const int R = rc.replicates;

    std::vector<MetricsReport> reports(static_cast<std::size_t>(R));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(R));
    std::atomic<int> next{0};

    auto worker = [&]() {
        while (true) {
            const int r = next.fetch_add(1);
            if (r >= R) return;
            try {
                reports[static_cast<std::size_t>(r)] =
                    run_single(rc, replicate_seed(rc.seed, r + 1)).report;
            } catch (...) {
                errors[static_cast<std::size_t>(r)] = std::current_exception();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min(jobs, R); ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (int r = 0; r < R; ++r)
        if (errors[static_cast<std::size_t>(r)]) {
            std::cerr << "replicate " << (r + 1) << " (seed " << replicate_seed(rc.seed, r + 1)
                      << ") failed\n";
            std::rethrow_exception(errors[static_cast<std::size_t>(r)]);
        }

    const auto agg = aggregate(reports);
    json meta{{"replicates", R}, {"seed", rc.seed}};
    if (rc.simulate) {
        meta["model"] = sim_model_name(rc.simulate->model);
        meta["n"] = rc.simulate->n;
        meta["p"] = rc.simulate->p;
    }
    json j{{"meta", std::move(meta)}, {"metrics", aggregate_to_json(agg)}};
    json per = json::array();
    for (const auto& r : reports) per.push_back(report_to_json(r));
    j["replicate_reports"] = std::move(per);

    const auto path = std::filesystem::path(rc.output_dir) / "aggregate.json";
    write_json_file(j, path.string());
    std::cout << json{{"metrics", aggregate_to_json(agg)}}.dump(2) << "\n";
    return 0;
}

// Full command-line entry point; returns the process exit code.
// 0 success, 1 usage/config error, 2 data error, 3 numeric failure.
inline int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"deep maximum rank correlation estimation"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a simulation dataset CSV");
    std::string sim_model = "M1", sim_error = "auto", sim_out = "data.csv";
    int sim_n = 1000, sim_p = 15;
    double sim_rho = 0.3;
    std::uint64_t sim_seed = 1;
    sim->add_option("--model", sim_model, "M1..M6");
    sim->add_option("--n", sim_n, "rows");
    sim->add_option("--p", sim_p, "features (>= 15)");
    sim->add_option("--rho", sim_rho, "AR(1) correlation");
    sim->add_option("--error", sim_error, "normal|contaminated|auto");
    sim->add_option("--seed", sim_seed, "seed");
    sim->add_option("--out", sim_out, "output CSV path");

    // shared config-driven options
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::string> outdir_override;

    auto add_config_opts = [&](CLI::App* cmd, bool required_config) {
        auto* opt = cmd->add_option("--config", config_path, "run configuration JSON");
        if (required_config) opt->required();
        cmd->add_option("--seed", [&](const std::vector<std::string>& v) {
            seed_override = std::stoull(v.back());
            return true;
        }, "seed override");
        cmd->add_option("--out-dir", [&](const std::vector<std::string>& v) {
            outdir_override = v.back();
            return true;
        }, "output directory override");
    };

    // train
    auto* train_cmd = app.add_subcommand("train", "fit a model from a config file");
    add_config_opts(train_cmd, true);
    std::optional<std::string> loss_flag, surrogate_flag;
    std::optional<double> omega_flag, lambda_flag, lr_flag, wd_flag, lr_decay_flag;
    std::optional<int> patience_flag, lr_decay_every_flag;
    train_cmd->add_option("--loss", [&](const std::vector<std::string>& v) { loss_flag = v.back(); return true; },
                          "drelu-rank|rank-exact-eval|lse|lad|huber|cauchy");
    train_cmd->add_option("--surrogate", [&](const std::vector<std::string>& v) { surrogate_flag = v.back(); return true; },
                          "drelu|sigmoid|gausscdf");
    train_cmd->add_option("--omega", [&](const std::vector<std::string>& v) { omega_flag = std::stod(v.back()); return true; },
                          "surrogate bandwidth");
    train_cmd->add_option("--lambda", [&](const std::vector<std::string>& v) { lambda_flag = std::stod(v.back()); return true; },
                          "group penalty");
    train_cmd->add_option("--lr", [&](const std::vector<std::string>& v) { lr_flag = std::stod(v.back()); return true; },
                          "learning rate");
    train_cmd->add_option("--weight-decay", [&](const std::vector<std::string>& v) { wd_flag = std::stod(v.back()); return true; },
                          "decoupled weight decay");
    train_cmd->add_option("--patience", [&](const std::vector<std::string>& v) { patience_flag = std::stoi(v.back()); return true; },
                          "early stopping patience");
    train_cmd->add_option("--lr-decay", [&](const std::vector<std::string>& v) { lr_decay_flag = std::stod(v.back()); return true; },
                          "learning-rate decay factor");
    train_cmd->add_option("--lr-decay-every", [&](const std::vector<std::string>& v) { lr_decay_every_flag = std::stoi(v.back()); return true; },
                          "epochs between decays");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint on a CSV dataset");
    std::string eval_ck, eval_data;
    std::string eval_truth, eval_out;
    eval_cmd->add_option("--checkpoint", eval_ck, "checkpoint JSON")->required();
    eval_cmd->add_option("--data", eval_data, "dataset CSV")->required();
    eval_cmd->add_option("--truth", eval_truth, "truth sidecar JSON");
    eval_cmd->add_option("--out", eval_out, "report output path");

    // select
    auto* select_cmd = app.add_subcommand("select", "list selected variables of a checkpoint");
    std::string select_ck, select_out;
    select_cmd->add_option("--checkpoint", select_ck, "checkpoint JSON")->required();
    select_cmd->add_option("--out", select_out, "selection output path");

    // replicate
    auto* rep_cmd = app.add_subcommand("replicate", "run seeded replicates and aggregate");
    add_config_opts(rep_cmd, true);
    int jobs = 1;
    rep_cmd->add_option("--jobs", jobs, "concurrent replicates");

    std::vector<const char*> argv;
    argv.push_back("deepmrc");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_model, sim_n, sim_p, sim_rho, sim_error, sim_seed, sim_out);

        if (train_cmd->parsed() || rep_cmd->parsed()) {
            json cfg_json = read_json_file(config_path);
            if (loss_flag) cfg_json["train"]["loss"] = *loss_flag;
            if (surrogate_flag) cfg_json["train"]["surrogate"] = *surrogate_flag;
            if (omega_flag) cfg_json["train"]["omega"] = *omega_flag;
            if (lambda_flag) cfg_json["train"]["lambda"] = *lambda_flag;
            if (lr_flag) cfg_json["optimizer"]["lr"] = *lr_flag;
            if (wd_flag) cfg_json["optimizer"]["weight_decay"] = *wd_flag;
            if (patience_flag) cfg_json["optimizer"]["patience"] = *patience_flag;
            if (lr_decay_flag) cfg_json["optimizer"]["lr_decay_factor"] = *lr_decay_flag;
            if (lr_decay_every_flag) cfg_json["optimizer"]["lr_decay_every"] = *lr_decay_every_flag;
            RunConfig rc = parse_run_config(cfg_json);
            if (seed_override) rc.seed = *seed_override;
            if (outdir_override) rc.output_dir = *outdir_override;
            return train_cmd->parsed() ? cmd_train(rc) : cmd_replicate(rc, jobs);
        }

        if (eval_cmd->parsed())
            return cmd_evaluate(eval_ck, eval_data,
                                eval_truth.empty() ? std::nullopt : std::optional<std::string>(eval_truth),
                                eval_out.empty() ? std::nullopt : std::optional<std::string>(eval_out));

        if (select_cmd->parsed())
            return cmd_select(select_ck,
                              select_out.empty() ? std::nullopt : std::optional<std::string>(select_out));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}

}  // namespace deepmrc
