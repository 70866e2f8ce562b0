// JSON persistence: network checkpoints (value-exact double round-trip),
// training history, selection listings, and metric reports.
#pragma once

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "deepmrc/core.hpp"
#include "deepmrc/data.hpp"
#include "deepmrc/metrics.hpp"
#include "deepmrc/network.hpp"
#include "deepmrc/train.hpp"

namespace deepmrc {

using json = nlohmann::json;

inline void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw DataError("write failed: " + path);
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

struct Checkpoint {
    NetworkArchitecture arch;
    NetworkParams params;
    std::uint64_t seed = 0;
    std::optional<std::pair<double, double>> calibration;  // (slope, intercept)
    std::optional<double> threshold;
    std::optional<Standardizer> standardization;
};

inline json checkpoint_to_json(const Checkpoint& ck) {
    json arch{{"input_dim", ck.arch.input_dim},
              {"hidden_widths", ck.arch.hidden_widths},
              {"dropout_rate", ck.arch.dropout_rate}};
    json weights = json::array();
    for (const auto& w : ck.params.weights) {
        json rows = json::array();
        for (std::size_t r = 0; r < w.rows(); ++r) {
            json row = json::array();
            for (std::size_t c = 0; c < w.cols(); ++c) row.push_back(w(r, c));
            rows.push_back(std::move(row));
        }
        weights.push_back(std::move(rows));
    }
    json biases = json::array();
    for (const auto& b : ck.params.biases) biases.push_back(b);

    json j{{"format_version", 1},
           {"architecture", std::move(arch)},
           {"weights", std::move(weights)},
           {"biases", std::move(biases)},
           {"seed", ck.seed}};
    if (ck.calibration)
        j["calibration"] = {{"slope", ck.calibration->first}, {"intercept", ck.calibration->second}};
    if (ck.threshold) j["threshold"] = *ck.threshold;
    if (ck.standardization)
        j["standardization"] = {{"mean", ck.standardization->mean},
                                {"scale", ck.standardization->scale}};
    return j;
}

inline Checkpoint checkpoint_from_json(const json& j) {
    try {
        if (j.at("format_version").get<int>() != 1) throw DataError("unsupported checkpoint version");
        Checkpoint ck;
        const auto& arch = j.at("architecture");
        ck.arch.input_dim = arch.at("input_dim").get<int>();
        ck.arch.hidden_widths = arch.at("hidden_widths").get<std::vector<int>>();
        ck.arch.dropout_rate = arch.at("dropout_rate").get<double>();
        ck.arch.validate();

        for (const auto& wj : j.at("weights")) {
            const std::size_t rows = wj.size();
            const std::size_t cols = rows > 0 ? wj.at(0).size() : 0;
            Matrix w(rows, cols);
            for (std::size_t r = 0; r < rows; ++r) {
                if (wj.at(r).size() != cols) throw DataError("ragged weight matrix in checkpoint");
                for (std::size_t c = 0; c < cols; ++c) w(r, c) = wj.at(r).at(c).get<double>();
            }
            ck.params.weights.push_back(std::move(w));
        }
        for (const auto& bj : j.at("biases")) ck.params.biases.push_back(bj.get<Vec>());
        if (ck.params.weights.size() != ck.arch.hidden_widths.size() + 1 ||
            ck.params.biases.size() != ck.params.weights.size())
            throw DataError("checkpoint layer count does not match the architecture");

        ck.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("calibration"))
            ck.calibration = {j["calibration"].at("slope").get<double>(),
                              j["calibration"].at("intercept").get<double>()};
        if (j.contains("threshold")) ck.threshold = j["threshold"].get<double>();
        if (j.contains("standardization")) {
            Standardizer s;
            s.mean = j["standardization"].at("mean").get<Vec>();
            s.scale = j["standardization"].at("scale").get<Vec>();
            ck.standardization = std::move(s);
        }
        return ck;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed checkpoint: ") + e.what());
    }
}

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    write_json_file(checkpoint_to_json(ck), path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    return checkpoint_from_json(read_json_file(path));
}

inline json history_to_json(const FitResult& fr) {
    json epochs = json::array();
    for (const auto& rec : fr.history)
        epochs.push_back({{"epoch", rec.epoch},
                          {"train_objective", rec.train_objective},
                          {"validation_objective", rec.validation_objective},
                          {"learning_rate", rec.learning_rate},
                          {"nonzero_columns", rec.nonzero_columns}});
    return json{{"best_epoch", fr.best_epoch},
                {"epochs", std::move(epochs)},
                {"calibration",
                 {{"slope", fr.calibration_slope}, {"intercept", fr.calibration_intercept}}}};
}

// Selection listing; indices are reported 1-based.
inline json selection_to_json(const FitResult& fr, const std::vector<std::string>& names) {
    json items = json::array();
    for (const auto& [idx, norm] : fr.selected) {
        json item{{"index", idx + 1}, {"norm", norm}};
        if (static_cast<std::size_t>(idx) < names.size()) item["name"] = names[static_cast<std::size_t>(idx)];
        items.push_back(std::move(item));
    }
    return items;
}

inline json report_to_json(const MetricsReport& r) {
    json j{{"mse", r.mse},
           {"lad", r.lad},
           {"cauchy", r.cauchy},
           {"huber", r.huber},
           {"n_test", r.n_test},
           {"iota_cauchy", kCauchyIota},
           {"iota_huber", kHuberIota}};
    j[r.rank_is_cindex ? "c_index" : "spearman"] = r.rank;
    if (r.top10) j["top_10"] = *r.top10;
    if (r.top20) j["top_20"] = *r.top20;
    if (r.classification_err) j["classification_error"] = *r.classification_err;
    if (r.censoring_fraction) j["censoring_fraction"] = *r.censoring_fraction;
    return j;
}

inline json aggregate_to_json(const std::map<std::string, MeanSd>& agg) {
    json j = json::object();
    for (const auto& [name, ms] : agg) j[name] = {{"mean", ms.mean}, {"sd", ms.sd}};
    return j;
}

inline json truth_to_json(const TruthInfo& truth, std::uint64_t seed) {
    std::vector<int> important;
    for (int q : truth.important) important.push_back(q + 1);
    return json{{"model", truth.model}, {"seed", seed}, {"important", important}};
}

}  // namespace deepmrc
