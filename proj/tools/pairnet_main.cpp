// pairnet — pairwise-coupled multi-class pipeline over spectral segment
// features. Subcommands mirror the pipeline stages: gen, features, train,
// eval, predict. Exit codes: 0 success, 2 user/input error, 1 internal error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "pairnet/common.hpp"
#include "pairnet/datagen.hpp"
#include "pairnet/dataset.hpp"
#include "pairnet/eval.hpp"
#include "pairnet/model.hpp"
#include "pairnet/serialize.hpp"
#include "pairnet/trainer.hpp"

namespace fs = std::filesystem;
using namespace pairnet;

namespace {

constexpr int kExitUser = 2;
constexpr int kExitInternal = 1;

// Audit record written after all data outputs; carries checksums of the
// emitted files plus the (deliberately non-reproducible) wall-clock duration.
class Manifest {
public:
    Manifest(std::string command, std::uint64_t seed)
        : command_(std::move(command)), seed_(seed),
          start_(std::chrono::steady_clock::now()) {}

    void config(const std::string& key, const std::string& value) { config_[key] = value; }
    void input(const std::string& path) { inputs_.push_back(path); }
    void output(const std::string& path) { outputs_.push_back(path); }

    void write(const std::string& path) const {
        nlohmann::json j;
        j["command"] = command_;
        j["seed"] = seed_;
        j["config"] = config_;
        j["inputs"] = inputs_;
        auto outs = nlohmann::json::array();
        for (const auto& p : outputs_) {
            std::string data = read_file(p);
            char hex[24];
            std::snprintf(hex, sizeof(hex), "%016llx",
                          static_cast<unsigned long long>(fnv1a64(data.data(), data.size())));
            outs.push_back({{"path", p}, {"bytes", data.size()}, {"fnv1a64", hex}});
        }
        j["outputs"] = outs;
        j["duration_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        write_file_atomic(path, j.dump(2) + "\n");
    }

private:
    std::string command_;
    std::uint64_t seed_;
    std::map<std::string, std::string> config_;
    std::vector<std::string> inputs_;
    std::vector<std::string> outputs_;
    std::chrono::steady_clock::time_point start_;
};

void write_text(const std::string& path, const std::string& text, Manifest& manifest) {
    write_file_atomic(path, text);
    manifest.output(path);
}

std::string slurp_stream(const std::function<void(std::ostream&)>& writer) {
    std::ostringstream ss;
    writer(ss);
    return ss.str();
}

bool looks_like_feature_csv(const std::string& path) {
    std::ifstream in(path);
    std::string first;
    if (!in || !std::getline(in, first)) return false;
    return first.rfind("record_id,segment_index,label", 0) == 0;
}

// ---------------------------------------------------------------------------

int run_gen(const std::string& spec_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed) {
    SyntheticSpec spec;
    if (!spec_path.empty()) spec = synthetic_spec_from_kv(read_kv_file(spec_path));
    if (seed) spec.seed = *seed;
    spec.validate();

    fs::create_directories(out_dir);
    Manifest manifest("gen", spec.seed);
    if (!spec_path.empty()) manifest.input(spec_path);
    manifest.config("q", std::to_string(spec.q));
    manifest.config("records_per_class", std::to_string(spec.records_per_class));
    manifest.config("segments_per_record", std::to_string(spec.segments_per_record));
    manifest.config("sample_rate_hz", format_double(spec.sample_rate_hz));
    manifest.config("overlap", format_double(spec.overlap));
    manifest.config("bba_drift", format_double(spec.bba_drift));
    manifest.config("noise_floor", format_double(spec.noise_floor));

    Corpus corpus = generate_corpus(spec);
    write_text(out_dir + "/corpus.csv",
               slurp_stream([&](std::ostream& os) { write_raw_csv(corpus, os); }), manifest);
    write_text(out_dir + "/gain_truth.csv",
               slurp_stream([&](std::ostream& os) { write_gain_truth_csv(corpus, os); }), manifest);
    manifest.write(out_dir + "/manifest.json");
    std::cerr << "wrote " << corpus.records.size() << " records to " << out_dir << "\n";
    return 0;
}

int run_features(const std::string& input, const std::string& output, bool bba, double rate) {
    Manifest manifest("features", 0);
    manifest.input(input);
    manifest.config("bba_correct", bba ? "true" : "false");

    std::vector<FeatureVector> rows;
    int n_features = 0;

    if (looks_like_feature_csv(input)) {
        // pre-featurized input: only BBA correction makes sense here
        if (!bba)
            throw StructuralError("input is already a feature CSV; nothing to do without "
                                  "--bba-correct");
        std::ifstream in(input);
        rows = read_feature_csv(in);
        if (rows.empty()) throw StructuralError("feature CSV has no rows");
        FeatureLayout layout = canonical_layout(rate > 0 ? rate : 100.0);
        if (rows.front().values.size() != layout.features.size())
            throw StructuralError("BBA correction needs the canonical " +
                                  std::to_string(layout.features.size()) + "-feature layout");
        // Corrected vectors have zero BBA on every channel; refuse a second pass.
        bool all_zero = true;
        for (const auto& row : rows) {
            for (double b : compute_bba(row, layout))
                if (std::fabs(b) > 1e-9) all_zero = false;
            if (!all_zero) break;
        }
        if (all_zero)
            throw StructuralError("input features are already BBA-corrected (per-channel BBA "
                                  "is 0 on every row); refusing to correct twice");
        for (auto& row : rows) row = bba_correct(row, layout);
        n_features = static_cast<int>(layout.features.size());
    } else {
        std::ifstream in(input);
        if (!in) throw StructuralError("cannot open '" + input + "'");
        RawRecordSet raw = read_raw_csv(in, rate);
        FeatureLayout layout = canonical_layout(raw.sample_rate_hz);
        manifest.config("sample_rate_hz", format_double(raw.sample_rate_hz));
        for (const auto& rec : raw.records) {
            for (const auto& seg : segment_record(rec.channels, layout, rec.record_id)) {
                FeatureVector fv = extract_features(seg, layout);
                if (bba) fv = bba_correct(fv, layout);
                fv.label = rec.label;
                rows.push_back(std::move(fv));
            }
        }
        n_features = static_cast<int>(layout.features.size());
    }

    write_text(output,
               slurp_stream([&](std::ostream& os) { write_feature_csv(rows, n_features, os); }),
               manifest);
    manifest.write(output + ".manifest.json");
    std::cerr << "wrote " << rows.size() << " feature rows to " << output << "\n";
    return 0;
}

nlohmann::json partition_metrics(const MultiClassModel& model, const SegmentDataset& ds,
                                 Partition p) {
    nlohmann::json j;
    j["segment_accuracy"] = segment_accuracy(model, ds, p);
    j["record_accuracy"] = record_accuracy(model, ds, p);
    j["n_segments"] = ds.rows_of(p).size();
    j["n_records"] = ds.records_of(p).size();
    return j;
}

int run_train(const std::string& features_path, const std::string& config_path,
              const std::string& out_dir, std::optional<std::uint64_t> seed,
              double test_fraction, int threads, double rate) {
    TrainConfig cfg;
    if (!config_path.empty()) cfg = load_train_config(config_path);
    if (seed) cfg.seed = *seed;
    cfg.validate();

    std::ifstream in(features_path);
    if (!in) throw StructuralError("cannot open '" + features_path + "'");
    SegmentDataset ds;
    ds.rows = read_feature_csv(in);
    if (ds.rows.empty()) throw StructuralError("no feature rows in '" + features_path + "'");
    ds.layout = canonical_layout(rate > 0 ? rate : 100.0);
    if (ds.rows.front().values.size() != ds.layout.features.size())
        throw StructuralError("feature CSV width " + std::to_string(ds.rows.front().values.size()) +
                              " does not match the canonical layout (" +
                              std::to_string(ds.layout.features.size()) + ")");
    for (const auto& row : ds.rows) {
        if (row.label ==  kUnlabeled)
            throw StructuralError("record '" + row.record_id + "' has unlabeled rows; "
                                  "training needs labels");
        ds.record_partition[row.record_id] = Partition::train;
    }

    if (test_fraction > 0.0) split_by_record(ds, test_fraction, cfg.seed);
    for (const auto& w : ds.warnings) std::cerr << "warning: " << w << "\n";

    const int q = ds.max_label();
    TrainedModel trained = train_model(ds, q, cfg, threads);

    fs::create_directories(out_dir);
    Manifest manifest("train", cfg.seed);
    manifest.input(features_path);
    if (!config_path.empty()) manifest.input(config_path);
    manifest.config("epochs", std::to_string(cfg.epochs));
    manifest.config("learning_rate", format_double(cfg.learning_rate));
    manifest.config("selection_patience", std::to_string(cfg.selection_patience));
    manifest.config("max_features", std::to_string(cfg.max_features));
    manifest.config("validation_fraction", format_double(cfg.validation_fraction));
    manifest.config("test_fraction", format_double(test_fraction));
    manifest.config("threads", std::to_string(threads));

    write_text(out_dir + "/model.json", model_to_json(trained.model) + "\n", manifest);
    write_text(out_dir + "/pair_diagnostics.csv",
               slurp_stream([&](std::ostream& os) {
                   write_pair_diagnostics_csv(trained.pair_info, os);
               }),
               manifest);
    write_text(out_dir + "/split.csv",
               slurp_stream([&](std::ostream& os) { write_split_csv(ds, os); }), manifest);

    nlohmann::json metrics;
    metrics["train"] = partition_metrics(trained.model, ds, Partition::train);
    if (!ds.records_of(Partition::test).empty())
        metrics["test"] = partition_metrics(trained.model, ds, Partition::test);
    write_text(out_dir + "/metrics.json", metrics.dump(2) + "\n", manifest);

    manifest.write(out_dir + "/manifest.json");
    std::cerr << "trained " << trained.model.classifiers.size() << " pairwise classifiers (q="
              << q << ")\n";
    return 0;
}

int run_eval(const std::string& model_path, const std::string& features_path,
             const std::string& out_dir, const std::string& split_path) {
    MultiClassModel model = load_model(model_path);

    std::ifstream in(features_path);
    if (!in) throw StructuralError("cannot open '" + features_path + "'");
    SegmentDataset ds;
    ds.rows = read_feature_csv(in);
    if (ds.rows.empty()) throw StructuralError("no feature rows in '" + features_path + "'");
    ds.layout = model.feature_layout;
    if (ds.rows.front().values.size() != model.feature_layout.features.size())
        throw StructuralError("feature CSV width " + std::to_string(ds.rows.front().values.size()) +
                              " does not match the model layout (" +
                              std::to_string(model.feature_layout.features.size()) + ")");

    bool have_split = !split_path.empty();
    std::map<std::string, Partition> split;
    if (have_split) {
        std::ifstream sin(split_path);
        if (!sin) throw StructuralError("cannot open '" + split_path + "'");
        split = read_split_csv(sin);
    }
    std::map<std::string, int> true_labels;
    for (const auto& row : ds.rows) {
        if (row.label == kUnlabeled)
            throw StructuralError("record '" + row.record_id + "' has unlabeled rows; "
                                  "eval needs labels (use predict instead)");
        if (have_split) {
            auto it = split.find(row.record_id);
            if (it == split.end())
                throw StructuralError("record '" + row.record_id + "' missing from the split file");
            ds.record_partition[row.record_id] = it->second;
        } else {
            ds.record_partition[row.record_id] = Partition::train;
        }
        true_labels[row.record_id] = row.label;
    }

    fs::create_directories(out_dir);
    Manifest manifest("eval", 0);
    manifest.input(model_path);
    manifest.input(features_path);
    if (have_split) manifest.input(split_path);

    nlohmann::json metrics;
    std::vector<RecordDecision> decisions;
    ConfusionMatrix cm;
    cm.q = model.q;
    cm.counts.assign(static_cast<std::size_t>(model.q) * static_cast<std::size_t>(model.q), 0);
    if (have_split) {
        for (auto p : {Partition::train, Partition::test}) {
            if (ds.rows_of(p).empty()) continue;
            metrics[p == Partition::train ? "train" : "test"] = partition_metrics(model, ds, p);
            auto part = confusion_matrix(model, ds, p);
            for (std::size_t k = 0; k < cm.counts.size(); ++k) cm.counts[k] += part.counts[k];
            auto dec = record_decisions(model, ds, p);
            decisions.insert(decisions.end(), dec.begin(), dec.end());
        }
        std::sort(decisions.begin(), decisions.end(),
                  [](const auto& a, const auto& b) { return a.record_id < b.record_id; });
    } else {
        metrics["all"] = partition_metrics(model, ds, Partition::train);
        cm = confusion_matrix(model, ds, Partition::train);
        decisions = record_decisions(model, ds, Partition::train);
    }

    write_text(out_dir + "/metrics.json", metrics.dump(2) + "\n", manifest);
    write_text(out_dir + "/confusion.csv",
               slurp_stream([&](std::ostream& os) { write_confusion_csv(cm, os); }), manifest);
    write_text(out_dir + "/record_decisions.csv",
               slurp_stream([&](std::ostream& os) {
                   write_record_decisions_csv(decisions, true_labels, model.q, os);
               }),
               manifest);
    manifest.write(out_dir + "/manifest.json");
    std::cerr << "evaluated " << ds.rows.size() << " segments / " << decisions.size()
              << " records\n";
    return 0;
}

int run_predict(const std::string& model_path, const std::string& features_path,
                const std::string& out_path) {
    MultiClassModel model = load_model(model_path);

    std::ifstream in(features_path);
    if (!in) throw StructuralError("cannot open '" + features_path + "'");
    std::string line;
    if (!std::getline(in, line)) throw StructuralError("feature CSV: empty input");
    const std::size_t n_features = parse_feature_header(line);
    if (n_features != model.feature_layout.features.size())
        throw StructuralError("feature CSV width " + std::to_string(n_features) +
                              " does not match the model layout (" +
                              std::to_string(model.feature_layout.features.size()) + ")");

    std::ofstream file_out;
    std::ostream* out = &std::cout;
    if (!out_path.empty()) {
        file_out.open(out_path, std::ios::binary);
        if (!file_out) throw StructuralError("cannot write '" + out_path + "'");
        out = &file_out;
    }

    *out << "record_id,segment_index,predicted\n";
    long line_no = 1;
    while (std::getline(in, line)) { // row at a time: constant memory
        ++line_no;
        if (line.empty()) continue;
        FeatureVector fv = parse_feature_row(line, n_features, line_no);
        *out << fv.record_id << ',' << fv.segment_index << ',' << predict(model, fv) << '\n';
    }
    out->flush();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pairwise-coupled multi-class classifier pipeline"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic labeled corpus");
    std::string gen_spec, gen_out = "out";
    std::optional<std::uint64_t> gen_seed;
    gen->add_option("--spec,--config", gen_spec, "synthetic spec file (key=value)");
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--seed", gen_seed, "overrides the spec's seed");

    // features
    auto* feat = app.add_subcommand("features", "extract 72 spectral/statistical features");
    std::string feat_in, feat_out;
    bool feat_bba = false;
    double feat_rate = 0.0;
    feat->add_option("--input", feat_in, "raw corpus CSV (or a feature CSV to correct)")
        ->required();
    feat->add_option("--output", feat_out, "output feature CSV")->required();
    feat->add_flag("--bba-correct", feat_bba, "subtract the per-channel BBA from log powers");
    feat->add_option("--rate", feat_rate, "sample rate override (default: inferred from t)");

    // train
    auto* train = app.add_subcommand("train", "train the pairwise multi-class model");
    std::string train_features, train_config, train_out = "out";
    std::optional<std::uint64_t> train_seed;
    double train_test_fraction = 1.0 / 3.0;
    int train_threads = 1;
    double train_rate = 0.0;
    train->add_option("--features", train_features, "feature CSV")->required();
    train->add_option("--config", train_config, "train config file (key=value)");
    train->add_option("--out", train_out, "output directory")->required();
    train->add_option("--seed", train_seed, "overrides the config's seed");
    train->add_option("--test-fraction", train_test_fraction,
                      "record-level holdout fraction (0 = train on everything)");
    train->add_option("--threads", train_threads, "pair-training workers (0 = hardware)");
    train->add_option("--rate", train_rate, "sample rate recorded in the model layout");

    // eval
    auto* eval = app.add_subcommand("eval", "score a model on labeled features");
    std::string eval_model, eval_features, eval_out = "out", eval_split;
    eval->add_option("--model", eval_model, "model JSON")->required();
    eval->add_option("--features", eval_features, "feature CSV")->required();
    eval->add_option("--out", eval_out, "output directory")->required();
    eval->add_option("--split", eval_split, "optional split.csv to report per partition");

    // predict
    auto* pred = app.add_subcommand("predict", "per-segment predictions (streaming)");
    std::string pred_model, pred_features, pred_out;
    pred->add_option("--model", pred_model, "model JSON")->required();
    pred->add_option("--features", pred_features, "feature CSV (labels optional)")->required();
    pred->add_option("--out", pred_out, "output CSV (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUser;
    }

    try {
        if (gen->parsed()) return run_gen(gen_spec, gen_out, gen_seed);
        if (feat->parsed()) return run_features(feat_in, feat_out, feat_bba, feat_rate);
        if (train->parsed())
            return run_train(train_features, train_config, train_out, train_seed,
                             train_test_fraction, train_threads, train_rate);
        if (eval->parsed()) return run_eval(eval_model, eval_features, eval_out, eval_split);
        if (pred->parsed()) return run_predict(pred_model, pred_features, pred_out);
    } catch (const StructuralError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUser;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return 0;
}
