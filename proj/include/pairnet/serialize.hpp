#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pairnet/datagen.hpp"
#include "pairnet/dataset.hpp"
#include "pairnet/eval.hpp"
#include "pairnet/model.hpp"

namespace pairnet {

// ---------------------------------------------------------------------------
// Model JSON. Written by a deterministic in-project serializer (fixed key
// order, pairs lexicographic, doubles as %.17g decimal text) so identical
// models produce identical bytes and every number round-trips exactly.
// ---------------------------------------------------------------------------

std::string model_to_json(const MultiClassModel& m);
MultiClassModel model_from_json(const std::string& text);

std::string layout_to_json(const FeatureLayout& layout);
FeatureLayout layout_from_json(const std::string& text);

void save_model(const MultiClassModel& m, const std::string& path);
MultiClassModel load_model(const std::string& path);

// ---------------------------------------------------------------------------
// CSV formats (headers are part of the contract)
// ---------------------------------------------------------------------------

/// Raw corpus: `record_id,label,channel,t,value`, one sample per row.
void write_raw_csv(const Corpus& corpus, std::ostream& out);

struct RawRecordSet {
    std::vector<RawRecord> records;
    double sample_rate_hz = 0.0; // inferred from t spacing
};

/// Parses the raw CSV; throws StructuralError with a line number on
/// malformed rows. `rate_override` skips inference when > 0.
RawRecordSet read_raw_csv(std::istream& in, double rate_override = 0.0);

/// Ground-truth sidecar: `record_id,segment_index,power_gain`.
void write_gain_truth_csv(const Corpus& corpus, std::ostream& out);
std::map<std::string, std::vector<double>> read_gain_truth_csv(std::istream& in);

/// Features: `record_id,segment_index,label,f1..f72` in layout order.
void write_feature_csv(const std::vector<FeatureVector>& rows, int n_features,
                       std::ostream& out);
std::vector<FeatureVector> read_feature_csv(std::istream& in);

// Streaming helpers (cmd_predict reads row by row in constant memory).
std::size_t parse_feature_header(const std::string& line);
FeatureVector parse_feature_row(const std::string& line, std::size_t n_features, long line_no);

/// Per-pair diagnostics, plot-ready for the error/feature-count figures:
/// `i,j,n_features,val_error`.
void write_pair_diagnostics_csv(const std::vector<PairTrainInfo>& info, std::ostream& out);

/// Record decisions: `record_id,true,predicted,probability,frac_1..frac_q`.
void write_record_decisions_csv(const std::vector<RecordDecision>& decisions,
                                const std::map<std::string, int>& true_labels,
                                int q, std::ostream& out);

/// Confusion matrix: header `true,pred_1..pred_q`, one row per true class.
void write_confusion_csv(const ConfusionMatrix& cm, std::ostream& out);

/// Split assignment: `record_id,partition` with partition in {train,test}.
void write_split_csv(const SegmentDataset& ds, std::ostream& out);
std::map<std::string, Partition> read_split_csv(std::istream& in);

// Flat key=value config files ('#' comments, blank lines ignored).
std::map<std::string, std::string> read_kv_file(const std::string& path);
SyntheticSpec synthetic_spec_from_kv(const std::map<std::string, std::string>& kv);
TrainConfig train_config_from_kv(const std::map<std::string, std::string>& kv);

/// Writes text to path atomically (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

} // namespace pairnet
