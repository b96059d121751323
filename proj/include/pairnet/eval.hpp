#pragma once

#include <string>
#include <vector>

#include "pairnet/dataset.hpp"
#include "pairnet/model.hpp"
#include "pairnet/trainer.hpp"

namespace pairnet {

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

struct RecordDecision {
    std::string record_id;
    int predicted_class = 0;
    double probability = 0.0;                // winning class's share of segments
    std::vector<double> per_class_fractions; // q entries, sum 1
};

struct ConfusionMatrix {
    int q = 0;
    std::vector<long long> counts; // q*q, rows = true class, columns = predicted

    long long& at(int true_class, int predicted); // 1-based
    long long at(int true_class, int predicted) const;
    long long total() const;
};

/// Fraction of segments with predict == label; throws on an empty partition.
double segment_accuracy(const MultiClassModel& m, const SegmentDataset& ds, Partition p);

/// Plurality vote over the record's per-segment predictions; ties go to the
/// lowest class index. probability = max fraction.
RecordDecision aggregate_record(const MultiClassModel& m,
                                const std::vector<const FeatureVector*>& segments,
                                const std::string& record_id);

/// Fraction of records whose plurality decision matches the record label.
double record_accuracy(const MultiClassModel& m, const SegmentDataset& ds, Partition p);

/// All record decisions of a partition, ordered by record id.
std::vector<RecordDecision> record_decisions(const MultiClassModel& m,
                                             const SegmentDataset& ds, Partition p);

ConfusionMatrix confusion_matrix(const MultiClassModel& m, const SegmentDataset& ds, Partition p);

// ---------------------------------------------------------------------------
// Baselines (section-4 comparison models)
// ---------------------------------------------------------------------------

/// One-vs-all: q units, class i against the rest, same pocket training and
/// feature selection as the pairwise path. The decision is the argmax of the
/// raw activations (hard outputs make multi-positive cases undecidable),
/// ties to the lowest index.
struct OneVsAllModel {
    int q = 0;
    FeatureLayout feature_layout;
    std::vector<LinearUnit> units;      // index c-1 = class c vs rest
    std::vector<PairTrainInfo> unit_info;
};

OneVsAllModel train_one_vs_all(const SegmentDataset& dataset, int q, const TrainConfig& cfg);
int predict(const OneVsAllModel& m, const FeatureVector& x);
double segment_accuracy(const OneVsAllModel& m, const SegmentDataset& ds, Partition p);

/// Hierarchical binary splits: a balanced tree of q-1 range classifiers.
/// The root divides classes {1..ceil(q/2)} from the rest, and so on down to
/// leaves. Prediction descends from the root (+1 -> lower range).
struct HierarchicalModel {
    struct Node {
        int lo = 0, hi = 0;  // class range covered, inclusive
        int mid = 0;         // left subtree covers [lo, mid]
        int left = -1;       // child node index, -1 = leaf (single class)
        int right = -1;
        LinearUnit unit;     // +1 = label in [lo, mid]
    };
    int q = 0;
    FeatureLayout feature_layout;
    std::vector<Node> nodes; // nodes[0] is the root; q-1 entries
    std::vector<PairTrainInfo> node_info;
};

/// The split structure alone (no training); exposed so tree-shape tests stay
/// cheap.
std::vector<HierarchicalModel::Node> hierarchical_ranges(int q);

HierarchicalModel train_hierarchical(const SegmentDataset& dataset, int q, const TrainConfig& cfg);
int predict(const HierarchicalModel& m, const FeatureVector& x);
double segment_accuracy(const HierarchicalModel& m, const SegmentDataset& ds, Partition p);

} // namespace pairnet
