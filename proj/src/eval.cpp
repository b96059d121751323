#include "pairnet/eval.hpp"

#include <algorithm>
#include <map>

#include "pairnet/common.hpp"
#include "pairnet/rng.hpp"

namespace pairnet {

long long& ConfusionMatrix::at(int true_class, int predicted) {
    if (true_class < 1 || true_class > q || predicted < 1 || predicted > q)
        throw StructuralError("confusion matrix index out of range");
    return counts[static_cast<std::size_t>((true_class - 1) * q + (predicted - 1))];
}

long long ConfusionMatrix::at(int true_class, int predicted) const {
    return const_cast<ConfusionMatrix*>(this)->at(true_class, predicted);
}

long long ConfusionMatrix::total() const {
    long long t = 0;
    for (auto c : counts) t += c;
    return t;
}

namespace {

std::map<std::string, std::vector<const FeatureVector*>> group_by_record(
    const std::vector<const FeatureVector*>& rows) {
    std::map<std::string, std::vector<const FeatureVector*>> groups;
    for (const auto* row : rows) groups[row->record_id].push_back(row);
    return groups;
}

template <typename Model>
double segment_accuracy_impl(const Model& m, const SegmentDataset& ds, Partition p) {
    auto rows = ds.rows_of(p);
    if (rows.empty()) throw StructuralError("segment_accuracy: empty partition");
    std::size_t correct = 0;
    for (const auto* row : rows) {
        if (row->label == kUnlabeled)
            throw StructuralError("segment_accuracy: unlabeled row in record '" +
                                  row->record_id + "'");
        if (predict(m, *row) == row->label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(rows.size());
}

} // namespace

double segment_accuracy(const MultiClassModel& m, const SegmentDataset& ds, Partition p) {
    return segment_accuracy_impl(m, ds, p);
}

RecordDecision aggregate_record(const MultiClassModel& m,
                                const std::vector<const FeatureVector*>& segments,
                                const std::string& record_id) {
    if (segments.empty()) throw StructuralError("aggregate_record: record has no segments");
    RecordDecision d;
    d.record_id = record_id;
    std::vector<long long> counts(static_cast<std::size_t>(m.q), 0);
    for (const auto* seg : segments) counts[static_cast<std::size_t>(predict(m, *seg) - 1)] += 1;
    d.per_class_fractions.resize(static_cast<std::size_t>(m.q));
    const double n = static_cast<double>(segments.size());
    int winner = 1;
    for (int c = 1; c <= m.q; ++c) {
        d.per_class_fractions[static_cast<std::size_t>(c - 1)] =
            static_cast<double>(counts[static_cast<std::size_t>(c - 1)]) / n;
        if (counts[static_cast<std::size_t>(c - 1)] > counts[static_cast<std::size_t>(winner - 1)])
            winner = c; // plurality, ties to the lowest class index
    }
    d.predicted_class = winner;
    d.probability = d.per_class_fractions[static_cast<std::size_t>(winner - 1)];
    return d;
}

std::vector<RecordDecision> record_decisions(const MultiClassModel& m,
                                             const SegmentDataset& ds, Partition p) {
    auto groups = group_by_record(ds.rows_of(p));
    std::vector<RecordDecision> out;
    out.reserve(groups.size());
    for (const auto& [id, segs] : groups) out.push_back(aggregate_record(m, segs, id));
    return out;
}

double record_accuracy(const MultiClassModel& m, const SegmentDataset& ds, Partition p) {
    auto groups = group_by_record(ds.rows_of(p));
    if (groups.empty()) throw StructuralError("record_accuracy: empty partition");
    std::size_t correct = 0;
    for (const auto& [id, segs] : groups) {
        int true_label = segs.front()->label;
        for (const auto* seg : segs)
            if (seg->label != true_label)
                throw StructuralError("record '" + id + "' has inconsistent labels");
        if (aggregate_record(m, segs, id).predicted_class == true_label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(groups.size());
}

ConfusionMatrix confusion_matrix(const MultiClassModel& m, const SegmentDataset& ds, Partition p) {
    ConfusionMatrix cm;
    cm.q = m.q;
    cm.counts.assign(static_cast<std::size_t>(m.q) * static_cast<std::size_t>(m.q), 0);
    for (const auto* row : ds.rows_of(p)) {
        if (row->label < 1 || row->label > m.q)
            throw StructuralError("confusion_matrix: label out of range in record '" +
                                  row->record_id + "'");
        cm.at(row->label, predict(m, *row)) += 1;
    }
    return cm;
}

// ---------------------------------------------------------------------------
// One-vs-all baseline
// ---------------------------------------------------------------------------

OneVsAllModel train_one_vs_all(const SegmentDataset& dataset, int q, const TrainConfig& cfg) {
    cfg.validate();
    if (q < 2) throw StructuralError("train_one_vs_all: q must be at least 2");
    auto labels = dataset.labels_of(Partition::train);
    for (int c = 1; c <= q; ++c)
        if (!std::binary_search(labels.begin(), labels.end(), c))
            throw StructuralError("class " + std::to_string(c) +
                                  " is missing from the training partition");

    OneVsAllModel m;
    m.q = q;
    m.feature_layout = dataset.layout;
    auto train_rows = dataset.rows_of(Partition::train);
    for (int c = 1; c <= q; ++c) {
        BinaryProblem problem;
        for (const auto* row : train_rows) {
            if (row->label == c) problem.positives.push_back(row->values);
            else problem.negatives.push_back(row->values);
        }
        BinaryFit fit = forward_select(problem, cfg,
                                       Rng::mix(cfg.seed, 0x0A11, static_cast<std::uint64_t>(c)));
        m.units.push_back(fit.classifier); // slice away the pair fields
        PairTrainInfo info;
        info.class_lo = c;
        info.class_hi = 0; // vs rest
        info.n_features = static_cast<int>(fit.classifier.feature_indices.size());
        info.train_accuracy = fit.train_accuracy;
        info.validation_accuracy = fit.validation_accuracy;
        info.epochs_used = fit.epochs_used;
        info.scored_on_training = fit.scored_on_training;
        m.unit_info.push_back(info);
    }
    return m;
}

int predict(const OneVsAllModel& m, const FeatureVector& x) {
    // raw margins: hard outputs would make multi-positive inputs undecidable
    int winner = 1;
    double best = activation(m.units[0], x);
    for (int c = 2; c <= m.q; ++c) {
        double a = activation(m.units[static_cast<std::size_t>(c - 1)], x);
        if (a > best) {
            best = a;
            winner = c;
        }
    }
    return winner;
}

double segment_accuracy(const OneVsAllModel& m, const SegmentDataset& ds, Partition p) {
    return segment_accuracy_impl(m, ds, p);
}

// ---------------------------------------------------------------------------
// Hierarchical-splits baseline
// ---------------------------------------------------------------------------

std::vector<HierarchicalModel::Node> hierarchical_ranges(int q) {
    if (q < 2) throw StructuralError("hierarchical tree needs q >= 2");
    std::vector<HierarchicalModel::Node> nodes;
    // Builds the balanced tree over contiguous class ranges; the left half
    // takes ceil(n/2) classes.
    struct Builder {
        std::vector<HierarchicalModel::Node>& nodes;
        int build(int lo, int hi) {
            int id = static_cast<int>(nodes.size());
            nodes.push_back({});
            int n = hi - lo + 1;
            int mid = lo + (n + 1) / 2 - 1;
            nodes[static_cast<std::size_t>(id)].lo = lo;
            nodes[static_cast<std::size_t>(id)].hi = hi;
            nodes[static_cast<std::size_t>(id)].mid = mid;
            if (mid > lo) nodes[static_cast<std::size_t>(id)].left = build(lo, mid);
            if (hi > mid + 1) nodes[static_cast<std::size_t>(id)].right = build(mid + 1, hi);
            return id;
        }
    } builder{nodes};
    builder.build(1, q);
    return nodes;
}

HierarchicalModel train_hierarchical(const SegmentDataset& dataset, int q, const TrainConfig& cfg) {
    cfg.validate();
    auto labels = dataset.labels_of(Partition::train);
    for (int c = 1; c <= q; ++c)
        if (!std::binary_search(labels.begin(), labels.end(), c))
            throw StructuralError("class " + std::to_string(c) +
                                  " is missing from the training partition");

    HierarchicalModel m;
    m.q = q;
    m.feature_layout = dataset.layout;
    m.nodes = hierarchical_ranges(q);
    auto train_rows = dataset.rows_of(Partition::train);
    for (auto& node : m.nodes) {
        BinaryProblem problem;
        for (const auto* row : train_rows) {
            if (row->label < node.lo || row->label > node.hi) continue;
            if (row->label <= node.mid) problem.positives.push_back(row->values);
            else problem.negatives.push_back(row->values);
        }
        BinaryFit fit = forward_select(problem, cfg,
                                       Rng::mix(cfg.seed, 0x43E1,
                                                static_cast<std::uint64_t>(node.lo),
                                                static_cast<std::uint64_t>(node.hi)));
        node.unit = fit.classifier;
        PairTrainInfo info;
        info.class_lo = node.lo;
        info.class_hi = node.hi;
        info.n_features = static_cast<int>(fit.classifier.feature_indices.size());
        info.train_accuracy = fit.train_accuracy;
        info.validation_accuracy = fit.validation_accuracy;
        info.epochs_used = fit.epochs_used;
        info.scored_on_training = fit.scored_on_training;
        m.node_info.push_back(info);
    }
    return m;
}

int predict(const HierarchicalModel& m, const FeatureVector& x) {
    int id = 0;
    while (true) {
        const auto& node = m.nodes[static_cast<std::size_t>(id)];
        bool go_low = activation(node.unit, x) >= 0.0;
        if (go_low) {
            if (node.left < 0) return node.lo; // single-class leaf
            id = node.left;
        } else {
            if (node.right < 0) return node.hi;
            id = node.right;
        }
    }
}

double segment_accuracy(const HierarchicalModel& m, const SegmentDataset& ds, Partition p) {
    return segment_accuracy_impl(m, ds, p);
}

} // namespace pairnet
