#include "pairnet/dataset.hpp"

#include <algorithm>
#include <set>

#include "pairnet/common.hpp"

namespace pairnet {

std::vector<const FeatureVector*> SegmentDataset::rows_of(Partition p) const {
    std::vector<const FeatureVector*> out;
    for (const auto& row : rows) {
        auto it = record_partition.find(row.record_id);
        if (it != record_partition.end() && it->second == p) out.push_back(&row);
    }
    return out;
}

std::vector<std::string> SegmentDataset::records_of(Partition p) const {
    std::vector<std::string> out;
    for (const auto& [id, part] : record_partition)
        if (part == p) out.push_back(id);
    return out;
}

std::vector<int> SegmentDataset::labels_of(Partition p) const {
    std::set<int> labels;
    for (const auto* row : rows_of(p)) labels.insert(row->label);
    return {labels.begin(), labels.end()};
}

int SegmentDataset::max_label() const {
    int m = 0;
    for (const auto& row : rows) m = std::max(m, row.label);
    return m;
}

SegmentDataset dataset_from_segments(const std::vector<Segment>& segments,
                                     const std::vector<int>& labels,
                                     const FeatureLayout& layout, Partition p) {
    if (segments.size() != labels.size())
        throw StructuralError("one label per segment required");
    SegmentDataset ds;
    ds.layout = layout;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (segments[i].artifact) continue; // manual-deletion stand-in
        FeatureVector fv = extract_features(segments[i], layout);
        fv.label = labels[i];
        ds.record_partition[fv.record_id] = p;
        ds.rows.push_back(std::move(fv));
    }
    return ds;
}

} // namespace pairnet
