#pragma once

#include <map>
#include <string>
#include <vector>

#include "pairnet/features.hpp"

namespace pairnet {

enum class Partition { train, test };

/// Labeled feature vectors grouped by record, with record-level train/test
/// tags. Records are never split across partitions.
struct SegmentDataset {
    FeatureLayout layout;
    std::vector<FeatureVector> rows;
    std::map<std::string, Partition> record_partition;
    std::vector<std::string> warnings; // e.g. single-record classes forced to train

    /// Rows belonging to one partition, in stored order.
    std::vector<const FeatureVector*> rows_of(Partition p) const;

    /// Record ids of one partition, sorted.
    std::vector<std::string> records_of(Partition p) const;

    /// Distinct labels present in a partition, ascending.
    std::vector<int> labels_of(Partition p) const;

    /// Highest label present anywhere; 0 when empty.
    int max_label() const;
};

/// Builds a dataset from extracted features, dropping artifact-flagged
/// segments. All rows land in the given partition (use split_by_record for a
/// real split).
SegmentDataset dataset_from_segments(const std::vector<Segment>& segments,
                                     const std::vector<int>& labels,
                                     const FeatureLayout& layout,
                                     Partition p = Partition::train);

} // namespace pairnet
