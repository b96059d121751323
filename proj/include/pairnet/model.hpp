#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pairnet/features.hpp"

namespace pairnet {

// ---------------------------------------------------------------------------
// Pairwise network: q(q-1)/2 threshold units superposed by fixed +-1 coupling
// into q group scores. Class and feature indices are 1-based throughout and
// the serialized form records this.
// ---------------------------------------------------------------------------

struct LinearUnit {
    std::vector<int> feature_indices; // 1-based positions into the layout, distinct, ascending
    std::vector<double> weights;      // same length as feature_indices
    double bias = 0.0;
};

/// Raw activation dot(weights, x restricted to feature_indices) + bias.
/// Throws StructuralError when x does not cover the referenced indices.
double activation(const LinearUnit& unit, const FeatureVector& x);

struct PairwiseClassifier : LinearUnit {
    int class_lo = 0; // i, with i < j
    int class_hi = 0; // j
};

/// Hard threshold output: +1 on the i side, -1 on the j side, with the
/// documented tie convention sign(0) = +1.
int pair_output(const PairwiseClassifier& c, const FeatureVector& x);

/// Fixed coupling from pair (a,b), a<b, to group score g_i:
/// +1 if i == a, -1 if i == b, 0 otherwise. Indices validated against q.
int coupling_weight(int i, std::pair<int, int> pair, int q);

/// q(q-1)/2; throws for q < 2.
long long classifier_count(int q);

struct GroupScores {
    std::vector<double> scores; // g_1..g_q
    std::vector<int> votes;     // pairwise wins per class, sums to q(q-1)/2
    int winner = 0;             // argmax over scores, lowest index on ties
};

struct MultiClassModel {
    int q = 0;
    std::map<std::pair<int, int>, PairwiseClassifier> classifiers; // keyed by (i,j), i<j
    FeatureLayout feature_layout;
    std::string trained_on;

    /// Checks the structural invariants (complete pair set, keys match
    /// classifier fields, weight lengths). Throws StructuralError.
    void validate() const;
};

enum class ScoreMode {
    hard, // +-1 outputs, the paper-faithful path
    soft, // raw activations instead of sign; diagnostics only
};

/// Superposes all pair outputs into group scores. Votes always come from the
/// hard +-1 outputs; in soft mode only the scores (and the winner) switch to
/// raw activations.
GroupScores group_scores(const MultiClassModel& m, const FeatureVector& x,
                         ScoreMode mode = ScoreMode::hard);

/// group_scores(...).winner.
int predict(const MultiClassModel& m, const FeatureVector& x);

/// Assembles scores/votes/winner from already-computed hard pair outputs,
/// ordered lexicographically over pairs (1,2),(1,3),...,(q-1,q). This is the
/// same superposition group_scores uses; exposed for enumeration tests.
GroupScores scores_from_outputs(int q, const std::vector<int>& outputs);

/// Lexicographically ordered list of all pairs (i,j), i<j, for q classes.
std::vector<std::pair<int, int>> all_pairs(int q);

} // namespace pairnet
