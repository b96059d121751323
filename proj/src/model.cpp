#include "pairnet/model.hpp"

#include <algorithm>

#include "pairnet/common.hpp"

namespace pairnet {

double activation(const LinearUnit& unit, const FeatureVector& x) {
    if (unit.feature_indices.size() != unit.weights.size())
        throw StructuralError("classifier weights and feature indices differ in length");
    double acc = unit.bias;
    const int dim = static_cast<int>(x.values.size());
    for (std::size_t k = 0; k < unit.feature_indices.size(); ++k) {
        int idx = unit.feature_indices[k];
        if (idx < 1 || idx > dim)
            throw StructuralError("feature index " + std::to_string(idx) +
                                  " outside the input's dimensionality " + std::to_string(dim));
        acc += unit.weights[k] * x.values[static_cast<std::size_t>(idx - 1)];
    }
    return acc;
}

int pair_output(const PairwiseClassifier& c, const FeatureVector& x) {
    // tie convention: activation exactly 0 counts as +1 (the class_lo side)
    return activation(c, x) >= 0.0 ? +1 : -1;
}

int coupling_weight(int i, std::pair<int, int> pair, int q) {
    const auto [a, b] = pair;
    if (q < 2) throw StructuralError("q must be at least 2");
    if (i < 1 || i > q) throw StructuralError("class index i out of range");
    if (a < 1 || b <= a || b > q) throw StructuralError("pair indices must satisfy 1 <= a < b <= q");
    if (i == a) return +1;
    if (i == b) return -1;
    return 0;
}

long long classifier_count(int q) {
    if (q < 2) throw StructuralError("q must be at least 2");
    return static_cast<long long>(q) * (q - 1) / 2;
}

std::vector<std::pair<int, int>> all_pairs(int q) {
    std::vector<std::pair<int, int>> pairs;
    pairs.reserve(static_cast<std::size_t>(classifier_count(q)));
    for (int i = 1; i <= q; ++i)
        for (int j = i + 1; j <= q; ++j) pairs.emplace_back(i, j);
    return pairs;
}

void MultiClassModel::validate() const {
    if (q < 2) throw StructuralError("model must have q >= 2 classes");
    if (static_cast<long long>(classifiers.size()) != classifier_count(q))
        throw StructuralError("model must hold exactly q(q-1)/2 classifiers");
    for (const auto& [key, c] : classifiers) {
        if (key.first != c.class_lo || key.second != c.class_hi)
            throw StructuralError("classifier (class_lo, class_hi) does not match its map key");
        if (c.class_lo < 1 || c.class_lo >= c.class_hi || c.class_hi > q)
            throw StructuralError("classifier pair indices out of range");
        if (c.feature_indices.size() != c.weights.size())
            throw StructuralError("classifier weights and feature indices differ in length");
        if (c.feature_indices.empty())
            throw StructuralError("trained classifier has no selected features");
        if (!std::is_sorted(c.feature_indices.begin(), c.feature_indices.end()) ||
            std::adjacent_find(c.feature_indices.begin(), c.feature_indices.end()) !=
                c.feature_indices.end())
            throw StructuralError("feature indices must be distinct and ascending");
    }
}

GroupScores scores_from_outputs(int q, const std::vector<int>& outputs) {
    const auto pairs = all_pairs(q);
    if (outputs.size() != pairs.size())
        throw StructuralError("expected one output per pair");
    GroupScores gs;
    gs.scores.assign(static_cast<std::size_t>(q), 0.0);
    gs.votes.assign(static_cast<std::size_t>(q), 0);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [a, b] = pairs[p];
        const int out = outputs[p];
        gs.scores[static_cast<std::size_t>(a - 1)] += out;
        gs.scores[static_cast<std::size_t>(b - 1)] -= out;
        gs.votes[static_cast<std::size_t>(out > 0 ? a - 1 : b - 1)] += 1;
    }
    gs.winner = 1;
    for (int i = 2; i <= q; ++i)
        if (gs.scores[static_cast<std::size_t>(i - 1)] > gs.scores[static_cast<std::size_t>(gs.winner - 1)])
            gs.winner = i;
    return gs;
}

GroupScores group_scores(const MultiClassModel& m, const FeatureVector& x, ScoreMode mode) {
    const auto pairs = all_pairs(m.q);
    std::vector<int> hard(pairs.size());
    std::vector<double> raw(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        auto it = m.classifiers.find(pairs[p]);
        if (it == m.classifiers.end())
            throw StructuralError("model is missing classifier for a pair");
        raw[p] = activation(it->second, x);
        hard[p] = raw[p] >= 0.0 ? +1 : -1;
    }
    GroupScores gs = scores_from_outputs(m.q, hard);
    if (mode == ScoreMode::soft) {
        std::fill(gs.scores.begin(), gs.scores.end(), 0.0);
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto [a, b] = pairs[p];
            gs.scores[static_cast<std::size_t>(a - 1)] += raw[p];
            gs.scores[static_cast<std::size_t>(b - 1)] -= raw[p];
        }
        gs.winner = 1;
        for (int i = 2; i <= m.q; ++i)
            if (gs.scores[static_cast<std::size_t>(i - 1)] >
                gs.scores[static_cast<std::size_t>(gs.winner - 1)])
                gs.winner = i;
    }
    return gs;
}

int predict(const MultiClassModel& m, const FeatureVector& x) {
    return group_scores(m, x).winner;
}

} // namespace pairnet
