#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pairnet/dataset.hpp"
#include "pairnet/model.hpp"

namespace pairnet {

struct TrainConfig {
    int epochs = 200;              // maximum perceptron epochs per fit
    double learning_rate = 1.0;
    std::uint64_t seed = 1;
    int selection_patience = 2;    // consecutive non-improving additions tolerated
    int max_features = 58;         // cap on selected features per pair
    double validation_fraction = 0.25;

    void validate() const;
};

/// Loads a flat key=value file ('#' comments allowed); every field keeps its
/// default when absent; unknown keys are rejected.
TrainConfig load_train_config(const std::string& path);

struct BinaryFit {
    PairwiseClassifier classifier;
    double train_accuracy = 0.0;
    double validation_accuracy = 0.0;
    int epochs_used = 0;
    // Every feature the greedy loop accepted, in selection order (includes
    // the trailing non-improving additions the patience rule rolls back).
    std::vector<int> selection_trace;
    // True when the stratified holdout came out empty and selection fell
    // back to scoring on the training rows.
    bool scored_on_training = false;
};

/// Dense rows for one binary problem; columns 1..d map to feature indices
/// supplied alongside (or the identity for raw pocket training).
struct BinaryProblem {
    std::vector<std::vector<double>> positives; // target +1
    std::vector<std::vector<double>> negatives; // target -1
};

struct PocketResult {
    std::vector<double> weights;
    double bias = 0.0;
    double train_accuracy = 0.0;
    int epochs_used = 0;
};

/// Optional per-epoch trace of the pocket's recorded accuracy (for the
/// monotonicity property test).
using PocketTrace = std::vector<double>;

/// Pocket-with-ratchet perceptron. Runs the classic update rule over
/// seed-shuffled epochs; the longest-correct-streak heuristic triggers a full
/// accuracy evaluation and the pocket is replaced only on strict improvement.
/// Weights and bias start at zero; prediction ties (activation exactly 0) go
/// to +1. Stops early once the pocket reaches accuracy 1.0 or an epoch makes
/// no updates.
PocketResult pocket_train(const BinaryProblem& problem, const TrainConfig& cfg,
                          std::uint64_t stream, PocketTrace* trace = nullptr);

/// Stratified holdout used to score feature selection: per class,
/// floor(validation_fraction * n) seed-shuffled rows are held out, so the fit
/// side always keeps at least one row per class. Indices point into the
/// problem's row vectors. Exposed so selection-oracle tests can re-execute
/// greedy steps against the same split.
struct SelectionSplit {
    std::vector<std::size_t> fit_positives, fit_negatives;
    std::vector<std::size_t> val_positives, val_negatives;
};

SelectionSplit make_selection_split(const BinaryProblem& problem, const TrainConfig& cfg,
                                    std::uint64_t stream);

/// Greedy bottom-up feature search: at each step every unselected feature is
/// scored by fitting pocket_train on selected+{f} and evaluating on the
/// held-out validation split (ties -> lowest feature index). Stops after
/// selection_patience consecutive additions without strict improvement of the
/// best validation accuracy, or at max_features; returns the fit at the
/// best-so-far subset. `stream` isolates this fit's randomness; the candidate
/// fit at (step, feature) draws from Rng::mix(stream, step, feature).
BinaryFit forward_select(const BinaryProblem& problem, const TrainConfig& cfg,
                         std::uint64_t stream);

/// Restricts the training partition to classes i (target +1) and j (target
/// -1) and runs forward_select. Throws when i==j, indices are invalid, or a
/// class has no training rows.
BinaryFit train_pair(const SegmentDataset& dataset, int i, int j, const TrainConfig& cfg);

struct PairTrainInfo {
    int class_lo = 0;
    int class_hi = 0;
    int n_features = 0;
    double train_accuracy = 0.0;
    double validation_accuracy = 0.0;
    int epochs_used = 0;
    bool scored_on_training = false;
};

struct TrainedModel {
    MultiClassModel model;
    std::vector<PairTrainInfo> pair_info; // lexicographic pair order
};

/// Trains all q(q-1)/2 pairs independently and assembles the model. Per-pair
/// RNG streams are derived from (cfg.seed, i, j), so the result is identical
/// whether pairs run serially or across `threads` workers (0 = hardware).
TrainedModel train_model(const SegmentDataset& dataset, int q, const TrainConfig& cfg,
                         int threads = 1);

} // namespace pairnet
