#include "pairnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "pairnet/common.hpp"
#include "pairnet/rng.hpp"

namespace pairnet {

void TrainConfig::validate() const {
    if (epochs < 1) throw StructuralError("config: epochs must be at least 1");
    if (!(learning_rate > 0.0)) throw StructuralError("config: learning_rate must be positive");
    if (selection_patience < 1) throw StructuralError("config: selection_patience must be at least 1");
    if (max_features < 1) throw StructuralError("config: max_features must be at least 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
        throw StructuralError("config: validation_fraction must lie strictly between 0 and 1");
}

namespace {

// Flattened binary problem for the hot loops.
struct DenseRows {
    std::vector<double> x; // n*d row-major
    std::vector<signed char> y;
    std::size_t n = 0;
    std::size_t d = 0;

    const double* row(std::size_t i) const { return x.data() + i * d; }
};

double accuracy_of(const DenseRows& rows, const std::vector<double>& w, double b) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < rows.n; ++i) {
        const double* xi = rows.row(i);
        double acc = b;
        for (std::size_t k = 0; k < rows.d; ++k) acc += w[k] * xi[k];
        int pred = acc >= 0.0 ? +1 : -1;
        if (pred == rows.y[i]) ++correct;
    }
    return rows.n ? static_cast<double>(correct) / static_cast<double>(rows.n) : 0.0;
}

PocketResult pocket_train_dense(const DenseRows& rows, const TrainConfig& cfg,
                                std::uint64_t stream, PocketTrace* trace) {
    if (rows.n == 0) throw StructuralError("pocket_train: empty training set");
    if (rows.d == 0) throw StructuralError("pocket_train: zero-dimensional rows");

    Rng rng(Rng::mix(stream, 0x70C3E7));
    std::vector<double> w(rows.d, 0.0);
    double b = 0.0;

    PocketResult pocket;
    pocket.weights = w;
    pocket.bias = b;
    pocket.train_accuracy = accuracy_of(rows, w, b);

    std::vector<std::size_t> order(rows.n);
    for (std::size_t i = 0; i < rows.n; ++i) order[i] = i;

    // A weight state gets at most one full accuracy evaluation: when its
    // correct run sets a new longest-run record (the classic pocket trigger)
    // or at the end of an epoch. The ratchet replaces the pocket only on a
    // strictly better training accuracy.
    long long run = 0, best_run = 0;
    bool state_evaluated = true; // the zero state is already scored
    bool done = false;
    auto consider_current = [&]() {
        state_evaluated = true;
        double acc = accuracy_of(rows, w, b);
        if (acc > pocket.train_accuracy) {
            pocket.weights = w;
            pocket.bias = b;
            pocket.train_accuracy = acc;
            if (acc == 1.0) done = true;
        }
    };

    for (int epoch = 1; epoch <= cfg.epochs && !done; ++epoch) {
        rng.shuffle(order);
        bool updated = false;
        for (std::size_t idx : order) {
            const double* xi = rows.row(idx);
            double act = b;
            for (std::size_t k = 0; k < rows.d; ++k) act += w[k] * xi[k];
            int pred = act >= 0.0 ? +1 : -1; // tie at zero goes to +1
            if (pred == rows.y[idx]) {
                ++run;
                if (run > best_run) {
                    best_run = run;
                    if (!state_evaluated) {
                        consider_current();
                        if (done) break;
                    }
                }
            } else {
                double step = cfg.learning_rate * rows.y[idx];
                for (std::size_t k = 0; k < rows.d; ++k) w[k] += step * xi[k];
                b += step;
                run = 0;
                state_evaluated = false;
                updated = true;
            }
        }
        pocket.epochs_used = epoch;
        if (!done && !state_evaluated) consider_current();
        if (trace) trace->push_back(pocket.train_accuracy);
        if (!updated) done = true; // clean pass: the current state is already scored
    }
    return pocket;
}

DenseRows to_dense(const BinaryProblem& problem) {
    if (problem.positives.empty() || problem.negatives.empty())
        throw StructuralError("pocket_train: both classes must be non-empty");
    DenseRows rows;
    rows.d = problem.positives.front().size();
    rows.n = problem.positives.size() + problem.negatives.size();
    rows.x.reserve(rows.n * rows.d);
    rows.y.reserve(rows.n);
    auto append = [&](const std::vector<double>& r, signed char label) {
        if (r.size() != rows.d)
            throw StructuralError("pocket_train: rows differ in dimensionality");
        rows.x.insert(rows.x.end(), r.begin(), r.end());
        rows.y.push_back(label);
    };
    for (const auto& r : problem.positives) append(r, +1);
    for (const auto& r : problem.negatives) append(r, -1);
    if (rows.d == 0) throw StructuralError("pocket_train: zero-dimensional rows");
    return rows;
}

// Gathers the given 1-based feature columns out of full-width rows.
DenseRows gather(const std::vector<const std::vector<double>*>& rows,
                 const std::vector<signed char>& labels, const std::vector<int>& subset) {
    DenseRows out;
    out.n = rows.size();
    out.d = subset.size();
    out.x.resize(out.n * out.d);
    out.y = labels;
    for (std::size_t i = 0; i < out.n; ++i) {
        const auto& full = *rows[i];
        for (std::size_t k = 0; k < out.d; ++k)
            out.x[i * out.d + k] = full[static_cast<std::size_t>(subset[k] - 1)];
    }
    return out;
}

} // namespace

PocketResult pocket_train(const BinaryProblem& problem, const TrainConfig& cfg,
                          std::uint64_t stream, PocketTrace* trace) {
    cfg.validate();
    return pocket_train_dense(to_dense(problem), cfg, stream, trace);
}

SelectionSplit make_selection_split(const BinaryProblem& problem, const TrainConfig& cfg,
                                    std::uint64_t stream) {
    cfg.validate();
    if (problem.positives.empty() || problem.negatives.empty())
        throw StructuralError("forward_select: both classes must be non-empty");

    Rng split_rng(Rng::mix(stream, 0x5E1EC7));
    auto split_side = [&](std::size_t n, std::vector<std::size_t>& val,
                          std::vector<std::size_t>& fit) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        split_rng.shuffle(idx);
        auto n_val = static_cast<std::size_t>(
            std::floor(static_cast<double>(n) * cfg.validation_fraction));
        if (n_val >= n) n_val = n - 1;
        val.assign(idx.begin(), idx.begin() + n_val);
        fit.assign(idx.begin() + n_val, idx.end());
    };
    SelectionSplit split;
    split_side(problem.positives.size(), split.val_positives, split.fit_positives);
    split_side(problem.negatives.size(), split.val_negatives, split.fit_negatives);
    if (split.fit_positives.empty() || split.fit_negatives.empty())
        throw StructuralError(
            "forward_select: the selection split left a class without fit rows; "
            "lower validation_fraction");
    return split;
}

BinaryFit forward_select(const BinaryProblem& problem, const TrainConfig& cfg,
                         std::uint64_t stream) {
    cfg.validate();
    if (problem.positives.empty() || problem.negatives.empty())
        throw StructuralError("forward_select: both classes must be non-empty");
    const std::size_t dim = problem.positives.front().size();
    for (const auto& r : problem.positives)
        if (r.size() != dim) throw StructuralError("forward_select: rows differ in dimensionality");
    for (const auto& r : problem.negatives)
        if (r.size() != dim) throw StructuralError("forward_select: rows differ in dimensionality");
    if (dim == 0) throw StructuralError("forward_select: at least one feature required");

    // An empty validation side falls back to scoring on the fit rows
    // (flagged in the result).
    SelectionSplit split = make_selection_split(problem, cfg, stream);

    std::vector<const std::vector<double>*> fit_rows, val_rows;
    std::vector<signed char> fit_labels, val_labels;
    for (auto i : split.fit_positives) { fit_rows.push_back(&problem.positives[i]); fit_labels.push_back(+1); }
    for (auto i : split.fit_negatives) { fit_rows.push_back(&problem.negatives[i]); fit_labels.push_back(-1); }
    for (auto i : split.val_positives) { val_rows.push_back(&problem.positives[i]); val_labels.push_back(+1); }
    for (auto i : split.val_negatives) { val_rows.push_back(&problem.negatives[i]); val_labels.push_back(-1); }

    bool scored_on_training = val_rows.empty();
    if (scored_on_training) {
        val_rows = fit_rows;
        val_labels = fit_labels;
    }

    BinaryFit best;
    best.scored_on_training = scored_on_training;
    double best_val = -1.0; // unset: the first addition always improves
    std::vector<int> selected; // in selection order
    int bad_streak = 0;
    const int cap = std::min<int>(cfg.max_features, static_cast<int>(dim));

    while (static_cast<int>(selected.size()) < cap) {
        const int step = static_cast<int>(selected.size()) + 1;
        int cand = -1;
        double cand_acc = -1.0;
        PocketResult cand_fit;
        std::vector<int> cand_subset;

        for (int f = 1; f <= static_cast<int>(dim); ++f) {
            if (std::find(selected.begin(), selected.end(), f) != selected.end()) continue;
            std::vector<int> subset = selected;
            subset.push_back(f);
            std::sort(subset.begin(), subset.end());

            DenseRows fit_dense = gather(fit_rows, fit_labels, subset);
            // one stream per (step, candidate) so scoring never depends on
            // evaluation order
            PocketResult fit =
                pocket_train_dense(fit_dense, cfg,
                                   Rng::mix(stream, static_cast<std::uint64_t>(step),
                                            static_cast<std::uint64_t>(f)),
                                   nullptr);
            DenseRows val_dense = gather(val_rows, val_labels, subset);
            double val_acc = accuracy_of(val_dense, fit.weights, fit.bias);
            if (val_acc > cand_acc) { // strict: ties keep the lowest index
                cand_acc = val_acc;
                cand = f;
                cand_fit = std::move(fit);
                cand_subset = std::move(subset);
            }
        }

        selected.push_back(cand);
        if (cand_acc > best_val) {
            best_val = cand_acc;
            best.classifier.feature_indices = cand_subset;
            best.classifier.weights = cand_fit.weights;
            best.classifier.bias = cand_fit.bias;
            best.train_accuracy = cand_fit.train_accuracy;
            best.validation_accuracy = cand_acc;
            best.epochs_used = cand_fit.epochs_used;
            bad_streak = 0;
        } else if (++bad_streak >= cfg.selection_patience) {
            break;
        }
    }

    best.selection_trace = selected;
    return best;
}

BinaryFit train_pair(const SegmentDataset& dataset, int i, int j, const TrainConfig& cfg) {
    if (i == j) throw StructuralError("train_pair: a pair needs two distinct classes");
    if (i < 1 || j < 1 || i > j)
        throw StructuralError("train_pair: pair indices must satisfy 1 <= i < j");

    BinaryProblem problem;
    for (const auto* row : dataset.rows_of(Partition::train)) {
        if (row->label == i) problem.positives.push_back(row->values);
        else if (row->label == j) problem.negatives.push_back(row->values);
    }
    if (problem.positives.empty())
        throw StructuralError("class " + std::to_string(i) + " has no training segments");
    if (problem.negatives.empty())
        throw StructuralError("class " + std::to_string(j) + " has no training segments");

    BinaryFit fit = forward_select(problem, cfg,
                                   Rng::mix(cfg.seed, static_cast<std::uint64_t>(i),
                                            static_cast<std::uint64_t>(j)));
    fit.classifier.class_lo = i;
    fit.classifier.class_hi = j;
    return fit;
}

TrainedModel train_model(const SegmentDataset& dataset, int q, const TrainConfig& cfg,
                         int threads) {
    cfg.validate();
    if (q < 2) throw StructuralError("train_model: q must be at least 2");
    auto train_labels = dataset.labels_of(Partition::train);
    for (int c = 1; c <= q; ++c)
        if (!std::binary_search(train_labels.begin(), train_labels.end(), c))
            throw StructuralError("class " + std::to_string(c) +
                                  " is missing from the training partition");

    const auto pairs = all_pairs(q);
    std::vector<BinaryFit> fits(pairs.size());

    auto run_range = [&](std::size_t lo, std::size_t hi, std::exception_ptr& err) {
        for (std::size_t k = lo; k < hi; ++k) {
            try {
                fits[k] = train_pair(dataset, pairs[k].first, pairs[k].second, cfg);
            } catch (const StructuralError& e) {
                err = std::make_exception_ptr(StructuralError(
                    "pair (" + std::to_string(pairs[k].first) + "," +
                    std::to_string(pairs[k].second) + "): " + e.what()));
                return;
            } catch (...) {
                err = std::current_exception();
                return;
            }
        }
    };

    unsigned n_workers = threads <= 0 ? std::thread::hardware_concurrency()
                                      : static_cast<unsigned>(threads);
    n_workers = std::max(1u, std::min<unsigned>(n_workers, static_cast<unsigned>(pairs.size())));

    if (n_workers == 1) {
        std::exception_ptr err;
        run_range(0, pairs.size(), err);
        if (err) std::rethrow_exception(err);
    } else {
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> errs(n_workers);
        const std::size_t chunk = (pairs.size() + n_workers - 1) / n_workers;
        for (unsigned t = 0; t < n_workers; ++t) {
            std::size_t lo = t * chunk;
            std::size_t hi = std::min(pairs.size(), lo + chunk);
            if (lo >= hi) break;
            workers.emplace_back(run_range, lo, hi, std::ref(errs[t]));
        }
        for (auto& w : workers) w.join();
        for (auto& err : errs)
            if (err) std::rethrow_exception(err);
    }

    TrainedModel out;
    out.model.q = q;
    out.model.feature_layout = dataset.layout;
    out.model.trained_on = "pocket-pairwise q=" + std::to_string(q) + " seed=" +
                           std::to_string(cfg.seed) + " train_rows=" +
                           std::to_string(dataset.rows_of(Partition::train).size());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        out.model.classifiers[pairs[k]] = fits[k].classifier;
        PairTrainInfo info;
        info.class_lo = pairs[k].first;
        info.class_hi = pairs[k].second;
        info.n_features = static_cast<int>(fits[k].classifier.feature_indices.size());
        info.train_accuracy = fits[k].train_accuracy;
        info.validation_accuracy = fits[k].validation_accuracy;
        info.epochs_used = fits[k].epochs_used;
        info.scored_on_training = fits[k].scored_on_training;
        out.pair_info.push_back(info);
    }
    out.model.validate();
    return out;
}

} // namespace pairnet
