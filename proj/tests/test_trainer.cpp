#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>

#include "pairnet/common.hpp"
#include "pairnet/datagen.hpp"
#include "pairnet/rng.hpp"
#include "pairnet/serialize.hpp"
#include "pairnet/trainer.hpp"

using namespace pairnet;

namespace {

BinaryProblem problem_1d(std::vector<double> pos, std::vector<double> neg) {
    BinaryProblem p;
    for (double v : pos) p.positives.push_back({v});
    for (double v : neg) p.negatives.push_back({v});
    return p;
}

double problem_accuracy(const BinaryProblem& p, const std::vector<double>& w, double b,
                        const std::vector<int>& idx = {}) {
    auto classify = [&](const std::vector<double>& row, int target) {
        double act = b;
        if (idx.empty()) {
            for (std::size_t k = 0; k < w.size(); ++k) act += w[k] * row[k];
        } else {
            for (std::size_t k = 0; k < w.size(); ++k)
                act += w[k] * row[static_cast<std::size_t>(idx[k] - 1)];
        }
        return (act >= 0.0 ? +1 : -1) == target;
    };
    std::size_t correct = 0;
    for (const auto& r : p.positives) correct += classify(r, +1);
    for (const auto& r : p.negatives) correct += classify(r, -1);
    return static_cast<double>(correct) /
           static_cast<double>(p.positives.size() + p.negatives.size());
}

// best halfplane accuracy on tiny 2-d point sets: some optimum can be placed
// through two of the points, so enumerating pair-defined boundaries (both
// orientations, nudged both ways) plus single-point thresholds is exhaustive
double brute_force_best_linear(const BinaryProblem& p) {
    std::vector<std::pair<std::vector<double>, int>> pts;
    for (const auto& r : p.positives) pts.push_back({r, +1});
    for (const auto& r : p.negatives) pts.push_back({r, -1});
    double best = 0.0;
    auto eval = [&](double wx, double wy, double b) {
        std::size_t correct = 0;
        for (const auto& [r, y] : pts) {
            double act = wx * r[0] + wy * r[1] + b;
            if ((act >= 0.0 ? +1 : -1) == y) ++correct;
        }
        best = std::max(best, static_cast<double>(correct) / pts.size());
    };
    const double delta = 1e-6;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (i == j) continue;
            double dx = pts[j].first[0] - pts[i].first[0];
            double dy = pts[j].first[1] - pts[i].first[1];
            double nx = -dy, ny = dx; // normal to the line through i and j
            for (double sign : {1.0, -1.0}) {
                double b0 = -(nx * pts[i].first[0] + ny * pts[i].first[1]);
                for (double shift : {-delta, 0.0, delta})
                    eval(sign * nx, sign * ny, sign * (b0 + shift));
            }
        }
        // axis-aligned thresholds through each point
        for (double sign : {1.0, -1.0}) {
            for (double shift : {-delta, 0.0, delta}) {
                eval(sign, 0.0, sign * (-pts[i].first[0] + shift));
                eval(0.0, sign, sign * (-pts[i].first[1] + shift));
            }
        }
    }
    return best;
}

FeatureLayout tiny_layout(int n) {
    auto full = canonical_layout(100.0);
    FeatureLayout layout;
    layout.sample_rate_hz = full.sample_rate_hz;
    layout.segment_seconds = full.segment_seconds;
    layout.features.assign(full.features.begin(), full.features.begin() + n);
    return layout;
}

SegmentDataset tiny_dataset(const std::vector<std::pair<int, std::vector<double>>>& rows) {
    SegmentDataset ds;
    ds.layout = tiny_layout(static_cast<int>(rows.front().second.size()));
    int k = 0;
    for (const auto& [label, values] : rows) {
        FeatureVector fv;
        fv.values = values;
        fv.label = label;
        fv.record_id = "r" + std::to_string(k);
        fv.segment_index = 0;
        ds.record_partition[fv.record_id] = Partition::train;
        ds.rows.push_back(std::move(fv));
        ++k;
    }
    return ds;
}

} // namespace

TEST_CASE("config validation and key=value loading") {
    TrainConfig cfg;
    CHECK(cfg.epochs == 200);
    CHECK(cfg.learning_rate == 1.0);
    CHECK(cfg.selection_patience == 2);
    CHECK(cfg.max_features == 58);
    CHECK(cfg.validation_fraction == 0.25);
    CHECK_NOTHROW(cfg.validate());

    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), StructuralError);

    const char* path = "tiny_train_config.kv";
    {
        std::ofstream out(path);
        out << "# comment\n" << "epochs = 17\n" << "validation_fraction=0.5\n" << "seed = 99\n";
    }
    auto loaded = load_train_config(path);
    CHECK(loaded.epochs == 17);
    CHECK(loaded.validation_fraction == 0.5);
    CHECK(loaded.seed == 99);
    CHECK(loaded.max_features == 58); // untouched default

    {
        std::ofstream out(path);
        out << "epchs = 17\n";
    }
    CHECK_THROWS_AS(load_train_config(path), StructuralError);
    std::remove(path);
}

TEST_CASE("pocket separates a separable 1-d pair") {
    auto p = problem_1d({2.0, 3.0}, {-2.0, -3.0});
    TrainConfig cfg;
    auto r = pocket_train(p, cfg, 1);
    CHECK(r.train_accuracy == 1.0);
    CHECK(problem_accuracy(p, r.weights, r.bias) == 1.0);
}

TEST_CASE("one positive and one negative point separate within one epoch") {
    auto p = problem_1d({2.0}, {-2.0});
    TrainConfig cfg;
    cfg.epochs = 1;
    auto r = pocket_train(p, cfg, 1);
    CHECK(r.train_accuracy == 1.0);
    CHECK(r.epochs_used == 1);
}

TEST_CASE("pocket on XOR reaches the best linear accuracy of 0.75") {
    BinaryProblem xor_p;
    xor_p.positives = {{0.0, 0.0}, {1.0, 1.0}};
    xor_p.negatives = {{0.0, 1.0}, {1.0, 0.0}};
    CHECK(brute_force_best_linear(xor_p) == 0.75); // the oracle itself
    TrainConfig cfg;
    for (std::uint64_t stream = 1; stream <= 5; ++stream) {
        auto r = pocket_train(xor_p, cfg, stream);
        CHECK(r.train_accuracy >= 0.75);
        CHECK(problem_accuracy(xor_p, r.weights, r.bias) == r.train_accuracy);
    }
}

TEST_CASE("pocket rejects degenerate inputs") {
    TrainConfig cfg;
    BinaryProblem empty;
    empty.positives = {{1.0}};
    CHECK_THROWS_AS(pocket_train(empty, cfg, 1), StructuralError);
    BinaryProblem zero_dim;
    zero_dim.positives = {{}};
    zero_dim.negatives = {{}};
    CHECK_THROWS_AS(pocket_train(zero_dim, cfg, 1), StructuralError);
    BinaryProblem ragged;
    ragged.positives = {{1.0, 2.0}};
    ragged.negatives = {{1.0}};
    CHECK_THROWS_AS(pocket_train(ragged, cfg, 1), StructuralError);
}

TEST_CASE("the pocket's recorded accuracy is non-decreasing over epochs") {
    Rng rng(31);
    BinaryProblem p;
    for (int i = 0; i < 40; ++i) { // heavily overlapping 2-d gaussians
        p.positives.push_back({rng.normal() + 0.4, rng.normal()});
        p.negatives.push_back({rng.normal() - 0.4, rng.normal()});
    }
    TrainConfig cfg;
    cfg.epochs = 60;
    PocketTrace trace;
    auto r = pocket_train(p, cfg, 7, &trace);
    REQUIRE(!trace.empty());
    for (std::size_t e = 1; e < trace.size(); ++e) CHECK(trace[e] >= trace[e - 1]);
    CHECK(r.train_accuracy == trace.back());
    CHECK(r.train_accuracy >= 0.5);
    CHECK(r.train_accuracy <= 1.0);
}

TEST_CASE("separable pairs always reach training accuracy 1.0") {
    TrainConfig cfg;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        Rng rng(Rng::mix(404, seed));
        std::size_t dim = 2 + rng.below(9);
        std::vector<double> w_true(dim);
        for (auto& v : w_true) v = rng.normal();
        double b_true = 0.3 * rng.normal();
        BinaryProblem p;
        while (p.positives.size() + p.negatives.size() < 120) {
            std::vector<double> x(dim);
            for (auto& v : x) v = 2.0 * rng.uniform() - 1.0;
            double act = b_true;
            for (std::size_t k = 0; k < dim; ++k) act += w_true[k] * x[k];
            if (std::fabs(act) < 0.05) continue; // enforce a margin
            (act > 0 ? p.positives : p.negatives).push_back(std::move(x));
        }
        if (p.positives.empty() || p.negatives.empty()) continue;
        auto r = pocket_train(p, cfg, seed);
        CHECK(r.train_accuracy == 1.0);
    }
}

TEST_CASE("forward selection finds the planted informative feature first") {
    Rng rng(55);
    BinaryProblem p;
    for (int i = 0; i < 60; ++i) {
        double y = i % 2 == 0 ? 1.0 : -1.0;
        // feature 2 separates perfectly; 1 and 3 are pure noise
        std::vector<double> row = {rng.normal(), y * (1.0 + rng.uniform()), rng.normal()};
        (y > 0 ? p.positives : p.negatives).push_back(std::move(row));
    }
    TrainConfig cfg;
    auto fit = forward_select(p, cfg, 2024);
    REQUIRE(!fit.selection_trace.empty());
    CHECK(fit.selection_trace[0] == 2);
    CHECK(fit.classifier.feature_indices.front() == 2);
    CHECK(fit.validation_accuracy == 1.0);
}

TEST_CASE("identical copies: exactly one feature selected, index 1 by the tie rule") {
    Rng rng(66);
    BinaryProblem p;
    for (int i = 0; i < 40; ++i) {
        double y = i % 2 == 0 ? 1.0 : -1.0;
        double v = y * (1.0 + rng.uniform());
        (y > 0 ? p.positives : p.negatives).push_back({v, v, v});
    }
    TrainConfig cfg;
    auto fit = forward_select(p, cfg, 3);
    CHECK(fit.classifier.feature_indices == std::vector<int>{1});
    CHECK(fit.validation_accuracy == 1.0);
}

TEST_CASE("jointly separable pair {1,3} is selected and reaches accuracy 1") {
    Rng rng(77);
    BinaryProblem p;
    for (int i = 0; i < 80; ++i) {
        double y = i % 2 == 0 ? 1.0 : -1.0;
        double t = 5.0 * rng.uniform();
        // x1 - x3 = y: separable jointly, far from separable singly
        (y > 0 ? p.positives : p.negatives).push_back({t, rng.normal(), t - y});
    }
    TrainConfig cfg;
    auto fit = forward_select(p, cfg, 99);
    CHECK(fit.validation_accuracy == 1.0);
    auto& idx = fit.classifier.feature_indices;
    CHECK(std::find(idx.begin(), idx.end(), 1) != idx.end());
    CHECK(std::find(idx.begin(), idx.end(), 3) != idx.end());

    // brute-force best-subset (size <= 2) oracle: only subsets containing
    // {1,3} separate the validation rows perfectly
    auto split = make_selection_split(p, cfg, 99);
    auto fit_on = [&](std::vector<int> subset) {
        BinaryProblem sub;
        for (auto i : split.fit_positives) {
            std::vector<double> row;
            for (int f : subset) row.push_back(p.positives[i][static_cast<std::size_t>(f - 1)]);
            sub.positives.push_back(std::move(row));
        }
        for (auto i : split.fit_negatives) {
            std::vector<double> row;
            for (int f : subset) row.push_back(p.negatives[i][static_cast<std::size_t>(f - 1)]);
            sub.negatives.push_back(std::move(row));
        }
        auto r = pocket_train(sub, cfg, 1);
        BinaryProblem val;
        for (auto i : split.val_positives) val.positives.push_back(p.positives[i]);
        for (auto i : split.val_negatives) val.negatives.push_back(p.negatives[i]);
        return problem_accuracy(val, r.weights, r.bias, subset);
    };
    for (std::vector<int> subset :
         {std::vector<int>{1}, {2}, {3}, {1, 2}, {2, 3}})
        CHECK(fit_on(subset) < 1.0);
    CHECK(fit_on({1, 3}) == 1.0);
}

TEST_CASE("the first two greedy choices match a brute-force re-execution") {
    for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
        Rng rng(Rng::mix(808, seed));
        BinaryProblem p;
        for (int i = 0; i < 48; ++i) { // 6 features of varying usefulness
            double y = i % 2 == 0 ? 1.0 : -1.0;
            std::vector<double> row(6);
            for (std::size_t f = 0; f < 6; ++f)
                row[f] = 0.3 * static_cast<double>(f % 3) * y + rng.normal();
            (y > 0 ? p.positives : p.negatives).push_back(std::move(row));
        }
        TrainConfig cfg;
        cfg.selection_patience = 4; // let at least two steps happen
        auto fit = forward_select(p, cfg, seed);
        REQUIRE(fit.selection_trace.size() >= 2);

        // re-execute the greedy definition step by step
        auto split = make_selection_split(p, cfg, seed);
        BinaryProblem val;
        for (auto i : split.val_positives) val.positives.push_back(p.positives[i]);
        for (auto i : split.val_negatives) val.negatives.push_back(p.negatives[i]);

        std::vector<int> chosen;
        for (int step = 1; step <= 2; ++step) {
            int best_f = -1;
            double best_acc = -1.0;
            for (int f = 1; f <= 6; ++f) {
                if (std::find(chosen.begin(), chosen.end(), f) != chosen.end()) continue;
                std::vector<int> subset = chosen;
                subset.push_back(f);
                std::sort(subset.begin(), subset.end());
                BinaryProblem sub;
                for (auto i : split.fit_positives) {
                    std::vector<double> row;
                    for (int ff : subset)
                        row.push_back(p.positives[i][static_cast<std::size_t>(ff - 1)]);
                    sub.positives.push_back(std::move(row));
                }
                for (auto i : split.fit_negatives) {
                    std::vector<double> row;
                    for (int ff : subset)
                        row.push_back(p.negatives[i][static_cast<std::size_t>(ff - 1)]);
                    sub.negatives.push_back(std::move(row));
                }
                auto r = pocket_train(sub, cfg,
                                      Rng::mix(seed, static_cast<std::uint64_t>(step),
                                               static_cast<std::uint64_t>(f)));
                double acc = problem_accuracy(val, r.weights, r.bias, subset);
                if (acc > best_acc) {
                    best_acc = acc;
                    best_f = f;
                }
            }
            chosen.push_back(best_f);
        }
        CHECK(fit.selection_trace[0] == chosen[0]);
        CHECK(fit.selection_trace[1] == chosen[1]);
    }
}

TEST_CASE("selection accuracies live in [0,1] and the best is non-decreasing") {
    Rng rng(91);
    BinaryProblem p;
    for (int i = 0; i < 50; ++i) {
        double y = i % 2 == 0 ? 1.0 : -1.0;
        std::vector<double> row(5);
        for (auto& v : row) v = 0.2 * y + rng.normal();
        (y > 0 ? p.positives : p.negatives).push_back(std::move(row));
    }
    TrainConfig cfg;
    auto fit = forward_select(p, cfg, 17);
    CHECK(fit.train_accuracy >= 0.0);
    CHECK(fit.train_accuracy <= 1.0);
    CHECK(fit.validation_accuracy >= 0.0);
    CHECK(fit.validation_accuracy <= 1.0);
    CHECK(!fit.scored_on_training);
}

TEST_CASE("an empty validation split falls back to training rows with a flag") {
    BinaryProblem p; // 2+2 rows, fraction 0.25 -> floor gives no holdout
    p.positives = {{1.0}, {2.0}};
    p.negatives = {{-1.0}, {-2.0}};
    TrainConfig cfg;
    auto fit = forward_select(p, cfg, 5);
    CHECK(fit.scored_on_training);
    CHECK(fit.validation_accuracy == 1.0);
}

TEST_CASE("train_pair restricts to the two classes and labels the fit") {
    auto ds = tiny_dataset({
        {1, {2.0, 0.0}}, {1, {3.0, 1.0}}, {1, {2.5, -1.0}}, {1, {2.2, 0.3}},
        {2, {-2.0, 0.0}}, {2, {-3.0, 1.0}}, {2, {-2.5, -1.0}}, {2, {-2.2, 0.3}},
        {3, {0.0, 5.0}}, {3, {0.5, 6.0}},
    });
    TrainConfig cfg;
    auto fit = train_pair(ds, 1, 2, cfg);
    CHECK(fit.classifier.class_lo == 1);
    CHECK(fit.classifier.class_hi == 2);
    CHECK(fit.validation_accuracy == 1.0);

    CHECK_THROWS_AS(train_pair(ds, 2, 2, cfg), StructuralError);
    CHECK_THROWS_WITH_AS(train_pair(ds, 1, 4, cfg), "class 4 has no training segments",
                         StructuralError);
}

TEST_CASE("train_model assembles all pairs and validates presence of classes") {
    auto corpus = generate_corpus([] {
        SyntheticSpec s;
        s.q = 4;
        s.records_per_class = 2;
        s.segments_per_record = 4;
        s.overlap = 0.0;
        s.bba_drift = 0.0;
        s.noise_floor = 0.0;
        s.seed = 12;
        return s;
    }());
    auto ds = featurize_corpus(corpus, true);
    TrainConfig cfg;
    cfg.seed = 4;
    auto trained = train_model(ds, 4, cfg);
    CHECK(trained.model.classifiers.size() == 6);
    CHECK(trained.pair_info.size() == 6);
    for (const auto& info : trained.pair_info) CHECK(info.validation_accuracy == 1.0);

    // end-to-end: every training row classified correctly on a clean corpus
    std::size_t correct = 0;
    for (const auto& row : ds.rows) correct += predict(trained.model, row) == row.label;
    CHECK(correct == ds.rows.size());

    CHECK_THROWS_WITH_AS(train_model(ds, 5, cfg),
                         "class 5 is missing from the training partition", StructuralError);
}

TEST_CASE("pair training is order-independent and reproducible") {
    auto corpus = generate_corpus([] {
        SyntheticSpec s;
        s.q = 3;
        s.records_per_class = 2;
        s.segments_per_record = 5;
        s.overlap = 0.4;
        s.bba_drift = 0.1;
        s.noise_floor = 0.05;
        s.seed = 31;
        return s;
    }());
    auto ds = featurize_corpus(corpus, true);
    TrainConfig cfg;
    cfg.seed = 777;
    auto serial = train_model(ds, 3, cfg, 1);
    auto parallel = train_model(ds, 3, cfg, 3);
    CHECK(model_to_json(serial.model) == model_to_json(parallel.model));

    auto again = train_model(ds, 3, cfg, 1);
    CHECK(model_to_json(serial.model) == model_to_json(again.model));
}

TEST_CASE("q=2 training yields a single classifier") {
    auto ds = tiny_dataset({
        {1, {2.0}}, {1, {3.0}}, {1, {2.5}}, {1, {2.1}},
        {2, {-2.0}}, {2, {-3.0}}, {2, {-2.5}}, {2, {-2.1}},
    });
    TrainConfig cfg;
    auto trained = train_model(ds, 2, cfg);
    CHECK(trained.model.classifiers.size() == 1);
    CHECK(trained.model.q == 2);
}
