// python bindings for the main operations: corpus generation, feature
// extraction, training, prediction and scoring.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "pairnet/common.hpp"
#include "pairnet/datagen.hpp"
#include "pairnet/eval.hpp"
#include "pairnet/features.hpp"
#include "pairnet/model.hpp"
#include "pairnet/serialize.hpp"
#include "pairnet/trainer.hpp"

namespace py = pybind11;
using namespace pairnet;

namespace {

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw StructuralError("expected a 1-d array");
    return {a.data(), a.data() + a.shape(0)};
}

FeatureVector vector_to_fv(const std::vector<double>& values) {
    FeatureVector fv;
    fv.values = values;
    return fv;
}

Segment make_segment(const py::array_t<double, py::array::c_style | py::array::forcecast>& ch1,
                     const py::array_t<double, py::array::c_style | py::array::forcecast>& ch2) {
    Segment seg;
    seg.channels[0] = to_vector(ch1);
    seg.channels[1] = to_vector(ch2);
    return seg;
}

} // namespace

PYBIND11_MODULE(_pairnet, m) {
    m.doc() = "pairwise-coupled multi-class classifier over spectral segment features";

    py::register_exception<StructuralError>(m, "StructuralError");

    // ---- model core -------------------------------------------------------
    m.def("classifier_count", &classifier_count, py::arg("q"));
    m.def(
        "coupling_weight",
        [](int i, int a, int b, int q) { return coupling_weight(i, {a, b}, q); },
        py::arg("i"), py::arg("a"), py::arg("b"), py::arg("q"));

    py::class_<GroupScores>(m, "GroupScores")
        .def_readonly("scores", &GroupScores::scores)
        .def_readonly("votes", &GroupScores::votes)
        .def_readonly("winner", &GroupScores::winner);

    py::class_<MultiClassModel>(m, "Model")
        .def_property_readonly("q", [](const MultiClassModel& m_) { return m_.q; })
        .def_property_readonly("n_classifiers",
                               [](const MultiClassModel& m_) { return m_.classifiers.size(); })
        .def_property_readonly("trained_on",
                               [](const MultiClassModel& m_) { return m_.trained_on; })
        .def(
            "predict",
            [](const MultiClassModel& m_, const std::vector<double>& values) {
                return predict(m_, vector_to_fv(values));
            },
            py::arg("values"))
        .def(
            "group_scores",
            [](const MultiClassModel& m_, const std::vector<double>& values, bool soft) {
                return group_scores(m_, vector_to_fv(values),
                                    soft ? ScoreMode::soft : ScoreMode::hard);
            },
            py::arg("values"), py::arg("soft") = false)
        .def("to_json", &model_to_json)
        .def("save", &save_model, py::arg("path"))
        .def_static("from_json", &model_from_json, py::arg("text"))
        .def_static("load", &load_model, py::arg("path"));

    // ---- features ---------------------------------------------------------
    m.def(
        "power_spectrum",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& samples,
           double rate) {
            auto sp = power_spectrum(to_vector(samples), rate);
            return py::make_tuple(sp.freq_hz, sp.power);
        },
        py::arg("samples"), py::arg("sample_rate_hz"),
        "single-sided periodogram as (frequencies, powers)");

    m.def(
        "extract_features",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& ch1,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& ch2,
           double rate, bool apply_bba_correction) {
            auto layout = canonical_layout(rate);
            auto fv = extract_features(make_segment(ch1, ch2), layout);
            if (apply_bba_correction) fv = bba_correct(fv, layout);
            return fv.values;
        },
        py::arg("channel1"), py::arg("channel2"), py::arg("sample_rate_hz") = 100.0,
        py::arg("bba_correct") = false, "the 72 features of one 10-s segment");

    m.def("feature_names", [](double rate) {
        std::vector<std::string> names;
        for (const auto& d : canonical_layout(rate).features) names.push_back(d.name);
        return names;
    }, py::arg("sample_rate_hz") = 100.0);

    // ---- synthetic corpus + datasets ---------------------------------------
    py::class_<SyntheticSpec>(m, "SyntheticSpec")
        .def(py::init<>())
        .def_readwrite("q", &SyntheticSpec::q)
        .def_readwrite("records_per_class", &SyntheticSpec::records_per_class)
        .def_readwrite("segments_per_record", &SyntheticSpec::segments_per_record)
        .def_readwrite("sample_rate_hz", &SyntheticSpec::sample_rate_hz)
        .def_readwrite("overlap", &SyntheticSpec::overlap)
        .def_readwrite("bba_drift", &SyntheticSpec::bba_drift)
        .def_readwrite("noise_floor", &SyntheticSpec::noise_floor)
        .def_readwrite("seed", &SyntheticSpec::seed);

    py::enum_<Partition>(m, "Partition")
        .value("train", Partition::train)
        .value("test", Partition::test);

    py::class_<SegmentDataset>(m, "Dataset")
        .def_property_readonly("n_rows",
                               [](const SegmentDataset& ds) { return ds.rows.size(); })
        .def_property_readonly("warnings",
                               [](const SegmentDataset& ds) { return ds.warnings; })
        .def("records_of", &SegmentDataset::records_of, py::arg("partition"))
        .def("labels_of", &SegmentDataset::labels_of, py::arg("partition"));

    m.def(
        "synth_dataset",
        [](const SyntheticSpec& spec, double test_fraction, bool apply_bba_correction) {
            auto ds = featurize_corpus(generate_corpus(spec), apply_bba_correction);
            if (test_fraction > 0.0) split_by_record(ds, test_fraction, spec.seed);
            return ds;
        },
        py::arg("spec"), py::arg("test_fraction") = 1.0 / 3.0, py::arg("bba_correct") = true,
        "generate + featurize + record-level split in one call");

    // ---- training and evaluation -------------------------------------------
    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("selection_patience", &TrainConfig::selection_patience)
        .def_readwrite("max_features", &TrainConfig::max_features)
        .def_readwrite("validation_fraction", &TrainConfig::validation_fraction);

    py::class_<PairTrainInfo>(m, "PairInfo")
        .def_readonly("class_lo", &PairTrainInfo::class_lo)
        .def_readonly("class_hi", &PairTrainInfo::class_hi)
        .def_readonly("n_features", &PairTrainInfo::n_features)
        .def_readonly("train_accuracy", &PairTrainInfo::train_accuracy)
        .def_readonly("validation_accuracy", &PairTrainInfo::validation_accuracy);

    m.def(
        "train_model",
        [](const SegmentDataset& ds, int q, const TrainConfig& cfg, int threads) {
            auto trained = train_model(ds, q, cfg, threads);
            return py::make_tuple(trained.model, trained.pair_info);
        },
        py::arg("dataset"), py::arg("q"), py::arg("config") = TrainConfig{},
        py::arg("threads") = 1, "returns (model, per-pair training info)");

    m.def("segment_accuracy",
          static_cast<double (*)(const MultiClassModel&, const SegmentDataset&, Partition)>(
              &segment_accuracy),
          py::arg("model"), py::arg("dataset"), py::arg("partition"));
    m.def("record_accuracy", &record_accuracy, py::arg("model"), py::arg("dataset"),
          py::arg("partition"));

    py::class_<RecordDecision>(m, "RecordDecision")
        .def_readonly("record_id", &RecordDecision::record_id)
        .def_readonly("predicted_class", &RecordDecision::predicted_class)
        .def_readonly("probability", &RecordDecision::probability)
        .def_readonly("per_class_fractions", &RecordDecision::per_class_fractions);

    m.def("record_decisions", &record_decisions, py::arg("model"), py::arg("dataset"),
          py::arg("partition"));

    // ---- baselines ----------------------------------------------------------
    py::class_<OneVsAllModel>(m, "OneVsAllModel")
        .def_property_readonly("q", [](const OneVsAllModel& m_) { return m_.q; })
        .def_property_readonly("n_units",
                               [](const OneVsAllModel& m_) { return m_.units.size(); })
        .def(
            "predict",
            [](const OneVsAllModel& m_, const std::vector<double>& values) {
                return predict(m_, vector_to_fv(values));
            },
            py::arg("values"));
    m.def("train_one_vs_all", &train_one_vs_all, py::arg("dataset"), py::arg("q"),
          py::arg("config") = TrainConfig{});
    m.def("one_vs_all_accuracy",
          static_cast<double (*)(const OneVsAllModel&, const SegmentDataset&, Partition)>(
              &segment_accuracy),
          py::arg("model"), py::arg("dataset"), py::arg("partition"));

    py::class_<HierarchicalModel>(m, "HierarchicalModel")
        .def_property_readonly("q", [](const HierarchicalModel& m_) { return m_.q; })
        .def_property_readonly("n_nodes",
                               [](const HierarchicalModel& m_) { return m_.nodes.size(); })
        .def(
            "predict",
            [](const HierarchicalModel& m_, const std::vector<double>& values) {
                return predict(m_, vector_to_fv(values));
            },
            py::arg("values"));
    m.def("train_hierarchical", &train_hierarchical, py::arg("dataset"), py::arg("q"),
          py::arg("config") = TrainConfig{});
    m.def("hierarchical_accuracy",
          static_cast<double (*)(const HierarchicalModel&, const SegmentDataset&, Partition)>(
              &segment_accuracy),
          py::arg("model"), py::arg("dataset"), py::arg("partition"));

    m.attr("__version__") = "1.0.0";
}
