#include "pairnet/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "pairnet/common.hpp"
#include "pairnet/rng.hpp"

namespace pairnet {

void SyntheticSpec::validate() const {
    if (q < 2) throw StructuralError("synthetic spec: q must be at least 2");
    if (records_per_class < 1) throw StructuralError("synthetic spec: records_per_class must be >= 1");
    if (segments_per_record < 1) throw StructuralError("synthetic spec: segments_per_record must be >= 1");
    if (!(sample_rate_hz > 50.0)) throw StructuralError("synthetic spec: sample_rate_hz must exceed 50");
    if (overlap < 0.0) throw StructuralError("synthetic spec: overlap must be >= 0");
    if (bba_drift < 0.0) throw StructuralError("synthetic spec: bba_drift must be >= 0");
    if (noise_floor < 0.0) throw StructuralError("synthetic spec: noise_floor must be >= 0");
    if (!class_band_profile.empty() && static_cast<int>(class_band_profile.size()) != q)
        throw StructuralError("synthetic spec: class_band_profile must have one row per class");
}

std::vector<std::array<double, kNumBands>> default_band_profile(int q) {
    // The dominant spectral content travels smoothly across the six bands
    // with the class index (a Gaussian bump over band position on a fixed
    // floor), so adjacent classes are the closest pairs and every class has
    // a band signature of its own.
    std::vector<std::array<double, kNumBands>> profile(static_cast<std::size_t>(q));
    for (int c = 0; c < q; ++c) {
        double t = q > 1 ? static_cast<double>(c) / (q - 1) : 0.0;
        double center = t * (kNumBands - 1);
        for (int b = 0; b < kNumBands; ++b) {
            double d = (static_cast<double>(b) - center) / 0.5;
            profile[static_cast<std::size_t>(c)][static_cast<std::size_t>(b)] =
                0.4 + 1.6 * std::exp(-0.5 * d * d);
        }
    }
    return profile;
}

namespace {

std::string make_record_id(int label, int ordinal) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "c%02d_r%02d", label, ordinal);
    return buf;
}

} // namespace

Corpus generate_corpus(const SyntheticSpec& spec) {
    spec.validate();
    const auto profile =
        spec.class_band_profile.empty() ? default_band_profile(spec.q) : spec.class_band_profile;

    const int samples_per_segment = static_cast<int>(spec.sample_rate_hz * kSegmentSeconds + 0.5);
    // Tone frequencies: band centers snapped to the segment's DFT bin grid so
    // a noiseless corpus has no spectral leakage.
    std::array<double, kNumBands> tone_hz{};
    for (int b = 0; b < kNumBands; ++b) {
        const auto& band = canonical_bands()[b];
        double center = 0.5 * (band.lo_hz + band.hi_hz);
        double k = std::round(center * samples_per_segment / spec.sample_rate_hz);
        tone_hz[static_cast<std::size_t>(b)] = k * spec.sample_rate_hz / samples_per_segment;
    }

    Corpus corpus;
    corpus.spec = spec;
    const int n_records = spec.q * spec.records_per_class;
    corpus.records.resize(static_cast<std::size_t>(n_records));

    for (int r = 0; r < n_records; ++r) {
        RawRecord& rec = corpus.records[static_cast<std::size_t>(r)];
        rec.label = r / spec.records_per_class + 1;
        rec.record_id = make_record_id(rec.label, r % spec.records_per_class + 1);
        const auto& amps = profile[static_cast<std::size_t>(rec.label - 1)];

        Rng rng(Rng::mix(spec.seed, 0xDA7A, static_cast<std::uint64_t>(r)));
        const std::size_t total = static_cast<std::size_t>(spec.segments_per_record) *
                                  static_cast<std::size_t>(samples_per_segment);
        for (auto& ch : rec.channels) ch.reserve(total);
        rec.segment_power_gain.reserve(static_cast<std::size_t>(spec.segments_per_record));

        // log-amplitude gain walk: per-record baseline plus per-segment steps
        double log_gain = spec.bba_drift * rng.normal();
        for (int s = 0; s < spec.segments_per_record; ++s) {
            if (s > 0) log_gain += spec.bba_drift * rng.normal();
            const double amp_gain = std::exp(log_gain);
            rec.segment_power_gain.push_back(amp_gain * amp_gain);

            for (int ch = 0; ch < kNumChannels; ++ch) {
                std::array<double, kNumBands> a{};
                std::array<double, kNumBands> phase{};
                for (int b = 0; b < kNumBands; ++b) {
                    double jitter = spec.overlap > 0.0 ? std::exp(spec.overlap * rng.normal()) : 1.0;
                    a[static_cast<std::size_t>(b)] =
                        amps[static_cast<std::size_t>(b)] * jitter * amp_gain;
                    phase[static_cast<std::size_t>(b)] = 6.28318530717958647692 * rng.uniform();
                }
                for (int n = 0; n < samples_per_segment; ++n) {
                    double t = static_cast<double>(n) / spec.sample_rate_hz;
                    double v = 0.0;
                    for (int b = 0; b < kNumBands; ++b)
                        v += a[static_cast<std::size_t>(b)] *
                             std::sin(6.28318530717958647692 * tone_hz[static_cast<std::size_t>(b)] * t +
                                      phase[static_cast<std::size_t>(b)]);
                    if (spec.noise_floor > 0.0) v += spec.noise_floor * rng.normal();
                    rec.channels[ch].push_back(v);
                }
            }
        }
    }
    return corpus;
}

SegmentDataset featurize_corpus(const Corpus& corpus, bool apply_bba_correction) {
    SegmentDataset ds;
    ds.layout = canonical_layout(corpus.spec.sample_rate_hz);
    for (const auto& rec : corpus.records) {
        auto segments = segment_record(rec.channels, ds.layout, rec.record_id);
        for (const auto& seg : segments) {
            if (seg.artifact) continue;
            FeatureVector fv = extract_features(seg, ds.layout);
            if (apply_bba_correction) fv = bba_correct(fv, ds.layout);
            fv.label = rec.label;
            ds.record_partition[fv.record_id] = Partition::train;
            ds.rows.push_back(std::move(fv));
        }
    }
    return ds;
}

void split_by_record(SegmentDataset& dataset, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw StructuralError("test_fraction must lie strictly between 0 and 1");

    // label per record (rows of one record must agree)
    std::map<std::string, int> record_label;
    for (const auto& row : dataset.rows) {
        auto [it, inserted] = record_label.emplace(row.record_id, row.label);
        if (!inserted && it->second != row.label)
            throw StructuralError("record '" + row.record_id + "' has inconsistent labels");
    }

    std::map<int, std::vector<std::string>> by_class;
    for (const auto& [id, label] : record_label) by_class[label].push_back(id); // sorted ids

    for (auto& [label, ids] : by_class) {
        const std::size_t n = ids.size();
        if (n == 1) {
            dataset.record_partition[ids[0]] = Partition::train;
            dataset.warnings.push_back("class " + std::to_string(label) +
                                       " has a single record; assigned to train");
            continue;
        }
        Rng rng(Rng::mix(seed, 0x5917, static_cast<std::uint64_t>(label)));
        rng.shuffle(ids);
        auto n_test = static_cast<std::size_t>(
            std::floor(static_cast<double>(n) * test_fraction + 0.5));
        n_test = std::min(n_test, n - 1); // at least one record stays in train
        for (std::size_t k = 0; k < n; ++k)
            dataset.record_partition[ids[k]] = k < n_test ? Partition::test : Partition::train;
    }
}

} // namespace pairnet
