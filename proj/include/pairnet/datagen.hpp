#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pairnet/dataset.hpp"
#include "pairnet/features.hpp"

namespace pairnet {

// ---------------------------------------------------------------------------
// Synthetic corpus generator. Structurally mirrors the clinical data the
// pipeline was designed for: q age-like classes whose band-amplitude profiles
// form a smooth gradient (adjacent classes are the hardest pairs), records of
// many 10-s segments, and a slow per-record multiplicative gain walk that the
// BBA correction is supposed to cancel.
// ---------------------------------------------------------------------------

struct SyntheticSpec {
    int q = 16;
    int records_per_class = 4;
    int segments_per_record = 30;
    double sample_rate_hz = 100.0;
    // Per class, six mean band amplitudes. Empty = default smooth gradient.
    std::vector<std::array<double, kNumBands>> class_band_profile;
    double overlap = 0.3;      // sd of the per-segment lognormal amplitude noise
    double bba_drift = 0.15;   // sd of the per-record log-amplitude gain walk
    double noise_floor = 0.02; // white noise amplitude, added after the gain
    std::uint64_t seed = 1;

    void validate() const; // throws StructuralError naming the violated invariant
};

/// Default class profile: amplitude of band b for class c is
/// exp(s_b * (c-1)/(q-1)) with slopes s spread from +1.0 down to -1.0 across
/// the six bands, so classes lie on a smooth spectral gradient.
std::vector<std::array<double, kNumBands>> default_band_profile(int q);

struct RawRecord {
    std::string record_id;
    int label = 0;
    std::array<std::vector<double>, kNumChannels> channels;
    // Ground-truth per-segment POWER gain (the amplitude factor squared),
    // emitted for oracle tests: BBA differences equal log gain ratios.
    std::vector<double> segment_power_gain;
};

struct Corpus {
    SyntheticSpec spec;
    std::vector<RawRecord> records;
};

/// Deterministic given (spec, spec.seed): per-record streams are derived by
/// hashing, so generation order never matters. Each channel is a sum over
/// the six bands of tones at the band-center frequency (snapped to the 0.1 Hz
/// bin grid), with amplitude = class profile x exp(overlap*N(0,1)) x gain
/// walk, plus noise_floor white noise.
Corpus generate_corpus(const SyntheticSpec& spec);

/// Extracts features for every segment of every record (optionally BBA
/// corrected), all rows tagged train.
SegmentDataset featurize_corpus(const Corpus& corpus, bool apply_bba_correction);

/// Assigns whole records to train/test, stratified by class; per class,
/// round(n*test_fraction) records go to test, always keeping at least one in
/// train. A single-record class goes to train with a recorded warning.
void split_by_record(SegmentDataset& dataset, double test_fraction, std::uint64_t seed);

} // namespace pairnet
