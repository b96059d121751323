#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace pairnet {

// ---------------------------------------------------------------------------
// Frequency bands
// ---------------------------------------------------------------------------

struct FrequencyBand {
    std::string name;
    double lo_hz = 0.0;
    double hi_hz = 0.0;
    // The last band of the canonical set closes its upper edge so the six
    // bands partition [0, 25] exactly.
    bool include_upper = false;
};

/// The six canonical bands: subdelta 0-1.5, delta 1.5-3.5, theta 3.5-7.5,
/// alpha 7.5-13.5, beta1 13.5-19.5, beta2 19.5-25 Hz.
const std::array<FrequencyBand, 6>& canonical_bands();

inline constexpr int kNumBands = 6;
inline constexpr int kNumChannels = 2;
inline constexpr int kNumFeatures = 72;
inline constexpr double kSegmentSeconds = 10.0;
inline constexpr double kLogEpsilon = 1e-12; // floor inside log so silence stays finite

// ---------------------------------------------------------------------------
// Feature layout
// ---------------------------------------------------------------------------

// Per channel, per band: log absolute power, relative power, spectral
// variance, band peak frequency, band spectral entropy (2*6*5 = 60).
// Per channel: total log power, signal variance, skewness, kurtosis,
// zero-crossing rate, line length (2*6 = 12). Total 72.
enum class FeatureStat {
    band_log_power,
    band_rel_power,
    band_spec_variance,
    band_peak_freq,
    band_spec_entropy,
    total_log_power,
    signal_variance,
    skewness,        // m3 / m2^1.5, 0 when m2 == 0
    kurtosis,        // excess kurtosis m4/m2^2 - 3, 0 when m2 == 0
    zero_cross_rate, // strict sign changes / (N-1)
    line_length,     // mean absolute first difference
};

const char* feature_stat_name(FeatureStat s);
FeatureStat feature_stat_from_name(const std::string& s);
bool feature_stat_is_band(FeatureStat s);

struct FeatureDescriptor {
    std::string name; // unique, e.g. "ch1_theta_log_power"
    int channel = 1;  // 1 or 2
    int band = -1;    // 0..5 into canonical_bands(), -1 for channel-global stats
    FeatureStat stat = FeatureStat::band_log_power;
};

struct FeatureLayout {
    std::vector<FeatureDescriptor> features; // exactly 72 entries, fixed order
    double sample_rate_hz = 100.0;
    double segment_seconds = kSegmentSeconds;

    int size() const { return static_cast<int>(features.size()); }
    /// Index of a descriptor by (channel, band, stat); 1-based. Throws if absent.
    int index_of(int channel, int band, FeatureStat stat) const;
};

/// The canonical 72-feature layout at a given sampling rate.
FeatureLayout canonical_layout(double sample_rate_hz = 100.0);

// ---------------------------------------------------------------------------
// Segments and feature vectors
// ---------------------------------------------------------------------------

struct Segment {
    std::string record_id;
    int segment_index = 0;
    std::array<std::vector<double>, kNumChannels> channels;
    bool artifact = false; // flagged segments are excluded from datasets
};

inline constexpr int kUnlabeled = 0;

struct FeatureVector {
    std::vector<double> values; // kNumFeatures reals in layout order
    std::string record_id;
    int segment_index = 0;
    int label = kUnlabeled; // 1-based class index, 0 = unlabeled
    bool bba_corrected = false;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Cuts a 2-channel record into consecutive non-overlapping 10-s segments;
/// a trailing partial window is dropped. A record shorter than one window
/// yields an empty list.
std::vector<Segment> segment_record(const std::array<std::vector<double>, kNumChannels>& samples,
                                    const FeatureLayout& layout,
                                    const std::string& record_id);

struct Spectrum {
    std::vector<double> freq_hz; // ascending, bin 0 = DC
    std::vector<double> power;   // single-sided, sums to signal variance
};

/// Single-sided periodogram of the mean-removed signal. Satisfies the
/// discrete Parseval identity: sum(power) == population variance of the
/// input within 1e-9 relative tolerance.
Spectrum power_spectrum(const std::vector<double>& samples, double sample_rate_hz);

/// Sum of spectral power at frequencies in [lo, hi) (or [lo, hi] when the
/// band closes its upper edge).
double band_power(const Spectrum& spectrum, const FrequencyBand& band);

/// Fills all 72 features for one segment. Throws StructuralError on
/// non-finite samples or a segment that violates the layout's length.
FeatureVector extract_features(const Segment& seg, const FeatureLayout& layout);

/// Per-channel BBA: mean of that channel's six log absolute band powers.
std::array<double, kNumChannels> compute_bba(const FeatureVector& fv, const FeatureLayout& layout);

/// Subtracts each channel's BBA from its six log band powers and its total
/// log power; everything else is untouched. Throws on double correction.
FeatureVector bba_correct(const FeatureVector& fv, const FeatureLayout& layout);

} // namespace pairnet
