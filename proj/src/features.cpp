#include "pairnet/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>

#include "pairnet/common.hpp"

namespace pairnet {

const std::array<FrequencyBand, 6>& canonical_bands() {
    static const std::array<FrequencyBand, 6> bands = {{
        {"subdelta", 0.0, 1.5, false},
        {"delta", 1.5, 3.5, false},
        {"theta", 3.5, 7.5, false},
        {"alpha", 7.5, 13.5, false},
        {"beta1", 13.5, 19.5, false},
        {"beta2", 19.5, 25.0, true}, // closes [0,25]
    }};
    return bands;
}

const char* feature_stat_name(FeatureStat s) {
    switch (s) {
        case FeatureStat::band_log_power: return "log_power";
        case FeatureStat::band_rel_power: return "rel_power";
        case FeatureStat::band_spec_variance: return "spec_variance";
        case FeatureStat::band_peak_freq: return "peak_freq";
        case FeatureStat::band_spec_entropy: return "spec_entropy";
        case FeatureStat::total_log_power: return "total_log_power";
        case FeatureStat::signal_variance: return "variance";
        case FeatureStat::skewness: return "skewness";
        case FeatureStat::kurtosis: return "kurtosis";
        case FeatureStat::zero_cross_rate: return "zero_cross_rate";
        case FeatureStat::line_length: return "line_length";
    }
    return "?";
}

FeatureStat feature_stat_from_name(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(FeatureStat::line_length); ++i) {
        auto stat = static_cast<FeatureStat>(i);
        if (s == feature_stat_name(stat)) return stat;
    }
    throw StructuralError("unknown feature statistic: '" + s + "'");
}

bool feature_stat_is_band(FeatureStat s) {
    switch (s) {
        case FeatureStat::band_log_power:
        case FeatureStat::band_rel_power:
        case FeatureStat::band_spec_variance:
        case FeatureStat::band_peak_freq:
        case FeatureStat::band_spec_entropy:
            return true;
        default:
            return false;
    }
}

int FeatureLayout::index_of(int channel, int band, FeatureStat stat) const {
    for (std::size_t k = 0; k < features.size(); ++k) {
        const auto& d = features[k];
        if (d.channel == channel && d.band == band && d.stat == stat)
            return static_cast<int>(k) + 1;
    }
    throw StructuralError("feature not present in layout");
}

FeatureLayout canonical_layout(double sample_rate_hz) {
    if (!(sample_rate_hz > 50.0))
        throw StructuralError("sample_rate_hz must exceed 50 (Nyquist must cover 25 Hz)");
    FeatureLayout layout;
    layout.sample_rate_hz = sample_rate_hz;
    layout.segment_seconds = kSegmentSeconds;
    const FeatureStat band_stats[] = {
        FeatureStat::band_log_power,   FeatureStat::band_rel_power,
        FeatureStat::band_spec_variance, FeatureStat::band_peak_freq,
        FeatureStat::band_spec_entropy,
    };
    const FeatureStat global_stats[] = {
        FeatureStat::total_log_power, FeatureStat::signal_variance,
        FeatureStat::skewness,        FeatureStat::kurtosis,
        FeatureStat::zero_cross_rate, FeatureStat::line_length,
    };
    for (int ch = 1; ch <= kNumChannels; ++ch) {
        for (int b = 0; b < kNumBands; ++b) {
            for (FeatureStat stat : band_stats) {
                FeatureDescriptor d;
                d.channel = ch;
                d.band = b;
                d.stat = stat;
                d.name = "ch" + std::to_string(ch) + "_" + canonical_bands()[b].name + "_" +
                         feature_stat_name(stat);
                layout.features.push_back(std::move(d));
            }
        }
    }
    for (int ch = 1; ch <= kNumChannels; ++ch) {
        for (FeatureStat stat : global_stats) {
            FeatureDescriptor d;
            d.channel = ch;
            d.band = -1;
            d.stat = stat;
            d.name = "ch" + std::to_string(ch) + "_" + feature_stat_name(stat);
            layout.features.push_back(std::move(d));
        }
    }
    return layout;
}

std::vector<Segment> segment_record(const std::array<std::vector<double>, kNumChannels>& samples,
                                    const FeatureLayout& layout,
                                    const std::string& record_id) {
    if (!(layout.sample_rate_hz > 50.0))
        throw StructuralError("sample_rate_hz must exceed 50");
    if (samples[0].size() != samples[1].size())
        throw StructuralError("channels differ in length for record '" + record_id + "'");
    const std::size_t window =
        static_cast<std::size_t>(layout.sample_rate_hz * layout.segment_seconds + 0.5);
    std::vector<Segment> out;
    const std::size_t n = samples[0].size() / window; // trailing partial dropped
    out.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        Segment seg;
        seg.record_id = record_id;
        seg.segment_index = static_cast<int>(s);
        for (int ch = 0; ch < kNumChannels; ++ch)
            seg.channels[ch].assign(samples[ch].begin() + s * window,
                                    samples[ch].begin() + (s + 1) * window);
        out.push_back(std::move(seg));
    }
    return out;
}

namespace {

// FFTW planning is not thread-safe; execution on distinct buffers is.
std::mutex g_fftw_mutex;

void real_fft(const std::vector<double>& x, std::vector<double>& re, std::vector<double>& im) {
    const int n = static_cast<int>(x.size());
    const int nbins = n / 2 + 1;
    std::vector<double> in(x);
    std::vector<fftw_complex> out(static_cast<std::size_t>(nbins));
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        plan = fftw_plan_dft_r2c_1d(n, in.data(), out.data(), FFTW_ESTIMATE);
    }
    // FFTW_ESTIMATE may still touch the input during planning, so copy again
    std::copy(x.begin(), x.end(), in.begin());
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(g_fftw_mutex);
        fftw_destroy_plan(plan);
    }
    re.resize(nbins);
    im.resize(nbins);
    for (int k = 0; k < nbins; ++k) {
        re[k] = out[static_cast<std::size_t>(k)][0];
        im[k] = out[static_cast<std::size_t>(k)][1];
    }
}

} // namespace

Spectrum power_spectrum(const std::vector<double>& samples, double sample_rate_hz) {
    const std::size_t n = samples.size();
    if (n < 2) throw StructuralError("power_spectrum needs at least 2 samples");
    if (!(sample_rate_hz > 0)) throw StructuralError("sample rate must be positive");

    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n);
    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = samples[i] - mean;

    std::vector<double> re, im;
    real_fft(centered, re, im);

    const std::size_t nbins = re.size();
    const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    Spectrum sp;
    sp.freq_hz.resize(nbins);
    sp.power.resize(nbins);
    for (std::size_t k = 0; k < nbins; ++k) {
        double mag2 = re[k] * re[k] + im[k] * im[k];
        double p = mag2 * scale;
        // single-sided: double everything except DC and (for even n) Nyquist
        bool is_dc = (k == 0);
        bool is_nyquist = (n % 2 == 0) && (k == nbins - 1);
        if (!is_dc && !is_nyquist) p *= 2.0;
        sp.freq_hz[k] = sample_rate_hz * static_cast<double>(k) / static_cast<double>(n);
        sp.power[k] = p;
    }
    return sp;
}

double band_power(const Spectrum& spectrum, const FrequencyBand& band) {
    double sum = 0.0;
    for (std::size_t k = 0; k < spectrum.freq_hz.size(); ++k) {
        double f = spectrum.freq_hz[k];
        if (f < band.lo_hz) continue;
        if (f > band.hi_hz) break;
        if (f < band.hi_hz || (band.include_upper && f == band.hi_hz)) sum += spectrum.power[k];
    }
    return sum;
}

namespace {

struct BandStats {
    double power = 0.0;
    double spec_variance = 0.0;
    double peak_freq = 0.0;
    double entropy = 0.0;
};

BandStats band_stats(const Spectrum& sp, const FrequencyBand& band) {
    BandStats st;
    std::size_t first = sp.freq_hz.size(), last = 0;
    for (std::size_t k = 0; k < sp.freq_hz.size(); ++k) {
        double f = sp.freq_hz[k];
        bool inside = f >= band.lo_hz && (f < band.hi_hz || (band.include_upper && f == band.hi_hz));
        if (!inside) continue;
        if (first == sp.freq_hz.size()) first = k;
        last = k;
        st.power += sp.power[k];
    }
    if (first == sp.freq_hz.size()) return st; // no bins in range

    const std::size_t count = last - first + 1;
    double mean = st.power / static_cast<double>(count);
    double var = 0.0;
    double peak_val = -1.0;
    for (std::size_t k = first; k <= last; ++k) {
        double d = sp.power[k] - mean;
        var += d * d;
        if (sp.power[k] > peak_val) {
            peak_val = sp.power[k];
            st.peak_freq = sp.freq_hz[k];
        }
    }
    st.spec_variance = var / static_cast<double>(count);

    if (st.power > 0.0) {
        int mass_bins = 0;
        double h = 0.0;
        for (std::size_t k = first; k <= last; ++k) {
            if (sp.power[k] <= 0.0) continue;
            ++mass_bins;
            double p = sp.power[k] / st.power;
            h -= p * std::log(p);
        }
        st.entropy = (mass_bins <= 1) ? 0.0 : h;
    }
    return st;
}

struct SampleStats {
    double variance = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;
    double zero_cross_rate = 0.0;
    double line_length = 0.0;
};

SampleStats sample_stats(const std::vector<double>& x) {
    SampleStats st;
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        double d = v - mean;
        double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    st.variance = m2;
    if (m2 > 0.0) {
        st.skewness = m3 / std::pow(m2, 1.5);
        st.kurtosis = m4 / (m2 * m2) - 3.0;
    }
    std::size_t crossings = 0;
    double ll = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        if (x[i - 1] * x[i] < 0.0) ++crossings;
        ll += std::fabs(x[i] - x[i - 1]);
    }
    st.zero_cross_rate = static_cast<double>(crossings) / static_cast<double>(n - 1);
    st.line_length = ll / static_cast<double>(n - 1);
    return st;
}

} // namespace

FeatureVector extract_features(const Segment& seg, const FeatureLayout& layout) {
    const std::size_t window =
        static_cast<std::size_t>(layout.sample_rate_hz * layout.segment_seconds + 0.5);
    for (int ch = 0; ch < kNumChannels; ++ch) {
        if (seg.channels[ch].size() != window)
            throw StructuralError("segment length does not match the layout's window");
        for (double v : seg.channels[ch])
            if (!std::isfinite(v))
                throw StructuralError("non-finite sample in record '" + seg.record_id + "'");
    }

    std::array<std::array<BandStats, kNumBands>, kNumChannels> bands;
    std::array<double, kNumChannels> total_power{};
    std::array<SampleStats, kNumChannels> stats;
    for (int ch = 0; ch < kNumChannels; ++ch) {
        Spectrum sp = power_spectrum(seg.channels[ch], layout.sample_rate_hz);
        for (int b = 0; b < kNumBands; ++b) {
            bands[ch][b] = band_stats(sp, canonical_bands()[b]);
            total_power[ch] += bands[ch][b].power; // the six bands partition 0-25 Hz
        }
        stats[ch] = sample_stats(seg.channels[ch]);
    }

    FeatureVector fv;
    fv.record_id = seg.record_id;
    fv.segment_index = seg.segment_index;
    fv.values.resize(layout.features.size());
    for (std::size_t k = 0; k < layout.features.size(); ++k) {
        const auto& d = layout.features[k];
        const int ch = d.channel - 1;
        double v = 0.0;
        switch (d.stat) {
            case FeatureStat::band_log_power:
                v = std::log(bands[ch][d.band].power + kLogEpsilon);
                break;
            case FeatureStat::band_rel_power:
                v = total_power[ch] > 0.0 ? bands[ch][d.band].power / total_power[ch] : 0.0;
                break;
            case FeatureStat::band_spec_variance:
                v = bands[ch][d.band].spec_variance;
                break;
            case FeatureStat::band_peak_freq:
                v = bands[ch][d.band].peak_freq;
                break;
            case FeatureStat::band_spec_entropy:
                v = bands[ch][d.band].entropy;
                break;
            case FeatureStat::total_log_power:
                v = std::log(total_power[ch] + kLogEpsilon);
                break;
            case FeatureStat::signal_variance:
                v = stats[ch].variance;
                break;
            case FeatureStat::skewness:
                v = stats[ch].skewness;
                break;
            case FeatureStat::kurtosis:
                v = stats[ch].kurtosis;
                break;
            case FeatureStat::zero_cross_rate:
                v = stats[ch].zero_cross_rate;
                break;
            case FeatureStat::line_length:
                v = stats[ch].line_length;
                break;
        }
        fv.values[k] = v;
    }
    return fv;
}

std::array<double, kNumChannels> compute_bba(const FeatureVector& fv, const FeatureLayout& layout) {
    std::array<double, kNumChannels> bba{};
    for (int ch = 1; ch <= kNumChannels; ++ch) {
        double sum = 0.0;
        for (int b = 0; b < kNumBands; ++b)
            sum += fv.values[layout.index_of(ch, b, FeatureStat::band_log_power) - 1];
        bba[ch - 1] = sum / kNumBands;
    }
    return bba;
}

FeatureVector bba_correct(const FeatureVector& fv, const FeatureLayout& layout) {
    if (fv.bba_corrected)
        throw StructuralError("feature vector is already BBA-corrected");
    if (fv.values.size() != layout.features.size())
        throw StructuralError("feature vector does not match the layout");
    auto bba = compute_bba(fv, layout);
    FeatureVector out = fv;
    for (int ch = 1; ch <= kNumChannels; ++ch) {
        for (int b = 0; b < kNumBands; ++b)
            out.values[layout.index_of(ch, b, FeatureStat::band_log_power) - 1] -= bba[ch - 1];
        out.values[layout.index_of(ch, -1, FeatureStat::total_log_power) - 1] -= bba[ch - 1];
    }
    out.bba_corrected = true;
    return out;
}

} // namespace pairnet
