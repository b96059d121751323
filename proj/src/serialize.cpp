#include "pairnet/serialize.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pairnet/common.hpp"

namespace pairnet {

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

void append_double_array(std::string& out, const std::vector<double>& v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_double(v[i]);
    }
    out += ']';
}

void append_int_array(std::string& out, const std::vector<int>& v) {
    out += '[';
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    out += ']';
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

// ---------------------------------------------------------------------------
// Layout / model JSON
// ---------------------------------------------------------------------------

std::string layout_to_json(const FeatureLayout& layout) {
    std::string out = "{\"sample_rate_hz\":" + format_double(layout.sample_rate_hz) +
                      ",\"segment_seconds\":" + format_double(layout.segment_seconds) +
                      ",\"features\":[";
    for (std::size_t k = 0; k < layout.features.size(); ++k) {
        const auto& d = layout.features[k];
        if (k) out += ',';
        out += "{\"name\":\"" + json_escape(d.name) + "\",\"channel\":" +
               std::to_string(d.channel) + ",\"band\":";
        out += d.band >= 0 ? ("\"" + canonical_bands()[static_cast<std::size_t>(d.band)].name + "\"")
                           : "null";
        out += ",\"stat\":\"";
        out += feature_stat_name(d.stat);
        out += "\"}";
    }
    out += "]}";
    return out;
}

namespace {

FeatureLayout layout_from_nl(const nlohmann::json& j) {
    FeatureLayout layout;
    layout.sample_rate_hz = j.at("sample_rate_hz").get<double>();
    layout.segment_seconds = j.at("segment_seconds").get<double>();
    for (const auto& f : j.at("features")) {
        FeatureDescriptor d;
        d.name = f.at("name").get<std::string>();
        d.channel = f.at("channel").get<int>();
        if (f.at("band").is_null()) {
            d.band = -1;
        } else {
            auto name = f.at("band").get<std::string>();
            d.band = -2;
            for (int b = 0; b < kNumBands; ++b)
                if (canonical_bands()[static_cast<std::size_t>(b)].name == name) d.band = b;
            if (d.band == -2) throw StructuralError("unknown band '" + name + "' in layout");
        }
        d.stat = feature_stat_from_name(f.at("stat").get<std::string>());
        layout.features.push_back(std::move(d));
    }
    return layout;
}

} // namespace

FeatureLayout layout_from_json(const std::string& text) {
    try {
        return layout_from_nl(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
        throw StructuralError(std::string("bad layout JSON: ") + e.what());
    }
}

std::string model_to_json(const MultiClassModel& m) {
    m.validate();
    std::string out = "{\"format\":\"pairnet-model\",\"version\":1,"
                      "\"class_indexing\":\"1-based\",\"q\":" + std::to_string(m.q) +
                      ",\"trained_on\":\"" + json_escape(m.trained_on) + "\"," +
                      "\"feature_layout\":" + layout_to_json(m.feature_layout) +
                      ",\"classifiers\":[";
    bool first = true;
    for (const auto& [key, c] : m.classifiers) { // map order = lexicographic pairs
        if (!first) out += ',';
        first = false;
        out += "{\"class_lo\":" + std::to_string(c.class_lo) +
               ",\"class_hi\":" + std::to_string(c.class_hi) + ",\"feature_indices\":";
        append_int_array(out, c.feature_indices);
        out += ",\"weights\":";
        append_double_array(out, c.weights);
        out += ",\"bias\":" + format_double(c.bias) + "}";
    }
    out += "]}";
    return out;
}

MultiClassModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw StructuralError(std::string("bad model JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != "pairnet-model")
            throw StructuralError("not a pairnet model file");
        if (j.at("version").get<int>() != 1)
            throw StructuralError("unsupported model version");
        MultiClassModel m;
        m.q = j.at("q").get<int>();
        m.trained_on = j.value("trained_on", std::string{});
        m.feature_layout = layout_from_nl(j.at("feature_layout"));
        for (const auto& cj : j.at("classifiers")) {
            PairwiseClassifier c;
            c.class_lo = cj.at("class_lo").get<int>();
            c.class_hi = cj.at("class_hi").get<int>();
            c.feature_indices = cj.at("feature_indices").get<std::vector<int>>();
            c.weights = cj.at("weights").get<std::vector<double>>();
            c.bias = cj.at("bias").get<double>();
            m.classifiers[{c.class_lo, c.class_hi}] = std::move(c);
        }
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw StructuralError(std::string("bad model JSON: ") + e.what());
    }
}

void save_model(const MultiClassModel& m, const std::string& path) {
    write_file_atomic(path, model_to_json(m) + "\n");
}

MultiClassModel load_model(const std::string& path) { return model_from_json(read_file(path)); }

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

void write_raw_csv(const Corpus& corpus, std::ostream& out) {
    out << "record_id,label,channel,t,value\n";
    char tbuf[32];
    for (const auto& rec : corpus.records) {
        for (int ch = 0; ch < kNumChannels; ++ch) {
            const auto& samples = rec.channels[static_cast<std::size_t>(ch)];
            for (std::size_t n = 0; n < samples.size(); ++n) {
                std::snprintf(tbuf, sizeof(tbuf), "%.6f",
                              static_cast<double>(n) / corpus.spec.sample_rate_hz);
                out << rec.record_id << ',' << rec.label << ',' << (ch + 1) << ',' << tbuf << ','
                    << format_double(samples[n]) << '\n';
            }
        }
    }
}

RawRecordSet read_raw_csv(std::istream& in, double rate_override) {
    RawRecordSet set;
    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) throw StructuralError("raw CSV: empty input");
    ++line_no;
    if (trim(line) != "record_id,label,channel,t,value")
        throw StructuralError("raw CSV line 1: expected header record_id,label,channel,t,value");

    std::map<std::string, std::size_t> index;
    std::vector<std::array<double, 2>> first_t; // per record, first two ch-1 times
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        const std::string where = "raw CSV line " + std::to_string(line_no);
        if (fields.size() != 5) throw StructuralError(where + ": expected 5 fields");
        try {
            const std::string& id = fields[0];
            int label = static_cast<int>(parse_int(fields[1]));
            int channel = static_cast<int>(parse_int(fields[2]));
            double t = parse_double(fields[3]);
            double value = parse_double(fields[4]);
            if (id.empty()) throw StructuralError("empty record_id");
            if (channel < 1 || channel > kNumChannels)
                throw StructuralError("channel must be 1 or 2");
            auto it = index.find(id);
            if (it == index.end()) {
                it = index.emplace(id, set.records.size()).first;
                set.records.push_back({});
                set.records.back().record_id = id;
                set.records.back().label = label;
                first_t.push_back({0.0, 0.0});
            }
            RawRecord& rec = set.records[it->second];
            if (rec.label != label) throw StructuralError("label changes within the record");
            auto& chan = rec.channels[static_cast<std::size_t>(channel - 1)];
            if (channel == 1 && chan.size() < 2)
                first_t[it->second][chan.size()] = t;
            chan.push_back(value);
        } catch (const StructuralError& e) {
            throw StructuralError(where + ": " + e.what());
        }
    }
    if (set.records.empty()) throw StructuralError("raw CSV: no data rows");

    if (rate_override > 0.0) {
        set.sample_rate_hz = rate_override;
    } else {
        double rate = 0.0;
        for (std::size_t r = 0; r < set.records.size(); ++r) {
            if (set.records[r].channels[0].size() < 2) continue;
            double dt = first_t[r][1] - first_t[r][0];
            if (!(dt > 0.0))
                throw StructuralError("record '" + set.records[r].record_id +
                                      "': cannot infer sample rate from t column");
            double inferred = std::round(1e6 / dt) / 1e6;
            if (rate == 0.0) rate = inferred;
            else if (std::fabs(rate - inferred) > 1e-6 * rate)
                throw StructuralError("records disagree on the sample rate; pass an explicit rate");
        }
        if (rate == 0.0)
            throw StructuralError("too few samples to infer the sample rate; pass an explicit rate");
        set.sample_rate_hz = rate;
    }

    for (const auto& rec : set.records)
        if (rec.channels[0].size() != rec.channels[1].size())
            throw StructuralError("record '" + rec.record_id + "': channels differ in length");
    return set;
}

void write_gain_truth_csv(const Corpus& corpus, std::ostream& out) {
    out << "record_id,segment_index,power_gain\n";
    for (const auto& rec : corpus.records)
        for (std::size_t s = 0; s < rec.segment_power_gain.size(); ++s)
            out << rec.record_id << ',' << s << ',' << format_double(rec.segment_power_gain[s])
                << '\n';
}

std::map<std::string, std::vector<double>> read_gain_truth_csv(std::istream& in) {
    std::map<std::string, std::vector<double>> out;
    std::string line;
    if (!std::getline(in, line) || trim(line) != "record_id,segment_index,power_gain")
        throw StructuralError("gain truth CSV: bad header");
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 3)
            throw StructuralError("gain truth CSV line " + std::to_string(line_no) +
                                  ": expected 3 fields");
        auto& gains = out[fields[0]];
        auto idx = static_cast<std::size_t>(parse_int(fields[1]));
        if (gains.size() != idx)
            throw StructuralError("gain truth CSV line " + std::to_string(line_no) +
                                  ": segment indices out of order");
        gains.push_back(parse_double(fields[2]));
    }
    return out;
}

void write_feature_csv(const std::vector<FeatureVector>& rows, int n_features,
                       std::ostream& out) {
    out << "record_id,segment_index,label";
    for (int k = 1; k <= n_features; ++k) out << ",f" << k;
    out << '\n';
    for (const auto& row : rows) {
        if (static_cast<int>(row.values.size()) != n_features)
            throw StructuralError("feature row width does not match the layout");
        out << row.record_id << ',' << row.segment_index << ',' << row.label;
        for (double v : row.values) out << ',' << format_double(v);
        out << '\n';
    }
}

std::size_t parse_feature_header(const std::string& line) {
    auto header = split_csv_line(trim(line));
    if (header.size() < 4 || header[0] != "record_id" || header[1] != "segment_index" ||
        header[2] != "label")
        throw StructuralError("feature CSV line 1: expected header record_id,segment_index,label,f1..");
    const std::size_t n_features = header.size() - 3;
    for (std::size_t k = 0; k < n_features; ++k)
        if (header[k + 3] != "f" + std::to_string(k + 1))
            throw StructuralError("feature CSV line 1: feature columns must be f1..f" +
                                  std::to_string(n_features));
    return n_features;
}

FeatureVector parse_feature_row(const std::string& line, std::size_t n_features, long line_no) {
    auto fields = split_csv_line(line);
    const std::string where = "feature CSV line " + std::to_string(line_no);
    if (fields.size() != n_features + 3)
        throw StructuralError(where + ": expected " + std::to_string(n_features + 3) + " fields");
    try {
        FeatureVector fv;
        fv.record_id = fields[0];
        fv.segment_index = static_cast<int>(parse_int(fields[1]));
        fv.label = static_cast<int>(parse_int(fields[2]));
        if (fv.label < 0) throw StructuralError("label must be >= 0 (0 = unlabeled)");
        fv.values.reserve(n_features);
        for (std::size_t k = 0; k < n_features; ++k)
            fv.values.push_back(parse_double(fields[k + 3]));
        return fv;
    } catch (const StructuralError& e) {
        throw StructuralError(where + ": " + e.what());
    }
}

std::vector<FeatureVector> read_feature_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw StructuralError("feature CSV: empty input");
    const std::size_t n_features = parse_feature_header(line);

    std::vector<FeatureVector> rows;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        rows.push_back(parse_feature_row(line, n_features, line_no));
    }
    return rows;
}

void write_pair_diagnostics_csv(const std::vector<PairTrainInfo>& info, std::ostream& out) {
    out << "i,j,n_features,val_error\n";
    for (const auto& p : info)
        out << p.class_lo << ',' << p.class_hi << ',' << p.n_features << ','
            << format_double(1.0 - p.validation_accuracy) << '\n';
}

void write_record_decisions_csv(const std::vector<RecordDecision>& decisions,
                                const std::map<std::string, int>& true_labels, int q,
                                std::ostream& out) {
    out << "record_id,true,predicted,probability";
    for (int c = 1; c <= q; ++c) out << ",frac_" << c;
    out << '\n';
    for (const auto& d : decisions) {
        auto it = true_labels.find(d.record_id);
        out << d.record_id << ',' << (it == true_labels.end() ? 0 : it->second) << ','
            << d.predicted_class << ',' << format_double(d.probability);
        for (double f : d.per_class_fractions) out << ',' << format_double(f);
        out << '\n';
    }
}

void write_confusion_csv(const ConfusionMatrix& cm, std::ostream& out) {
    out << "true";
    for (int c = 1; c <= cm.q; ++c) out << ",pred_" << c;
    out << '\n';
    for (int t = 1; t <= cm.q; ++t) {
        out << t;
        for (int c = 1; c <= cm.q; ++c) out << ',' << cm.at(t, c);
        out << '\n';
    }
}

void write_split_csv(const SegmentDataset& ds, std::ostream& out) {
    out << "record_id,partition\n";
    for (const auto& [id, p] : ds.record_partition)
        out << id << ',' << (p == Partition::train ? "train" : "test") << '\n';
}

std::map<std::string, Partition> read_split_csv(std::istream& in) {
    std::map<std::string, Partition> out;
    std::string line;
    if (!std::getline(in, line) || trim(line) != "record_id,partition")
        throw StructuralError("split CSV: bad header");
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2 || (fields[1] != "train" && fields[1] != "test"))
            throw StructuralError("split CSV line " + std::to_string(line_no) +
                                  ": expected record_id,(train|test)");
        out[fields[0]] = fields[1] == "train" ? Partition::train : Partition::test;
    }
    return out;
}

// ---------------------------------------------------------------------------
// key=value configs
// ---------------------------------------------------------------------------

std::map<std::string, std::string> read_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        auto pos = s.find('=');
        if (pos == std::string::npos)
            throw StructuralError(path + " line " + std::to_string(line_no) +
                                  ": expected key=value");
        std::string key = trim(s.substr(0, pos));
        std::string value = trim(s.substr(pos + 1));
        if (key.empty())
            throw StructuralError(path + " line " + std::to_string(line_no) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

SyntheticSpec synthetic_spec_from_kv(const std::map<std::string, std::string>& kv) {
    SyntheticSpec spec;
    for (const auto& [key, value] : kv) {
        if (key == "q") spec.q = static_cast<int>(parse_int(value));
        else if (key == "records_per_class") spec.records_per_class = static_cast<int>(parse_int(value));
        else if (key == "segments_per_record") spec.segments_per_record = static_cast<int>(parse_int(value));
        else if (key == "sample_rate_hz") spec.sample_rate_hz = parse_double(value);
        else if (key == "overlap") spec.overlap = parse_double(value);
        else if (key == "bba_drift") spec.bba_drift = parse_double(value);
        else if (key == "noise_floor") spec.noise_floor = parse_double(value);
        else if (key == "seed") spec.seed = static_cast<std::uint64_t>(parse_int(value));
        else throw StructuralError("unknown synthetic spec key '" + key + "'");
    }
    spec.validate();
    return spec;
}

TrainConfig train_config_from_kv(const std::map<std::string, std::string>& kv) {
    TrainConfig cfg;
    for (const auto& [key, value] : kv) {
        if (key == "epochs") cfg.epochs = static_cast<int>(parse_int(value));
        else if (key == "learning_rate") cfg.learning_rate = parse_double(value);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(value));
        else if (key == "selection_patience") cfg.selection_patience = static_cast<int>(parse_int(value));
        else if (key == "max_features") cfg.max_features = static_cast<int>(parse_int(value));
        else if (key == "validation_fraction") cfg.validation_fraction = parse_double(value);
        else throw StructuralError("unknown train config key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

TrainConfig load_train_config(const std::string& path) {
    return train_config_from_kv(read_kv_file(path));
}

// ---------------------------------------------------------------------------
// files
// ---------------------------------------------------------------------------

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw StructuralError("cannot write '" + tmp + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw StructuralError("short write to '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw StructuralError("cannot rename '" + tmp + "' to '" + path + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StructuralError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace pairnet
