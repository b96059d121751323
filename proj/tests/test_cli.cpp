// End-to-end tests against the built `pairnet` binary (path in $PAIRNET_CLI).

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "pairnet/common.hpp"
#include "pairnet/serialize.hpp"

namespace fs = std::filesystem;
using namespace pairnet;

namespace {

std::string cli() {
    const char* p = std::getenv("PAIRNET_CLI");
    REQUIRE_MESSAGE(p != nullptr, "PAIRNET_CLI must point at the pairnet binary");
    return p;
}

int run(const std::string& args) {
    std::string cmd = cli() + " " + args + " 2>cli_stderr.txt";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string stderr_text() { return read_file("cli_stderr.txt"); }

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::path("cli_scratch") / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& child) const { return (path / child).string(); }
};

void write_tiny_spec(const std::string& path, int q = 3) {
    std::ofstream out(path);
    out << "q = " << q << "\nrecords_per_class = 3\nsegments_per_record = 4\n"
        << "overlap = 0.05\nbba_drift = 0.1\nnoise_floor = 0.01\n";
}

} // namespace

TEST_CASE("gen writes a deterministic corpus and a manifest with checksums") {
    TempDir dir("gen");
    write_tiny_spec(dir / "spec.kv");
    CHECK(run("gen --spec " + (dir / "spec.kv") + " --out " + (dir / "a") + " --seed 11") == 0);
    CHECK(run("gen --spec " + (dir / "spec.kv") + " --out " + (dir / "b") + " --seed 11") == 0);
    CHECK(read_file(dir / "a/corpus.csv") == read_file(dir / "b/corpus.csv"));
    CHECK(read_file(dir / "a/gain_truth.csv") == read_file(dir / "b/gain_truth.csv"));

    CHECK(run("gen --spec " + (dir / "spec.kv") + " --out " + (dir / "c") + " --seed 12") == 0);
    CHECK(read_file(dir / "a/corpus.csv") != read_file(dir / "c/corpus.csv"));

    // manifest checksums match the emitted files
    auto manifest = read_file(dir / "a/manifest.json");
    auto corpus = read_file(dir / "a/corpus.csv");
    char hex[24];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(corpus.data(), corpus.size())));
    CHECK(manifest.find(hex) != std::string::npos);
}

TEST_CASE("gen with q=1 exits 2 and names the invariant") {
    TempDir dir("genbad");
    {
        std::ofstream out(dir / "spec.kv");
        out << "q = 1\n";
    }
    CHECK(run("gen --spec " + (dir / "spec.kv") + " --out " + (dir / "x")) == 2);
    CHECK(stderr_text().find("q must be at least 2") != std::string::npos);
}

TEST_CASE("the default spec yields 64 records") {
    TempDir dir("gendefault");
    CHECK(run("gen --out " + (dir / "d") + " --seed 1") == 0);
    std::ifstream in(dir / "d/corpus.csv");
    std::string line;
    std::getline(in, line); // header
    std::set<std::string> ids;
    while (std::getline(in, line)) ids.insert(line.substr(0, line.find(',')));
    CHECK(ids.size() == 64);
}

TEST_CASE("full pipeline: gen -> features -> train -> eval -> predict") {
    TempDir dir("pipe");
    write_tiny_spec(dir / "spec.kv");
    REQUIRE(run("gen --spec " + (dir / "spec.kv") + " --out " + (dir / "g") + " --seed 21") == 0);
    REQUIRE(run("features --input " + (dir / "g/corpus.csv") + " --output " +
                (dir / "features.csv") + " --bba-correct") == 0);

    // 3 classes x 3 records x 4 segments
    {
        std::ifstream in(dir / "features.csv");
        std::string line;
        int rows = -1;
        while (std::getline(in, line)) ++rows;
        CHECK(rows == 36);
    }

    REQUIRE(run("train --features " + (dir / "features.csv") + " --out " + (dir / "t") +
                " --seed 5") == 0);
    auto model = load_model(dir / "t/model.json");
    CHECK(model.q == 3);
    CHECK(model.classifiers.size() == 3);

    // byte-identical model on a rerun with the same seed
    REQUIRE(run("train --features " + (dir / "features.csv") + " --out " + (dir / "t2") +
                " --seed 5") == 0);
    CHECK(read_file(dir / "t/model.json") == read_file(dir / "t2/model.json"));
    CHECK(read_file(dir / "t/metrics.json") == read_file(dir / "t2/metrics.json"));

    // parallel pair training changes nothing
    REQUIRE(run("train --features " + (dir / "features.csv") + " --out " + (dir / "t3") +
                " --seed 5 --threads 3") == 0);
    CHECK(read_file(dir / "t/model.json") == read_file(dir / "t3/model.json"));

    REQUIRE(run("eval --model " + (dir / "t/model.json") + " --features " +
                (dir / "features.csv") + " --out " + (dir / "e") + " --split " +
                (dir / "t/split.csv")) == 0);
    auto metrics = read_file(dir / "e/metrics.json");
    CHECK(metrics.find("\"train\"") != std::string::npos);
    CHECK(metrics.find("\"test\"") != std::string::npos);

    // record decisions: one row per record, fractions summing to 1
    {
        std::ifstream in(dir / "e/record_decisions.csv");
        std::string line;
        std::getline(in, line);
        CHECK(line == "record_id,true,predicted,probability,frac_1,frac_2,frac_3");
        int rows = 0;
        while (std::getline(in, line)) {
            ++rows;
            std::stringstream ss(line);
            std::string field;
            std::vector<std::string> fields;
            while (std::getline(ss, field, ',')) fields.push_back(field);
            REQUIRE(fields.size() == 7);
            double sum = parse_double(fields[4]) + parse_double(fields[5]) +
                         parse_double(fields[6]);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
        CHECK(rows == 9);
    }

    // streaming predictions: one row per input row
    REQUIRE(run("predict --model " + (dir / "t/model.json") + " --features " +
                (dir / "features.csv") + " --out " + (dir / "pred.csv")) == 0);
    {
        std::ifstream in(dir / "pred.csv");
        std::string line;
        std::getline(in, line);
        CHECK(line == "record_id,segment_index,predicted");
        int rows = 0;
        while (std::getline(in, line)) ++rows;
        CHECK(rows == 36);
    }
}

TEST_CASE("features refuses a second BBA correction, exit 2") {
    TempDir dir("bba");
    write_tiny_spec(dir / "spec.kv");
    REQUIRE(run("gen --spec " + (dir / "spec.kv") + " --out " + (dir / "g") + " --seed 31") == 0);
    REQUIRE(run("features --input " + (dir / "g/corpus.csv") + " --output " +
                (dir / "corrected.csv") + " --bba-correct") == 0);
    CHECK(run("features --input " + (dir / "corrected.csv") + " --output " +
              (dir / "twice.csv") + " --bba-correct") == 2);
    CHECK(stderr_text().find("already BBA-corrected") != std::string::npos);

    // but correcting a raw feature file in place is allowed
    REQUIRE(run("features --input " + (dir / "g/corpus.csv") + " --output " +
                (dir / "plain.csv")) == 0);
    CHECK(run("features --input " + (dir / "plain.csv") + " --output " +
              (dir / "fixed.csv") + " --bba-correct") == 0);
    CHECK(read_file(dir / "fixed.csv") == read_file(dir / "corrected.csv"));
}

TEST_CASE("malformed raw rows exit 2 with a line number") {
    TempDir dir("badrow");
    {
        std::ofstream out(dir / "bad.csv");
        out << "record_id,label,channel,t,value\n";
        out << "r1,1,1,0.0,0.5\n";
        out << "r1,1,1,0.01,oops\n";
    }
    CHECK(run("features --input " + (dir / "bad.csv") + " --output " + (dir / "f.csv")) == 2);
    CHECK(stderr_text().find("line 3") != std::string::npos);
}

TEST_CASE("train rejects epochs=0 and a missing class, exit 2") {
    TempDir dir("trainbad");
    write_tiny_spec(dir / "spec.kv");
    REQUIRE(run("gen --spec " + (dir / "spec.kv") + " --out " + (dir / "g") + " --seed 41") == 0);
    REQUIRE(run("features --input " + (dir / "g/corpus.csv") + " --output " +
                (dir / "features.csv") + " --bba-correct") == 0);
    {
        std::ofstream out(dir / "cfg.kv");
        out << "epochs = 0\n";
    }
    CHECK(run("train --features " + (dir / "features.csv") + " --config " + (dir / "cfg.kv") +
              " --out " + (dir / "t")) == 2);
    CHECK(stderr_text().find("epochs") != std::string::npos);

    // drop every class-2 row: the missing class must be named
    {
        std::ifstream in(dir / "features.csv");
        std::ofstream out(dir / "gap.csv");
        std::string line;
        std::getline(in, line);
        out << line << "\n";
        while (std::getline(in, line)) {
            auto c1 = line.find(',');
            auto c2 = line.find(',', c1 + 1);
            auto c3 = line.find(',', c2 + 1);
            if (line.substr(c2 + 1, c3 - c2 - 1) != "2") out << line << "\n";
        }
    }
    CHECK(run("train --features " + (dir / "gap.csv") + " --out " + (dir / "t")) == 2);
    CHECK(stderr_text().find("class 2") != std::string::npos);
}

TEST_CASE("eval and predict reject a layout mismatch, exit 2") {
    TempDir dir("mismatch");
    write_tiny_spec(dir / "spec.kv");
    REQUIRE(run("gen --spec " + (dir / "spec.kv") + " --out " + (dir / "g") + " --seed 51") == 0);
    REQUIRE(run("features --input " + (dir / "g/corpus.csv") + " --output " +
                (dir / "features.csv") + " --bba-correct") == 0);
    REQUIRE(run("train --features " + (dir / "features.csv") + " --out " + (dir / "t") +
                " --seed 5") == 0);
    {
        std::ofstream out(dir / "narrow.csv");
        out << "record_id,segment_index,label,f1,f2\nr,0,1,0.5,0.5\n";
    }
    CHECK(run("eval --model " + (dir / "t/model.json") + " --features " + (dir / "narrow.csv") +
              " --out " + (dir / "e")) == 2);
    CHECK(run("predict --model " + (dir / "t/model.json") + " --features " +
              (dir / "narrow.csv")) == 2);
    CHECK(stderr_text().find("does not match the model layout") != std::string::npos);
}

TEST_CASE("missing subcommand or unknown flag exits 2") {
    CHECK(run("") == 2);
    CHECK(run("gen --bogus x") == 2);
    CHECK(run("nonsense") == 2);
}
