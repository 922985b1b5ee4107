#include "ssllab/cli.hpp"
#include "ssllab/io.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

using namespace ssllab;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "ssllab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() /
              ("ssllab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir);
        fs::create_directories(dir);
        unsetenv("SSLLAB_SEED");
    }
    void TearDown() override { fs::remove_all(dir); }
    std::string p(const std::string& name) const { return (dir / name).string(); }

    fs::path dir;
};

int lines(const std::string& s) {
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

std::string after(const std::string& text, const std::string& key) {
    const auto at = text.find(key);
    if (at == std::string::npos) return "";
    const auto start = at + key.size();
    return text.substr(start, text.find('\n', start) - start);
}

}  // namespace

TEST_F(Cli, UsageExitCodes) {
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"generate", "--dataset", "two-gaussian"}).code, 2);
}

TEST_F(Cli, GenerateGaussianAndMoons) {
    auto r = run({"generate", "--dataset", "two-gaussian", "--n", "2000", "--d", "2", "--expected", "false", "--seed", "1",
                  "-o", p("g.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto t = read_data_file(p("g.csv"), "Class");
    EXPECT_EQ(t.data.rows(), 2000u);
    EXPECT_EQ(t.data.X.cols(), 2);
    r = run({"generate", "--dataset", "crescent-moon", "--n-per-class", "100", "--sigma", "0.3", "--seed", "2", "-o", p("m.csv")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_data_file(p("m.csv"), "Class").data.rows(), 200u);
}

TEST_F(Cli, GenerateIsDeterministicAndHonoursSeedEnvironment) {
    ASSERT_EQ(run({"generate", "--dataset", "spirals", "--seed", "9", "-o", p("a.csv")}).code, 0);
    ASSERT_EQ(run({"generate", "--dataset", "spirals", "--seed", "9", "-o", p("b.csv")}).code, 0);
    EXPECT_EQ(read_file(p("a.csv")), read_file(p("b.csv")));
    setenv("SSLLAB_SEED", "9", 1);
    ASSERT_EQ(run({"generate", "--dataset", "spirals", "-o", p("c.csv")}).code, 0);
    unsetenv("SSLLAB_SEED");
    EXPECT_EQ(read_file(p("a.csv")), read_file(p("c.csv")));
    ASSERT_EQ(run({"generate", "--dataset", "spirals", "-o", p("d.csv")}).code, 0);
    EXPECT_NE(read_file(p("a.csv")), read_file(p("d.csv")));
}

TEST_F(Cli, UnknownDatasetListsNames) {
    const auto r = run({"generate", "--dataset", "moons", "-o", p("x.csv")});
    EXPECT_EQ(r.code, 2);
    for (const char* name : {"two-gaussian", "crescent-moon", "spirals", "parallel-planes", "two-circles"}) {
        EXPECT_NE(r.err.find(name), std::string::npos) << r.err;
    }
}

TEST_F(Cli, TrainIclsOnFullyLabeledEqualsLeastSquares) {
    ASSERT_EQ(run({"generate", "--dataset", "two-gaussian", "--n", "100", "-o", p("d.csv")}).code, 0);
    ASSERT_EQ(run({"train", "--model", "icls", "--input", p("d.csv"), "-o", p("icls.json")}).code, 0);
    ASSERT_EQ(run({"train", "--model", "ls", "--input", p("d.csv"), "-o", p("ls.json")}).code, 0);
    ASSERT_EQ(run({"predict", "--model", p("icls.json"), "--input", p("d.csv"), "-o", p("a.csv")}).code, 0);
    ASSERT_EQ(run({"predict", "--model", p("ls.json"), "--input", p("d.csv"), "-o", p("b.csv")}).code, 0);
    EXPECT_EQ(read_file(p("a.csv")), read_file(p("b.csv")));
}

TEST_F(Cli, PredictReproducesTrainingAccuracy) {
    ASSERT_EQ(run({"generate", "--dataset", "two-gaussian", "--n", "200", "--mar", "0.8", "-o", p("d.csv")}).code, 0);
    const auto t = run({"train", "--model", "self-learning", "--input", p("d.csv"), "-o", p("m.json")});
    ASSERT_EQ(t.code, 0) << t.err;
    const auto pr = run({"predict", "--model", p("m.json"), "--input", p("d.csv"), "-o", p("pred.csv")});
    ASSERT_EQ(pr.code, 0) << pr.err;
    EXPECT_FALSE(after(t.out, "training accuracy: ").empty());
    EXPECT_EQ(after(t.out, "training accuracy: "), after(pr.out, "accuracy on labeled rows: "));
    EXPECT_EQ(lines(read_file(p("pred.csv"))), 201);
}

TEST_F(Cli, LapSvmConfigurationRuns) {
    ASSERT_EQ(run({"generate", "--dataset", "crescent-moon", "--mar", "0.95", "-o", p("m.csv")}).code, 0);
    const auto r = run({"train", "--model", "lapsvm", "--lambda", "0.0001", "--gamma", "10", "--kernel", "rbf", "--sigma", "0.05",
                        "--input", p("m.csv"), "-o", p("lap.json")});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("mean training loss"), std::string::npos);
}

TEST_F(Cli, TrainErrors) {
    write_file_atomic(p("nolabel.csv"), "x1,x2\n1,2\n3,4\n");
    EXPECT_EQ(run({"train", "--model", "ls", "--input", p("nolabel.csv"), "-o", p("m.json")}).code, 2);
    write_file_atomic(p("one.csv"), "x1,Class\n1,A\n2,A\n");
    const auto r = run({"train", "--model", "lda", "--input", p("one.csv"), "-o", p("m.json")});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("class"), std::string::npos);
    EXPECT_EQ(run({"train", "--model", "nope", "--input", p("one.csv"), "-o", p("m.json")}).code, 2);
}

TEST_F(Cli, PredictEdgeCases) {
    ASSERT_EQ(run({"generate", "--dataset", "two-gaussian", "--n", "50", "-o", p("d.csv")}).code, 0);
    ASSERT_EQ(run({"train", "--model", "ls", "--input", p("d.csv"), "-o", p("m.json")}).code, 0);
    write_file_atomic(p("empty.csv"), "");
    ASSERT_EQ(run({"predict", "--model", p("m.json"), "--input", p("empty.csv"), "-o", p("e.csv")}).code, 0);
    EXPECT_EQ(read_file(p("e.csv")), "row,predicted,decision_value\n");
    write_file_atomic(p("three.csv"), "a,b,c\n1,2,3\n");
    EXPECT_EQ(run({"predict", "--model", p("m.json"), "--input", p("three.csv"), "-o", p("t.csv")}).code, 3);
    write_file_atomic(p("bad.json"), "{");
    EXPECT_EQ(run({"predict", "--model", p("bad.json"), "--input", p("d.csv"), "-o", p("t.csv")}).code, 2);
}

TEST_F(Cli, Boundary) {
    ASSERT_EQ(run({"generate", "--dataset", "two-gaussian", "--n", "50", "-o", p("d.csv")}).code, 0);
    ASSERT_EQ(run({"train", "--model", "ls", "--input", p("d.csv"), "-o", p("m.json")}).code, 0);
    ASSERT_EQ(run({"boundary", "--model", p("m.json"), "--input", p("d.csv"), "--grid", "2", "-o", p("g.csv"), "--svg",
                   p("g.svg")})
                  .code,
              0);
    EXPECT_EQ(lines(read_file(p("g.csv"))), 5);
    EXPECT_NE(read_file(p("g.svg")).find("<svg"), std::string::npos);

    ASSERT_EQ(run({"generate", "--dataset", "two-gaussian", "--n", "50", "--d", "3", "-o", p("d3.csv")}).code, 0);
    ASSERT_EQ(run({"train", "--model", "ls", "--input", p("d3.csv"), "-o", p("m3.json")}).code, 0);
    EXPECT_EQ(run({"boundary", "--model", p("m3.json"), "--input", p("d3.csv"), "-o", p("g3.csv")}).code, 3);
}

TEST_F(Cli, LearningCurveConfigErrors) {
    write_file_atomic(p("c.json"), R"({"datasets": [{"generator": "two-gaussian", "params": {"n": 100}}],
        "classifiers": [{"model": "ls"}], "n_l": 10, "repeats": 1, "measures": ["error"]})");
    auto r = run({"learning-curve", "--config", p("c.json"), "-o", p("out.csv")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("/sizes"), std::string::npos) << r.err;

    write_file_atomic(p("c2.json"), R"({"datasets": [{"generator": "two-gaussian", "params": {"n": 100}}],
        "classifiers": [{"model": "ls", "params": {"lambda": -1}}], "n_l": 10, "sizes": [2], "repeats": 1,
        "measures": ["error"]})");
    r = run({"learning-curve", "--config", p("c2.json"), "-o", p("out.csv")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("/classifiers/0/params/lambda"), std::string::npos) << r.err;

    write_file_atomic(p("c3.json"), R"({"datasets": [{"generator": "two-gaussian", "params": {"n": 100}}],
        "classifiers": [{"model": "ls"}], "n_l": 10, "sizes": [2, 128], "repeats": 1, "measures": ["error"]})");
    r = run({"learning-curve", "--config", p("c3.json"), "-o", p("out.csv")});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("/sizes"), std::string::npos) << r.err;
}

TEST_F(Cli, LearningCurveSmokeIsFastAndDeterministic) {
    write_file_atomic(p("c.json"), R"({"datasets": [{"name": "g", "generator": "two-gaussian"}],
        "classifiers": [{"name": "sup", "model": "ls"}, {"name": "self", "model": "self-learning"}],
        "n_l": 10, "sizes": [2], "repeats": 1, "measures": ["error", "loss_test"], "base_seed": 3})");
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run({"learning-curve", "--config", p("c.json"), "-o", p("a.csv")});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_LT(secs, 5.0);
    EXPECT_EQ(lines(read_file(p("a.csv"))), 1 + 2 * 2);
    ASSERT_EQ(run({"learning-curve", "--config", p("c.json"), "--jobs", "3", "-o", p("b.csv")}).code, 0);
    EXPECT_EQ(read_file(p("a.csv")), read_file(p("b.csv")));
}

TEST_F(Cli, ReplicateUnknownTarget) {
    EXPECT_EQ(run({"replicate", "fig9", "--out-dir", dir.string()}).code, 2);
}

TEST_F(Cli, ReplicateFig3WritesFiles) {
    const auto r = run({"replicate", "fig3", "--repeats", "2", "--out-dir", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("replicate fig3: "), std::string::npos);
    int svgs = 0;
    for (const auto& e : fs::directory_iterator(dir)) svgs += e.path().extension() == ".svg";
    EXPECT_GE(svgs, 2);
}
