#include "sard/archive.hpp"
#include "sard/metrics.hpp"
#include "sard/sarg.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

using namespace sard;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "sard_cli_tests";

struct Result {
    int code;
    std::string err;
};

Result run(const std::string& args) {
    const fs::path err = kWork / "stderr.txt";
    const std::string cmd = std::string(SARD_CLI) + " " + args + " > /dev/null 2> " + err.string();
    const int status = std::system(cmd.c_str());
    std::ifstream in(err);
    std::stringstream ss;
    ss << in.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string path(const std::string& name) { return (kWork / name).string(); }

std::map<std::string, std::vector<std::uint8_t>> snapshot(const fs::path& dir) {
    std::map<std::string, std::vector<std::uint8_t>> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file()) out[e.path().filename().string()] = read_file_bytes(e.path());
    }
    return out;
}

/// Re-runs `command` from the run_config.json in `dir` and requires identical files.
void expect_reproducible(const std::string& command, const std::string& dir) {
    const auto before = snapshot(dir);
    ASSERT_FALSE(before.empty());
    ASSERT_TRUE(before.count("run_config.json"));
    const Result r = run(command + " --config " + dir + "/run_config.json");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto after = snapshot(dir);
    ASSERT_EQ(before.size(), after.size());
    for (const auto& [name, bytes] : before) EXPECT_TRUE(after.at(name) == bytes) << command << ": " << name;
}

std::string read_text(const fs::path& p) {
    const auto bytes = read_file_bytes(p);
    return {bytes.begin(), bytes.end()};
}

class Cli : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        fs::remove_all(kWork);
        fs::create_directories(kWork);
        const Result ds = run("build-dataset --synthetic 24 --size 24 --seed 3 --out " + path("ds"));
        ASSERT_EQ(ds.code, 0) << ds.err;
        const Result tr = run("train --archive " + path("ds") +
                              " --epochs 2 --batch 4 --size 24 --width 4 --blocks 1 --seed 5 --out " + path("tr"));
        ASSERT_EQ(tr.code, 0) << tr.err;
    }
    static void TearDownTestSuite() { fs::remove_all(kWork); }
};

} // namespace

TEST_F(Cli, VersionAndHelpSucceed) {
    EXPECT_EQ(run("--version").code, 0);
    EXPECT_EQ(run("--help").code, 0);
    EXPECT_EQ(run("train --help").code, 0);
    EXPECT_EQ(run("no-such-command").code, 2);
}

TEST_F(Cli, SimulateIsReproducible) {
    ASSERT_EQ(run("simulate --size 64 --seed 7 --out " + path("sim")).code, 0);
    expect_reproducible("simulate", path("sim"));
}

TEST_F(Cli, SimulateNakagamiSingleLookIsRayleigh) {
    ASSERT_EQ(run("simulate --model nakagami --looks 1 --size 600 --seed 2 --out " + path("ray")).code, 0);
    const ImageGrid amp = read_sarg(kWork / "ray" / "field.sarg");
    double s = 0.0, s2 = 0.0;
    for (float v : amp.data()) {
        s += v;
        s2 += static_cast<double>(v) * v;
    }
    EXPECT_NEAR(s2 / amp.size(), 1.0, 0.01);
    EXPECT_NEAR(s / amp.size(), std::sqrt(std::acos(-1.0)) / 2.0, 0.005);
}

TEST_F(Cli, SimulateCorruptsAnInputImage) {
    ASSERT_EQ(run("simulate --size 32 --looks 4 --seed 1 --out " + path("field")).code, 0);
    const Result r = run("simulate --input " + path("field") + "/field.sarg --looks 2 --seed 4 --out " + path("noisy"));
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(kWork / "noisy" / "noisy.sarg"));
}

TEST_F(Cli, InvalidArgumentsExitWithTwo) {
    EXPECT_EQ(run("simulate --looks 0 --out " + path("bad")).code, 2);
    EXPECT_EQ(run("simulate --model poisson --out " + path("bad")).code, 2);
    EXPECT_EQ(run("train --archive " + path("ds") + " --epochs abc --out " + path("bad")).code, 2);
    EXPECT_EQ(run("compare --archive " + path("ds") + " --methods lee,bm3d --out " + path("bad")).code, 2);
    EXPECT_EQ(run("despeckle --model " + path("tr") + "/model.sarc --input " + path("ds") +
                  "/s0000_input.sarg --region 1,2,3 --out " + path("bad"))
                  .code,
              2);
}

TEST_F(Cli, ConfigForAnotherCommandRejected) {
    ASSERT_EQ(run("simulate --size 16 --out " + path("sim2")).code, 0);
    EXPECT_EQ(run("train --config " + path("sim2") + "/run_config.json").code, 2);
}

TEST_F(Cli, SplitArithmeticFollowsFloorRule) {
    const Result r = run("build-dataset --synthetic 2637 --size 8 --seed 1 --out " + path("big"));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto counts = read_manifest(kWork / "big").at("split_counts");
    EXPECT_EQ(counts.at("val").get<int>(), 601);
    EXPECT_EQ(counts.at("test").get<int>(), 36);
    EXPECT_EQ(counts.at("train").get<int>(), 2000);
}

TEST_F(Cli, BuildDatasetIsReproducible) { expect_reproducible("build-dataset", path("ds")); }

TEST_F(Cli, EmptyStackDirectoryRejected) {
    fs::create_directories(kWork / "empty_stacks");
    EXPECT_EQ(run("build-dataset --stacks " + path("empty_stacks") + " --out " + path("bad")).code, 2);
}

TEST_F(Cli, CorruptStackIsReported) {
    const fs::path dir = kWork / "stacks";
    fs::create_directories(dir);
    const std::vector<ImageGrid> frames{ImageGrid(16, 16, 1, 1.0f), ImageGrid(16, 16, 1, 2.0f)};
    for (int i = 0; i < 4; ++i) write_sarg(dir / ("good" + std::to_string(i) + ".sarg"), frames);
    std::ofstream(dir / "broken.sarg") << "SARG garbage";
    const Result r = run("build-dataset --stacks " + dir.string() + " --out " + path("stack_ds"));
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("broken.sarg"), std::string::npos) << r.err;
    fs::remove(dir / "broken.sarg");
    const Result ok = run("build-dataset --stacks " + dir.string() + " --out " + path("stack_ds"));
    EXPECT_EQ(ok.code, 0) << ok.err;
    EXPECT_EQ(read_archive(kWork / "stack_ds").entries.size(), 4u);
}

TEST_F(Cli, TrainWritesArtifactsAndReproduces) {
    for (const char* f : {"model.sarc", "last.sarc", "history.csv", "run_config.json"}) {
        EXPECT_TRUE(fs::exists(kWork / "tr" / f)) << f;
    }
    const std::string history = read_text(kWork / "tr" / "history.csv");
    EXPECT_EQ(std::count(history.begin(), history.end(), '\n'), 3);
    expect_reproducible("train", path("tr"));
}

TEST_F(Cli, DespeckleWritesFilteredImageAndEnl) {
    const Result r = run("despeckle --model " + path("tr") + "/model.sarc --input " + path("ds") +
                         "/s0001_input.sarg --png --out " + path("dsp"));
    ASSERT_EQ(r.code, 0) << r.err;
    const ImageGrid out = read_sarg(kWork / "dsp" / "s0001_input_filtered.sarg");
    EXPECT_EQ(out.width(), 24u);
    const std::string enl_csv = read_text(kWork / "dsp" / "enl.csv");
    EXPECT_EQ(enl_csv.substr(0, enl_csv.find('\n')), "id,region,enl_noisy,enl_filtered");
    expect_reproducible("despeckle", path("dsp"));
}

TEST_F(Cli, CorruptCheckpointExitsWithThree) {
    std::ofstream(kWork / "junk.sarc") << "not a checkpoint";
    EXPECT_EQ(run("despeckle --model " + path("junk.sarc") + " --input " + path("ds") + "/s0000_input.sarg --out " +
                  path("bad"))
                  .code,
              3);
}

TEST_F(Cli, EvaluateWritesMetrics) {
    const Result r = run("evaluate --model " + path("tr") + "/model.sarc --archive " + path("ds") + " --out " + path("ev"));
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = read_text(kWork / "ev" / "metrics.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), kMetricsCsvHeader);
    expect_reproducible("evaluate", path("ev"));
}

TEST_F(Cli, CompareRanksEveryMethod) {
    const Result r = run("compare --model " + path("tr") + "/model.sarc --archive " + path("ds") + " --out " + path("cmp"));
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = read_text(kWork / "cmp" / "comparison.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 1 + 7);
    EXPECT_NE(csv.find(",model,"), std::string::npos);
    EXPECT_TRUE(fs::exists(kWork / "cmp" / "metrics_frost.csv"));
    expect_reproducible("compare", path("cmp"));
}

TEST_F(Cli, CompareBaselinesOnly) {
    const Result r = run("compare --archive " + path("ds") + " --methods lee,median --split val --out " + path("cmp2"));
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = read_text(kWork / "cmp2" / "comparison.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}
