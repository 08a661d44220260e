// SPDX-License-Identifier: Apache-2.0
//
// Runs the pgsc binary and checks exit codes and output files.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "test_support.hpp"

namespace {

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(PGSC_CLI_PATH) + " " + args + " 2>/dev/null";
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

const std::string kTiny =
    " --set samples=8 --set train_samples=4 --set segments=3 --set batch_size=4 --epochs 1 --seeds 1";

}  // namespace

TEST(Cli, HelpExitsZero) {
    const RunResult r = run("--help");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("simulate"), std::string::npos);
    EXPECT_EQ(run("simulate --help").code, 0);
}

TEST(Cli, ConfigErrorsExitTwo) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("simulate --channel nakagami").code, 2);
    EXPECT_EQ(run("simulate --set frobnicate=1").code, 2);
    EXPECT_EQ(run("simulate --snr-list abc").code, 2);
    EXPECT_EQ(run("teleport").code, 2);
}

TEST(Cli, IoErrorsExitFour) {
    EXPECT_EQ(run("simulate --config /nonexistent/run.cfg").code, 4);
    EXPECT_EQ(run("simulate --channel awgn --snr-list 30" + kTiny + " --quiet --out /nonexistent/dir/r.csv").code, 4);
}

TEST(Cli, NumericalFailureExitsThree) {
    // A huge step overflows the weights during the second epoch.
    const RunResult r = run(
        "train --channel awgn --snr-list 30 --set samples=8 --set train_samples=4 --set segments=3 "
        "--set batch_size=4 --epochs 3 --seeds 1 --set optimizer=sgd --set step_size=1e300 --quiet");
    EXPECT_EQ(r.code, 3);
}

TEST(Cli, SimulateWritesCsvAndManifest) {
    pgsc::fixture::ScratchDir dir("cli_sim");
    const auto csv = dir.path() / "r.csv";
    const RunResult r = run("simulate --channel awgn,rayleigh --snr-list 0,30 --csi pilot,none" + kTiny +
                            " --quiet --out " + csv.string());
    ASSERT_EQ(r.code, 0);
    std::ifstream is(csv);
    std::string header;
    std::getline(is, header);
    EXPECT_EQ(header, "channel,snr_db,seed,mode,csi,segment_accuracy,frame_erasures");
    std::size_t rows = 0;
    for (std::string line; std::getline(is, line);) ++rows;
    EXPECT_EQ(rows, 2u * 2u * 2u);
    EXPECT_TRUE(std::filesystem::exists(csv.string() + ".manifest"));
}

TEST(Cli, GradcheckPasses) {
    const RunResult r = run("gradcheck --segments 3 --channel rayleigh");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("PASS"), std::string::npos);
}

TEST(Cli, PilotDemoTable) {
    const RunResult r = run("pilot-demo --channel awgn --snr-list 0,30 --trials 50");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("channel,snr_db,mean_sq_error,mean_t_min", 0), 0u);
}

TEST(Cli, SynthThenTrainOnImportedFeatures) {
    pgsc::fixture::ScratchDir dir("cli_synth");
    ASSERT_EQ(run("synth" + kTiny + " --out " + dir.path().string()).code, 0);
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "labels.pgsc"));
    const auto ckpt = dir.path() / "model.pgsc";
    const RunResult r = run("train --channel awgn --snr-list 30" + kTiny + " --quiet --data " + dir.path().string() +
                            " --checkpoint " + ckpt.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("snr_db,csi,segment_accuracy,frame_erasures", 0), 0u);
    EXPECT_TRUE(std::filesystem::exists(ckpt.string() + ".manifest"));
}
