#include "sfl/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

fs::path data_dir() {
    const char* dir = std::getenv("SFL_TEST_DATA");
    return dir ? fs::path(dir) : fs::path("tests/data");
}

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = sfl::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("sflctl_test_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST(Cli, MissingConfigIsExitOneWithPath) {
    const auto r = run({"optimize", "--config", "/no/such/scenario.yaml", "--out", scratch("missing").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("/no/such/scenario.yaml"), std::string::npos);
}

TEST(Cli, BadArgumentsAreExitOne) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"teleport"}).code, 1);
    EXPECT_EQ(run({"optimize", "--jobs", "0"}).code, 1);
    EXPECT_EQ(run({"profile", "--arch", "lenet", "--out", scratch("arch").string()}).code, 1);
}

TEST(Cli, HelpIsExitZero) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("optimize"), std::string::npos);
}

TEST(Cli, InfeasibleIsExitTwo) {
    const auto cfg = (data_dir() / "infeasible.yaml").string();
    for (const char* cmd : {"optimize", "simulate"}) {
        const auto r = run({cmd, "--config", cfg, "--out", scratch("infeasible").string()});
        EXPECT_EQ(r.code, 2) << cmd;
        EXPECT_NE(r.err.find("phi_hat_sq"), std::string::npos);
    }
}

TEST(Cli, ConfigErrorNamesField) {
    const auto dir = scratch("badcfg");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.yaml") << "optimizer: {n_iter: -3}\n";
    const auto r = run({"optimize", "--config", (dir / "bad.yaml").string(), "--out", (dir / "out").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("optimizer.n_iter"), std::string::npos);
}

TEST(Cli, ProfileArchitectureFile) {
    const auto out = scratch("profile");
    const auto r = run({"profile", "--config", (data_dir() / "tiny_arch.yaml").string(), "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto csv = slurp(out / "profile.csv");
    EXPECT_EQ(csv.rfind("layer,name,kind,layer_macs,cumulative_macs,data_bits\n1,conv1,conv,442368,442368,524288\n", 0),
              0u);
    EXPECT_TRUE(fs::exists(out / "manifest.json"));
    EXPECT_TRUE(fs::exists(out / "config.yaml"));
}

TEST(Cli, OptimizeDefaultsWritesTwentyDevices) {
    const auto out = scratch("optimize");
    const auto r = run({"optimize", "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto csv = slurp(out / "solution.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
    EXPECT_NE(r.out.find("devices=20"), std::string::npos);
}

TEST(Cli, EverySubcommandIsByteIdenticalOnRerun) {
    const auto cfg = (data_dir() / "small_scenario.yaml").string();
    for (const std::string cmd : {"profile", "optimize", "simulate", "train", "bound"}) {
        const auto a = scratch(cmd + "_a"), b = scratch(cmd + "_b");
        ASSERT_EQ(run({cmd, "--config", cfg, "--seed", "17", "--out", a.string()}).code, 0) << cmd;
        ASSERT_EQ(run({cmd, "--config", cfg, "--seed", "17", "--jobs", "3", "--out", b.string()}).code, 0) << cmd;
        std::size_t files = 0;
        for (const auto& entry : fs::directory_iterator(a)) {
            ++files;
            const auto name = entry.path().filename();
            EXPECT_EQ(slurp(entry.path()), slurp(b / name)) << cmd << " " << name;
        }
        EXPECT_GE(files, 3u) << cmd;
    }
}

TEST(Cli, SeedChangesSampledOutputs) {
    const auto cfg = (data_dir() / "small_scenario.yaml").string();
    const auto a = scratch("seed_a"), b = scratch("seed_b");
    ASSERT_EQ(run({"simulate", "--config", cfg, "--seed", "1", "--out", a.string()}).code, 0);
    ASSERT_EQ(run({"simulate", "--config", cfg, "--seed", "2", "--out", b.string()}).code, 0);
    EXPECT_NE(slurp(a / "rounds.csv"), slurp(b / "rounds.csv"));
}
