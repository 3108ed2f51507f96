#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string cli = TRANSDUCE_CLI;
const std::string configs = TRANSDUCE_SOURCE_DIR "/configs/";

fs::path scratch() {
  // one directory per test so ctest -j cannot mix outputs
  const fs::path dir = fs::temp_directory_path() / "transduce_cli_test" /
                       ::testing::UnitTest::GetInstance()->current_test_info()->name();
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd = cli + " " + args + " >" + (scratch() / "stdout").string() + " 2>" +
                          (scratch() / "stderr").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

}  // namespace

TEST(Cli, WritesCsvWithMetadata) {
  const fs::path out = scratch() / "pop.csv";
  ASSERT_EQ(run("populations --config " + configs + "quick.json --out " + out.string()), 0);
  const std::string text = slurp(out);
  EXPECT_EQ(text.rfind("# tool: transduce", 0), 0u);
  EXPECT_NE(text.find("# config_hash: fnv1a64:"), std::string::npos);
  EXPECT_NE(text.find("\npanel,time_gamma,rho_aa,rho_bb,rho_cc\n"), std::string::npos);
}

TEST(Cli, DashMeansStdout) {
  ASSERT_EQ(run("populations --config " + configs + "quick.json --out -"), 0);
  EXPECT_NE(slurp(scratch() / "stdout").find("rho_cc"), std::string::npos);
}

TEST(Cli, DefaultOutputPathFromConfig) {
  const fs::path dir = scratch() / "outdir";
  fs::remove_all(dir);
  const fs::path cfg =
      write_config("dir.json", R"({"schema_version": 1, "populations": {"samples": 3}, "output": {"directory": ")" +
                                   dir.string() + R"("}})");
  ASSERT_EQ(run("populations --config " + cfg.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "populations.csv"));
}

TEST(Cli, SchemaAndDefaultsMatchShippedFiles) {
  ASSERT_EQ(run("schema"), 0);
  EXPECT_EQ(slurp(scratch() / "stdout"), slurp(configs + "schema.json"));
  ASSERT_EQ(run("defaults"), 0);
  EXPECT_EQ(slurp(scratch() / "stdout"), slurp(configs + "defaults.json"));
}

TEST(Cli, SeedlessIsAcceptedWithoutValue) {
  EXPECT_EQ(run("populations --seedless --config " + configs + "quick.json --out -"), 0);
  EXPECT_EQ(run("populations --seedless=true --config " + configs + "quick.json --out -"), 2);
  EXPECT_EQ(run("populations --seedless=false --config " + configs + "quick.json --out -"), 2);
}

TEST(Cli, ArgumentErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run("populations --threads 0 --out -"), 2);
  EXPECT_EQ(run("populations --bogus --out -"), 2);
  EXPECT_EQ(run("--version"), 0);
  EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(run("populations --out - --config /nonexistent.json"), 2);
  const fs::path unknown = write_config("unknown.json", R"({"schema_version": 1, "pump": {"powr_mW": 1}})");
  EXPECT_EQ(run("populations --out - --config " + unknown.string()), 2);
  EXPECT_NE(slurp(scratch() / "stderr").find("pump.powr_mW"), std::string::npos);
  const fs::path bad = write_config("bad.json", "{ nope");
  EXPECT_EQ(run("populations --out - --config " + bad.string()), 2);
  const fs::path version = write_config("version.json", R"({"schema_version": 7})");
  EXPECT_EQ(run("populations --out - --config " + version.string()), 2);
}

TEST(Cli, NumericalFailureExitsThree) {
  const fs::path cfg = write_config("cutoff.json", R"({"schema_version": 1, "cavity": {
      "collection_fock_cutoff": 1, "max_fock_cutoff": 2, "cutoff_tolerance": 1e-12,
      "collection_max_duration_us": 1}})");
  EXPECT_EQ(run("cavity --out - --config " + cfg.string()), 3);
  EXPECT_NE(slurp(scratch() / "stderr").find("numerical failure"), std::string::npos);
}
