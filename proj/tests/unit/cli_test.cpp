#include <cstdlib>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "synthrel/fixtures.hpp"
#include "synthrel/io.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kData = SYNTHREL_TEST_DATA;
const std::string kCli = SYNTHREL_CLI;

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = "'" + kCli + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override { dir = synthrel::testkit::scratch_dir("cli"); }
  void TearDown() override { fs::remove_all(dir); }
  fs::path dir;
};

std::string shop_real() { return "'" + (kData / "shop" / "metadata.json").string() + "," + (kData / "shop").string() + "'"; }

}  // namespace

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("", dir / "log"), 1);
  EXPECT_EQ(run("frobnicate", dir / "log"), 1);
  EXPECT_EQ(run("evaluate --real " + shop_real(), dir / "log"), 1);  // --out missing
  EXPECT_EQ(run("evaluate --real " + shop_real() + " --synthetic x --alpha 2 --out " + (dir / "r.json").string(),
                dir / "log"),
            1);
}

TEST_F(Cli, ValidateReportsIntegrity) {
  EXPECT_EQ(run("validate '" + (kData / "shop" / "metadata.json").string() + "' '" + (kData / "shop").string() + "'",
                dir / "log"),
            0);
  EXPECT_EQ(run("validate '" + (kData / "shop_dangling" / "metadata.json").string() + "' '" +
                    (kData / "shop_dangling").string() + "'",
                dir / "log"),
            2);
  EXPECT_NE(slurp(dir / "log").find("s9"), std::string::npos);
  EXPECT_EQ(run("validate '" + (kData / "shop_missing" / "metadata.json").string() + "' '" +
                    (kData / "shop_missing").string() + "'",
                dir / "log"),
            2);
}

TEST_F(Cli, EvaluateIsDeterministicAcrossRunsAndWorkers) {
  auto real = synthrel::fixtures::store_sales_database(50, 1);
  auto syn = synthrel::fixtures::marginal_sampler(real, 2);
  synthrel::save_database(real, dir / "real" / "metadata.json", dir / "real");
  synthrel::save_database(syn, dir / "syn" / "metadata.json", dir / "syn");
  const std::string base = "evaluate --real '" + (dir / "real" / "metadata.json").string() + "," +
                           (dir / "real").string() + "' --synthetic '" + (dir / "syn").string() +
                           "' --bootstrap 100 --seed 5 --suite single-column --suite multi-table";
  ASSERT_EQ(run(base + " --out " + (dir / "a.json").string(), dir / "log"), 0) << slurp(dir / "log");
  ASSERT_EQ(run(base + " --out " + (dir / "b.json").string(), dir / "log"), 0);
  ASSERT_EQ(run(base + " --workers 4 --out " + (dir / "c.json").string(), dir / "log"), 0);
  const auto a = slurp(dir / "a.json");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir / "b.json"));
  EXPECT_EQ(a, slurp(dir / "c.json"));

  ASSERT_EQ(run("summarize " + (dir / "a.json").string() + " --plots " + (dir / "plots").string(), dir / "log"), 0);
  EXPECT_NE(slurp(dir / "log").find("dataset: dataset"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "plots" / "dataset__ks.tsv"));

  ASSERT_EQ(run("compare " + (dir / "a.json").string() + " " + (dir / "b.json").string(), dir / "log"), 0);
  EXPECT_EQ(slurp(dir / "log"), "no differences in failure counts\n");
}

TEST_F(Cli, InvalidRealDatabaseExitsTwo) {
  EXPECT_EQ(run("evaluate --real '" + (kData / "shop_dangling" / "metadata.json").string() + "," +
                    (kData / "shop_dangling").string() + "' --synthetic '" + (kData / "shop").string() + "' --out " +
                    (dir / "r.json").string(),
                dir / "log"),
            2);
}

TEST_F(Cli, MalformedReportIsRejectedAsInvalidInput) {
  std::ofstream(dir / "bad.json") << "{not json";
  EXPECT_EQ(run("summarize " + (dir / "bad.json").string(), dir / "log"), 2);
}
