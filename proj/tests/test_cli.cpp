#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args)
{
  const std::string cmd = std::string(IGSOFT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name)
{
  const auto d = fs::temp_directory_path() / ("igsoft_cli_test_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Cli, RerunsAreByteIdentical)
{
  const auto a = fresh_dir("a"), b = fresh_dir("b");
  ASSERT_EQ(run("geodesics --out " + a.string()), 0);
  ASSERT_EQ(run("geodesics --jobs 3 --out " + b.string()), 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    ++files;
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
  }
  EXPECT_GE(files, 3u);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, BadConfigExitsTwo)
{
  const auto d = fresh_dir("cfg");
  fs::create_directories(d);
  std::ofstream(d / "bad.ini") << "[model]\nsigma0 = -1\n";
  EXPECT_EQ(run("verify-geometry --config " + (d / "bad.ini").string() + " --out " + d.string()), 2);
  EXPECT_EQ(run("ige --tol 1e-2 --out " + d.string()), 2);
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run("softening --config " IGSOFT_CONFIG_DIR "/single_2d.ini --out " + d.string()), 2);
  fs::remove_all(d);
}

TEST(Cli, ShippedConfigsPass)
{
  const auto d = fresh_dir("shipped");
  EXPECT_EQ(run("jacobi --config " IGSOFT_CONFIG_DIR "/horizon_3d.ini --out " + d.string()), 0);
  EXPECT_EQ(run("geodesics --config " IGSOFT_CONFIG_DIR "/single_2d.ini --out " + d.string()), 0);
  fs::remove_all(d);
}
