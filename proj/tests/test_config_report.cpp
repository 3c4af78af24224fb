#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include <gtest/gtest.h>

#include "igsoft/config.hpp"
#include "igsoft/experiment.hpp"
#include "igsoft/parallel.hpp"
#include "igsoft/report.hpp"

using namespace igsoft;

TEST(Config, Defaults)
{
  const auto c = parse_config_text("");
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.model.kind, ModelKind::coupled);
  EXPECT_DOUBLE_EQ(c.solver.tol, 1e-10);
  EXPECT_EQ(c.sweep.sigma0.size(), 3u);
  EXPECT_NEAR(c.spec2d().lambda_plus(), 1 / std::sqrt(2.0), 1e-15);
}

TEST(Config, ParsesSectionsAndLists)
{
  const auto c = parse_config_text("[model]\nkind = 3d\nsigma0 = 2\n[sweep]\nsigma0 = 1, 3\n[output]\nformat = json\n");
  EXPECT_EQ(c.model.kind, ModelKind::three_d);
  EXPECT_DOUBLE_EQ(c.model.sigma0, 2.0);
  EXPECT_EQ(c.sweep.sigma0, (std::vector<double>{1.0, 3.0}));
  EXPECT_EQ(c.output.format, OutputFormat::json);
}

TEST(Config, Rejections)
{
  EXPECT_THROW(parse_config_text("[model]\nbogus = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[model]\nsigma0 = abc\n"), ConfigError);
  EXPECT_THROW(parse_config_text("[model]\nsigma0 = 0\n").validate(), ConfigError);
  EXPECT_THROW(parse_config_text("[model]\nsigma0 = -1\n").validate(), ConfigError);
  EXPECT_THROW(parse_config_text("[model]\nlambda_plus = 0.9\n").validate(), ConfigError);
  EXPECT_THROW(parse_config_text("[model]\nkind = 2d\n").validate(), ConfigError);
  EXPECT_THROW(parse_config_text("[solver]\ntol = 1e-3\n").validate(), ConfigError);
  EXPECT_THROW(parse_config_text("[jacobi]\nJ0_3d = 1, 2\n").validate(), ConfigError);
  EXPECT_THROW(parse_config_text("[model]\nlambda_f = 1\ntau_f = 20\nepsilon = 1e-4\n").validate(), ConfigError);
}

TEST(Config, HorizonReplacesLambdaF)
{
  const auto c = parse_config_text("[model]\nsigma0_prime = 0.8\ntau_f = 20\nepsilon = 1e-4\n");
  EXPECT_NO_THROW(c.validate());
  EXPECT_NEAR(c.spec3d().lambda_f(), std::log(0.8 / 1e-4) / 20, 1e-15);
}

TEST(Report, JsonRoundTrip)
{
  RunReport r;
  r.command = "demo";
  r.add(Check::relative("a.rel", 0.7071, 1 / std::sqrt(2.0), 0.01));
  r.add(Check::at_most("a.bound", 1e-12, 1e-8));
  r.add(Check::failed("a.fail", "no data"));
  r.value("x", 1.0 / 3.0);
  r.value("missing", std::nan(""));
  r.notes.push_back("hello");
  const std::string text = serialize(r);
  const RunReport back = parse_report(text);
  EXPECT_EQ(serialize(back), text);
  EXPECT_FALSE(back.passed());
  EXPECT_TRUE(std::isnan(back.checks[1].expected));
  EXPECT_EQ(back.values[0].second, 1.0 / 3.0);
}

TEST(Report, CsvFormat)
{
  Table t{"demo", {"tau", "value"}, {}};
  t.row({0.1, 1.0 / 3.0});
  t.row({2.0, std::nan("")});
  EXPECT_THROW(t.row({1.0}), std::logic_error);
  EXPECT_EQ(to_csv(t),
            "# igsoft-csv schema_version=1 artifact=demo\n"
            "tau,value\n"
            "0.10000000000000001,0.33333333333333331\n"
            "2,nan\n");
}

TEST(Parallel, OrderAndExceptions)
{
  const auto v = parallel_map(100, 4, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], i * i);
  std::atomic<int> calls{0};
  EXPECT_THROW(parallel_map(10, 3,
                            [&](std::size_t i) {
                              ++calls;
                              if (i == 4) throw std::runtime_error("boom");
                              return i;
                            }),
               std::runtime_error);
  EXPECT_EQ(calls.load(), 10);
}

TEST(Experiment, VerifyReportsScalarCurvatures)
{
  auto cfg = parse_config_text("[verify]\ncurvature_points = 5\nfisher_points = 3\n");
  const auto r = run_verify(cfg);
  std::size_t found = 0;
  for (const auto& c : r.report.checks) {
    if (c.name == "verify.3D.scalar_curvature_analytic") {
      EXPECT_EQ(c.measured, -1.0);
      ++found;
    }
    if (c.name == "verify.2D.scalar_curvature_analytic") {
      EXPECT_EQ(c.measured, -0.5);
      ++found;
    }
  }
  EXPECT_EQ(found, 2u);
  EXPECT_TRUE(r.report.passed());
}

TEST(Experiment, SofteningNeedsCoupledModel)
{
  auto cfg = parse_config_text("[model]\nkind = 3d\n");
  EXPECT_THROW(run_softening(cfg), ConfigError);
}
