// igsoft: batch runner for the Gaussian statistical-manifold experiments.
//
// Exit status: 0 all checks pass, 1 a check failed, 2 configuration error,
// 3 numerical abort.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "igsoft/config.hpp"
#include "igsoft/experiment.hpp"
#include "igsoft/report.hpp"

namespace fs = std::filesystem;
using namespace igsoft;

namespace {

enum ExitCode { kPass = 0, kCheckFailure = 1, kConfigError = 2, kNumericalAbort = 3 };

struct Overrides
{
  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::size_t> jobs;
  std::optional<double> tol;
  std::optional<double> tau_max;
  bool seedless = false;
};

ExperimentConfig load_config(const Overrides& o)
{
  ExperimentConfig cfg;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw ConfigError("cannot open config file '" + o.config_path + "'");
    cfg = parse_config(in);
  }
  if (o.out) cfg.output.dir = *o.out;
  if (o.format) cfg.output.format = *o.format == "csv" ? OutputFormat::csv
                                    : *o.format == "json" ? OutputFormat::json
                                                          : OutputFormat::both;
  if (o.jobs) cfg.output.jobs = *o.jobs;
  if (o.tol) cfg.solver.tol = *o.tol;
  if (o.tau_max) cfg.solver.tau_max = *o.tau_max;
  cfg.validate();
  return cfg;
}

void write_outputs(const ExperimentResult& r, const ExperimentConfig& cfg)
{
  std::error_code ec;
  fs::create_directories(cfg.output.dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + cfg.output.dir + "': " + ec.message());
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(cfg.output.dir) / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + (fs::path(cfg.output.dir) / name).string() + "'");
    return f;
  };
  if (cfg.output.format != OutputFormat::json)
    for (const auto& t : r.tables) {
      auto f = open(t.artifact + ".csv");
      write_csv(f, t);
    }
  if (cfg.output.format != OutputFormat::csv) {
    auto f = open(r.report.command + ".json");
    f << serialize(r.report);
  }
}

void print_summary(const RunReport& rep)
{
  for (const auto& c : rep.checks) {
    std::printf("%s  %-58s measured=%-13s ", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                detail::short_number(c.measured).c_str());
    if (c.kind == CheckKind::relative)
      std::printf("expected=%s rel_tol=%s\n", detail::short_number(c.expected).c_str(),
                  detail::short_number(c.tolerance).c_str());
    else
      std::printf("%s %s\n", c.kind == CheckKind::at_most ? "<=" : ">=", detail::short_number(c.tolerance).c_str());
    if (!c.passed && !c.detail.empty()) std::printf("      %s\n", c.detail.c_str());
  }
  for (const auto& n : rep.notes) std::printf("note: %s\n", n.c_str());
  if (rep.aborted) std::printf("ABORTED: %s\n", rep.abort_reason.c_str());
  std::size_t failed = 0;
  for (const auto& c : rep.checks) failed += c.passed ? 0 : 1;
  std::printf("%s: %zu checks, %zu failed\n", rep.command.c_str(), rep.checks.size(), failed);
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Information-geometric complexity experiments on Gaussian statistical manifolds"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  app.add_option("--config", o.config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "output directory");
  app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json", "both"}));
  app.add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--tol", o.tol, "ODE relative tolerance (1e-13 .. 1e-6)");
  app.add_option("--tau-max", o.tau_max, "geodesic integration horizon");
  app.add_flag("--seedless", o.seedless, "no random numbers are used anywhere; accepted for compatibility");

  using Runner = ExperimentResult (*)(const ExperimentConfig&);
  Runner runner = nullptr;
  auto sub = [&](const char* name, const char* help, Runner r) {
    app.add_subcommand(name, help)->callback([&runner, r] { runner = r; });
  };
  sub("verify-geometry", "analytic vs numeric metric, curvature and Fisher quadrature", &run_verify);
  sub("geodesics", "integrate geodesics and compare with the closed forms", &run_geodesics);
  sub("ige", "information geometric entropy series and slope fits", &run_ige);
  sub("jacobi", "Jacobi field integration and growth exponents", &run_jacobi);
  sub("softening", "coupled 3D/2D comparison over the sigma0 sweep", &run_softening);
  sub("all", "every experiment", &run_all);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "igsoft: %s\n", e.what());
    return kConfigError;
  }

  try {
    const ExperimentResult r = runner(cfg);
    write_outputs(r, cfg);
    print_summary(r.report);
    if (r.report.aborted) return kNumericalAbort;
    return r.report.passed() ? kPass : kCheckFailure;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "igsoft: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "igsoft: numerical abort: %s\n", e.what());
    return kNumericalAbort;
  }
}
