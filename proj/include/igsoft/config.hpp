#pragma once

// Experiment configuration: INI-style sections, flat key = value pairs.
//
//   [model]   kind = coupled | 3d | 2d, mu0, sigma0, sigma0_prime, lambda_plus_prime,
//             lambda_f (or tau_f + epsilon), lambda_plus (2d only), capital_sigma_sq
//   [solver]  tol, tau_max
//   [verify]  curvature_points, fisher_points, alt_capital_sigma_sq
//   [ige]     window_lo, window_hi, fit_points, n_grid, series_points,
//             check_window_lo, check_window_hi, check_points
//   [jacobi]  window_lo, window_hi, samples, J0_3d, dJ0_3d, J0_2d, dJ0_2d   (lists: comma separated)
//   [sweep]   sigma0, mu0                             (lists)
//   [output]  dir, format = csv | json | both, jobs

#include <algorithm>
#include <charconv>
#include <functional>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "geodesic.hpp"
#include "ige.hpp"
#include "jacobi.hpp"

namespace igsoft {

class ConfigError : public std::runtime_error
{
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelKind { coupled, three_d, two_d };
enum class OutputFormat { csv, json, both };

inline const char* to_string(ModelKind k)
{
  switch (k) {
    case ModelKind::three_d: return "3d";
    case ModelKind::two_d: return "2d";
    default: return "coupled";
  }
}

inline const char* to_string(OutputFormat f)
{
  switch (f) {
    case OutputFormat::csv: return "csv";
    case OutputFormat::json: return "json";
    default: return "both";
  }
}

struct ModelSettings
{
  ModelKind kind = ModelKind::coupled;
  double mu0 = 0.0;
  double sigma0 = 1.0;
  double sigma0_prime = 1.0;
  double lambda_plus_prime = 1.0;
  /// Default 1; dropped when tau_f / epsilon are given instead.
  std::optional<double> lambda_f = 1.0;
  std::optional<double> tau_f;
  std::optional<double> epsilon;
  std::optional<double> lambda_plus;
  double capital_sigma_sq = 1.0;
};

struct SolverSettings
{
  double tol = 1e-10;
  double tau_max = 10.0;
};

struct VerifySettings
{
  std::size_t curvature_points = 50;
  std::size_t fisher_points = 20;
  double alt_capital_sigma_sq = 4.0;
};

struct IgeSettings
{
  IgeOptions fit;
  /// Window for the closed-form volume comparison, in units of sigma0 lambda tau.
  double check_window_lo = 20.0;
  double check_window_hi = 50.0;
  std::size_t check_points = 31;
};

struct JacobiSettings
{
  /// `tol` is taken from SolverSettings at run time.
  JacobiOptions fit;
  std::vector<double> J0_3d, dJ0_3d;
  std::vector<double> J0_2d, dJ0_2d;
};

struct SweepSettings
{
  std::vector<double> sigma0 = {0.5, 1.0, 2.0};
  std::vector<double> mu0 = {0.0, 1.0, 5.0};
};

struct OutputSettings
{
  std::string dir = "out";
  OutputFormat format = OutputFormat::both;
  std::size_t jobs = 1;
};

struct ExperimentConfig
{
  ModelSettings model;
  SolverSettings solver;
  VerifySettings verify;
  IgeSettings ige;
  JacobiSettings jacobi;
  SweepSettings sweep;
  OutputSettings output;

  bool has_3d() const { return model.kind != ModelKind::two_d; }
  bool has_2d() const { return model.kind != ModelKind::three_d; }

  /// 3D spec with the given mu0/sigma0 (defaults: the configured ones).
  GeodesicSpec3D spec3d(std::optional<double> mu0 = {}, std::optional<double> sigma0 = {}) const
  {
    const double m = mu0.value_or(model.mu0), s = sigma0.value_or(model.sigma0);
    if (model.lambda_f) return GeodesicSpec3D(m, s, model.sigma0_prime, model.lambda_plus_prime, *model.lambda_f);
    return GeodesicSpec3D::from_horizon(m, s, model.sigma0_prime, model.lambda_plus_prime, *model.tau_f,
                                        *model.epsilon);
  }

  GeodesicSpec2D spec2d(std::optional<double> mu0 = {}, std::optional<double> sigma0 = {}) const
  {
    if (model.kind == ModelKind::coupled) return GeodesicSpec2D::coupled_to(spec3d(mu0, sigma0));
    return GeodesicSpec2D(mu0.value_or(model.mu0), sigma0.value_or(model.sigma0), *model.lambda_plus);
  }

  template <std::size_t N>
  JacobiState<N> jacobi_initial() const
  {
    JacobiState<N> s = default_jacobi_initial<N>();
    const auto& J = N == 3 ? jacobi.J0_3d : jacobi.J0_2d;
    const auto& dJ = N == 3 ? jacobi.dJ0_3d : jacobi.dJ0_2d;
    if (!J.empty()) std::copy_n(J.begin(), N, s.J.begin());
    if (!dJ.empty()) std::copy_n(dJ.begin(), N, s.dJ.begin());
    return s;
  }

  /// Throws ConfigError on any inconsistency.
  void validate() const;
};

namespace detail {

inline double parse_double(const std::string& key, std::string text)
{
  text.erase(0, text.find_first_not_of(" \t"));
  text.erase(text.find_last_not_of(" \t") + 1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
    throw ConfigError("config: '" + key + "' is not a number: '" + text + "'");
  if (!std::isfinite(v)) throw ConfigError("config: '" + key + "' must be finite");
  return v;
}

inline std::size_t parse_count(const std::string& key, const std::string& text)
{
  const double v = parse_double(key, text);
  if (v < 0.0 || v != std::floor(v) || v > 1e9) throw ConfigError("config: '" + key + "' must be a non-negative integer");
  return std::size_t(v);
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text)
{
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError("config: '" + key + "' is an empty list");
  return out;
}

inline std::string trimmed(std::string s)
{
  s.erase(0, s.find_first_not_of(" \t"));
  s.erase(s.find_last_not_of(" \t") + 1);
  return s;
}

}  // namespace detail

inline void ExperimentConfig::validate() const
{
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw ConfigError(std::string("config: ") + what + " must be > 0");
  };
  positive(model.sigma0, "model.sigma0");
  positive(model.sigma0_prime, "model.sigma0_prime");
  positive(model.lambda_plus_prime, "model.lambda_plus_prime");
  positive(model.capital_sigma_sq, "model.capital_sigma_sq");
  if (model.lambda_f && (model.tau_f || model.epsilon))
    throw ConfigError("config: give either model.lambda_f or model.tau_f + model.epsilon, not both");
  if (has_3d() && !model.lambda_f && !(model.tau_f && model.epsilon))
    throw ConfigError("config: model.lambda_f (or model.tau_f + model.epsilon) is required");
  if (model.kind == ModelKind::two_d) {
    if (!model.lambda_plus) throw ConfigError("config: model.lambda_plus is required for kind = 2d");
    positive(*model.lambda_plus, "model.lambda_plus");
  }
  if (model.kind == ModelKind::coupled && model.lambda_plus &&
      std::abs(*model.lambda_plus - model.lambda_plus_prime / std::numbers::sqrt2) > 1e-12 * model.lambda_plus_prime)
    throw ConfigError("config: a coupled pair forces lambda_plus = lambda_plus_prime / sqrt(2)");
  if (!(solver.tol >= 1e-13 && solver.tol <= 1e-6)) throw ConfigError("config: solver.tol must lie in [1e-13, 1e-6]");
  positive(solver.tau_max, "solver.tau_max");
  if (verify.curvature_points == 0 || verify.fisher_points == 0)
    throw ConfigError("config: verify point counts must be > 0");
  positive(verify.alt_capital_sigma_sq, "verify.alt_capital_sigma_sq");
  if (!(ige.fit.window_hi > ige.fit.window_lo && ige.fit.window_lo > 0.0))
    throw ConfigError("config: ige window must satisfy 0 < window_lo < window_hi");
  if (ige.fit.window_hi > 600.0) throw ConfigError("config: ige.window_hi above 600 overflows the volume");
  if (!(ige.check_window_hi > ige.check_window_lo && ige.check_window_lo > 0.0))
    throw ConfigError("config: ige check window must satisfy 0 < lo < hi");
  if (ige.fit.fit_points < 3 || ige.check_points < 2 || ige.fit.series_points < 2)
    throw ConfigError("config: ige point counts too small");
  if (ige.fit.n_grid < 64) throw ConfigError("config: ige.n_grid must be >= 64");
  if (!(jacobi.fit.window_hi > jacobi.fit.window_lo && jacobi.fit.window_lo > 0.0))
    throw ConfigError("config: jacobi window must satisfy 0 < window_lo < window_hi");
  if (jacobi.fit.window_hi > 300.0) throw ConfigError("config: jacobi.window_hi above 300 overflows the intensity");
  if (jacobi.fit.samples < 16) throw ConfigError("config: jacobi.samples must be >= 16");
  for (const auto* v : {&jacobi.J0_3d, &jacobi.dJ0_3d})
    if (!v->empty() && v->size() != 3) throw ConfigError("config: jacobi.J0_3d / dJ0_3d need 3 entries");
  for (const auto* v : {&jacobi.J0_2d, &jacobi.dJ0_2d})
    if (!v->empty() && v->size() != 2) throw ConfigError("config: jacobi.J0_2d / dJ0_2d need 2 entries");
  for (double s : sweep.sigma0) positive(s, "sweep.sigma0 entries");
  if (output.dir.empty()) throw ConfigError("config: output.dir must not be empty");
  if (output.jobs == 0) throw ConfigError("config: output.jobs must be >= 1");
  try {
    if (has_3d()) (void)spec3d();
    if (has_2d()) (void)spec2d();
    for (double s : sweep.sigma0)
      for (double m : sweep.mu0) {
        if (has_3d()) (void)spec3d(m, s);
        if (has_2d()) (void)spec2d(m, s);
      }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

/// Parses INI text. Unknown sections or keys are errors.
inline ExperimentConfig parse_config(std::istream& in)
{
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  bool explicit_lambda_f = false;
  using Setter = std::function<void(const std::string& key, const std::string& value)>;
  auto num = [](double& dst) -> Setter { return [&dst](auto& k, auto& v) { dst = detail::parse_double(k, v); }; };
  auto opt = [](std::optional<double>& dst) -> Setter {
    return [&dst](auto& k, auto& v) { dst = detail::parse_double(k, v); };
  };
  auto cnt = [](std::size_t& dst) -> Setter { return [&dst](auto& k, auto& v) { dst = detail::parse_count(k, v); }; };
  auto lst = [](std::vector<double>& dst) -> Setter {
    return [&dst](auto& k, auto& v) { dst = detail::parse_list(k, v); };
  };
  const std::map<std::string, Setter> setters = {
      {"model.kind",
       [&](auto& k, auto& v) {
         const auto s = detail::trimmed(v);
         if (s == "coupled") c.model.kind = ModelKind::coupled;
         else if (s == "3d") c.model.kind = ModelKind::three_d;
         else if (s == "2d") c.model.kind = ModelKind::two_d;
         else throw ConfigError("config: '" + k + "' must be coupled, 3d or 2d");
       }},
      {"model.mu0", num(c.model.mu0)},
      {"model.sigma0", num(c.model.sigma0)},
      {"model.sigma0_prime", num(c.model.sigma0_prime)},
      {"model.lambda_plus_prime", num(c.model.lambda_plus_prime)},
      {"model.lambda_f",
       [&](auto& k, auto& v) {
         c.model.lambda_f = detail::parse_double(k, v);
         explicit_lambda_f = true;
       }},
      {"model.tau_f", opt(c.model.tau_f)},
      {"model.epsilon", opt(c.model.epsilon)},
      {"model.lambda_plus", opt(c.model.lambda_plus)},
      {"model.capital_sigma_sq", num(c.model.capital_sigma_sq)},
      {"solver.tol", num(c.solver.tol)},
      {"solver.tau_max", num(c.solver.tau_max)},
      {"verify.curvature_points", cnt(c.verify.curvature_points)},
      {"verify.fisher_points", cnt(c.verify.fisher_points)},
      {"verify.alt_capital_sigma_sq", num(c.verify.alt_capital_sigma_sq)},
      {"ige.window_lo", num(c.ige.fit.window_lo)},
      {"ige.window_hi", num(c.ige.fit.window_hi)},
      {"ige.fit_points", cnt(c.ige.fit.fit_points)},
      {"ige.n_grid", cnt(c.ige.fit.n_grid)},
      {"ige.series_points", cnt(c.ige.fit.series_points)},
      {"ige.check_window_lo", num(c.ige.check_window_lo)},
      {"ige.check_window_hi", num(c.ige.check_window_hi)},
      {"ige.check_points", cnt(c.ige.check_points)},
      {"jacobi.window_lo", num(c.jacobi.fit.window_lo)},
      {"jacobi.window_hi", num(c.jacobi.fit.window_hi)},
      {"jacobi.samples", cnt(c.jacobi.fit.samples)},
      {"jacobi.J0_3d", lst(c.jacobi.J0_3d)},
      {"jacobi.dJ0_3d", lst(c.jacobi.dJ0_3d)},
      {"jacobi.J0_2d", lst(c.jacobi.J0_2d)},
      {"jacobi.dJ0_2d", lst(c.jacobi.dJ0_2d)},
      {"sweep.sigma0", lst(c.sweep.sigma0)},
      {"sweep.mu0", lst(c.sweep.mu0)},
      {"output.dir", [&](auto&, auto& v) { c.output.dir = detail::trimmed(v); }},
      {"output.format",
       [&](auto& k, auto& v) {
         const auto s = detail::trimmed(v);
         if (s == "csv") c.output.format = OutputFormat::csv;
         else if (s == "json") c.output.format = OutputFormat::json;
         else if (s == "both") c.output.format = OutputFormat::both;
         else throw ConfigError("config: '" + k + "' must be csv, json or both");
       }},
      {"output.jobs", cnt(c.output.jobs)},
  };
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = setters.find(full);
      if (it == setters.end()) throw ConfigError("config: unknown key '" + full + "'");
      it->second(full, value.data());
    }
  }
  if (!explicit_lambda_f && (c.model.tau_f || c.model.epsilon)) c.model.lambda_f.reset();
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text)
{
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace igsoft
