#pragma once

// Batch experiments. Each run_* returns a report (checks with measured values and
// tolerances) plus plot-ready tables; nothing here touches the file system.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "config.hpp"
#include "fisher.hpp"
#include "geodesic.hpp"
#include "geometry_engine.hpp"
#include "ige.hpp"
#include "jacobi.hpp"
#include "models.hpp"
#include "parallel.hpp"
#include "report.hpp"

namespace igsoft {

struct ExperimentResult
{
  RunReport report;
  std::vector<Table> tables;

  void merge(ExperimentResult&& o)
  {
    report.merge(o.report);
    for (auto& t : o.tables) tables.push_back(std::move(t));
  }
};

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Radical inverse of `index` in `base`.
inline double halton(std::size_t index, unsigned base)
{
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * double(index % base);
    index /= base;
  }
  return r;
}

/// Halton points (bases 2, 3, 5) in the box [lo, hi], starting at index 1.
template <std::size_t N>
std::vector<Vec<N>> halton_points(std::size_t count, const Vec<N>& lo, const Vec<N>& hi)
{
  static constexpr unsigned bases[] = {2, 3, 5};
  std::vector<Vec<N>> pts(count);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t k = 0; k < N; ++k) pts[i][k] = lo[k] + (hi[k] - lo[k]) * halton(i + 1, bases[k]);
  return pts;
}

template <std::size_t N>
double max_abs_diff(const Matrix<N>& a, const Matrix<N>& b)
{
  double w = 0.0;
  for (std::size_t i = 0; i < N * N; ++i) w = std::max(w, std::abs(a.a[i] - b.a[i]));
  return w;
}

template <std::size_t N>
double max_abs_diff(const ChristoffelSymbols<N>& a, const ChristoffelSymbols<N>& b)
{
  double w = 0.0;
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) w = std::max(w, std::abs(a(k, i, j) - b(k, i, j)));
  return w;
}

template <std::size_t N>
double max_abs_diff(const RiemannTensor<N>& a, const RiemannTensor<N>& b)
{
  double w = 0.0;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j)
      for (std::size_t k = 0; k < N; ++k)
        for (std::size_t l = 0; l < N; ++l) w = std::max(w, std::abs(a(i, j, k, l) - b(i, j, k, l)));
  return w;
}

template <std::size_t N>
double lower_index_asymmetry(const ChristoffelSymbols<N>& G)
{
  double w = 0.0;
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) w = std::max(w, std::abs(G(k, i, j) - G(k, j, i)));
  return w;
}

inline std::string short_number(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Largest value of a column, skipping NaN (uncomputed) entries.
template <class T, class F>
double column_max(const std::vector<T>& rows, F&& f)
{
  double w = 0.0;
  for (const auto& r : rows)
    if (const double v = f(r); !std::isnan(v)) w = std::max(w, v);
  return w;
}

template <std::size_t N>
struct PointStats
{
  Vec<N> theta{};
  double scalar_numeric = kNaN;
  double scalar_error = kNaN;
  double contraction_error = kNaN;
  double riemann_error = kNaN;
  double bianchi = kNaN;
  double antisymmetry = kNaN;
  double christoffel_error = kNaN;
  double christoffel_asymmetry = kNaN;
  double spd_failure = kNaN;
  double fisher_error = kNaN;
  double sigma_sq_gap = kNaN;
};

template <class Model>
void geometry_point(PointStats<Model::dim>& s)
{
  const auto& th = s.theta;
  const auto field = model_metric_field<Model>();
  const auto num = curvature_numeric(field, th);
  const double R = Model::scalar_curvature();
  s.scalar_numeric = num.scalar;
  s.scalar_error = std::abs(num.scalar - R);
  s.contraction_error = std::abs(contract_scalar(contract_ricci(Model::riemann(th)), inverse(Model::metric(th))) - R);
  s.riemann_error = max_abs_diff(num.riemann, Model::riemann(th));
  s.bianchi = first_bianchi_defect(num.riemann);
  s.antisymmetry = antisymmetry_defect(num.riemann);
  const auto G = christoffel_numeric(field, th);
  s.christoffel_error = max_abs_diff(G, Model::christoffel(th));
  s.christoffel_asymmetry = lower_index_asymmetry(G);
  const auto g = Model::metric(th);
  s.spd_failure = (is_symmetric(g) && is_positive_definite(g)) ? 0.0 : 1.0;
}

inline void fisher_point(PointStats<3>& s, const ExperimentConfig&)
{
  const auto est = fisher_numeric_3d(ParameterPoint3D(s.theta));
  s.fisher_error = est.converged ? max_abs_diff(est.metric, Gaussian3D::metric(s.theta))
                                 : std::numeric_limits<double>::infinity();
}

inline void fisher_point(PointStats<2>& s, const ExperimentConfig& cfg)
{
  const ParameterPoint2D p(s.theta);
  const auto a = fisher_numeric_2d(p, Model2DConfig(cfg.model.capital_sigma_sq));
  const auto b = fisher_numeric_2d(p, Model2DConfig(cfg.verify.alt_capital_sigma_sq));
  const auto g = Gaussian2D::metric(s.theta);
  s.fisher_error = std::max(max_abs_diff(a.metric, g), max_abs_diff(b.metric, g));
  if (!a.converged || !b.converged) s.fisher_error = std::numeric_limits<double>::infinity();
  s.sigma_sq_gap = max_abs_diff(a.metric, b.metric);
}

template <class Model>
void verify_model(const ExperimentConfig& cfg, const Vec<Model::dim>& lo, const Vec<Model::dim>& hi,
                  ExperimentResult& out)
{
  constexpr std::size_t N = Model::dim;
  const std::string tag = std::string("verify.") + Model::name + ".";
  const std::size_t nc = cfg.verify.curvature_points, nf = cfg.verify.fisher_points;
  const auto pts = halton_points<N>(std::max(nc, nf), lo, hi);
  const auto stats = parallel_map(pts.size(), cfg.output.jobs, [&](std::size_t i) {
    PointStats<N> s;
    s.theta = pts[i];
    if (i < nc) geometry_point<Model>(s);
    if (i < nf) fisher_point(s, cfg);
    return s;
  });
  auto& rep = out.report;
  const std::string over_c = "over " + std::to_string(nc) + " Halton points";
  const std::string over_f = "over " + std::to_string(nf) + " Halton points";
  rep.add(Check::relative(tag + "scalar_curvature_analytic", Model::scalar_curvature(), N == 3 ? -1.0 : -0.5, 0.0,
                          "exact"));
  rep.add(Check::at_most(tag + "scalar_curvature_contraction",
                         column_max(stats, [](auto& s) { return s.contraction_error; }), 1e-12,
                         "analytic Riemann contracted with g^-1, " + over_c));
  rep.add(Check::at_most(tag + "scalar_curvature_numeric", column_max(stats, [](auto& s) { return s.scalar_error; }),
                         1e-4, "finite-difference engine, " + over_c));
  rep.add(Check::at_most(tag + "metric_spd_failures", column_max(stats, [](auto& s) { return s.spd_failure; }), 0.0,
                         over_c));
  rep.add(Check::at_most(tag + "christoffel_lower_symmetry",
                         column_max(stats, [](auto& s) { return s.christoffel_asymmetry; }), 1e-12, over_c));
  rep.add(Check::at_most(tag + "christoffel_numeric_vs_analytic",
                         column_max(stats, [](auto& s) { return s.christoffel_error; }), 1e-6, over_c));
  rep.add(Check::at_most(tag + "riemann_antisymmetry", column_max(stats, [](auto& s) { return s.antisymmetry; }),
                         1e-6, over_c));
  rep.add(Check::at_most(tag + "riemann_first_bianchi", column_max(stats, [](auto& s) { return s.bianchi; }), 1e-6,
                         over_c));
  rep.add(Check::at_most(tag + "fisher_quadrature", column_max(stats, [](auto& s) { return s.fisher_error; }), 1e-8,
                         "max |g_numeric - g_analytic|, " + over_f));
  if constexpr (N == 2)
    rep.add(Check::at_most(tag + "fisher_capital_sigma_independence",
                           column_max(stats, [](auto& s) { return s.sigma_sq_gap; }), 1e-8,
                           "Sigma^2 = " + short_number(cfg.model.capital_sigma_sq) + " vs " +
                               short_number(cfg.verify.alt_capital_sigma_sq) + ", " + over_f));
  rep.value(tag + "riemann_numeric_max_error", column_max(stats, [](auto& s) { return s.riemann_error; }));

  Table t;
  t.artifact = std::string("verify_") + (N == 3 ? "3d" : "2d");
  if constexpr (N == 3)
    t.columns = {"index", "mu_x", "sigma_x", "sigma_y"};
  else
    t.columns = {"index", "mu_x", "sigma"};
  for (const char* c : {"scalar_numeric", "scalar_error", "bianchi", "antisymmetry", "christoffel_error",
                        "fisher_error"})
    t.columns.push_back(c);
  if constexpr (N == 2) t.columns.push_back("sigma_sq_gap");
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const auto& s = stats[i];
    std::vector<double> r{double(i)};
    r.insert(r.end(), s.theta.begin(), s.theta.end());
    for (double v : {s.scalar_numeric, s.scalar_error, s.bianchi, s.antisymmetry, s.christoffel_error,
                     s.fisher_error})
      r.push_back(v);
    if constexpr (N == 2) r.push_back(s.sigma_sq_gap);
    t.row(std::move(r));
  }
  out.tables.push_back(std::move(t));
}

template <class Model, class Spec>
void geodesic_model(const ExperimentConfig& cfg, const Spec& spec, ExperimentResult& out)
{
  constexpr std::size_t N = Model::dim;
  const std::string tag = std::string("geodesics.") + Model::name + ".";
  const double tau_max = cfg.solver.tau_max, tol = cfg.solver.tol;
  const auto grid = uniform_grid(0.0, tau_max, 201);
  const auto path = [&] {
    if constexpr (N == 3)
      return closed_form_path(spec, MeanPathForm::geodesic);
    else
      return closed_form_path(spec);
  }();
  const auto tr = integrate_geodesic_from<Model>(path(0.0), tau_max, tol, grid, true);
  auto& rep = out.report;
  if (tr.aborted) rep.abort(tag + "integration: " + tr.abort_reason);
  rep.add(Check::at_most(tag + "closed_form_deviation", max_deviation(tr, path), 100.0 * tol,
                         "sup-norm over tau in [0, " + short_number(tau_max) + "] at tol " + short_number(tol)));
  rep.add(Check::at_most(tag + "speed_drift", max_speed_drift<Model>(tr), 1e-6, "relative"));
  rep.add(Check::at_most(tag + "closed_form_residual", residual_check<Model>(path, grid).max_residual, 1e-6));
  if constexpr (N == 3)
    rep.value(tag + "reference_path_residual",
              residual_check<Model>(closed_form_path(spec, MeanPathForm::reference), grid).max_residual);
  rep.value(tag + "steps_accepted", double(tr.steps_accepted));
  rep.value(tag + "steps_rejected", double(tr.steps_rejected));

  Table t;
  t.artifact = std::string("geodesic_") + (N == 3 ? "3d" : "2d");
  if constexpr (N == 3)
    t.columns = {"tau", "mu_x", "sigma_x", "sigma_y", "mu_x_closed", "sigma_x_closed", "sigma_y_closed", "speed"};
  else
    t.columns = {"tau", "mu_x", "sigma", "mu_x_closed", "sigma_closed", "speed"};
  for (std::size_t j = 0; j < tr.size(); ++j) {
    const auto p = path(tr.tau[j]);
    std::vector<double> r{tr.tau[j]};
    r.insert(r.end(), tr.theta[j].begin(), tr.theta[j].end());
    r.insert(r.end(), p.theta.begin(), p.theta.end());
    r.push_back(fisher_speed<Model>(tr.theta[j], tr.velocity[j]));
    t.row(std::move(r));
  }
  out.tables.push_back(std::move(t));
}

inline Table ige_table(const IgeResult& r)
{
  Table t;
  t.artifact = std::string("ige_") + (r.model == "3D" ? "3d" : "2d");
  t.columns = {"tau", "vol", "avg_vol", "S", "S_closed_form"};
  for (std::size_t i = 0; i < r.tau.size(); ++i)
    t.row({r.tau[i], r.vol[i], r.avg_vol[i], r.entropy[i], r.entropy_closed_form[i]});
  return t;
}

/// Slope fit for one model; a failed fit becomes a failed check.
template <class Spec>
std::optional<IgeResult> ige_fit_checked(const Spec& spec, const IgeOptions& o, const std::string& tag,
                                         RunReport& rep)
{
  try {
    auto r = ige(spec, o);
    rep.add(Check::relative(tag + "slope", r.fit.slope, spec.rate(), 0.01,
                            "fit on sigma0 lambda tau in [" + short_number(o.window_lo) + ", " +
                                short_number(o.window_hi) + "], expected sigma0 lambda"));
    rep.value(tag + "fit_r_squared", r.fit.r_squared);
    if (r.clamped) rep.notes.push_back(tag + "volume clamped at the positivity floor");
    return r;
  } catch (const DomainError& e) {
    rep.add(Check::failed(tag + "slope", e.what()));
    return std::nullopt;
  }
}

template <class Model>
struct JacobiStructure
{
  double j1_plateau = kNaN;
  double j2_secular = kNaN;
  double j3_analytic = kNaN;
  double asymptotic_match = kNaN;
  JacobiConstants constants;
};

/// Checks the full integration against the asymptotic solution structure on [lo, hi].
template <class Model>
JacobiStructure<Model> jacobi_structure(const JacobiTrajectory<Model::dim>& tr, const JacobiState<Model::dim>& init,
                                        double Lambda, double lambda_f, double lo, double hi)
{
  constexpr std::size_t N = Model::dim;
  JacobiStructure<Model> s;
  std::vector<double> t, j2s;
  double j1_end = 0.0;
  for (std::size_t j = 0; j < tr.size(); ++j)
    if (tr.tau[j] >= lo && tr.tau[j] <= hi) j1_end = tr.J[j][0];
  s.j1_plateau = 0.0;
  std::array<double, 3> scale{};
  for (std::size_t j = 0; j < tr.size(); ++j) {
    if (tr.tau[j] < lo || tr.tau[j] > hi) continue;
    s.j1_plateau = std::max(s.j1_plateau, std::abs(tr.J[j][0] - j1_end) / std::abs(j1_end));
    t.push_back(tr.tau[j]);
    j2s.push_back(tr.J[j][1] * std::exp(Lambda * tr.tau[j]));
    for (std::size_t k = 0; k < N; ++k) scale[k] = std::max(scale[k], std::abs(tr.J[j][k]));
  }
  const LinearFit f = fit_line(t, j2s);
  double j2_scale = 0.0, j2_resid = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    j2_scale = std::max(j2_scale, std::abs(j2s[i]));
    j2_resid = std::max(j2_resid, std::abs(j2s[i] - (f.intercept + f.slope * t[i])));
  }
  s.j2_secular = j2_resid / j2_scale;
  if constexpr (N == 3) {
    const double a = init.J[2], b = init.dJ[2] + lambda_f * init.J[2];
    s.j3_analytic = 0.0;
    for (std::size_t j = 0; j < tr.size(); ++j) {
      const double tau = tr.tau[j];
      s.j3_analytic = std::max(s.j3_analytic, std::abs(tr.J[j][2] - (a + b * tau) * std::exp(-lambda_f * tau)));
    }
  }
  s.constants = extract_constants(tr, Lambda, lambda_f, lo, hi);
  s.asymptotic_match = 0.0;
  for (std::size_t j = 0; j < tr.size(); ++j) {
    if (tr.tau[j] < lo || tr.tau[j] > hi) continue;
    const auto a = asymptotic_jlc_solutions(s.constants, tr.tau[j]);
    for (std::size_t k = 0; k < N; ++k)
      if (scale[k] > 0.0)
        s.asymptotic_match = std::max(s.asymptotic_match, std::abs(tr.J[j][k] - a.J[k]) / scale[k]);
  }
  return s;
}

template <std::size_t N>
Table jacobi_table(const JacobiTrajectory<N>& tr)
{
  Table t;
  t.artifact = std::string("jacobi_") + (N == 3 ? "3d" : "2d");
  t.columns = {"tau", "J1", "J2"};
  if constexpr (N == 3) t.columns.push_back("J3");
  t.columns.push_back("intensity");
  t.columns.push_back("log_intensity");
  for (std::size_t j = 0; j < tr.size(); ++j) {
    std::vector<double> r{tr.tau[j]};
    r.insert(r.end(), tr.J[j].begin(), tr.J[j].end());
    r.push_back(tr.intensity[j]);
    r.push_back(std::log(tr.intensity[j]));
    t.row(std::move(r));
  }
  return t;
}

template <class Model, class Spec>
std::optional<ExponentFit> jacobi_model(const ExperimentConfig& cfg, const Spec& spec, ExperimentResult& out)
{
  constexpr std::size_t N = Model::dim;
  const std::string tag = std::string("jacobi.") + Model::name + ".";
  auto& rep = out.report;
  JacobiOptions o = cfg.jacobi.fit;
  o.tol = cfg.solver.tol;
  const auto init = cfg.jacobi_initial<N>();
  const double L = spec.rate(), lo = o.window_lo / L, hi = o.window_hi / L;
  const auto tr = integrate_jlc(spec, init, hi, o.tol, uniform_grid(0.0, hi, o.samples));
  if (tr.truncated) rep.abort(tag + "integration: " + tr.truncation_reason);
  out.tables.push_back(jacobi_table(tr));
  double lambda_f = 0.0;
  if constexpr (N == 3) lambda_f = spec.lambda_f();
  std::optional<ExponentFit> fit;
  try {
    fit = exponent_fit(tr, lo, hi);
    rep.add(Check::relative(tag + "exponent", fit->exponent, L, 0.02, "expected Lambda = sigma0 lambda"));
    rep.add(Check::at_least(tag + "tail_r_squared", fit->r_squared, 0.999));
  } catch (const std::exception& e) {
    rep.add(Check::failed(tag + "exponent", e.what()));
  }
  try {
    const auto s = jacobi_structure<Model>(tr, init, L, lambda_f, lo, hi);
    rep.add(Check::at_most(tag + "J1_plateau", s.j1_plateau, 1e-6, "relative variation of J1 on the fit window"));
    rep.add(Check::at_most(tag + "J2_secular_structure", s.j2_secular, 1e-6,
                           "J2 e^{Lambda tau} against a line, relative residual"));
    if constexpr (N == 3)
      rep.add(Check::at_most(tag + "J3_critically_damped", s.j3_analytic, 1e-8,
                             "|J3 - (C1 + C2 tau) e^{-lambda_f tau}| over the whole run"));
    rep.add(Check::at_most(tag + "asymptotic_match", s.asymptotic_match, 1e-6,
                           "fitted asymptotic solutions vs full integration, relative"));
    // C1_2 multiplies e^{-2 Lambda tau}, which is below rounding on the window; not reported.
    rep.value(tag + "C1_1", s.constants.C[0][0]);
    rep.value(tag + "C2_1", s.constants.C[1][0]);
    rep.value(tag + "C2_2", s.constants.C[1][1]);
    if constexpr (N == 3) {
      rep.value(tag + "C3_1", s.constants.C[2][0]);
      rep.value(tag + "C3_2", s.constants.C[2][1]);
    }
  } catch (const std::exception& e) {
    rep.add(Check::failed(tag + "asymptotic_structure", e.what()));
  }
  return fit;
}

}  // namespace detail

inline ExperimentResult run_verify(const ExperimentConfig& cfg)
{
  ExperimentResult out;
  out.report.command = "verify-geometry";
  if (cfg.has_3d()) detail::verify_model<Gaussian3D>(cfg, {-3.0, 0.5, 0.5}, {3.0, 3.0, 3.0}, out);
  if (cfg.has_2d()) detail::verify_model<Gaussian2D>(cfg, {-3.0, 0.5}, {3.0, 3.0}, out);
  return out;
}

inline ExperimentResult run_geodesics(const ExperimentConfig& cfg)
{
  ExperimentResult out;
  out.report.command = "geodesics";
  if (cfg.has_3d()) detail::geodesic_model<Gaussian3D>(cfg, cfg.spec3d(), out);
  if (cfg.has_2d()) detail::geodesic_model<Gaussian2D>(cfg, cfg.spec2d(), out);
  return out;
}

inline ExperimentResult run_ige(const ExperimentConfig& cfg)
{
  using detail::short_number;
  ExperimentResult out;
  auto& rep = out.report;
  rep.command = "ige";
  const IgeOptions& o = cfg.ige.fit;
  const double clo = cfg.ige.check_window_lo, chi = cfg.ige.check_window_hi;
  const std::string cw = "sigma0 lambda tau in [" + short_number(clo) + ", " + short_number(chi) + "], mu0 = 0";
  std::optional<IgeResult> r3, r2;
  if (cfg.has_3d()) {
    r3 = detail::ige_fit_checked(cfg.spec3d(), o, "ige.3D.", rep);
    const auto s = cfg.spec3d(0.0);
    auto closed = [&](double t) { return closed_form_volume_3d(s, t); };
    rep.add(Check::at_most(
        "ige.3D.closed_form_volume_gap",
        max_relative_volume_gap<3>(closed_form_path(s, MeanPathForm::reference), s.rate(), closed, clo, chi,
                                   cfg.ige.check_points, o.n_grid),
        0.05, "reference mean path, " + cw));
    rep.value("ige.3D.closed_form_volume_gap_geodesic_path",
              max_relative_volume_gap<3>(closed_form_path(s), s.rate(), closed, clo, chi, cfg.ige.check_points,
                                         o.n_grid));
    if (r3) out.tables.push_back(detail::ige_table(*r3));
  }
  if (cfg.has_2d()) {
    r2 = detail::ige_fit_checked(cfg.spec2d(), o, "ige.2D.", rep);
    const auto s = cfg.spec2d(0.0);
    rep.add(Check::at_most("ige.2D.closed_form_volume_gap",
                           max_relative_volume_gap<2>(closed_form_path(s), s.rate(),
                                                      [&](double t) { return closed_form_volume_2d(s, t); }, clo,
                                                      chi, cfg.ige.check_points, o.n_grid),
                           0.05, cw));
    if (r2) out.tables.push_back(detail::ige_table(*r2));
  }
  if (cfg.model.kind != ModelKind::coupled) return out;

  const double target = 1.0 / std::numbers::sqrt2;
  double base = detail::kNaN;
  if (r3 && r2) {
    base = r2->fit.slope / r3->fit.slope;
    rep.add(Check::relative("ige.ratio", base, target, 0.01, "slope(S_2D) / slope(S_3D), expected 1/sqrt(2)"));
  }
  struct Point
  {
    double sigma0, mu0;
  };
  std::vector<Point> pts;
  for (double s : cfg.sweep.sigma0)
    for (double m : cfg.sweep.mu0) pts.push_back({s, m});
  const auto rows = parallel_map(pts.size(), cfg.output.jobs, [&](std::size_t i) -> std::array<double, 3> {
    try {
      const auto r = softening_ratio_ige(cfg.spec3d(pts[i].mu0, pts[i].sigma0), o);
      return {r.ige3d.fit.slope, r.ige2d.fit.slope, r.ratio};
    } catch (const DomainError&) {
      return {detail::kNaN, detail::kNaN, detail::kNaN};
    }
  });
  Table t;
  t.artifact = "ige_sweep";
  t.columns = {"sigma0", "mu0", "slope_3d", "slope_2d", "ratio"};
  double spread = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string name = "ige.sweep.ratio[sigma0=" + short_number(pts[i].sigma0) +
                             ",mu0=" + short_number(pts[i].mu0) + "]";
    if (std::isnan(rows[i][2]))
      rep.add(Check::failed(name, "slope fit failed"));
    else
      rep.add(Check::relative(name, rows[i][2], target, 0.01));
    spread = std::max(spread, std::abs(rows[i][2] / base - 1.0));
    if (std::isnan(rows[i][2])) spread = std::numeric_limits<double>::infinity();
    t.row({pts[i].sigma0, pts[i].mu0, rows[i][0], rows[i][1], rows[i][2]});
  }
  if (!pts.empty() && !std::isnan(base))
    rep.add(Check::at_most("ige.sweep.ratio_invariance", spread, 0.01,
                           "max |ratio / ratio(config) - 1| over the sigma0 x mu0 sweep"));
  out.tables.push_back(std::move(t));
  return out;
}

inline ExperimentResult run_jacobi(const ExperimentConfig& cfg)
{
  ExperimentResult out;
  out.report.command = "jacobi";
  std::optional<ExponentFit> e3, e2;
  if (cfg.has_3d()) e3 = detail::jacobi_model<Gaussian3D>(cfg, cfg.spec3d(), out);
  if (cfg.has_2d()) e2 = detail::jacobi_model<Gaussian2D>(cfg, cfg.spec2d(), out);
  if (cfg.model.kind == ModelKind::coupled && e3 && e2) {
    const double gap = e3->exponent - e2->exponent, expected = CoupledLambdas(cfg.spec3d()).gap();
    out.report.add(Check::relative("jacobi.gap", gap, expected, 0.03, "expected sigma0 lambda_+' (1 - 1/sqrt(2))"));
    out.report.add(Check::at_least("jacobi.gap_positive", gap, std::numeric_limits<double>::min()));
  }
  return out;
}

/// Headline comparison over the sigma0 sweep (coupled pair only): IGE slope
/// ratio and Jacobi exponent gap, plus S and intensity series at the configured point.
inline ExperimentResult run_softening(const ExperimentConfig& cfg)
{
  using detail::short_number;
  if (cfg.model.kind != ModelKind::coupled) throw ConfigError("softening needs model.kind = coupled");
  ExperimentResult out;
  auto& rep = out.report;
  rep.command = "softening";
  JacobiOptions jo = cfg.jacobi.fit;
  jo.tol = cfg.solver.tol;
  const auto init3 = cfg.jacobi_initial<3>();
  const auto init2 = cfg.jacobi_initial<2>();
  const double target = 1.0 / std::numbers::sqrt2;

  struct Row
  {
    double slope3 = detail::kNaN, slope2 = detail::kNaN, ratio = detail::kNaN;
    double e3 = detail::kNaN, e2 = detail::kNaN, gap = detail::kNaN, expected = detail::kNaN;
    bool truncated = false;
  };
  const auto& sig = cfg.sweep.sigma0;
  const auto rows = parallel_map(sig.size(), cfg.output.jobs, [&](std::size_t i) {
    Row r;
    const auto s = cfg.spec3d(cfg.model.mu0, sig[i]);
    try {
      const auto ig = softening_ratio_ige(s, cfg.ige.fit);
      r.slope3 = ig.ige3d.fit.slope;
      r.slope2 = ig.ige2d.fit.slope;
      r.ratio = ig.ratio;
    } catch (const DomainError&) {
    }
    try {
      const auto jg = softening_gap(s, init3, init2, jo);
      r.truncated = jg.run3d.trajectory.truncated || jg.run2d.trajectory.truncated;
      r.e3 = jg.run3d.fit.exponent;
      r.e2 = jg.run2d.fit.exponent;
      r.gap = jg.gap;
      r.expected = jg.expected_gap;
    } catch (const DomainError&) {
    }
    return r;
  });

  Table t;
  t.artifact = "softening";
  t.columns = {"sigma0", "mu0", "ige_slope_3d", "ige_slope_2d", "ige_ratio",
               "jacobi_exponent_3d", "jacobi_exponent_2d", "jacobi_gap", "expected_gap"};
  for (std::size_t i = 0; i < sig.size(); ++i) {
    const auto& r = rows[i];
    const std::string at = "[sigma0=" + short_number(sig[i]) + "]";
    if (r.truncated) rep.abort("softening: Jacobi integration truncated at sigma0 = " + short_number(sig[i]));
    if (std::isnan(r.ratio))
      rep.add(Check::failed("softening.ige_ratio" + at, "slope fit failed"));
    else
      rep.add(Check::relative("softening.ige_ratio" + at, r.ratio, target, 0.01));
    if (std::isnan(r.gap)) {
      rep.add(Check::failed("softening.jacobi_gap" + at, "exponent fit failed"));
    } else {
      rep.add(Check::relative("softening.jacobi_gap" + at, r.gap, r.expected, 0.03));
      rep.add(Check::at_least("softening.jacobi_gap_positive" + at, r.gap, std::numeric_limits<double>::min()));
    }
    t.row({sig[i], cfg.model.mu0, r.slope3, r.slope2, r.ratio, r.e3, r.e2, r.gap, r.expected});
  }
  out.tables.push_back(std::move(t));

  // Series at the configured point on common tau grids (the 3D horizon bounds both).
  const auto s3 = cfg.spec3d();
  const auto s2 = GeodesicSpec2D::coupled_to(s3);
  {
    const auto p3 = closed_form_path(s3);
    const auto p2 = closed_form_path(s2);
    Table e;
    e.artifact = "softening_entropy";
    e.columns = {"tau", "S_3D", "S_2D"};
    const std::size_t n = cfg.ige.fit.series_points;
    const double hi = cfg.ige.fit.window_hi / s3.rate();
    for (std::size_t i = 1; i <= n; ++i) {
      const double tau = hi * double(i) / double(n);
      e.row({tau, std::log(averaged_volume(p3, tau, cfg.ige.fit.n_grid).value),
             std::log(averaged_volume(p2, tau, cfg.ige.fit.n_grid).value)});
    }
    out.tables.push_back(std::move(e));
  }
  {
    const double hi = jo.window_hi / s3.rate();
    const auto grid = uniform_grid(0.0, hi, jo.samples);
    const auto j3 = integrate_jlc(s3, init3, hi, jo.tol, grid);
    const auto j2 = integrate_jlc(s2, init2, hi, jo.tol, grid);
    if (j3.truncated || j2.truncated) rep.abort("softening: intensity series truncated");
    Table e;
    e.artifact = "softening_intensity";
    e.columns = {"tau", "intensity_3D", "intensity_2D", "log_intensity_3D", "log_intensity_2D"};
    for (std::size_t j = 0; j < std::min(j3.size(), j2.size()); ++j)
      e.row({j3.tau[j], j3.intensity[j], j2.intensity[j], std::log(j3.intensity[j]), std::log(j2.intensity[j])});
    out.tables.push_back(std::move(e));
  }
  if (!rows.empty()) {
    const auto it = std::find(sig.begin(), sig.end(), cfg.model.sigma0);
    const auto& r = rows[it == sig.end() ? 0 : std::size_t(it - sig.begin())];
    rep.value("softening.ige_ratio", r.ratio);
    rep.value("softening.ige_ratio_expected", target);
    rep.value("softening.jacobi_gap", r.gap);
    rep.value("softening.jacobi_gap_expected", r.expected);
  }
  return out;
}

/// Every experiment; softening only for a coupled pair.
inline ExperimentResult run_all(const ExperimentConfig& cfg)
{
  using Step = ExperimentResult (*)(const ExperimentConfig&);
  std::vector<Step> steps = {&run_verify, &run_geodesics, &run_ige, &run_jacobi};
  if (cfg.model.kind == ModelKind::coupled) steps.push_back(&run_softening);
  auto parts = parallel_map(steps.size(), cfg.output.jobs, [&](std::size_t i) { return steps[i](cfg); });
  ExperimentResult out;
  out.report.command = "all";
  for (auto& p : parts) out.merge(std::move(p));
  if (cfg.model.kind != ModelKind::coupled) out.report.notes.push_back("softening skipped: model.kind is not coupled");
  return out;
}

}  // namespace igsoft
