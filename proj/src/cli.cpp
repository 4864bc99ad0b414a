#include "ppreg/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>

#include "ppreg/error.hpp"
#include "ppreg/io.hpp"
#include "ppreg/model.hpp"
#include "ppreg/quadrature.hpp"
#include "ppreg/selection.hpp"
#include "ppreg/simulate.hpp"
#include "ppreg/solver.hpp"
#include "ppreg/study.hpp"

namespace ppreg {

namespace {

using Json = nlohmann::ordered_json;

constexpr int kFormatVersion = 1;

struct ModelArgs {
  std::string window;
  std::vector<std::string> covariates;
  std::vector<std::string> exprs;
  bool no_intercept = false;
  std::string interaction = "none";
};

void add_model_options(CLI::App& app, ModelArgs& a) {
  app.add_option("--window", a.window, "xmin,xmax,ymin,ymax")->required();
  app.add_option("--covariate", a.covariates, "name=path of a raster CSV (repeatable)");
  app.add_option("--covariate-expr", a.exprs, "name=x|y|const|prod:a,b (repeatable)");
  app.add_flag("--no-intercept", a.no_intercept, "omit the intercept column");
  app.add_option("--interaction", a.interaction, "none|strauss:R");
}

Window parse_window(const std::string& text) {
  const auto v = parse_real_list(text);
  if (v.size() != 4) throw Error(ErrorCode::Format, "--window needs xmin,xmax,ymin,ymax");
  return Window(v[0], v[1], v[2], v[3]);
}

InteractionSpec parse_interaction(const std::string& text) {
  if (text == "none") return InteractionSpec::none();
  if (text.rfind("strauss:", 0) == 0) return InteractionSpec::strauss(parse_real(text.substr(8)));
  throw Error(ErrorCode::Format, "--interaction must be none or strauss:R, got '" + text + "'");
}

std::pair<std::string, std::string> split_assignment(const std::string& text, const char* flag) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::Format, std::string(flag) + " expects name=value, got '" + text + "'");
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

std::vector<CovariateField> build_covariates(const ModelArgs& a) {
  std::vector<CovariateField> covs;
  std::map<std::string, std::size_t> by_name;
  const auto add = [&](CovariateField f) {
    if (!by_name.emplace(f.name(), covs.size()).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate covariate name '" + f.name() + "'");
    }
    covs.push_back(std::move(f));
  };
  if (!a.no_intercept) add(CovariateField::constant());
  for (const auto& spec : a.covariates) {
    const auto [name, path] = split_assignment(spec, "--covariate");
    add(CovariateField::raster(name, read_raster_file(path)));
  }
  for (const auto& spec : a.exprs) {
    const auto [name, expr] = split_assignment(spec, "--covariate-expr");
    if (expr == "x") {
      add(CovariateField::coord_x(name));
    } else if (expr == "y") {
      add(CovariateField::coord_y(name));
    } else if (expr == "const") {
      add(CovariateField::constant(name));
    } else if (expr.rfind("prod:", 0) == 0) {
      const auto args = expr.substr(5);
      const auto comma = args.find(',');
      if (comma == std::string::npos) throw Error(ErrorCode::Format, "prod needs two names: " + expr);
      const auto lookup = [&](const std::string& n) -> const CovariateField& {
        const auto it = by_name.find(n);
        if (it == by_name.end()) throw Error(ErrorCode::InvalidArgument, "unknown covariate '" + n + "'");
        return covs[it->second];
      };
      CovariateField f = CovariateField::product(name, lookup(args.substr(0, comma)),
                                                 lookup(args.substr(comma + 1)));
      add(std::move(f));
    } else {
      throw Error(ErrorCode::Format, "unknown covariate expression '" + expr + "'");
    }
  }
  if (covs.empty()) throw Error(ErrorCode::InvalidArgument, "the model has no covariates");
  return covs;
}

ModelSpec build_model(const ModelArgs& a) {
  return ModelSpec(parse_window(a.window), build_covariates(a), parse_interaction(a.interaction));
}

DummyGrid parse_dummy(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw Error(ErrorCode::Format, "--dummy expects NXxNY, got '" + text + "'");
  const double nx = parse_real(text.substr(0, x));
  const double ny = parse_real(text.substr(x + 1));
  if (nx < 1 || ny < 1 || nx != std::floor(nx) || ny != std::floor(ny) || nx > 1e5 || ny > 1e5) {
    throw Error(ErrorCode::Format, "--dummy sizes must be positive integers");
  }
  return {static_cast<int>(nx), static_cast<int>(ny)};
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  return out;
}

double weight_sum_error(const QuadratureScheme& s) {
  return std::abs(s.weights.sum() - s.domain.area()) / s.domain.area();
}

void check_weight_sum(const QuadratureScheme& s) {
  if (weight_sum_error(s) > 1e-10) {
    throw Error(ErrorCode::InvalidArgument, "quadrature weights do not sum to the domain area");
  }
}

Json window_json(const Window& w) { return Json::array({w.xmin(), w.xmax(), w.ymin(), w.ymax()}); }

// Unpenalized fit laid out as a one-point path at tau = 0.
PathFit unpenalized_path(const QuadratureScheme& s) {
  PathFit path;
  path.names = s.column_names;
  path.mu_hat = normalization(s);
  path.domain_area = s.domain.area();
  path.n_points = s.n_data;
  const Eigen::VectorXd theta = fit_unpenalized(s);
  path.taus = {0.0};
  path.coefficients = theta.transpose();
  path.loglik = {approx_loglik(s, theta)};
  path.active = {0};
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if (s.intercept_column != j && theta(j) != 0.0) ++path.active[0];
  }
  path.kkt = {loglik_gradient(s, theta).cwiseAbs().maxCoeff() / path.mu_hat};
  path.converged = {true};
  path.failures = {""};
  return path;
}

// ---- fit ----------------------------------------------------------------

struct FitArgs {
  ModelArgs model;
  std::string points;
  std::string penalty = "adaptive";
  double gamma = 1.0;
  int n_tau = 100;
  double tau_min_ratio = 1e-4;
  std::string dummy = "32x32";
  std::string criterion = "cbic";
  std::string dof = "count";
  std::string score_variance;
  std::string out;
  std::string dump_quad;
  std::uint64_t seed = 0;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const ModelSpec model = build_model(a.model);
  const PointPattern x = read_points_file(a.points, model.window());
  const QuadratureScheme s = build_scheme(x, model, parse_dummy(a.dummy));
  check_weight_sum(s);
  const std::size_t n_dummy = s.size() - s.n_data;
  if (n_dummy < 4 * s.n_data) {
    err << "warning: " << n_dummy << " dummy points for " << s.n_data
        << " data points; use at least 4 dummy points per data point\n";
  }
  if (!a.dump_quad.empty()) {
    auto f = open_output(a.dump_quad);
    write_scheme_csv(f, s);
  }

  if (a.criterion != "cbic" && a.criterion != "ceric") {
    throw Error(ErrorCode::Format, "--criterion must be cbic or ceric");
  }
  const Criterion criterion = a.criterion == "cbic" ? Criterion::Cbic : Criterion::Ceric;
  DofMode dof_mode = DofMode::Count;
  Eigen::MatrixXd v;
  if (a.dof == "sandwich") {
    if (a.score_variance.empty()) throw Error(ErrorCode::InvalidArgument, "--dof sandwich needs --score-variance");
    dof_mode = DofMode::Sandwich;
    v = read_matrix_file(a.score_variance);
  } else if (a.dof != "count") {
    throw Error(ErrorCode::Format, "--dof must be count or sandwich");
  }

  const auto& mask = model.penalty_mask();
  PenaltyPlan plan = lasso_plan(mask);
  std::optional<PilotFit> pilot;
  std::string penalty = a.penalty;
  if (penalty == "adaptive") {
    if (plan.has_penalized()) {
      pilot = fit_pilot(s);
      plan = adaptive_plan(pilot->coefficients, mask, a.gamma);
    }
  } else if (penalty != "lasso" && penalty != "none") {
    throw Error(ErrorCode::Format, "--penalty must be none, lasso or adaptive");
  }
  const bool penalized = penalty != "none" && plan.has_penalized();
  if (!penalized) plan = lasso_plan(std::vector<bool>(mask.size(), false));

  const PathFit path = penalized ? fit_path(s, plan, a.n_tau, a.tau_min_ratio) : unpenalized_path(s);
  const CriterionTable table =
      criterion_table(path, dof_mode, &s, dof_mode == DofMode::Sandwich ? &v : nullptr);
  Selection sel;
  if (penalized) {
    sel = select(path, table, criterion);
  } else {
    sel.index = 0;
    sel.tau = 0.0;
    sel.coefficients = path.coefficients.row(0).transpose();
    sel.value = table.records[0].cbic;
  }

  Json doc;
  doc["format_version"] = kFormatVersion;
  doc["window"] = window_json(model.window());
  doc["domain"] = window_json(s.domain);
  if (model.interaction().is_strauss()) {
    doc["interaction"] = {{"kind", "strauss"}, {"range", model.interaction().range}};
  } else {
    doc["interaction"] = {{"kind", "none"}};
  }
  doc["penalty"] = penalized ? penalty : "none";
  doc["gamma"] = a.gamma;
  doc["criterion"] = penalized ? a.criterion : "none";
  doc["dof"] = a.dof;
  doc["n_points"] = s.n_data;
  doc["n_dummy"] = n_dummy;

  const auto names = model.coefficient_names();
  Json coefs = Json::object();
  Json beta = Json::array();
  for (std::size_t j = 0; j < names.size(); ++j) {
    const double value = sel.coefficients(static_cast<Eigen::Index>(j));
    coefs[names[j]] = value;
    if (j < model.num_covariates()) beta.push_back(value);
  }
  Json selected;
  selected["index"] = sel.index;
  selected["tau"] = sel.tau;
  selected["criterion_value"] = sel.value;
  selected["coefficients"] = coefs;
  selected["beta"] = beta;
  selected["psi"] = model.interaction().is_strauss()
                        ? Json(sel.coefficients(static_cast<Eigen::Index>(model.num_covariates())))
                        : Json(nullptr);
  Json support = Json::array();
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (mask[j] && sel.coefficients(static_cast<Eigen::Index>(j)) != 0.0) support.push_back(names[j]);
  }
  selected["penalized_support"] = support;
  doc["selected"] = selected;

  Json criteria = Json::array();
  for (const auto& r : table.records) {
    criteria.push_back({{"tau", r.tau},
                        {"loglik", r.loglik},
                        {"dof", r.dof},
                        {"cbic", r.cbic},
                        {"ceric", r.ceric ? Json(*r.ceric) : Json(nullptr)},
                        {"converged", r.converged}});
  }
  doc["criteria"] = criteria;

  // Realised per-coefficient tuning levels tau * v_j at the selected tau.
  Json tau_j = Json::object();
  std::optional<double> a_n, b_n;
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (!mask[j]) continue;
    const double t = sel.tau * plan.multipliers(static_cast<Eigen::Index>(j));
    tau_j[names[j]] = t;
    if (sel.coefficients(static_cast<Eigen::Index>(j)) != 0.0) {
      a_n = a_n ? std::max(*a_n, t) : t;
    } else {
      b_n = b_n ? std::min(*b_n, t) : t;
    }
  }
  double kkt_max = 0.0;
  std::size_t unconverged = 0;
  Json failures = Json::array();
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (path.converged[k]) {
      kkt_max = std::max(kkt_max, path.kkt[k]);
    } else {
      ++unconverged;
    }
    if (!path.failures[k].empty()) failures.push_back({{"tau", path.taus[k]}, {"error", path.failures[k]}});
  }
  Json diag;
  diag["tau_max"] = path.tau_max;
  diag["mu_hat"] = path.mu_hat;
  diag["tau_j"] = tau_j;
  diag["a_n"] = a_n ? Json(*a_n) : Json(nullptr);
  diag["b_n"] = b_n ? Json(*b_n) : Json(nullptr);
  diag["kkt_selected"] = path.kkt[sel.index];
  diag["kkt_max_converged"] = kkt_max;
  diag["unconverged_points"] = unconverged;
  diag["failures"] = failures;
  diag["weight_sum"] = s.weights.sum();
  diag["domain_area"] = s.domain.area();
  diag["weight_sum_relative_error"] = weight_sum_error(s);
  diag["dof_monotone"] = table.dof_monotone;
  if (pilot) {
    Json p = Json::array();
    for (Eigen::Index j = 0; j < pilot->coefficients.size(); ++j) p.push_back(pilot->coefficients(j));
    diag["pilot"] = {{"coefficients", p}, {"ridge", pilot->ridge}, {"ridge_value", pilot->ridge_value}};
  }
  doc["diagnostics"] = diag;

  const std::string text = doc.dump(2) + "\n";
  if (a.out.empty()) {
    out << text;
    return 0;
  }
  const std::filesystem::path dir(a.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + a.out + "': " + ec.message());
  open_output(dir / "result.json") << text;
  {
    auto f = open_output(dir / "path.csv");
    write_path_csv(f, path);
  }
  auto f = open_output(dir / "criteria.csv");
  write_criteria_csv(f, table);
  return 0;
}

// ---- simulate / check ---------------------------------------------------

struct SimArgs {
  ModelArgs model;
  std::string kind = "poisson";
  std::string beta;
  double psi = 0.0;
  std::uint64_t seed = 0;
  std::size_t burn_in = 100000;
  std::size_t sweeps = 10000;
  std::string out;
};

ModelSpec model_with_coefficients(const ModelArgs& m, const std::string& beta, double psi) {
  const ModelSpec base = build_model(m);
  if (beta.empty()) throw Error(ErrorCode::InvalidArgument, "--beta is required");
  const auto values = parse_real_list(beta);
  return base.with_coefficients(Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                                  static_cast<Eigen::Index>(values.size())),
                                psi);
}

int cmd_simulate(const SimArgs& a, std::ostream& out) {
  const ModelSpec model = model_with_coefficients(a.model, a.beta, a.psi);
  PointPattern x(model.window());
  if (a.kind == "poisson") {
    if (model.interaction().is_strauss()) {
      throw Error(ErrorCode::InvalidArgument, "--model poisson takes --interaction none");
    }
    x = sample_poisson(SimConfig{model, a.seed, 0, a.burn_in, a.sweeps});
  } else if (a.kind == "strauss") {
    if (!model.interaction().is_strauss()) {
      throw Error(ErrorCode::InvalidArgument, "--model strauss needs --interaction strauss:R");
    }
    x = sample_strauss(SimConfig{model, a.seed, 0, a.burn_in, a.sweeps});
  } else {
    throw Error(ErrorCode::Format, "--model must be poisson or strauss");
  }
  if (a.out.empty()) {
    write_points_csv(out, x);
  } else {
    auto f = open_output(a.out);
    write_points_csv(f, x);
  }
  return 0;
}

struct CheckArgs {
  ModelArgs model;
  std::string kind;
  std::string beta;
  double psi = 0.0;
  std::vector<std::string> h;
  std::size_t replicates = 2000;
  std::uint64_t seed = 1;
  int grid = 512;
  std::size_t burn_in = 100000;
  std::size_t sweeps = 10000;
  unsigned threads = 0;
  std::string out;
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  const ModelSpec model = model_with_coefficients(a.model, a.beta, a.psi);
  const CheckOptions opt{a.replicates, a.seed, a.grid, a.burn_in, a.sweeps, a.threads};
  std::vector<std::pair<std::string, CheckResult>> results;
  if (a.kind == "campbell") {
    const auto hs = a.h.empty() ? std::vector<std::string>{"1", "x"} : a.h;
    for (const auto& name : hs) {
      TestFunction h;
      if (name == "1") {
        h = [](Point) { return 1.0; };
      } else if (name == "x") {
        h = [](Point u) { return u.x; };
      } else if (name == "y") {
        h = [](Point u) { return u.y; };
      } else {
        throw Error(ErrorCode::Format, "campbell --h must be 1, x or y");
      }
      results.emplace_back(name, campbell_check(model, h, opt));
    }
  } else if (a.kind == "gnz") {
    const auto hs = a.h.empty() ? std::vector<std::string>{"1", "s1"} : a.h;
    for (const auto& name : hs) {
      ConditionalTestFunction h;
      if (name == "1") {
        h = gnz_unit();
      } else if (name == "s1") {
        if (!model.interaction().is_strauss()) {
          throw Error(ErrorCode::InvalidArgument, "h = s1 needs --interaction strauss:R");
        }
        h = gnz_strauss_statistic(model.interaction().range);
      } else {
        throw Error(ErrorCode::Format, "gnz --h must be 1 or s1");
      }
      results.emplace_back(name, gnz_check(model, h, opt));
    }
  } else {
    throw Error(ErrorCode::Format, "check kind must be campbell or gnz");
  }
  const auto write = [&](std::ostream& o) {
    o << "check,h,lhs,rhs,z,replicates,pass\n";
    for (const auto& [name, r] : results) {
      o << a.kind << ',' << name << ',' << format_real(r.lhs) << ',' << format_real(r.rhs) << ','
        << format_real(r.z) << ',' << r.replicates << ',' << (r.passed() ? "PASS" : "FAIL") << '\n';
    }
  };
  if (a.out.empty()) {
    write(out);
  } else {
    auto f = open_output(a.out);
    write(f);
  }
  return 0;
}

// ---- study / dump-quad --------------------------------------------------

struct StudyArgs {
  std::string config;
  std::string out;
  std::optional<unsigned> threads;
};

int cmd_study(const StudyArgs& a, std::ostream& out) {
  StudyConfig config = read_study_config(a.config);
  if (a.threads) config.threads = *a.threads;
  const StudyReport report = run_study(config);
  write_study_summary_csv(out, report);
  if (!a.out.empty()) {
    const std::filesystem::path dir(a.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create '" + a.out + "': " + ec.message());
    {
      auto f = open_output(dir / "study_summary.csv");
      write_study_summary_csv(f, report);
    }
    auto f = open_output(dir / "study_replicates.csv");
    write_study_replicates_csv(f, report);
  }
  return 0;
}

struct DumpArgs {
  ModelArgs model;
  std::string points;
  std::string dummy = "32x32";
  std::string out;
};

int cmd_dump_quad(const DumpArgs& a, std::ostream& out) {
  const ModelSpec model = build_model(a.model);
  const PointPattern x = a.points.empty() ? PointPattern(model.window())
                                          : read_points_file(a.points, model.window());
  const QuadratureScheme s = build_scheme(x, model, parse_dummy(a.dummy));
  check_weight_sum(s);
  if (a.out.empty()) {
    write_scheme_csv(out, s);
  } else {
    auto f = open_output(a.out);
    write_scheme_csv(f, s);
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Penalized intensity estimation for spatial point processes", "ppreg"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a regularization path and select tau");
  add_model_options(*fit_cmd, fit.model);
  fit_cmd->add_option("--points", fit.points, "points CSV")->required();
  fit_cmd->add_option("--penalty", fit.penalty, "none|lasso|adaptive");
  fit_cmd->add_option("--gamma", fit.gamma, "adaptive weight exponent");
  fit_cmd->add_option("--ntau", fit.n_tau, "number of positive tau values");
  fit_cmd->add_option("--tau-min-ratio", fit.tau_min_ratio, "smallest tau as a fraction of tau_max");
  fit_cmd->add_option("--dummy", fit.dummy, "dummy grid NXxNY");
  fit_cmd->add_option("--criterion", fit.criterion, "cbic|ceric");
  fit_cmd->add_option("--dof", fit.dof, "count|sandwich");
  fit_cmd->add_option("--score-variance", fit.score_variance, "q x q matrix CSV for sandwich dof");
  fit_cmd->add_option("--seed", fit.seed, "ignored; fitting is deterministic");
  fit_cmd->add_option("--out", fit.out, "output directory (result.json, path.csv, criteria.csv)");
  fit_cmd->add_option("--dump-quad", fit.dump_quad, "also write the quadrature scheme CSV here");

  SimArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate a Poisson or Strauss pattern");
  add_model_options(*sim_cmd, sim.model);
  sim_cmd->add_option("--model", sim.kind, "poisson|strauss");
  sim_cmd->add_option("--beta", sim.beta, "trend coefficients, one per covariate")->required();
  sim_cmd->add_option("--psi", sim.psi, "interaction coefficient");
  sim_cmd->add_option("--seed", sim.seed, "random seed");
  sim_cmd->add_option("--burn-in", sim.burn_in, "birth-death steps before output");
  sim_cmd->add_option("--sweeps", sim.sweeps, "further birth-death steps");
  sim_cmd->add_option("--out", sim.out, "output points CSV (default stdout)");

  CheckArgs chk;
  auto* chk_cmd = app.add_subcommand("check", "Monte-Carlo Campbell or GNZ identity check");
  chk_cmd->set_help_flag("--help", "print this help message and exit");
  chk_cmd->add_option("kind", chk.kind, "campbell|gnz")->required();
  add_model_options(*chk_cmd, chk.model);
  chk_cmd->add_option("--beta", chk.beta, "trend coefficients, one per covariate")->required();
  chk_cmd->add_option("--psi", chk.psi, "interaction coefficient");
  chk_cmd->add_option("--h", chk.h, "test function (campbell: 1|x|y, gnz: 1|s1; repeatable)");
  chk_cmd->add_option("--replicates", chk.replicates, "Monte-Carlo replicates");
  chk_cmd->add_option("--seed", chk.seed, "random seed");
  chk_cmd->add_option("--grid", chk.grid, "grid resolution of the integral side");
  chk_cmd->add_option("--burn-in", chk.burn_in, "birth-death steps before output");
  chk_cmd->add_option("--sweeps", chk.sweeps, "further birth-death steps");
  chk_cmd->add_option("--threads", chk.threads, "worker threads (0 = all cores)");
  chk_cmd->add_option("--out", chk.out, "output CSV (default stdout)");

  StudyArgs study;
  auto* study_cmd = app.add_subcommand("study", "replicated simulation study");
  study_cmd->add_option("--config", study.config, "study config file")->required();
  study_cmd->add_option("--out", study.out, "output directory for summary and replicate CSVs");
  study_cmd->add_option("--threads", study.threads, "worker threads (0 = all cores)");

  DumpArgs dump;
  auto* dump_cmd = app.add_subcommand("dump-quad", "write the quadrature scheme CSV");
  add_model_options(*dump_cmd, dump.model);
  dump_cmd->add_option("--points", dump.points, "points CSV (default: empty pattern)");
  dump_cmd->add_option("--dummy", dump.dummy, "dummy grid NXxNY");
  dump_cmd->add_option("--out", dump.out, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << error_token(ErrorCode::Format) << ": " << e.what() << '\n';
    return 2;
  }

  try {
    if (*fit_cmd) return cmd_fit(fit, out, err);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*chk_cmd) return cmd_check(chk, out);
    if (*study_cmd) return cmd_study(study, out);
    if (*dump_cmd) return cmd_dump_quad(dump, out);
  } catch (const Error& e) {
    err << "error: " << error_token(e.code()) << ": " << e.what() << '\n';
    return e.is_io() ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: E_INTERNAL: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace ppreg
