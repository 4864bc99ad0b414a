#include "ppreg/study.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <limits>
#include <set>
#include <sstream>

#include "ppreg/error.hpp"
#include "ppreg/io.hpp"
#include "ppreg/parallel.hpp"
#include "ppreg/quadrature.hpp"
#include "ppreg/simulate.hpp"
#include "ppreg/solver.hpp"

namespace ppreg {

namespace {

namespace pt = boost::property_tree;

// Streams for covariate generation live far above replicate streams.
constexpr std::uint64_t kFieldStreamBase = std::uint64_t{1} << 40;
constexpr std::uint64_t kRungStride = std::uint64_t{1} << 20;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"study",
       {"seed", "replicates", "ladder", "criterion", "gamma", "ntau", "tau_min_ratio",
        "dummy_per_unit", "alphas", "compare_lasso", "threads", "burn_in", "sweeps"}},
      {"model", {"active", "noise", "target_density", "intercept", "interaction", "psi"}},
      {"covariates", {"raster_per_unit", "waves", "files"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

double as_real(const std::string& key, const std::string& text) {
  try {
    return parse_real(text);
  } catch (const Error&) {
    throw Error(ErrorCode::Format, "config key '" + key + "' is not a number: '" + text + "'");
  }
}

std::uint64_t as_count(const std::string& key, const std::string& text) {
  const double v = as_real(key, text);
  if (v < 0 || v != std::floor(v) || v > 9.007199254740992e15) {
    throw Error(ErrorCode::Format, "config key '" + key + "' must be a non-negative integer");
  }
  return static_cast<std::uint64_t>(v);
}

bool as_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw Error(ErrorCode::Format, "config key '" + key + "' must be true or false");
}

std::vector<double> as_list(const std::string& key, const std::string& text) {
  try {
    return parse_real_list(text);
  } catch (const Error&) {
    throw Error(ErrorCode::Format, "config key '" + key + "' is not a number list: '" + text + "'");
  }
}

InteractionSpec parse_interaction_text(const std::string& text) {
  if (text == "none") return InteractionSpec::none();
  if (text.rfind("strauss:", 0) == 0) return InteractionSpec::strauss(parse_real(text.substr(8)));
  throw Error(ErrorCode::Format, "interaction must be 'none' or 'strauss:R', got '" + text + "'");
}

void validate(const StudyConfig& c) {
  if (c.replicates == 0) throw Error(ErrorCode::InvalidArgument, "replicates must be positive");
  if (c.ladder.empty()) throw Error(ErrorCode::InvalidArgument, "ladder is empty");
  for (std::size_t i = 0; i < c.ladder.size(); ++i) {
    if (!(c.ladder[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "ladder sides must be positive");
    if (i > 0 && !(c.ladder[i] > c.ladder[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "ladder must be strictly increasing");
    }
  }
  if (c.num_covariates() == 0) throw Error(ErrorCode::InvalidArgument, "the model has no covariates");
  if (!c.raster_files.empty() && c.raster_files.size() != c.num_covariates()) {
    throw Error(ErrorCode::InvalidArgument, "covariate files must match active + noise covariates");
  }
  if (c.n_tau < 2) throw Error(ErrorCode::InvalidArgument, "ntau must be at least 2");
  if (!(c.tau_min_ratio > 0.0 && c.tau_min_ratio < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "tau_min_ratio must be in (0, 1)");
  }
  if (!(c.gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  if (c.dummy_per_unit < 1 || c.raster_per_unit < 1 || c.waves < 1) {
    throw Error(ErrorCode::InvalidArgument, "grid densities and waves must be positive");
  }
  if (!(c.target_density > 0.0)) throw Error(ErrorCode::InvalidArgument, "target_density must be positive");
  if (c.interaction.is_strauss() && c.psi > 0.0) {
    throw Error(ErrorCode::UnstableModel, "the study model needs psi <= 0");
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::size_t cells_for(double side, int per_unit) {
  return static_cast<std::size_t>(std::max(1.0, std::round(side * per_unit)));
}

// Sum over a midpoint lattice of cell_area * exp(beta' z), with the
// intercept term left out. Exact for rasters whose cells the lattice nests in.
double trend_mass(const ModelSpec& m, const Eigen::VectorXd& beta, std::size_t n) {
  const Window& w = m.window();
  const double dx = w.width() / static_cast<double>(n), dy = w.height() / static_cast<double>(n);
  std::vector<double> terms;
  terms.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const Point u{w.xmin() + (static_cast<double>(j) + 0.5) * dx,
                    w.ymin() + (static_cast<double>(i) + 0.5) * dy};
      terms.push_back(dx * dy * std::exp(covariate_vector(m, u).dot(beta)));
    }
  }
  return compensated_sum(terms);
}

struct Rung {
  double side = 0.0;
  ModelSpec model;
  Eigen::VectorXd truth;  // (beta, psi) as fitted
  DummyGrid grid;
};

// Shortest text that reads back as `a`, so 0.6 stays "0.6" in labels.
std::string alpha_label(double a) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, a);
  return "adaptive_alpha=" + std::string(buf, res.ptr);
}

std::vector<std::string> method_names(const StudyConfig& c) {
  std::vector<std::string> names{"adaptive"};
  if (c.compare_lasso) names.push_back("lasso");
  for (double a : c.alphas) names.push_back(alpha_label(a));
  return names;
}

void score(MethodOutcome& out, const Eigen::VectorXd& truth, const std::vector<bool>& mask,
           const PenaltyPlan& plan, double tau) {
  out.ok = true;
  out.tau = tau;
  out.l2_error = (out.coefficients - truth).norm();
  std::size_t active = 0, kept = 0, inactive = 0, false_pos = 0;
  bool exact = true;
  for (Eigen::Index j = 0; j < truth.size(); ++j) {
    if (!mask[static_cast<std::size_t>(j)]) continue;
    const bool on = out.coefficients(j) != 0.0;
    const double tau_j = tau * plan.multipliers(j);
    if (truth(j) != 0.0) {
      ++active;
      if (on) ++kept;
      out.a_n = out.a_n ? std::max(*out.a_n, tau_j) : tau_j;
    } else {
      ++inactive;
      if (on) ++false_pos;
      out.b_n = out.b_n ? std::min(*out.b_n, tau_j) : tau_j;
    }
    if (on != (truth(j) != 0.0)) exact = false;
  }
  out.tpr = active ? static_cast<double>(kept) / static_cast<double>(active) : 1.0;
  if (inactive) out.fpr = static_cast<double>(false_pos) / static_cast<double>(inactive);
  out.exact_support = exact;
}

MethodOutcome run_selected(const QuadratureScheme& s, const PenaltyPlan& plan, const StudyConfig& c,
                           const Eigen::VectorXd& truth, const std::vector<bool>& mask) {
  MethodOutcome out;
  try {
    const PathFit path = fit_path(s, plan, c.n_tau, c.tau_min_ratio);
    const Selection sel = select(path, c.criterion);
    out.coefficients = sel.coefficients;
    score(out, truth, mask, plan, sel.tau);
  } catch (const Error& e) {
    out.failure = error_token(e.code());
  }
  return out;
}

MethodOutcome run_fixed(const QuadratureScheme& s, const PenaltyPlan& plan, double tau,
                        const Eigen::VectorXd& start, const Eigen::VectorXd& truth,
                        const std::vector<bool>& mask) {
  MethodOutcome out;
  try {
    const TauFit fit = fit_at_tau(s, plan, tau, start);
    if (!fit.converged) {
      out.failure = "not_converged";
      return out;
    }
    out.coefficients = fit.coefficients;
    score(out, truth, mask, plan, tau);
  } catch (const Error& e) {
    out.failure = error_token(e.code());
  }
  return out;
}

ReplicateOutcome run_replicate(const StudyConfig& c, const Rung& rung, std::size_t rung_index,
                               std::size_t rep, std::size_t n_methods) {
  ReplicateOutcome out;
  out.rung = rung_index;
  out.replicate = rep;
  out.methods.resize(n_methods);
  const std::uint64_t stream = rung_index * kRungStride + rep;
  try {
    PointPattern x(rung.model.window());
    if (rung.model.interaction().is_strauss()) {
      x = sample_strauss(SimConfig{rung.model, c.seed, stream, c.burn_in, c.sweeps});
    } else {
      Rng rng = make_rng(c.seed, stream);
      x = sample_poisson(rung.model, rng);
    }
    const QuadratureScheme s = build_scheme(x, rung.model, rung.grid);
    out.n_points = s.n_data;
    const auto& mask = rung.model.penalty_mask();
    const Eigen::VectorXd pilot = fit_pilot(s).coefficients;
    const PenaltyPlan adaptive = adaptive_plan(pilot, mask, c.gamma);
    std::size_t k = 0;
    out.methods[k++] = run_selected(s, adaptive, c, rung.truth, mask);
    if (c.compare_lasso) out.methods[k++] = run_selected(s, lasso_plan(mask), c, rung.truth, mask);
    const double mu_hat = normalization(s);
    for (double alpha : c.alphas) {
      out.methods[k++] = run_fixed(s, adaptive, std::pow(mu_hat, -alpha), pilot, rung.truth, mask);
    }
  } catch (const Error& e) {
    out.failure = error_token(e.code());
    for (auto& m : out.methods) {
      m.ok = false;
      m.failure = out.failure;
    }
  }
  return out;
}

std::string opt_real(const std::optional<double>& v) { return v ? format_real(*v) : "NA"; }

}  // namespace

StudyConfig parse_study_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::Format, std::string("config: ") + e.message() + " (line " +
                                       std::to_string(e.line()) + ")");
  }
  for (const auto& [section, body] : tree) {
    const auto found = known_keys().find(section);
    if (found == known_keys().end() || body.empty()) {
      throw Error(ErrorCode::Format, "config: unknown section '" + section + "'");
    }
    for (const auto& [key, value] : body) {
      if (!found->second.count(key)) {
        throw Error(ErrorCode::Format, "config: unknown key '" + section + "." + key + "'");
      }
    }
  }
  const auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (const auto v = tree.get_optional<std::string>(path)) return trim(*v);
    return std::nullopt;
  };

  StudyConfig c;
  if (auto v = get("study.seed")) c.seed = as_count("seed", *v);
  if (auto v = get("study.replicates")) c.replicates = as_count("replicates", *v);
  if (auto v = get("study.ladder")) c.ladder = as_list("ladder", *v);
  if (auto v = get("study.criterion")) {
    if (*v == "cbic") {
      c.criterion = Criterion::Cbic;
    } else if (*v == "ceric") {
      c.criterion = Criterion::Ceric;
    } else {
      throw Error(ErrorCode::Format, "config: criterion must be cbic or ceric");
    }
  }
  if (auto v = get("study.gamma")) c.gamma = as_real("gamma", *v);
  if (auto v = get("study.ntau")) c.n_tau = static_cast<int>(as_count("ntau", *v));
  if (auto v = get("study.tau_min_ratio")) c.tau_min_ratio = as_real("tau_min_ratio", *v);
  if (auto v = get("study.dummy_per_unit")) c.dummy_per_unit = static_cast<int>(as_count("dummy_per_unit", *v));
  if (auto v = get("study.alphas")) c.alphas = v->empty() ? std::vector<double>{} : as_list("alphas", *v);
  if (auto v = get("study.compare_lasso")) c.compare_lasso = as_bool("compare_lasso", *v);
  if (auto v = get("study.threads")) c.threads = static_cast<unsigned>(as_count("threads", *v));
  if (auto v = get("study.burn_in")) c.burn_in = as_count("burn_in", *v);
  if (auto v = get("study.sweeps")) c.sweeps = as_count("sweeps", *v);

  if (auto v = get("model.active")) c.active = v->empty() ? std::vector<double>{} : as_list("active", *v);
  if (auto v = get("model.noise")) c.noise = as_count("noise", *v);
  if (auto v = get("model.target_density")) c.target_density = as_real("target_density", *v);
  if (auto v = get("model.intercept")) c.intercept = as_real("intercept", *v);
  if (auto v = get("model.interaction")) c.interaction = parse_interaction_text(*v);
  if (auto v = get("model.psi")) c.psi = as_real("psi", *v);

  if (auto v = get("covariates.raster_per_unit")) c.raster_per_unit = static_cast<int>(as_count("raster_per_unit", *v));
  if (auto v = get("covariates.waves")) c.waves = static_cast<int>(as_count("waves", *v));
  if (auto v = get("covariates.files")) {
    c.raster_files.clear();
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!trim(item).empty()) c.raster_files.push_back(trim(item));
    }
  }
  validate(c);
  return c;
}

StudyConfig read_study_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return parse_study_config(in);
}

Raster synthetic_field(std::uint64_t seed, std::size_t index, const Window& window,
                       std::size_t cells_x, std::size_t cells_y, int waves) {
  Rng rng = make_rng(seed, kFieldStreamBase + index);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Wave {
    double kx, ky, phase, amplitude;
  };
  std::vector<Wave> ws;
  for (int k = 0; k < waves; ++k) {
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    const double cycles = 0.5 + 1.5 * unit(rng);  // per unit length
    const double omega = 2.0 * std::numbers::pi * cycles;
    ws.push_back({omega * std::cos(angle), omega * std::sin(angle), 2.0 * std::numbers::pi * unit(rng),
                  0.5 + unit(rng)});
  }
  std::vector<double> values(cells_x * cells_y);
  const double dx = window.width() / static_cast<double>(cells_x);
  const double dy = window.height() / static_cast<double>(cells_y);
  for (std::size_t r = 0; r < cells_y; ++r) {
    const double y = window.ymax() - (static_cast<double>(r) + 0.5) * dy;
    for (std::size_t col = 0; col < cells_x; ++col) {
      const double x = window.xmin() + (static_cast<double>(col) + 0.5) * dx;
      double v = 0.0;
      for (const auto& w : ws) v += w.amplitude * std::cos(w.kx * x + w.ky * y + w.phase);
      values[r * cells_x + col] = v;
    }
  }
  const double n = static_cast<double>(values.size());
  const double mean = compensated_sum(values) / n;
  std::vector<double> sq;
  sq.reserve(values.size());
  for (double v : values) sq.push_back((v - mean) * (v - mean));
  const double sd = std::sqrt(compensated_sum(sq) / n);
  for (double& v : values) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  return Raster(cells_y, cells_x, window, std::move(values));
}

ModelSpec study_model(const StudyConfig& c, double side) {
  const Window w(0.0, side, 0.0, side);
  std::vector<CovariateField> covs{CovariateField::constant()};
  const std::size_t p = c.num_covariates();
  const std::size_t cells = cells_for(side, c.raster_per_unit);
  for (std::size_t j = 0; j < p; ++j) {
    const std::string name = "z" + std::to_string(j + 1);
    if (c.raster_files.empty()) {
      covs.push_back(CovariateField::raster(name, synthetic_field(c.seed, j, w, cells, cells, c.waves)));
    } else {
      covs.push_back(CovariateField::raster(name, read_raster_file(c.raster_files[j])));
    }
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p + 1));
  for (std::size_t j = 0; j < c.active.size(); ++j) beta(static_cast<Eigen::Index>(j + 1)) = c.active[j];
  ModelSpec m(w, covs, c.interaction);
  if (c.intercept) {
    beta(0) = *c.intercept;
  } else {
    // The lattice nests in the synthetic raster cells, so the mass is exact.
    const std::size_t lattice = c.raster_files.empty() ? cells : 512;
    beta(0) = std::log(c.target_density * w.area() / trend_mass(m, beta, lattice));
  }
  return m.with_coefficients(beta, c.interaction.is_strauss() ? c.psi : 0.0);
}

const MethodSummary* StudyReport::find(std::size_t rung, const std::string& method) const {
  for (const auto& s : summary) {
    if (s.rung == rung && s.method == method) return &s;
  }
  return nullptr;
}

StudyReport run_study(const StudyConfig& config) {
  validate(config);
  StudyReport report;
  report.config = config;
  report.methods = method_names(config);

  std::vector<Rung> rungs;
  for (double side : config.ladder) {
    ModelSpec m = study_model(config, side);
    const Window domain = m.interaction().is_strauss() ? erode(m.window(), m.interaction().range)
                                                       : m.window();
    const auto nx = static_cast<int>(cells_for(domain.width(), config.dummy_per_unit));
    const auto ny = static_cast<int>(cells_for(domain.height(), config.dummy_per_unit));
    Eigen::VectorXd truth = m.coefficients();
    rungs.push_back({side, std::move(m), std::move(truth), DummyGrid{nx, ny}});
  }

  const std::size_t per_rung = config.replicates;
  report.replicates.resize(rungs.size() * per_rung);
  parallel_for(report.replicates.size(), config.threads, [&](std::size_t i) {
    const std::size_t r = i / per_rung;
    report.replicates[i] = run_replicate(config, rungs[r], r, i % per_rung, report.methods.size());
  });

  const double p = static_cast<double>(config.num_covariates());
  for (std::size_t r = 0; r < rungs.size(); ++r) {
    for (std::size_t k = 0; k < report.methods.size(); ++k) {
      MethodSummary s;
      s.rung = r;
      s.side = rungs[r].side;
      s.method = report.methods[k];
      s.replicates = per_rung;
      std::vector<double> err, err_mu, err_mu_p, tpr, fpr, points;
      std::size_t exact = 0;
      for (std::size_t i = 0; i < per_rung; ++i) {
        const auto& rep = report.replicates[r * per_rung + i];
        points.push_back(static_cast<double>(rep.n_points));
        const auto& m = rep.methods[k];
        if (!m.ok) {
          ++s.failures;
          continue;
        }
        const double mu = std::max<double>(static_cast<double>(rep.n_points), 1.0);
        err.push_back(m.l2_error);
        err_mu.push_back(m.l2_error * std::sqrt(mu));
        err_mu_p.push_back(m.l2_error * std::sqrt(mu / p));
        tpr.push_back(m.tpr);
        if (m.fpr) fpr.push_back(*m.fpr);
        if (m.exact_support) ++exact;
      }
      s.mean_points = compensated_sum(points) / static_cast<double>(per_rung);
      s.median_l2_error = median(err);
      s.median_error_sqrt_mu = median(err_mu);
      s.median_error_sqrt_mu_over_p = median(err_mu_p);
      s.tpr = tpr.empty() ? std::numeric_limits<double>::quiet_NaN()
                          : compensated_sum(tpr) / static_cast<double>(tpr.size());
      if (!fpr.empty()) s.fpr = compensated_sum(fpr) / static_cast<double>(fpr.size());
      s.exact_support_rate = static_cast<double>(exact) / static_cast<double>(per_rung);
      report.summary.push_back(s);
    }
  }
  return report;
}

void write_study_summary_csv(std::ostream& out, const StudyReport& report) {
  out << "rung,side,method,replicates,failures,mean_points,median_l2_error,median_error_sqrt_mu,"
         "median_error_sqrt_mu_over_p,tpr,fpr,exact_support_rate\n";
  for (const auto& s : report.summary) {
    out << s.rung << ',' << format_real(s.side) << ',' << s.method << ',' << s.replicates << ','
        << s.failures << ',' << format_real(s.mean_points) << ',' << format_real(s.median_l2_error)
        << ',' << format_real(s.median_error_sqrt_mu) << ','
        << format_real(s.median_error_sqrt_mu_over_p) << ',' << format_real(s.tpr) << ','
        << opt_real(s.fpr) << ',' << format_real(s.exact_support_rate) << '\n';
  }
}

void write_study_replicates_csv(std::ostream& out, const StudyReport& report) {
  out << "rung,side,replicate,n_points,method,status,tau,l2_error,tpr,fpr,exact_support,a_n,b_n\n";
  for (const auto& rep : report.replicates) {
    const double side = report.config.ladder[rep.rung];
    for (std::size_t k = 0; k < rep.methods.size(); ++k) {
      const auto& m = rep.methods[k];
      out << rep.rung << ',' << format_real(side) << ',' << rep.replicate << ',' << rep.n_points
          << ',' << report.methods[k] << ',';
      if (!m.ok) {
        out << m.failure << ",NA,NA,NA,NA,NA,NA,NA\n";
        continue;
      }
      out << "ok," << format_real(m.tau) << ',' << format_real(m.l2_error) << ','
          << format_real(m.tpr) << ',' << opt_real(m.fpr) << ',' << (m.exact_support ? 1 : 0)
          << ',' << opt_real(m.a_n) << ',' << opt_real(m.b_n) << '\n';
    }
  }
}

}  // namespace ppreg
