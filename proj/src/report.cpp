#include "tailmix/report.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

namespace tailmix {
namespace {

Json nullable(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json strength_json(double log_bf) {
  const StrengthLabel nat = strength_label(log_bf, LogBase::natural);
  const double l10 = log_bf / std::log(10.0);
  const StrengthLabel dec = strength_label(l10, LogBase::log10);
  Json j;
  j["natural"] = log_bf;
  j["log10"] = l10;
  j["strength"] = std::string(to_string(dec.strength));
  j["strength_natural_scale"] = std::string(to_string(nat.strength));
  j["sign"] = dec.sign;
  return j;
}

Json quantiles_json(const Quantiles& q) {
  Json j;
  j["min"] = q.min;
  j["q25"] = q.q25;
  j["median"] = q.median;
  j["q75"] = q.q75;
  j["max"] = q.max;
  j["iqr"] = q.iqr();
  return j;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

std::string tool_version() { return TAILMIX_VERSION; }

std::string format_double(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Json to_json(const RunManifest& m) {
  Json j;
  j["subcommand"] = m.subcommand;
  j["inputs"] = m.inputs;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["version"] = m.version;
  return j;
}

Json to_json(const FitConfig& c) {
  Json j;
  j["restarts"] = c.restarts;
  j["alpha_max"] = c.alpha_max;
  j["lambda_max"] = c.lambda_max;
  j["inner_tol"] = c.inner_tol;
  j["max_inner_iters"] = c.max_inner_iters;
  j["seed"] = c.seed;
  j["barrier_schedule"] = c.schedule.weights;
  return j;
}

Json to_json(const ModelSpec& s, const MixtureParams& p) {
  Json j;
  j["model"] = s.label();
  j["exp_mode"] = std::string(to_string(s.exp_mode));
  j["x_min"] = s.x_min;
  j["weights"] = p.weights;
  j["lambdas"] = p.lambdas;
  j["alpha"] = p.alpha;
  return j;
}

Json to_json(const FittedModel& fm) {
  Json j = to_json(fm.spec, fm.params);
  j["dof"] = fm.spec.dof();
  j["n"] = fm.n;
  j["loglik"] = fm.loglik;
  j["bic"] = fm.bic;
  Json d;
  d["best_restart"] = fm.diagnostics.best_restart;
  d["converged"] = fm.diagnostics.converged;
  d["grad_norm"] = fm.diagnostics.grad_norm;
  d["barrier_residual"] = fm.diagnostics.barrier_residual;
  d["inner_iterations"] = fm.diagnostics.inner_iterations;
  d["failed_restarts"] = fm.diagnostics.failed_restarts;
  j["diagnostics"] = d;
  return j;
}

Json to_json(const SelectionResult& sel) {
  Json j;
  j["chosen"] = std::string(to_string(sel.chosen));
  Json bf;
  bf["EP_vs_P"] = strength_json(sel.log_bf_ep_p);
  bf["EEP_vs_EP"] = sel.log_bf_eep_ep ? strength_json(*sel.log_bf_eep_ep) : Json(nullptr);
  j["log_bf"] = bf;
  Json fits;
  fits["P"] = to_json(sel.p);
  fits["EP"] = to_json(sel.ep);
  fits["EEP"] = sel.eep ? to_json(*sel.eep) : Json(nullptr);
  j["fits"] = fits;
  j["eep_failure"] = sel.eep_failure ? Json(*sel.eep_failure) : Json(nullptr);
  return j;
}

Json to_json(const ExperimentPlan& plan) {
  Json j;
  j["name"] = plan.name;
  j["kind"] = std::string(to_string(plan.kind));
  j["replicates"] = plan.replicates;
  j["seed"] = plan.seed;
  if (plan.kind == ExperimentKind::alpha_recovery) {
    j["alphas"] = plan.alphas;
    j["lambda_range"] = {plan.lambda_lo, plan.lambda_hi};
    j["exp_weight"] = plan.exp_weight;
    j["n"] = plan.n;
    j["hill_tail_fraction"] = plan.hill_tail_fraction;
  } else {
    Json rows = Json::array();
    for (const auto& r : plan.rows) {
      Json row;
      row["name"] = r.name;
      row["truth"] = to_json(ModelSpec::of(r.truth), r.truth_params);
      row["comparison"] = std::string(to_string(r.comparison));
      row["sample_sizes"] = r.sample_sizes;
      Json exp = Json::array();
      for (auto s : r.expected) exp.push_back(std::string(to_string(s)));
      row["expected"] = exp;
      rows.push_back(row);
    }
    j["rows"] = rows;
    j["threshold"] = plan.select.threshold;
  }
  j["fit"] = to_json(plan.select.fit);
  return j;
}

Json to_json(const ExperimentReport& report) {
  Json j;
  j["plan"] = to_json(report.plan);
  if (report.plan.kind == ExperimentKind::alpha_recovery) {
    Json grid = Json::array();
    for (const auto& g : report.grid) {
      Json e;
      e["true_alpha"] = g.true_alpha;
      e["estimates"] = g.estimates;
      e["failures"] = g.failures;
      e["mle"] = quantiles_json(g.mle);
      e["hill"] = quantiles_json(g.hill);
      e["median_rel_error"] = g.median_rel_error;
      grid.push_back(e);
    }
    j["grid"] = grid;
    Json reps = Json::array();
    for (const auto& r : report.estimates) {
      Json e;
      e["grid_index"] = r.grid_index;
      e["replicate"] = r.replicate;
      e["true_alpha"] = r.true_alpha;
      e["true_lambda"] = r.true_lambda;
      e["mle_alpha"] = nullable(r.mle_alpha);
      e["mle_lambda"] = nullable(r.mle_lambda);
      e["mle_pareto_weight"] = nullable(r.mle_pareto_weight);
      e["hill_alpha"] = nullable(r.hill_alpha);
      e["error"] = r.error.empty() ? Json(nullptr) : Json(r.error);
      reps.push_back(e);
    }
    j["replicates"] = reps;
  } else {
    Json rows = Json::array();
    for (const auto& s : report.rows) {
      Json e;
      e["row"] = s.row;
      e["name"] = s.name;
      e["n"] = s.n;
      e["median_log_bf"] = s.median_log_bf;
      e["median_log10_bf"] = s.median_log10_bf;
      e["median_evidence_log10"] = s.median_evidence_log10;
      e["median_strength"] = std::string(to_string(s.median_strength));
      e["expected_strength"] = s.expected ? Json(std::string(to_string(*s.expected))) : Json(nullptr);
      e["meets_expected"] = s.meets_expected;
      e["chosen"] = {{"P", s.chosen_p}, {"EP", s.chosen_ep}, {"EEP", s.chosen_eep}};
      e["failures"] = s.failures;
      rows.push_back(e);
    }
    j["rows"] = rows;
    Json reps = Json::array();
    for (const auto& r : report.selections) {
      Json e;
      e["row"] = r.row;
      e["n"] = r.n;
      e["replicate"] = r.replicate;
      e["log_bf"] = nullable(r.log_bf);
      e["chosen"] = r.chosen ? Json(std::string(to_string(*r.chosen))) : Json(nullptr);
      e["error"] = r.error.empty() ? Json(nullptr) : Json(r.error);
      reps.push_back(e);
    }
    j["replicates"] = reps;
  }
  return j;
}

ModelFile model_from_json(const Json& j, const std::string& model) {
  try {
    if (j.contains("fits")) {
      const std::string pick = model.empty() ? j.at("chosen").get<std::string>() : model;
      const Json& fit = j.at("fits").at(pick);
      if (fit.is_null()) throw DataError("report has no " + pick + " fit");
      return model_from_json(fit, "");
    }
    ModelFile mf;
    const ModelKind kind = parse_model_kind(j.at("model").get<std::string>());
    const ExpMode mode = parse_exp_mode(j.value("exp_mode", std::string("discrete")));
    mf.spec = ModelSpec::of(kind, mode, j.value("x_min", std::int64_t{1}));
    mf.params.weights = j.at("weights").get<std::vector<double>>();
    mf.params.lambdas = j.value("lambdas", std::vector<double>{});
    mf.params.alpha = j.at("alpha").get<double>();
    validate(mf.spec, mf.params);
    return mf;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

ExperimentPlan plan_from_json(const Json& j) {
  try {
    ExperimentPlan plan;
    plan.name = j.value("name", std::string("custom"));
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "alpha_recovery") {
      plan.kind = ExperimentKind::alpha_recovery;
    } else if (kind == "selection_study") {
      plan.kind = ExperimentKind::selection_study;
    } else {
      throw DataError("plan kind must be alpha_recovery or selection_study, got '" + kind + "'");
    }
    plan.replicates = j.value("replicates", plan.replicates);
    plan.seed = j.value("seed", plan.seed);
    plan.alphas = j.value("alphas", plan.alphas);
    if (j.contains("lambda_range")) {
      const auto r = j.at("lambda_range").get<std::vector<double>>();
      if (r.size() != 2) throw DataError("lambda_range must have two entries");
      plan.lambda_lo = r[0];
      plan.lambda_hi = r[1];
    }
    plan.exp_weight = j.value("exp_weight", plan.exp_weight);
    plan.n = j.value("n", plan.n);
    plan.hill_tail_fraction = j.value("hill_tail_fraction", plan.hill_tail_fraction);
    plan.select.threshold = j.value("threshold", plan.select.threshold);
    if (j.contains("fit")) {
      const Json& f = j.at("fit");
      FitConfig& c = plan.select.fit;
      c.restarts = f.value("restarts", c.restarts);
      c.alpha_max = f.value("alpha_max", c.alpha_max);
      c.lambda_max = f.value("lambda_max", c.lambda_max);
      c.inner_tol = f.value("inner_tol", c.inner_tol);
      c.max_inner_iters = f.value("max_inner_iters", c.max_inner_iters);
      if (f.contains("barrier_schedule")) c.schedule.weights = f.at("barrier_schedule").get<std::vector<double>>();
    }
    for (const Json& r : j.value("rows", Json::array())) {
      SelectionRow row;
      row.name = r.value("name", std::string("row"));
      const ModelFile truth = model_from_json(r.at("truth"));
      row.truth = truth.spec.kind();
      row.truth_params = truth.params;
      const std::string cmp = r.at("comparison").get<std::string>();
      if (cmp == "EP_vs_P") {
        row.comparison = Comparison::ep_vs_p;
      } else if (cmp == "EEP_vs_EP") {
        row.comparison = Comparison::eep_vs_ep;
      } else {
        throw DataError("comparison must be EP_vs_P or EEP_vs_EP, got '" + cmp + "'");
      }
      row.sample_sizes = r.at("sample_sizes").get<std::vector<std::size_t>>();
      for (const Json& e : r.value("expected", Json::array())) {
        const std::string s = e.get<std::string>();
        if (s == "negligible") row.expected.push_back(Strength::negligible);
        else if (s == "substantial") row.expected.push_back(Strength::substantial);
        else if (s == "strong") row.expected.push_back(Strength::strong);
        else if (s == "decisive") row.expected.push_back(Strength::decisive);
        else throw DataError("unknown strength label '" + s + "'");
      }
      plan.rows.push_back(std::move(row));
    }
    plan.validate();
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("plan file: ") + e.what());
  }
}

Json series_report(const BinnedSeries& series, const SelectionResult& sel, const RunManifest& manifest) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "fit_select";
  j["manifest"] = to_json(manifest);
  Json s;
  s["source_id"] = series.source_id;
  s["bin_seconds"] = series.bin_seconds;
  s["n"] = series.n();
  j["series"] = s;
  j["status"] = "ok";
  const Json body = to_json(sel);
  for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
  if (sel.chosen == ModelKind::P) {
    j["tail_threshold"] = nullptr;
  } else {
    const FittedModel& fm = sel.chosen == ModelKind::EEP ? *sel.eep : sel.ep;
    j["tail_threshold"] = tail_threshold(fm.spec, fm.params);
  }
  return j;
}

std::string aggregate_csv_header() {
  return "source_id,bin_seconds,n,status,chosen,log_bf_ep_p,log10_bf_ep_p,log_bf_eep_ep,log10_bf_eep_ep,"
         "ep_alpha,ep_lambda,ep_pareto_weight,chosen_alpha,tail_threshold,error";
}

std::string aggregate_csv_row(const BinnedSeries& series, const SelectionResult* sel, const std::string& error) {
  std::ostringstream os;
  os << csv_escape(series.source_id) << ',' << format_double(series.bin_seconds) << ',' << series.n() << ',';
  if (!sel) {
    os << "error,,,,,,,,,,," << csv_escape(error);
    return os.str();
  }
  const double l10 = std::log(10.0);
  os << "ok," << to_string(sel->chosen) << ',' << format_double(sel->log_bf_ep_p) << ','
     << format_double(sel->log_bf_ep_p / l10) << ',';
  if (sel->log_bf_eep_ep)
    os << format_double(*sel->log_bf_eep_ep) << ',' << format_double(*sel->log_bf_eep_ep / l10) << ',';
  else
    os << ",,";
  os << format_double(sel->ep.params.alpha) << ',' << format_double(sel->ep.params.lambdas[0]) << ','
     << format_double(sel->ep.params.pareto_weight()) << ',';
  const FittedModel& chosen =
      sel->chosen == ModelKind::P ? sel->p : (sel->chosen == ModelKind::EP ? sel->ep : *sel->eep);
  os << format_double(chosen.params.alpha) << ',';
  if (sel->chosen != ModelKind::P) os << tail_threshold(chosen.spec, chosen.params);
  os << ',' << csv_escape(error);
  return os.str();
}

void write_estimates_csv(std::ostream& out, const ExperimentReport& report) {
  out << "grid_index,true_alpha,replicate,estimator,value\n";
  for (const auto& r : report.estimates) {
    if (r.mle_alpha)
      out << r.grid_index << ',' << format_double(r.true_alpha) << ',' << r.replicate << ",ML,"
          << format_double(*r.mle_alpha) << '\n';
    if (r.hill_alpha)
      out << r.grid_index << ',' << format_double(r.true_alpha) << ',' << r.replicate << ",Hill,"
          << format_double(*r.hill_alpha) << '\n';
  }
}

void write_selections_csv(std::ostream& out, const ExperimentReport& report) {
  out << "row,name,n,replicate,log_bf,log10_bf,chosen\n";
  for (const auto& r : report.selections) {
    const auto& row = report.plan.rows[r.row];
    out << r.row << ',' << csv_escape(row.name) << ',' << r.n << ',' << r.replicate << ',';
    if (r.log_bf) out << format_double(*r.log_bf) << ',' << format_double(*r.log_bf / std::log(10.0));
    else out << ',';
    out << ',' << (r.chosen ? std::string(to_string(*r.chosen)) : std::string()) << '\n';
  }
}

}  // namespace tailmix
