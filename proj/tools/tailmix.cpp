// tailmix: bin flow traces, fit and select heavy-tailed mixture models,
// classify bins, simulate data and run the validation presets.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "tailmix/experiments.hpp"
#include "tailmix/ingest.hpp"
#include "tailmix/report.hpp"

namespace fs = std::filesystem;
using namespace tailmix;

namespace {

std::uint64_t env_seed() {
  const char* v = std::getenv("TAILMIX_SEED");
  if (!v || !*v) return 0;
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw DataError(std::string("TAILMIX_SEED is not an unsigned integer: ") + v);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string stem_of(const fs::path& p) {
  std::string s = p.filename().string();
  for (const char* ext : {".series", ".txt", ".csv", ".tsv", ".json"}) {
    const std::string e(ext);
    if (s.size() > e.size() && s.compare(s.size() - e.size(), e.size(), e) == 0) return s.substr(0, s.size() - e.size());
  }
  return p.stem().string();
}

struct Common {
  std::string out_dir = ".";
  std::string exp_mode = "discrete";
  int restarts = FitConfig{}.restarts;
  std::uint64_t seed = 0;
  double threshold = 10.0;
};

FitConfig fit_config(const Common& c) {
  FitConfig f;
  f.restarts = c.restarts;
  f.seed = c.seed;
  return f;
}

// ---------------------------------------------------------------- bin

struct BinOpts {
  std::string input;
  std::string uptime;
  std::vector<int> windows{kStandardWindows.begin(), kStandardWindows.end()};
  bool drop_zeros = true;
  std::string source_id;
};

int cmd_bin(const BinOpts& o, const Common& c) {
  const auto records = read_flows(fs::path(o.input));
  UptimeIntervals uptime;
  if (!o.uptime.empty()) uptime = read_uptime(fs::path(o.uptime));
  const std::string source = o.source_id.empty() ? stem_of(o.input) : o.source_id;
  fs::create_directories(c.out_dir);
  for (int w : o.windows) {
    if (w <= 0) throw DataError("window sizes must be positive");
    const BinningOutput b = bin_series(records, w, o.uptime.empty() ? nullptr : &uptime, o.drop_zeros, source);
    const fs::path out = fs::path(c.out_dir) / (source + "_w" + std::to_string(w) + ".series");
    write_series(out, b.series);
    std::cout << "window " << w << "s: n=" << b.series.n() << " bins (spanned " << b.total_bins << ", zeros dropped "
              << b.zero_bins_dropped << ", downtime dropped " << b.downtime_bins_dropped << ") -> " << out.string()
              << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- fit-select

int cmd_fit_select(const std::string& input, const Common& c) {
  const fs::path in(input);
  std::vector<fs::path> files;
  const bool dir_mode = fs::is_directory(in);
  if (dir_mode) {
    for (const auto& e : fs::directory_iterator(in))
      if (e.is_regular_file() && e.path().extension() == ".series") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .series files in " + input);
  } else {
    files.push_back(in);
  }

  SelectConfig sc;
  sc.fit = fit_config(c);
  sc.threshold = c.threshold;
  sc.exp_mode = parse_exp_mode(c.exp_mode);

  RunManifest manifest;
  manifest.subcommand = "fit-select";
  manifest.seed = c.seed;
  Json cfg;
  cfg["fit"] = to_json(sc.fit);
  cfg["threshold"] = sc.threshold;
  cfg["exp_mode"] = std::string(to_string(sc.exp_mode));
  manifest.config = cfg;

  struct Outcome {
    BinnedSeries series;
    std::optional<SelectionResult> sel;
    std::string error;
    Json report;
  };
  std::vector<Outcome> outcomes(files.size());

  // Series are independent; parallelism inside fit_mle switches off when nested.
  const auto n_files = static_cast<std::int64_t>(files.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n_files; ++i) {
    Outcome& o = outcomes[static_cast<std::size_t>(i)];
    const fs::path& f = files[static_cast<std::size_t>(i)];
    o.series.source_id = stem_of(f);
    try {
      o.series = read_series(f);
      RunManifest m = manifest;
      m.inputs = {f.string()};
      o.sel = select_nested(o.series, sc);
      o.report = series_report(o.series, *o.sel, m);
    } catch (const std::exception& e) {
      o.error = e.what();
      RunManifest m = manifest;
      m.inputs = {f.string()};
      o.report = Json::object();
      o.report["schema_version"] = kReportSchemaVersion;
      o.report["kind"] = "fit_select";
      o.report["manifest"] = to_json(m);
      o.report["status"] = "error";
      o.report["error"] = o.error;
      if (const auto* se = dynamic_cast<const SelectionError*>(&e)) {
        Json partial = Json::object();
        partial["P"] = se->partial_p ? to_json(*se->partial_p) : Json(nullptr);
        partial["EP"] = se->partial_ep ? to_json(*se->partial_ep) : Json(nullptr);
        o.report["partial_fits"] = partial;
      }
    }
  }

  fs::create_directories(c.out_dir);
  int failures = 0;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const Outcome& o = outcomes[i];
    const fs::path out = fs::path(c.out_dir) / (stem_of(files[i]) + ".report.json");
    write_json(out, o.report);
    if (o.sel) {
      std::cout << files[i].filename().string() << ": chosen " << to_string(o.sel->chosen) << ", ln BF(EP,P) = "
                << format_double(o.sel->log_bf_ep_p);
      if (o.sel->log_bf_eep_ep) std::cout << ", ln BF(EEP,EP) = " << format_double(*o.sel->log_bf_eep_ep);
      std::cout << " -> " << out.string() << "\n";
    } else {
      ++failures;
      std::cerr << files[i].filename().string() << ": error: " << o.error << "\n";
    }
  }

  if (dir_mode) {
    std::ostringstream csv;
    csv << aggregate_csv_header() << "\n";
    for (const auto& o : outcomes) {
      BinnedSeries id = o.series;
      csv << aggregate_csv_row(id, o.sel ? &*o.sel : nullptr, o.error) << "\n";
    }
    write_text(fs::path(c.out_dir) / "aggregate.csv", csv.str());
    return 0;  // per-series failures are reported, not fatal
  }
  return failures == 0 ? 0 : 1;
}

// ---------------------------------------------------------------- classify

int cmd_classify(const std::string& input, const std::string& model_path, const std::string& model_label,
                 const Common& c) {
  const BinnedSeries series = read_series(fs::path(input));
  const ModelFile mf = model_from_json(read_json(model_path), model_label);
  if (mf.spec.n_exp == 0) throw UnsupportedError("classify: a Pareto-only model has no exponential regime");
  const std::int64_t threshold = tail_threshold(mf.spec, mf.params);

  std::ostringstream csv;
  csv << "index,count,pareto_responsibility,label\n";
  std::size_t tail = 0;
  for (std::size_t i = 0; i < series.counts.size(); ++i) {
    const std::int64_t x = series.counts[i];
    const double r = responsibilities(x, mf.spec, mf.params).back();
    const bool is_tail = x >= threshold;
    tail += is_tail ? 1 : 0;
    csv << i << ',' << x << ',' << format_double(r) << ',' << (is_tail ? "tail" : "exp") << "\n";
  }

  const std::string stem = stem_of(input);
  fs::create_directories(c.out_dir);
  write_text(fs::path(c.out_dir) / (stem + ".classify.csv"), csv.str());

  RunManifest m;
  m.subcommand = "classify";
  m.inputs = {input, model_path};
  m.seed = c.seed;
  m.config["model"] = to_json(mf.spec, mf.params);
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "classify";
  j["manifest"] = to_json(m);
  j["status"] = "ok";
  j["tail_threshold"] = threshold;
  j["bins"] = series.n();
  j["tail_bins"] = tail;
  j["exp_bins"] = series.n() - tail;
  const double n = static_cast<double>(std::max<std::size_t>(series.n(), 1));
  j["tail_fraction"] = static_cast<double>(tail) / n;
  j["exp_fraction"] = static_cast<double>(series.n() - tail) / n;
  write_json(fs::path(c.out_dir) / (stem + ".classify.json"), j);
  std::cout << "tail threshold x* = " << threshold << "; " << tail << " of " << series.n() << " bins in the tail\n";
  return 0;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const std::string& model_path, long long n, const std::string& output, const Common& c) {
  if (n <= 0) throw DataError("simulate: --n must be >= 1");
  const ModelFile mf = model_from_json(read_json(model_path));
  if (mf.spec.exp_mode != ExpMode::discrete)
    throw UnsupportedError(
        "simulate: paper-literal exponential components are unnormalized densities, not pmfs; "
        "use exp_mode \"discrete\" to sample");
  BinnedSeries s;
  s.counts = sample_mixture(mf.spec, mf.params, static_cast<std::size_t>(n), c.seed);
  s.source_id = stem_of(output.empty() ? model_path : output);
  const fs::path out = output.empty() ? fs::path(c.out_dir) / (stem_of(model_path) + ".series") : fs::path(output);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_series(out, s);
  std::cout << "wrote " << n << " samples from " << mf.spec.label() << " to " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- validate

int cmd_validate(const std::string& preset, const std::string& plan_path, bool seed_given, const Common& c,
                 bool restarts_given) {
  ExperimentPlan plan;
  if (!plan_path.empty()) {
    plan = plan_from_json(read_json(plan_path));
  } else {
    plan = preset_plan(preset.empty() ? "table2-desk" : preset);
  }
  if (seed_given) plan.seed = c.seed;
  if (restarts_given) plan.select.fit.restarts = c.restarts;
  plan.select.threshold = c.threshold;

  const ExperimentReport report = run_experiment(plan);

  RunManifest m;
  m.subcommand = "validate";
  if (!plan_path.empty()) m.inputs = {plan_path};
  m.seed = plan.seed;
  m.config["preset"] = plan_path.empty() ? Json(plan.name) : Json(nullptr);
  m.config["plan"] = to_json(plan);

  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["kind"] = "experiment";
  j["manifest"] = to_json(m);
  j["status"] = "ok";
  j["report"] = to_json(report);

  fs::create_directories(c.out_dir);
  write_json(fs::path(c.out_dir) / (plan.name + ".report.json"), j);
  std::ofstream csv(fs::path(c.out_dir) / (plan.name + (plan.kind == ExperimentKind::alpha_recovery ? ".estimates.csv"
                                                                                                    : ".selections.csv")),
                    std::ios::binary);
  if (plan.kind == ExperimentKind::alpha_recovery) {
    write_estimates_csv(csv, report);
    for (const auto& g : report.grid)
      std::cout << "alpha " << format_double(g.true_alpha) << ": ML median " << format_double(g.mle.median) << " IQR "
                << format_double(g.mle.iqr()) << " | Hill median " << format_double(g.hill.median) << " IQR "
                << format_double(g.hill.iqr()) << "\n";
  } else {
    write_selections_csv(csv, report);
    for (const auto& r : report.rows)
      std::cout << r.name << " n=" << r.n << ": median log10 BF " << format_double(r.median_log10_bf) << " ("
                << to_string(r.median_strength) << ")" << (r.meets_expected ? "" : "  [below expected]")
                << "; chosen P/EP/EEP = " << r.chosen_p << "/" << r.chosen_ep << "/" << r.chosen_eep << "\n";
  }
  std::cerr << "runtime " << report.runtime_seconds << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tailmix: heavy-tailed mixture models for flow-arrival counts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", tool_version());

  Common common;
  std::uint64_t default_seed = 0;
  try {
    default_seed = env_seed();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  common.seed = default_seed;

  auto add_common = [&](CLI::App* sub, bool fitting) {
    sub->add_option("--out-dir", common.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", common.seed, "RNG seed (default: $TAILMIX_SEED or 0)");
    if (fitting) {
      sub->add_option("--exp-mode", common.exp_mode, "Exponential component: discrete or paper-literal")
          ->check(CLI::IsMember({"discrete", "paper-literal"}))
          ->capture_default_str();
      sub->add_option("--restarts", common.restarts, "Random restarts per fit")->check(CLI::PositiveNumber)->capture_default_str();
      sub->add_option("--threshold", common.threshold, "Natural-log Bayes factor needed to accept a larger model")
          ->capture_default_str();
    }
  };

  BinOpts bin;
  auto* s_bin = app.add_subcommand("bin", "Bin flow start times into count series");
  s_bin->add_option("--input", bin.input, "Flow file (header row, start_time column)")->required();
  s_bin->add_option("--windows", bin.windows, "Window sizes in seconds")->delimiter(',')->capture_default_str();
  s_bin->add_option("--drop-zeros", bin.drop_zeros, "Drop empty windows (true/false)")->capture_default_str();
  s_bin->add_option("--uptime", bin.uptime, "Uptime sidecar (begin,end)");
  s_bin->add_option("--source-id", bin.source_id, "Trace identifier (default: input file stem)");
  add_common(s_bin, false);

  std::string fs_input;
  auto* s_fit = app.add_subcommand("fit-select", "Fit P/EP/EEP and select by Bayes factor");
  s_fit->add_option("--input", fs_input, "Series file or directory of .series files")->required();
  add_common(s_fit, true);

  std::string cl_input, cl_model, cl_label;
  auto* s_cls = app.add_subcommand("classify", "Label bins as exponential or tail regime");
  s_cls->add_option("--input", cl_input, "Series file")->required();
  s_cls->add_option("--model", cl_model, "Model parameter file or fit-select report")->required();
  s_cls->add_option("--model-label", cl_label, "Model to take from a report (default: chosen)");
  add_common(s_cls, false);

  std::string sim_model, sim_out;
  long long sim_n = 0;
  auto* s_sim = app.add_subcommand("simulate", "Draw a synthetic series from a model file");
  s_sim->add_option("--model", sim_model, "Model parameter file")->required();
  s_sim->add_option("--n", sim_n, "Number of samples")->required();
  s_sim->add_option("--output", sim_out, "Output series file (default: <out-dir>/<model stem>.series)");
  add_common(s_sim, false);

  std::string val_preset, val_plan;
  auto* s_val = app.add_subcommand("validate", "Run a validation experiment preset or plan file");
  s_val->add_option("--preset", val_preset, "fig2-desk | fig2-paper | table2-desk | table2-paper");
  s_val->add_option("--plan", val_plan, "Experiment plan JSON");
  add_common(s_val, true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s_bin) return cmd_bin(bin, common);
    if (*s_fit) return cmd_fit_select(fs_input, common);
    if (*s_cls) return cmd_classify(cl_input, cl_model, cl_label, common);
    if (*s_sim) return cmd_simulate(sim_model, sim_n, sim_out, common);
    if (*s_val) {
      const bool seed_given = s_val->count("--seed") > 0 || std::getenv("TAILMIX_SEED") != nullptr;
      return cmd_validate(val_preset, val_plan, seed_given, common, s_val->count("--restarts") > 0);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
