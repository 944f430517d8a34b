// skma: batch CLI for sparse K-mean alignment.
//
// Subcommands: simulate, fit, tune, benchmark, eval. Exit codes: 0 success,
// 64 usage error, 65 data error, 70 engine error. Data files are
// byte-reproducible for identical flags; wall time lives only in the
// manifest written next to each output set.

#include <chrono>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skma/engine.hpp"
#include "skma/io.hpp"
#include "skma/synth.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kVersion = "skma 1.0.0";
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitEngine = 70;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string default_out_dir() {
  const char* env = std::getenv("SKMA_OUT_DIR");
  return env != nullptr && *env != '\0' ? env : ".";
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw skma::DataError("cannot create output directory " + dir);
  return p;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw skma::DataError("cannot open config file " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw skma::DataError(std::string("config file ") + path + ": " + e.what());
  }
}

// Engine options shared by fit / tune / benchmark. Precedence: command-line
// flags > --config file > built-in defaults; the manifest echoes the
// resolved values.
struct EngineCli {
  std::string config_path;
  std::string metric = "l2";
  std::string mode = "sparse";
  skma::EngineConfig cfg;

  // `shared_seed_resolution` suppresses --seed/--resolution; the benchmark
  // subcommand owns a single pair of those flags for generator and engine.
  void attach(CLI::App* app, bool shared_seed_resolution = false) {
    app->add_option("--config", config_path, "JSON config file with defaults");
    app->add_option("--k", cfg.k, "number of clusters");
    app->add_option("--m", cfg.m, "sparsity fraction of mu(D), in [0,1)");
    app->add_option("--metric", metric, "functional measure: l2 or h1");
    app->add_option("--eps-a", cfg.bounds.eps_a, "per-iteration dilation half-width");
    app->add_option("--eps-b", cfg.bounds.eps_b, "per-iteration shift half-width");
    app->add_option("--tol", cfg.tol, "stopping tolerance");
    app->add_option("--max-iter", cfg.max_iter, "iteration cap");
    if (!shared_seed_resolution) {
      app->add_option("--resolution", cfg.resolution, "common grid resolution");
      app->add_option("--seed", cfg.seed, "engine seed");
    }
    app->add_option("--mode", mode, "sparse or kma");
    app->add_flag("--robust-templates", cfg.robust_templates,
                  "Loess template estimation");
    app->add_option("--loess-span", cfg.loess_span,
                    "nearest-neighbour span for robust templates");
    app->add_flag("--no-stop-on-weight-change,!--stop-on-weight-change",
                  stop_flag_off, "drop the |dw| condition from the stopping rule");
    app->add_option("--jobs", cfg.jobs, "worker threads (0 = hardware)");
  }

  bool stop_flag_off = false;

  skma::EngineConfig resolve(const CLI::App* app) {
    const auto keep = [&](const std::string& name) {
      const CLI::Option* opt = app->get_option_no_throw(name);
      return opt != nullptr && opt->count() > 0;
    };
    skma::EngineConfig out = cfg;
    if (!config_path.empty()) {
      // file first, then re-apply any flag the user passed
      out = skma::io::engine_config_from_json(load_json_file(config_path));
      if (keep("--k")) out.k = cfg.k;
      if (keep("--m")) out.m = cfg.m;
      if (keep("--eps-a") || keep("--eps-b")) {
        const double ea = keep("--eps-a") ? cfg.bounds.eps_a : out.bounds.eps_a;
        const double eb = keep("--eps-b") ? cfg.bounds.eps_b : out.bounds.eps_b;
        out.bounds = skma::WarpBounds(ea, eb);
      }
      if (keep("--tol")) out.tol = cfg.tol;
      if (keep("--max-iter")) out.max_iter = cfg.max_iter;
      if (keep("--resolution")) out.resolution = cfg.resolution;
      if (keep("--seed")) out.seed = cfg.seed;
      if (keep("--robust-templates")) out.robust_templates = cfg.robust_templates;
      if (keep("--loess-span")) out.loess_span = cfg.loess_span;
      if (keep("--jobs")) out.jobs = cfg.jobs;
      if (!keep("--metric"))
        metric = out.metric == skma::MetricKind::h1_similarity ? "h1" : "l2";
      if (!keep("--mode"))
        mode = out.mode == skma::EngineMode::kma ? "kma" : "sparse";
    }
    if (metric == "l2")
      out.metric = skma::MetricKind::l2_distance;
    else if (metric == "h1")
      out.metric = skma::MetricKind::h1_similarity;
    else
      throw UsageError("--metric must be l2 or h1");
    if (mode == "sparse")
      out.mode = skma::EngineMode::sparse_kma;
    else if (mode == "kma")
      out.mode = skma::EngineMode::kma;
    else
      throw UsageError("--mode must be sparse or kma");
    if (stop_flag_off) out.stop_on_weight_change = false;
    if (out.mode == skma::EngineMode::sparse_kma && out.k < 2)
      throw UsageError(
          "sparse mode requires --k >= 2; the weight function is undefined for "
          "a single cluster (use --mode kma for pure alignment)");
    return out;
  }
};

struct SimCli {
  std::string scenario = "sim1";
  skma::SimSpec spec;
  bool n_set = false, res_set = false;
  std::vector<double> a_range, b_range;
  double phase_shift = 0.15;
  bool phase_set = false;
  double q_mean = 1.0, q_sd = 0.15;
  bool q_mean_set = false, q_sd_set = false;
  std::size_t n_per_class = 100, resolution = 200;
  std::uint64_t seed = 0;

  void attach(CLI::App* app) {
    app->add_option("--scenario", scenario, "sim1 or sim2")->required();
    app->add_option("--seed", seed, "generator seed");
    app->add_option("--n-per-class", n_per_class, "curves per class")
        ->check(CLI::PositiveNumber);
    app->add_option("--resolution", resolution, "grid resolution");
    app->add_option("--q-mean", q_mean, "amplitude factor mean")
        ->each([this](const std::string&) { q_mean_set = true; });
    app->add_option("--q-sd", q_sd, "amplitude factor sd")->each([this](
        const std::string&) { q_sd_set = true; });
    app->add_option("--a-range", a_range, "dilation draw range lo hi")
        ->expected(2);
    app->add_option("--b-range", b_range, "shift draw range lo hi")->expected(2);
    app->add_option("--phase-shift", phase_shift,
                    "class-2 shift offset (sim2 only)")
        ->each([this](const std::string&) { phase_set = true; });
  }

  skma::SimSpec resolve(const CLI::App* app) {
    skma::Scenario sc;
    if (scenario == "sim1")
      sc = skma::Scenario::sim1;
    else if (scenario == "sim2")
      sc = skma::Scenario::sim2;
    else
      throw UsageError("--scenario must be sim1 or sim2");
    skma::SimSpec out = skma::SimSpec::defaults(sc);
    out.seed = seed;
    if (app->count("--n-per-class") > 0) out.n_per_class = n_per_class;
    if (app->count("--resolution") > 0) out.resolution = resolution;
    if (q_mean_set) out.q_mean = q_mean;
    if (q_sd_set) out.q_sd = q_sd;
    if (a_range.size() == 2) out.a_range = {a_range[0], a_range[1]};
    if (b_range.size() == 2) out.b_range = {b_range[0], b_range[1]};
    if (phase_set) out.phase_cluster_shift = phase_shift;
    return out;
  }
};

json base_manifest(const std::string& command, const json& config) {
  return json{{"tool", kVersion},
              {"command", command},
              {"config", config},
              {"outputs", json::array()},
              {"inputs", json::array()}};
}

void finish_manifest(json& manifest, const fs::path& dir,
                     std::chrono::steady_clock::time_point t0) {
  const auto dt = std::chrono::steady_clock::now() - t0;
  manifest["wall_seconds"] = std::chrono::duration<double>(dt).count();
  manifest["timestamp_utc"] = []() {
    char buf[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
  }();
  skma::io::write_manifest((dir / "manifest.json").string(), manifest);
}

int cmd_simulate(SimCli& sim, const CLI::App* app, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const skma::SimSpec spec = sim.resolve(app);
  const fs::path dir = prepare_out_dir(out_dir);
  const skma::LabeledDataset data = skma::generate(spec);

  skma::io::write_curves_csv((dir / "curves.csv").string(), data.curves);
  skma::io::write_truth_csv((dir / "truth.csv").string(), data);

  json manifest = base_manifest("simulate", skma::io::sim_spec_to_json(spec));
  manifest["outputs"] = {"curves.csv", "truth.csv"};
  manifest["dataset_digest"] = skma::dataset_digest(data);
  finish_manifest(manifest, dir, t0);
  std::cout << "wrote " << (dir / "curves.csv").string() << " ("
            << data.curves.size() << " curves)\n";
  return 0;
}

int cmd_fit(EngineCli& eng, const CLI::App* app, const std::string& input,
            const std::string& out_dir, bool emit_criterion) {
  const auto t0 = std::chrono::steady_clock::now();
  const skma::EngineConfig cfg = eng.resolve(app);
  const fs::path dir = prepare_out_dir(out_dir);
  const std::vector<skma::SampledCurve> curves = skma::io::read_curves_csv(input);

  const skma::FitResult result = skma::fit(curves, cfg);

  const json config_echo = skma::io::engine_config_to_json(cfg);
  skma::io::write_fit_json((dir / "fit.json").string(), result, config_echo);
  skma::io::write_warps_csv((dir / "warps.csv").string(), result.curve_ids,
                            result.warps);
  skma::io::write_weight_csv((dir / "weight.csv").string(), result.weight);
  skma::io::write_templates_csv((dir / "templates.csv").string(),
                                result.templates);
  skma::io::write_curves_csv((dir / "aligned.csv").string(), result.aligned);
  skma::io::write_history_csv((dir / "history.csv").string(), result.history);
  if (emit_criterion && result.labels.k >= 2) {
    const skma::CriterionProfile g =
        cfg.metric == skma::MetricKind::h1_similarity
            ? skma::wcsim_pointwise(result.aligned, result.labels)
            : (skma::equal_masks(result.aligned)
                   ? skma::bcss_centroid_fast(result.aligned, result.labels)
                   : skma::bcss_pairwise(result.aligned, result.labels));
    skma::io::write_profile_csv((dir / "criterion.csv").string(), g);
  }

  json manifest = base_manifest("fit", config_echo);
  manifest["inputs"] = {input};
  manifest["outputs"] = {"fit.json",      "warps.csv",   "weight.csv",
                         "templates.csv", "aligned.csv", "history.csv"};
  if (emit_criterion) manifest["outputs"].push_back("criterion.csv");
  finish_manifest(manifest, dir, t0);

  std::cout << "fit: " << result.iterations << " iterations, "
            << (result.converged ? "converged" : "hit max_iter") << "\n";
  for (const std::string& wmsg : result.warnings)
    std::cerr << "warning: " << wmsg << "\n";
  return 0;
}

int cmd_tune(EngineCli& eng, const CLI::App* app, const std::string& input,
             const std::string& out_dir, const std::string& k_range) {
  const auto t0 = std::chrono::steady_clock::now();
  const skma::EngineConfig cfg = eng.resolve(app);
  const fs::path dir = prepare_out_dir(out_dir);

  const auto sep = k_range.find("..");
  if (sep == std::string::npos)
    throw UsageError("--k-range must look like 2..4");
  std::size_t k_lo = 0, k_hi = 0;
  try {
    k_lo = std::stoul(k_range.substr(0, sep));
    k_hi = std::stoul(k_range.substr(sep + 2));
  } catch (const std::exception&) {
    throw UsageError("--k-range must look like 2..4");
  }
  if (k_lo > k_hi) throw UsageError("--k-range is reversed");

  const std::vector<skma::SampledCurve> curves = skma::io::read_curves_csv(input);
  const skma::DiagnosticsReport report = skma::tune_k(curves, cfg, k_lo, k_hi);

  skma::io::write_diagnostics_csv((dir / "distances.csv").string(), report);
  skma::io::write_diagnostics_summary_csv((dir / "tune_summary.csv").string(),
                                          report);

  json config_echo = skma::io::engine_config_to_json(cfg);
  config_echo["k_range"] = k_range;
  json manifest = base_manifest("tune", config_echo);
  manifest["inputs"] = {input};
  manifest["outputs"] = {"distances.csv", "tune_summary.csv"};
  finish_manifest(manifest, dir, t0);

  for (const skma::KDiagnostics& d : report.per_k) {
    std::cout << "K=" << d.k << " median=" << skma::io::format_g12(d.median);
    if (std::isfinite(d.p_vs_prev))
      std::cout << " p_vs_prev=" << skma::io::format_g12(d.p_vs_prev);
    std::cout << "\n";
  }
  return 0;
}

int cmd_benchmark(SimCli& sim, EngineCli& eng, const CLI::App* app,
                  const std::string& out_dir, std::size_t runs,
                  const std::string& modes) {
  const auto t0 = std::chrono::steady_clock::now();
  const skma::SimSpec spec = sim.resolve(app);
  skma::EngineConfig cfg = eng.resolve(app);
  // one seed and grid resolution drive both the generator and the engine;
  // per-run engine seeds are derived inside run_benchmark
  cfg.resolution = spec.resolution;
  cfg.seed = spec.seed;
  const fs::path dir = prepare_out_dir(out_dir);

  std::vector<std::pair<std::string, skma::EngineConfig>> configs;
  std::stringstream ms(modes);
  std::string mode;
  while (std::getline(ms, mode, ',')) {
    skma::EngineConfig c = cfg;
    if (mode == "sparse") {
      c.mode = skma::EngineMode::sparse_kma;
    } else if (mode == "kma") {
      c.mode = skma::EngineMode::kma;
    } else {
      throw UsageError("--modes entries must be sparse or kma");
    }
    configs.emplace_back(mode, c);
  }
  if (configs.empty()) throw UsageError("--modes must name at least one mode");
  // comparing modes: both stop on the same criteria
  if (configs.size() > 1)
    for (auto& [name, c] : configs) c.stop_on_weight_change = false;

  const std::vector<skma::BenchmarkEntry> entries =
      skma::run_benchmark(spec, configs, runs);
  skma::io::write_benchmark_csv((dir / "benchmark.csv").string(), entries);

  json config_echo = skma::io::engine_config_to_json(cfg);
  config_echo["runs"] = runs;
  config_echo["modes"] = modes;
  config_echo["sim"] = skma::io::sim_spec_to_json(spec);
  json manifest = base_manifest("benchmark", config_echo);
  manifest["outputs"] = {"benchmark.csv"};
  finish_manifest(manifest, dir, t0);

  for (const skma::BenchmarkEntry& e : entries)
    std::cout << e.label << ": mean misclassification "
              << skma::io::format_g12(e.mean_misclassification) << " over "
              << e.runs << " runs, mean "
              << skma::io::format_g12(e.mean_iterations) << " iterations\n";
  return 0;
}

int cmd_eval(const std::string& fit_path, const std::string& truth_path) {
  const skma::io::FitLabels fit = skma::io::read_fit_labels(fit_path);
  const auto truth_rows = skma::io::read_truth_csv(truth_path);

  std::vector<std::size_t> truth(fit.ids.size());
  std::vector<bool> seen(fit.ids.size(), false);
  for (const auto& [id, label] : truth_rows) {
    for (std::size_t i = 0; i < fit.ids.size(); ++i)
      if (fit.ids[i] == id) {
        truth[i] = label;
        seen[i] = true;
      }
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i])
      throw skma::DataError("truth file lacks curve " + fit.ids[i]);

  const double rate =
      skma::misclassification(skma::Partition(fit.labels, fit.k), truth);
  std::cout << "misclassification " << skma::io::format_g12(rate) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse K-mean alignment: joint sparse clustering and alignment "
               "of functional data"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string out_dir = default_out_dir();
  std::string input;
  std::string k_range = "2..4";
  std::string modes = "sparse";
  std::size_t runs = 20;
  bool emit_criterion = false;

  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
  SimCli sim_cli;
  sim_cli.attach(simulate);
  simulate->add_option("--out", out_dir, "output directory");

  CLI::App* fit = app.add_subcommand("fit", "cluster, align and select the domain");
  EngineCli fit_eng;
  fit_eng.attach(fit);
  fit->add_option("--input", input, "curve CSV")->required();
  fit->add_option("--out", out_dir, "output directory");
  fit->add_flag("--emit-criterion", emit_criterion,
                "also write the final criterion profile");

  CLI::App* tune = app.add_subcommand("tune", "sweep K and report diagnostics");
  EngineCli tune_eng;
  tune_eng.attach(tune);
  tune->add_option("--input", input, "curve CSV")->required();
  tune->add_option("--k-range", k_range, "inclusive range, e.g. 2..4");
  tune->add_option("--out", out_dir, "output directory");

  CLI::App* bench = app.add_subcommand("benchmark", "seeded simulation benchmark");
  SimCli bench_sim;
  bench_sim.attach(bench);
  EngineCli bench_eng;
  bench_eng.attach(bench, /*shared_seed_resolution=*/true);
  bench->add_option("--runs", runs, "number of seeded runs")
      ->check(CLI::PositiveNumber);
  bench->add_option("--modes", modes, "comma list of sparse,kma");
  bench->add_option("--out", out_dir, "output directory");

  CLI::App* eval = app.add_subcommand("eval", "misclassification of a fit");
  std::string fit_doc, truth_csv;
  eval->add_option("--fit", fit_doc, "fit.json from the fit command")->required();
  eval->add_option("--truth", truth_csv, "truth CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_cli, simulate, out_dir);
    if (fit->parsed()) return cmd_fit(fit_eng, fit, input, out_dir, emit_criterion);
    if (tune->parsed()) return cmd_tune(tune_eng, tune, input, out_dir, k_range);
    if (bench->parsed())
      return cmd_benchmark(bench_sim, bench_eng, bench, out_dir, runs, modes);
    if (eval->parsed()) return cmd_eval(fit_doc, truth_csv);
    std::cerr << "no subcommand\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const skma::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const skma::Error& e) {
    std::cerr << "engine error: " << e.what() << "\n";
    return kExitEngine;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEngine;
  }
}
