#include "skma/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace skma::io {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

double parse_double(const std::string& s, const std::string& path,
                    std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw DataError(path + ":" + std::to_string(line_no) + ": bad number '" + s +
                    "'");
  return v;
}

std::size_t parse_index(const std::string& s, const std::string& path,
                        std::size_t line_no) {
  char* end = nullptr;
  const unsigned long v = std::strtoul(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw DataError(path + ":" + std::to_string(line_no) + ": bad integer '" + s +
                    "'");
  return static_cast<std::size_t>(v);
}

// 12 significant digits, rounded through the same text form that files use,
// so the JSON document and the CSVs agree.
double round_g12(double v) {
  if (!std::isfinite(v)) return v;
  return std::strtod(format_g12(v).c_str(), nullptr);
}

json warp_json(const AffineWarp& h) {
  return json{{"a", round_g12(h.a)}, {"b", round_g12(h.b)}};
}

std::vector<double> rounded(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = round_g12(v[i]);
  return out;
}

}  // namespace

std::string format_g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw DataError("cannot rename " + tmp + " to " + path);
}

std::vector<SampledCurve> read_curves_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  {
    const auto header = split_csv_line(line);
    if (header != std::vector<std::string>{"curve_id", "dim", "x", "value"})
      throw DataError(path + ": expected header curve_id,dim,x,value");
  }

  struct Raw {
    std::map<std::size_t, std::vector<std::pair<double, double>>> dims;
  };
  std::vector<std::string> order;
  std::map<std::string, Raw> raw;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4)
      throw DataError(path + ":" + std::to_string(line_no) + ": expected 4 fields");
    if (f[3].empty())
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": absent values must be encoded by omitting the row");
    const std::string& id = f[0];
    if (raw.find(id) == raw.end()) order.push_back(id);
    raw[id].dims[parse_index(f[1], path, line_no)].emplace_back(
        parse_double(f[2], path, line_no), parse_double(f[3], path, line_no));
  }

  std::vector<SampledCurve> curves;
  curves.reserve(order.size());
  for (const std::string& id : order) {
    Raw& r = raw[id];
    const std::size_t dims = r.dims.size();
    for (std::size_t d = 0; d < dims; ++d)
      if (r.dims.find(d) == r.dims.end())
        throw DataError(path + ": curve " + id + " lacks dim " + std::to_string(d));

    std::vector<std::vector<double>> values(dims);
    UniformGrid grid(0.0, 1.0, 2);
    for (std::size_t d = 0; d < dims; ++d) {
      auto& pts = r.dims[d];
      std::stable_sort(pts.begin(), pts.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      const std::size_t m = pts.size();
      if (m < 2)
        throw DataError(path + ": curve " + id + " has fewer than 2 samples");
      if (d == 0) {
        const double step =
            (pts.back().first - pts.front().first) / static_cast<double>(m - 1);
        if (!(step > 0.0))
          throw DataError(path + ": curve " + id + " has duplicate abscissas");
        for (std::size_t j = 1; j < m; ++j) {
          const double dx = pts[j].first - pts[j - 1].first;
          if (std::fabs(dx - step) > 1e-6 * step)
            throw DataError(path + ": curve " + id +
                            " is not uniformly sampled (or has interior gaps)");
        }
        grid = UniformGrid(pts.front().first, step, m);
      } else if (pts.size() != values[0].size()) {
        throw DataError(path + ": curve " + id + " dims disagree on sample count");
      }
      values[d].reserve(m);
      for (const auto& [x, v] : pts) {
        (void)x;
        values[d].push_back(v);
      }
    }
    curves.push_back(SampledCurve::from_values(id, grid, std::move(values)));
  }
  if (curves.empty()) throw DataError(path + ": no curves");
  return curves;
}

void write_curves_csv(const std::string& path,
                      const std::vector<SampledCurve>& curves) {
  std::ostringstream out;
  out << "curve_id,dim,x,value\n";
  for (const SampledCurve& c : curves)
    for (std::size_t d = 0; d < c.dims(); ++d)
      for (std::size_t j = 0; j < c.grid().count; ++j) {
        const double v = c.dim(d)[j];
        if (is_missing(v)) continue;
        out << c.id() << ',' << d << ',' << format_g12(c.grid().x(j)) << ','
            << format_g12(v) << '\n';
      }
  write_file_atomic(path, out.str());
}

void write_truth_csv(const std::string& path, const LabeledDataset& data) {
  std::ostringstream out;
  out << "curve_id,true_label,true_a,true_b\n";
  for (std::size_t i = 0; i < data.curves.size(); ++i)
    out << data.curves[i].id() << ',' << data.true_labels[i] + 1 << ','
        << format_g12(data.true_warps[i].a) << ','
        << format_g12(data.true_warps[i].b) << '\n';
  write_file_atomic(path, out.str());
}

std::vector<std::pair<std::string, std::size_t>> read_truth_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "curve_id" || header[1] != "true_label")
    throw DataError(path + ": expected header curve_id,true_label,...");

  std::vector<std::pair<std::string, std::size_t>> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() < 2)
      throw DataError(path + ":" + std::to_string(line_no) + ": expected 2+ fields");
    const std::size_t label = parse_index(f[1], path, line_no);
    if (label == 0)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": labels are 1-based");
    out.emplace_back(f[0], label - 1);
  }
  return out;
}

void write_warps_csv(const std::string& path, const std::vector<std::string>& ids,
                     const std::vector<AffineWarp>& warps) {
  std::ostringstream out;
  out << "curve_id,a,b\n";
  for (std::size_t i = 0; i < warps.size(); ++i)
    out << ids[i] << ',' << format_g12(warps[i].a) << ',' << format_g12(warps[i].b)
        << '\n';
  write_file_atomic(path, out.str());
}

void write_weight_csv(const std::string& path, const WeightFunction& w) {
  std::ostringstream out;
  out << "x,w\n";
  for (std::size_t j = 0; j < w.grid.count; ++j)
    out << format_g12(w.grid.x(j)) << ',' << format_g12(w.values[j]) << '\n';
  write_file_atomic(path, out.str());
}

void write_profile_csv(const std::string& path, const CriterionProfile& g) {
  std::ostringstream out;
  out << "x,g\n";
  for (std::size_t j = 0; j < g.grid.count; ++j)
    out << format_g12(g.grid.x(j)) << ',' << format_g12(g.values[j]) << '\n';
  write_file_atomic(path, out.str());
}

void write_templates_csv(const std::string& path,
                         const std::vector<Template>& templates) {
  std::ostringstream out;
  out << "cluster,dim,x,value\n";
  for (const Template& t : templates) {
    if (!t.curve.has_value()) continue;
    const SampledCurve& c = *t.curve;
    for (std::size_t d = 0; d < c.dims(); ++d)
      for (std::size_t j = 0; j < c.grid().count; ++j) {
        const double v = c.dim(d)[j];
        if (is_missing(v)) continue;
        out << t.cluster + 1 << ',' << d << ',' << format_g12(c.grid().x(j)) << ','
            << format_g12(v) << '\n';
      }
  }
  write_file_atomic(path, out.str());
}

void write_history_csv(const std::string& path,
                       const std::vector<IterationRecord>& history) {
  std::ostringstream out;
  out << "iteration,objective,mean_distance,mean_weight_change,labels_changed\n";
  for (std::size_t i = 0; i < history.size(); ++i)
    out << i + 1 << ',' << format_g12(history[i].objective) << ','
        << format_g12(history[i].mean_distance) << ','
        << format_g12(history[i].mean_weight_change) << ','
        << history[i].labels_changed << '\n';
  write_file_atomic(path, out.str());
}

void write_diagnostics_csv(const std::string& path,
                           const DiagnosticsReport& report) {
  std::ostringstream out;
  out << "k,value\n";
  for (const KDiagnostics& d : report.per_k)
    for (double v : d.within) out << d.k << ',' << format_g12(v) << '\n';
  write_file_atomic(path, out.str());
}

void write_diagnostics_summary_csv(const std::string& path,
                                   const DiagnosticsReport& report) {
  std::ostringstream out;
  out << "k,n,median,p_vs_prev,iterations,converged\n";
  for (const KDiagnostics& d : report.per_k) {
    out << d.k << ',' << d.within.size() << ',' << format_g12(d.median) << ',';
    if (std::isfinite(d.p_vs_prev)) out << format_g12(d.p_vs_prev);
    out << ',' << d.iterations << ',' << (d.converged ? 1 : 0) << '\n';
  }
  write_file_atomic(path, out.str());
}

void write_benchmark_csv(const std::string& path,
                         const std::vector<BenchmarkEntry>& entries) {
  std::ostringstream out;
  out << "mode,runs,mean_misclassification,sd_misclassification,mean_iterations,"
         "mean_seconds,converged_runs,weight_violations,step_violations,"
         "max_dips_per_fit,max_normalization_residual,dataset_digest\n";
  for (const BenchmarkEntry& e : entries) {
    out << e.label << ',' << e.runs << ',' << format_g12(e.mean_misclassification)
        << ',';
    if (std::isfinite(e.sd_misclassification))
      out << format_g12(e.sd_misclassification);
    out << ',' << format_g12(e.mean_iterations) << ',' << format_g12(e.mean_seconds)
        << ',' << e.converged_runs << ','
        << e.aggregated.weight_constraint_violations << ','
        << e.aggregated.warp_step_violations + e.aggregated.assign_step_violations +
               e.aggregated.weight_step_violations
        << ',' << e.max_dips_per_fit << ','
        << format_g12(e.aggregated.max_normalization_residual) << ','
        << std::hex << e.dataset_digest << std::dec << '\n';
  }
  write_file_atomic(path, out.str());
}

nlohmann::json engine_config_to_json(const EngineConfig& cfg) {
  return json{{"k", cfg.k},
              {"metric", cfg.metric == MetricKind::h1_similarity ? "h1" : "l2"},
              {"m", round_g12(cfg.m)},
              {"eps_a", round_g12(cfg.bounds.eps_a)},
              {"eps_b", round_g12(cfg.bounds.eps_b)},
              {"tol", round_g12(cfg.tol)},
              {"max_iter", cfg.max_iter},
              {"resolution", cfg.resolution},
              {"seed", cfg.seed},
              {"mode", cfg.mode == EngineMode::kma ? "kma" : "sparse"},
              {"robust_templates", cfg.robust_templates},
              {"stop_on_weight_change", cfg.stop_on_weight_change},
              {"loess_span", round_g12(cfg.loess_span)},
              {"jobs", cfg.jobs}};
}

EngineConfig engine_config_from_json(const nlohmann::json& j) {
  EngineConfig cfg;
  if (j.contains("k")) cfg.k = j.at("k").get<std::size_t>();
  if (j.contains("metric")) {
    const std::string m = j.at("metric").get<std::string>();
    if (m == "l2")
      cfg.metric = MetricKind::l2_distance;
    else if (m == "h1")
      cfg.metric = MetricKind::h1_similarity;
    else
      throw DataError("config: metric must be l2 or h1");
  }
  if (j.contains("m")) cfg.m = j.at("m").get<double>();
  double ea = cfg.bounds.eps_a, eb = cfg.bounds.eps_b;
  if (j.contains("eps_a")) ea = j.at("eps_a").get<double>();
  if (j.contains("eps_b")) eb = j.at("eps_b").get<double>();
  cfg.bounds = WarpBounds(ea, eb);
  if (j.contains("tol")) cfg.tol = j.at("tol").get<double>();
  if (j.contains("max_iter")) cfg.max_iter = j.at("max_iter").get<std::size_t>();
  if (j.contains("resolution"))
    cfg.resolution = j.at("resolution").get<std::size_t>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("mode")) {
    const std::string m = j.at("mode").get<std::string>();
    if (m == "sparse")
      cfg.mode = EngineMode::sparse_kma;
    else if (m == "kma")
      cfg.mode = EngineMode::kma;
    else
      throw DataError("config: mode must be sparse or kma");
  }
  if (j.contains("robust_templates"))
    cfg.robust_templates = j.at("robust_templates").get<bool>();
  if (j.contains("stop_on_weight_change"))
    cfg.stop_on_weight_change = j.at("stop_on_weight_change").get<bool>();
  if (j.contains("loess_span")) cfg.loess_span = j.at("loess_span").get<double>();
  if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<std::size_t>();
  return cfg;
}

nlohmann::json sim_spec_to_json(const SimSpec& spec) {
  return json{{"scenario", spec.scenario == Scenario::sim1 ? "sim1" : "sim2"},
              {"n_per_class", spec.n_per_class},
              {"q_mean", round_g12(spec.q_mean)},
              {"q_sd", round_g12(spec.q_sd)},
              {"a_lo", round_g12(spec.a_range.lo)},
              {"a_hi", round_g12(spec.a_range.hi)},
              {"b_lo", round_g12(spec.b_range.lo)},
              {"b_hi", round_g12(spec.b_range.hi)},
              {"phase_cluster_shift", round_g12(spec.phase_cluster_shift)},
              {"resolution", spec.resolution},
              {"seed", spec.seed}};
}

SimSpec sim_spec_from_json(const nlohmann::json& j) {
  const std::string sc = j.value("scenario", "sim1");
  SimSpec spec;
  if (sc == "sim1")
    spec = SimSpec::defaults(Scenario::sim1);
  else if (sc == "sim2")
    spec = SimSpec::defaults(Scenario::sim2);
  else
    throw DataError("scenario must be sim1 or sim2");
  if (j.contains("n_per_class"))
    spec.n_per_class = j.at("n_per_class").get<std::size_t>();
  if (j.contains("q_mean")) spec.q_mean = j.at("q_mean").get<double>();
  if (j.contains("q_sd")) spec.q_sd = j.at("q_sd").get<double>();
  if (j.contains("a_lo")) spec.a_range.lo = j.at("a_lo").get<double>();
  if (j.contains("a_hi")) spec.a_range.hi = j.at("a_hi").get<double>();
  if (j.contains("b_lo")) spec.b_range.lo = j.at("b_lo").get<double>();
  if (j.contains("b_hi")) spec.b_range.hi = j.at("b_hi").get<double>();
  if (j.contains("phase_cluster_shift"))
    spec.phase_cluster_shift = j.at("phase_cluster_shift").get<double>();
  if (j.contains("resolution"))
    spec.resolution = j.at("resolution").get<std::size_t>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
  return spec;
}

void write_fit_json(const std::string& path, const FitResult& result,
                    const nlohmann::json& config_echo) {
  json doc;
  doc["schema"] = "sparse-kma/v1";
  doc["config"] = config_echo;
  doc["grid"] = json{{"start", round_g12(result.grid.start)},
                     {"step", round_g12(result.grid.step)},
                     {"count", result.grid.count}};
  doc["curve_ids"] = result.curve_ids;

  std::vector<std::size_t> labels;
  labels.reserve(result.labels.labels.size());
  for (std::size_t l : result.labels.labels) labels.push_back(l + 1);
  doc["labels"] = labels;
  doc["k"] = result.labels.k;

  json warps = json::array();
  for (const AffineWarp& h : result.warps) warps.push_back(warp_json(h));
  doc["warps"] = warps;

  doc["weight"] = rounded(result.weight.values);
  doc["weight_m_fraction"] = round_g12(result.weight.m_fraction);

  json templates = json::array();
  for (const Template& t : result.templates) {
    json tj;
    tj["cluster"] = t.cluster + 1;
    if (t.curve.has_value()) {
      json dims = json::array();
      for (std::size_t d = 0; d < t.curve->dims(); ++d) {
        json vals = json::array();
        for (double v : t.curve->dim(d))
          vals.push_back(is_missing(v) ? json() : json(round_g12(v)));
        dims.push_back(vals);
      }
      tj["dims"] = dims;
    }
    templates.push_back(tj);
  }
  doc["templates"] = templates;

  json history = json::array();
  for (const IterationRecord& h : result.history)
    history.push_back(json{{"objective", round_g12(h.objective)},
                           {"mean_distance", round_g12(h.mean_distance)},
                           {"mean_weight_change", round_g12(h.mean_weight_change)},
                           {"labels_changed", h.labels_changed}});
  doc["history"] = history;
  doc["iterations"] = result.iterations;
  doc["converged"] = result.converged;
  doc["counters"] =
      json{{"warp_step_violations", result.counters.warp_step_violations},
           {"assign_step_violations", result.counters.assign_step_violations},
           {"weight_step_violations", result.counters.weight_step_violations},
           {"weight_constraint_violations",
            result.counters.weight_constraint_violations},
           {"objective_dips", result.counters.objective_dips},
           {"empty_overlap_pairs", result.counters.empty_overlap_pairs},
           {"degenerate_warps", result.counters.degenerate_warps},
           {"max_normalization_residual",
            round_g12(result.counters.max_normalization_residual)}};
  doc["warnings"] = result.warnings;

  write_file_atomic(path, doc.dump(2) + "\n");
}

FitLabels read_fit_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  if (doc.value("schema", "") != "sparse-kma/v1")
    throw DataError(path + ": unsupported schema");
  FitLabels out;
  out.ids = doc.at("curve_ids").get<std::vector<std::string>>();
  for (std::size_t l : doc.at("labels").get<std::vector<std::size_t>>()) {
    if (l == 0) throw DataError(path + ": labels are 1-based");
    out.labels.push_back(l - 1);
  }
  out.k = doc.at("k").get<std::size_t>();
  if (out.ids.size() != out.labels.size())
    throw DataError(path + ": ids and labels disagree");
  return out;
}

void write_manifest(const std::string& path, const nlohmann::json& manifest) {
  write_file_atomic(path, manifest.dump(2) + "\n");
}

}  // namespace skma::io
