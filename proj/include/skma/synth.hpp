#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "skma/curve.hpp"
#include "skma/engine.hpp"
#include "skma/partition.hpp"
#include "skma/warp.hpp"

namespace skma {

enum class Scenario { sim1, sim2 };

// Closed range for warp parameter draws; lo == hi pins the value.
struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;
};

// Synthetic-data generator settings. Per-curve draws come from
// Rng::stream(seed, curve_index) in the fixed order q, a, b, so datasets
// are reproducible curve by curve.
struct SimSpec {
  Scenario scenario = Scenario::sim1;
  std::size_t n_per_class = 100;
  double q_mean = 1.0;
  double q_sd = 0.15;
  ParamRange a_range{0.9, 1.1};
  ParamRange b_range{-0.1, 0.1};
  // sim2 only: offset added to class-2 shift draws, inducing a mild phase
  // clustering on top of the amplitude difference
  double phase_cluster_shift = 0.15;
  std::size_t resolution = 200;
  std::uint64_t seed = 0;

  static SimSpec defaults(Scenario s);
};

struct LabeledDataset {
  std::vector<SampledCurve> curves;
  std::vector<std::size_t> true_labels;  // 0-based
  std::vector<AffineWarp> true_warps;    // generating warps h_i
};

// Class means evaluated analytically; NaN outside the mean's domain.
double sim1_mean(std::size_t cls, double y);
double sim2_mean(std::size_t cls, double y);

LabeledDataset gen_sim1(const SimSpec& spec);
LabeledDataset gen_sim2(const SimSpec& spec);
LabeledDataset generate(const SimSpec& spec);

// FNV-1a over ids, sample bits and labels; equal digests certify that two
// benchmark arms saw the same data.
std::uint64_t dataset_digest(const LabeledDataset& data);

// Minimum over label permutations of the mismatch fraction. Label counts
// may differ; the permutation space is padded to the larger K.
double misclassification(const Partition& estimated,
                         const std::vector<std::size_t>& truth);

struct BenchmarkEntry {
  std::string label;
  std::size_t runs = 0;
  double mean_misclassification = 0.0;
  double sd_misclassification = 0.0;  // NaN when runs == 1
  double mean_iterations = 0.0;
  double mean_seconds = 0.0;
  std::size_t converged_runs = 0;
  std::size_t max_dips_per_fit = 0;
  StepCounters aggregated;  // violation counts summed, residuals maxed
  std::uint64_t dataset_digest = 0;  // combined across runs
  std::vector<double> misclassification_runs;
  std::vector<std::size_t> iterations_runs;
};

// Fresh dataset and fit per run with derived seeds; every config sees the
// same datasets (paired design).
std::vector<BenchmarkEntry> run_benchmark(
    const SimSpec& spec,
    const std::vector<std::pair<std::string, EngineConfig>>& configs,
    std::size_t runs);

BenchmarkEntry run_benchmark(const SimSpec& spec, const EngineConfig& config,
                             std::size_t runs);

}  // namespace skma
