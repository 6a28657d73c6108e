#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stripspec/channels.hpp"
#include "stripspec/model.hpp"
#include "stripspec/types.hpp"

namespace stripspec {

// Per-sample stream key, injective in the index; re-running any subset of a
// plan reproduces its potentials bit for bit.
uint64_t seed_plan(uint64_t master_seed, int sample_index);

struct EnsembleConfig {
  int num_samples = 1;
  int N = 0;                        // trajectory length, sites 0..N-1
  int m = 0;                        // recursion start index, N > m
  std::vector<double> lambda_grid;  // strictly increasing, one channel split on the hull
  uint64_t master_seed = 0;
  int threads = 1;
};

struct BoundRecord {
  std::string name;
  double theoretical = 0.0;
  double empirical = 0.0;
  double margin = 0.0;  // theoretical - empirical
  bool pass = false;
};

struct EnsembleTables {
  std::vector<int> sites;          // m..N-1
  std::vector<double> x4_mean;     // per-site mean of ||X||^4 over samples and grid
  std::vector<double> x4_stderr;   // standard error of that mean
  std::vector<double> cw_partial;  // perturbation partial sums at the worst grid point
  std::vector<double> trunc_freq;  // per-site truncation frequency
  std::vector<double> trunc_bound; // per-site Chebyshev bound, capped at 1
};

// Record names: z_contraction, dinv_decay, x_fourth_moment,
// perturbation_sum_convergence (summable specs only), truncation_frequency,
// failed_trajectories.
struct BoundReport {
  std::vector<BoundRecord> bounds;
  EnsembleTables tables;
  GapEstimate gap;
  double threshold = 0.0;  // potential norm level of the truncation indicator
  long failed = 0;         // failed (sample, lambda) trajectories, recorded not fatal
  long total = 0;
  bool pass = false;       // every record passed
};

// Runs the Schur recursion on the indicator-truncated potential for every
// (sample, lambda) pair and aggregates the trajectory statistics behind the
// contraction, moment, perturbation-sum, and truncation-frequency bounds.
// Samples run in parallel; merges are applied in sample order, so results are
// independent of the thread count.
BoundReport ensemble_run(const OperatorModel& model, const EnsembleConfig& config);

}  // namespace stripspec
