#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bandlab/stats.hpp"

namespace bandlab {

enum class ExperimentKind {
  decay,
  fluctuations,
  lemma21,
  lemma22,
  decomposition,
  conjecture_scan,
  selftest,
  sample,
};

std::string kind_name(ExperimentKind kind);
ExperimentKind kind_from_name(const std::string& name);  // ConfigError

// Declarative experiment description.  The standing hypothesis |lambda| <
// 1/epsilon is enforced by validate_config.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::selftest;
  std::vector<int> M_list;
  std::vector<int> N_list;
  double lambda = 0.0;
  double epsilon = 0.25;
  int replicas = 0;  // required; no default
  std::uint64_t master_seed = 1;
  std::string output_dir = "out";
  int workers = 0;  // 0 = BANDLAB_WORKERS env, else hardware concurrency
};

// Fills M_list / N_list with the desk-scale defaults of the given kind when
// they are empty.  Never overrides explicit lists.
void apply_kind_defaults(ExperimentConfig& cfg);

// Throws ConfigError naming the offending field.
void validate_config(const ExperimentConfig& cfg);

// One output row.  replica == -1 marks a summary row (its seed is the master
// seed).  Statistics are an ordered list so output is byte-stable.
struct ResultRecord {
  std::string experiment;
  long long replica = -1;
  std::uint64_t seed = 0;
  int M = 0;
  int N = 0;
  std::vector<std::pair<std::string, double>> stats;
  int flags = 0;  // resample count for this replica

  void add(const std::string& name, double value) {
    stats.emplace_back(name, value);
  }
};

// Monte Carlo verification of the full-matrix estimates: Wegner counting
// ratio, inverse-Frobenius tails, the trace inner-product identity, the
// operator-norm tail, and the conjugated-Frobenius small-value frequency,
// for H in {0, I, fixed symmetric Gaussian draw, rank-one}.
std::vector<ResultRecord> run_lemma21(const ExperimentConfig& cfg);

// Frequencies of the four mid-chain bracket events on ||A_{k+1,k+1}||_F,
// ||B_k^T D_k^{-1} B_k||_F, and the two trace bounds.
std::vector<ResultRecord> run_lemma22(const ExperimentConfig& cfg);

// Conditional variance of log S_k at the mid-chain index via the exact 1-D
// density, with quantiles and growth-inequality frequencies per M.
std::vector<ResultRecord> run_fluctuations(const ExperimentConfig& cfg);

// Log-log slope of mean conditional variance against M with a replica
// bootstrap confidence interval.
std::vector<ResultRecord> run_conjecture_scan(const ExperimentConfig& cfg);

// Corner-block decay: per-(M,N) mean log norm, the (1-eps)-moment proxy,
// and the per-M fitted decay rate.
std::vector<ResultRecord> run_decay(const ExperimentConfig& cfg);

// Variance decomposition: total variance of the corner log norm against the
// summed conditional variances over even mid indices.
std::vector<ResultRecord> run_decomposition(const ExperimentConfig& cfg);

// Deterministic oracle/analytic checks (trigamma identities, chi radial
// law, corner oracle agreement, derivative finite differences).
std::vector<ResultRecord> run_selftest(const ExperimentConfig& cfg);

// Samples band matrices and reports block norms and the corner log norm.
std::vector<ResultRecord> run_sample(const ExperimentConfig& cfg);

// Dispatch on cfg.kind.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& cfg);

// Total resamples and exclusions across records (flags accounting).
struct RunTotals {
  long long resamples = 0;
  long long exclusions = 0;
};
RunTotals tally(const std::vector<ResultRecord>& records);

}  // namespace bandlab
