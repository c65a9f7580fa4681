#pragma once

// Experiment runner: methods × seeds on generated problems, CSV traces and
// summaries.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qnlab/driver.hpp"

namespace qnlab {

struct MethodSpec {
  StrategyConfig config;
  ScalarMode mode = ScalarMode::native();
};

struct ExperimentConfig {
  std::string name;
  /// The seed field is replaced by each entry of `seeds`.
  SpectrumSpec problem;
  /// When set, every seed runs on this problem instead of a generated one.
  std::optional<QuadraticProblem> fixed_problem;
  std::vector<MethodSpec> methods;
  bool x0_random = false;
  RunOptions opts;
  std::vector<std::uint64_t> seeds;
  /// Digits of a PCG reference run whose iterates every method is compared to.
  std::optional<unsigned> oracle_digits;
  std::string out_dir;
  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
};

struct SummaryRow {
  std::string method;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  double final_grad_norm = 0.0;
  std::optional<double> max_dev_oracle;
  bool breakdown = false;
  RunStatus status = RunStatus::max_iter;
  std::string reason;
};

struct ExperimentResult {
  std::vector<Trace> traces;  // method-major, then seed
  std::vector<SummaryRow> summary;
  std::vector<Trace> oracle_traces;

  bool any_breakdown() const;
  /// Median iterations of a method over seeds.
  double median_iterations(const std::string& method) const;
};

/// Runs every (method, seed) pair on a worker pool. Results do not depend on
/// scheduling.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes one trace CSV per (method, seed), summary.csv and medians.csv into
/// cfg.out_dir. Throws InvalidInput when the directory is unwritable.
void write_experiment(const ExperimentConfig& cfg, const ExperimentResult& result);

/// max_i ‖x_i^A − x_i^B‖ over the common prefix of recorded iterates.
/// Throws InvalidInput when either trace has no iterates.
double compare_to_oracle(const Trace& a, const Trace& b);

extern const char* const kTraceHeader;
void write_trace_csv(std::ostream& os, const Trace& trace);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);
void write_medians_csv(std::ostream& os, const ExperimentResult& result);

/// Named presets: fig1, fig2, fig3, fig4. Each may expand to several
/// experiments (for example one per problem size).
std::vector<ExperimentConfig> preset(const std::string& name, const std::string& out_root);

/// Label-friendly method constructors used by presets and tests.
StrategyConfig method_pcg();
StrategyConfig method_bfgs();
StrategyConfig method_dfp();
StrategyConfig method_mup(const RhoSchedule& rho);
StrategyConfig method_lc(std::size_t m, MemoryPolicy policy);
StrategyConfig method_sympcgs(std::size_t m, MemoryPolicy policy);
StrategyConfig method_lbfgs(std::size_t m, MemoryPolicy policy);

/// Median of a nonempty sample.
double median(std::vector<double> v);

/// Replaces characters unsafe in file names.
std::string sanitize_label(const std::string& label);

}  // namespace qnlab
