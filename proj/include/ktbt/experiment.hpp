#pragma once

// Experiment configuration, orchestration and report writing.
//
// Configuration files are flat `key=value` text. Several pairs may share a
// line separated by whitespace; `#` starts a comment.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ktbt/sar.hpp"

namespace ktbt {

enum class Study : std::uint8_t { None, Compare, Opportunities, CommRange, Heterogeneity };

const char* to_string(Study s);

struct ExperimentSpec {
  SimConfig config;
  Study study = Study::None;
  /// Variant names for Compare (bl1, bl2, ktbt), per-color target counts for
  /// Opportunities, ranges for CommRange. Empty otherwise.
  std::vector<std::string> study_values;
  std::filesystem::path output_dir = "out";
};

/// Thrown for malformed configuration text; the message names the key and line.
class ConfigParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

ExperimentSpec parse_config(std::istream& in);
ExperimentSpec load_config(const std::filesystem::path& path);

struct Variant {
  std::string name;
  SimConfig config;
};

/// The study's variants in report order. A spec with Study::None yields a
/// single variant named "run".
std::vector<Variant> expand_variants(const ExperimentSpec& spec);

struct VariantResult {
  Variant variant;
  /// Indexed by trial.
  std::vector<TrialResult> trials;
};

struct ExperimentReport {
  std::vector<VariantResult> variants;
  std::string summary;
};

/// Worker count: KTBT_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

/// Runs every (variant, trial) job. Results are ordered by variant then trial
/// regardless of scheduling.
std::vector<VariantResult> run_variants(const std::vector<Variant>& variants, unsigned workers);

/// Runs the study and writes per-trial CSVs, per-variant aggregate CSVs and
/// summary.txt under spec.output_dir.
ExperimentReport run_experiment(const ExperimentSpec& spec);

/// The per-trial CSV, header included.
std::string trial_csv(const TrialResult& trial);
/// Mean over trials on the common sampling grid. Trials that ended early
/// contribute their final row to later grid points.
std::string aggregate_csv(const std::vector<TrialResult>& trials, Tick sample_interval);

struct MeanSd {
  double mean = 0.0;
  /// Sample standard deviation (n - 1); zero for a single value.
  double sd = 0.0;
};
MeanSd mean_sd(const std::vector<double>& values);

/// Ticks to reach 99% collection, counting a trial that never got there as
/// its full iteration budget.
double censored_ticks_to_99(const TrialResult& trial, const SimConfig& config);

std::string summarize(const ExperimentSpec& spec, const std::vector<VariantResult>& results);

}  // namespace ktbt
