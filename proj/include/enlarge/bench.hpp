#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "enlarge/reg_types.hpp"

namespace enlarge {

enum class Task { Density, Regression };
enum class Generator {
  DensitySynth,
  RegToy,
  RegSynthY,
  RegSynthXY,
  CsvBenchY,
  CsvBenchXY,
};
enum class ContaminateMode { YOnly, XY };

/// Declarative experiment configuration.
struct ExperimentSpec {
  Task task = Task::Regression;
  Generator generator = Generator::RegSynthY;
  int n_train = 100;
  int n_test = 1000;
  int d = 5;
  double contamination = 0.0;
  std::vector<double> gammas = {0.1};
  std::vector<std::string> methods = {"S_power"};
  int replications = 100;
  std::uint64_t seed = 0;
  std::string csv_path;
  std::string target_column;
};

struct ResultRow {
  std::string method;
  double gamma;  // NaN for methods without a gamma
  double contamination;
  double rmse_mean, rmse_std;
  double ratio_mean, ratio_std;  // estimated 1 - c_hat
  double precision, recall;
  int failures = 0;
  int replications = 0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
};

// --- Synthetic generators (second argument of N(mu, v) is a variance) ---

struct DensityGen {
  SampleSet samples;
  std::vector<int> plant;
};

/// n draws from N_2(0, I); exactly floor(ratio n) randomly chosen samples
/// are replaced component-wise by N(10, 10^2) draws.
DensityGen gen_density_synth(std::uint64_t seed, int n, double ratio);

struct RegGen {
  RegData data;
  std::vector<int> plant;
};

/// Toy model y = 1 + 10 x + N(0, 1), x ~ N(0, 1); exactly floor(ratio n)
/// outliers get x ~ N(1, 0.8^2) and y = |N(0, 70^2)|.
RegGen gen_reg_toy(std::uint64_t seed, int n, double ratio);

struct RegSynthGen {
  RegData train;
  RegData test;  // clean
  std::vector<int> plant;
  RegParams true_params;
};

/// y = x^T theta_0 + N(0, 1/4) with theta_0 ~ N_d(0, I) and x uniform on
/// [0,1]^d.  Contaminated y is resampled from N(0, 10^8); in XY mode each
/// x coordinate is additionally resampled from N(0, 10^4).
RegSynthGen gen_reg_synth(std::uint64_t seed, int n, int n_test, int d,
                          double ratio, ContaminateMode mode);

/// Benchmark-style seeding: selected rows get y * 1e4, and x * 1e2 in XY mode.
RegGen contaminate_csv(const RegData& data, std::uint64_t seed, double ratio,
                       ContaminateMode mode);

/// Flat key = value config file mirroring ExperimentSpec.
ExperimentSpec parse_spec_file(const std::string& path);
ExperimentSpec parse_spec_text(const std::string& text);

ResultTable run_experiment(const ExperimentSpec& spec);

std::string result_table_to_csv(const ResultTable& table);

/// JSON summary: spec echo, design-decision defaults, and the result rows.
std::string experiment_summary_json(const ExperimentSpec& spec,
                                    const ResultTable& table);

/// True when every cell failed in every replication.
bool all_methods_failed(const ResultTable& table);

}  // namespace enlarge
