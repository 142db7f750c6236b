#include "enlarge/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "enlarge/baselines.hpp"
#include "enlarge/csv.hpp"
#include "enlarge/enlarged_density.hpp"
#include "enlarge/regression.hpp"
#include "enlarge/rng.hpp"

namespace enlarge {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<int> bernoulli_plant(Rng& rng, int n, double ratio) {
  std::vector<int> plant;
  std::bernoulli_distribution pick(ratio);
  for (int i = 0; i < n; ++i) {
    if (ratio > 0.0 && pick(rng)) plant.push_back(i);
  }
  return plant;
}

// "randomly chosen" protocols replace exactly floor(ratio * n) samples
std::vector<int> exact_plant(Rng& rng, int n, double ratio) {
  const int k = static_cast<int>(std::floor(ratio * n));
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<int> plant(idx.begin(), idx.begin() + k);
  std::sort(plant.begin(), plant.end());
  return plant;
}

struct Accum {
  std::vector<double> rmse, ratio, precision, recall;
  int failures = 0;

  static double mean(const std::vector<double>& v) {
    if (v.empty()) return kNaN;
    return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  }
  static double stdev(const std::vector<double>& v) {
    if (v.empty()) return kNaN;
    if (v.size() == 1) return 0.0;
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / (v.size() - 1));
  }
};

struct Cell {
  std::string method;
  double gamma;  // NaN when not applicable
  Accum acc;
};

void score_detection(const std::vector<int>& detected, const std::vector<int>& plant,
                     Accum* acc) {
  if (plant.empty()) return;
  std::set<int> truth(plant.begin(), plant.end());
  int hit = 0;
  for (int i : detected) hit += truth.count(i) ? 1 : 0;
  if (!detected.empty()) {
    acc->precision.push_back(static_cast<double>(hit) / detected.size());
  }
  acc->recall.push_back(static_cast<double>(hit) / plant.size());
}

ContaminateMode mode_of(Generator g) {
  return (g == Generator::RegSynthXY || g == Generator::CsvBenchXY)
             ? ContaminateMode::XY
             : ContaminateMode::YOnly;
}

/// Column mean/scale standardization of features, statistics from the
/// training split.
void standardize_features(RegData* train, RegData* test) {
  const int d = train->dim();
  for (int j = 0; j < d; ++j) {
    const double m = train->x.col(j).mean();
    double sd = std::sqrt((train->x.col(j).array() - m).square().sum() /
                          std::max(train->n() - 1, 1));
    if (!(sd > 0.0)) sd = 1.0;
    train->x.col(j) = (train->x.col(j).array() - m) / sd;
    test->x.col(j) = (test->x.col(j).array() - m) / sd;
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

void validate_spec(const ExperimentSpec& spec) {
  if (spec.replications < 1) throw ConfigError("replications must be >= 1");
  if (spec.contamination < 0.0 || spec.contamination >= 0.5) {
    throw ConfigError("contamination must lie in [0, 0.5)");
  }
  if (spec.n_train < 1) throw ConfigError("n_train must be >= 1");
  if (spec.d < 1) throw ConfigError("d must be >= 1");
  if (spec.methods.empty()) throw ConfigError("methods list is empty");
  for (double g : spec.gammas) {
    if (!(g > 0.0)) throw ConfigError("gammas must be positive");
  }
  const bool csv_gen = spec.generator == Generator::CsvBenchY ||
                       spec.generator == Generator::CsvBenchXY;
  if (csv_gen && spec.csv_path.empty()) {
    throw ConfigError("csv_path required for csv_bench generators");
  }
}

}  // namespace

DensityGen gen_density_synth(std::uint64_t seed, int n, double ratio) {
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  DensityGen out;
  out.samples.points.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    out.samples.points(i, 0) = gauss(rng);
    out.samples.points(i, 1) = gauss(rng);
  }
  out.plant = exact_plant(rng, n, ratio);
  std::normal_distribution<double> outlier(10.0, 10.0);
  for (int i : out.plant) {
    out.samples.points(i, 0) = outlier(rng);
    out.samples.points(i, 1) = outlier(rng);
  }
  return out;
}

RegGen gen_reg_toy(std::uint64_t seed, int n, double ratio) {
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  RegGen out;
  out.data.x.resize(n, 1);
  out.data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = gauss(rng);
    out.data.x(i, 0) = x;
    out.data.y[i] = 1.0 + 10.0 * x + gauss(rng);
  }
  out.plant = exact_plant(rng, n, ratio);
  std::normal_distribution<double> ox(1.0, 0.8);
  std::normal_distribution<double> oy(0.0, 70.0);
  for (int i : out.plant) {
    out.data.x(i, 0) = ox(rng);
    out.data.y[i] = std::abs(oy(rng));
  }
  return out;
}

RegSynthGen gen_reg_synth(std::uint64_t seed, int n, int n_test, int d,
                          double ratio, ContaminateMode mode) {
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  RegSynthGen out;
  out.true_params.beta.resize(d);
  for (int j = 0; j < d; ++j) out.true_params.beta[j] = gauss(rng);
  out.true_params.intercept = 0.0;  // target model has no intercept term
  out.true_params.sigma = 0.5;      // noise N(0, 1/4)

  auto draw = [&](RegData* data, int m) {
    data->x.resize(m, d);
    data->y.resize(m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < d; ++j) data->x(i, j) = unif(rng);
      data->y[i] = data->x.row(i) * out.true_params.beta + 0.5 * gauss(rng);
    }
  };
  draw(&out.train, n);
  draw(&out.test, n_test);

  out.plant = bernoulli_plant(rng, n, ratio);
  std::normal_distribution<double> oy(0.0, 1e4);  // variance 10^8
  std::normal_distribution<double> ox(0.0, 1e2);  // variance 10^4
  for (int i : out.plant) {
    if (mode == ContaminateMode::XY) {
      for (int j = 0; j < d; ++j) out.train.x(i, j) = ox(rng);
    }
    out.train.y[i] = oy(rng);
  }
  return out;
}

RegGen contaminate_csv(const RegData& data, std::uint64_t seed, double ratio,
                       ContaminateMode mode) {
  validate_reg_data(data);
  Rng rng(seed);
  RegGen out;
  out.data = data;
  out.plant = bernoulli_plant(rng, data.n(), ratio);
  for (int i : out.plant) {
    out.data.y[i] *= 1e4;
    if (mode == ContaminateMode::XY) out.data.x.row(i) *= 1e2;
  }
  return out;
}

ExperimentSpec parse_spec_text(const std::string& text) {
  ExperimentSpec spec;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key = value at line " + std::to_string(lineno));
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "task") {
        if (value == "density") spec.task = Task::Density;
        else if (value == "regression") spec.task = Task::Regression;
        else throw ConfigError("unknown task: " + value);
      } else if (key == "generator") {
        if (value == "density_synth") spec.generator = Generator::DensitySynth;
        else if (value == "reg_toy") spec.generator = Generator::RegToy;
        else if (value == "reg_synth_y") spec.generator = Generator::RegSynthY;
        else if (value == "reg_synth_xy") spec.generator = Generator::RegSynthXY;
        else if (value == "csv_bench_y") spec.generator = Generator::CsvBenchY;
        else if (value == "csv_bench_xy") spec.generator = Generator::CsvBenchXY;
        else throw ConfigError("unknown generator: " + value);
      } else if (key == "n_train") {
        spec.n_train = std::stoi(value);
      } else if (key == "n_test") {
        spec.n_test = std::stoi(value);
      } else if (key == "d") {
        spec.d = std::stoi(value);
      } else if (key == "contamination") {
        spec.contamination = std::stod(value);
      } else if (key == "gammas") {
        spec.gammas.clear();
        for (const auto& g : split_list(value)) spec.gammas.push_back(std::stod(g));
      } else if (key == "methods") {
        spec.methods = split_list(value);
      } else if (key == "replications") {
        spec.replications = std::stoi(value);
      } else if (key == "seed") {
        spec.seed = std::stoull(value);
      } else if (key == "csv_path") {
        spec.csv_path = value;
      } else if (key == "target_column") {
        spec.target_column = value;
      } else {
        throw ConfigError("unknown key: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("bad value for " + key + " at line " + std::to_string(lineno));
    } catch (const std::out_of_range&) {
      throw ConfigError("bad value for " + key + " at line " + std::to_string(lineno));
    }
  }
  validate_spec(spec);
  return spec;
}

ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open spec file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec_text(ss.str());
}

ResultTable run_experiment(const ExperimentSpec& spec) {
  validate_spec(spec);

  std::vector<Cell> cells;
  for (const auto& m : spec.methods) {
    if (m == "S_power") {
      for (double g : spec.gammas) cells.push_back({m, g, {}});
    } else {
      cells.push_back({m, kNaN, {}});
    }
  }

  const bool csv_gen = spec.generator == Generator::CsvBenchY ||
                       spec.generator == Generator::CsvBenchXY;
  RegData csv_data;
  if (csv_gen) {
    csv_data = reg_data_from_table(read_csv(spec.csv_path), spec.target_column);
    if (csv_data.n() < spec.n_train + 1) {
      throw DataError("CSV has too few rows for the requested training size");
    }
  }

  for (int rep = 0; rep < spec.replications; ++rep) {
    const std::uint64_t data_seed =
        split_seed(spec.seed, static_cast<std::uint64_t>(rep), label_hash("data"));

    // Generate the replication's data once; shared across methods.
    SampleSet density_samples;
    RegData train, test;
    std::vector<int> plant;
    bool have_test = false;

    switch (spec.generator) {
      case Generator::DensitySynth: {
        auto g = gen_density_synth(data_seed, spec.n_train, spec.contamination);
        density_samples = g.samples;
        plant = g.plant;
        break;
      }
      case Generator::RegToy: {
        auto g = gen_reg_toy(data_seed, spec.n_train, spec.contamination);
        train = g.data;
        plant = g.plant;
        auto clean = gen_reg_toy(split_seed(data_seed, label_hash("test")),
                                 spec.n_test, 0.0);
        test = clean.data;
        have_test = true;
        break;
      }
      case Generator::RegSynthY:
      case Generator::RegSynthXY: {
        auto g = gen_reg_synth(data_seed, spec.n_train, spec.n_test, spec.d,
                               spec.contamination, mode_of(spec.generator));
        train = g.train;
        test = g.test;
        plant = g.plant;
        have_test = true;
        break;
      }
      case Generator::CsvBenchY:
      case Generator::CsvBenchXY: {
        Rng rng(data_seed);
        std::vector<int> idx(csv_data.n());
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        const int n_tr = spec.n_train;
        const int n_te = std::min<int>(spec.n_test, csv_data.n() - n_tr);
        auto take = [&](int offset, int count) {
          RegData out;
          out.x.resize(count, csv_data.dim());
          out.y.resize(count);
          for (int i = 0; i < count; ++i) {
            out.x.row(i) = csv_data.x.row(idx[offset + i]);
            out.y[i] = csv_data.y[idx[offset + i]];
          }
          return out;
        };
        train = take(0, n_tr);
        test = take(n_tr, n_te);
        standardize_features(&train, &test);
        auto g = contaminate_csv(train, split_seed(data_seed, label_hash("seed-outliers")),
                                 spec.contamination, mode_of(spec.generator));
        train = g.data;
        plant = g.plant;
        have_test = n_te > 0;
        break;
      }
    }

    for (auto& cell : cells) {
      FitOptions opts;
      opts.seed = split_seed(spec.seed, static_cast<std::uint64_t>(rep),
                             label_hash(cell.method) ^
                                 (std::isnan(cell.gamma)
                                      ? 0
                                      : std::hash<double>{}(cell.gamma)));
      try {
        if (spec.task == Task::Density) {
          if (cell.method != "S_power") {
            throw ConfigError("density task supports only the S_power method");
          }
          auto cfg = GammaScoreConfig::power(cell.gamma);
          auto fit = fit_enlarged(density_samples, cfg, opts);
          cell.acc.ratio.push_back(1.0 - fit.c_hat);
          score_detection(detect_outliers(density_samples, fit, cell.gamma), plant,
                          &cell.acc);
        } else if (cell.method == "S_power") {
          auto fit = fit_enlarged_reg(train, cell.gamma, opts);
          if (have_test) cell.acc.rmse.push_back(rmse(fit.theta, test));
          cell.acc.ratio.push_back(1.0 - fit.c_hat);
          score_detection(detect_outliers_reg(train, fit, cell.gamma), plant,
                          &cell.acc);
        } else {
          BaselineKind kind;
          if (cell.method == "L2") kind.kind = BaselineMethod::L2;
          else if (cell.method == "L1") kind.kind = BaselineMethod::L1;
          else if (cell.method == "Huber") kind.kind = BaselineMethod::Huber;
          else if (cell.method == "LTS") {
            kind.kind = BaselineMethod::LTS;
            kind.trim_ratio = spec.contamination;  // true ratio fed to LTS
          } else if (cell.method == "GemMc") {
            kind.kind = BaselineMethod::GemMc;
          } else {
            throw ConfigError("unknown method: " + cell.method);
          }
          RegParams fit = fit_baseline(train, kind, opts);
          if (have_test) cell.acc.rmse.push_back(rmse(fit, test));
        }
      } catch (const ConfigError&) {
        throw;  // misconfiguration aborts the run
      } catch (const std::exception&) {
        ++cell.acc.failures;
      }
    }
  }

  ResultTable table;
  for (auto& cell : cells) {
    ResultRow row;
    row.method = cell.method;
    row.gamma = cell.gamma;
    row.contamination = spec.contamination;
    row.rmse_mean = Accum::mean(cell.acc.rmse);
    row.rmse_std = Accum::stdev(cell.acc.rmse);
    row.ratio_mean = Accum::mean(cell.acc.ratio);
    row.ratio_std = Accum::stdev(cell.acc.ratio);
    row.precision = Accum::mean(cell.acc.precision);
    row.recall = Accum::mean(cell.acc.recall);
    row.failures = cell.acc.failures;
    row.replications = spec.replications;
    table.rows.push_back(row);
  }
  return table;
}

std::string result_table_to_csv(const ResultTable& table) {
  std::stringstream out;
  out.precision(12);
  out << "method,gamma,contamination,rmse_mean,rmse_std,ratio_mean,ratio_std,"
         "precision,recall,failures,replications\n";
  for (const auto& r : table.rows) {
    out << r.method << ',' << r.gamma << ',' << r.contamination << ','
        << r.rmse_mean << ',' << r.rmse_std << ',' << r.ratio_mean << ','
        << r.ratio_std << ',' << r.precision << ',' << r.recall << ','
        << r.failures << ',' << r.replications << '\n';
  }
  return out.str();
}

std::string experiment_summary_json(const ExperimentSpec& spec,
                                    const ResultTable& table) {
  nlohmann::json j;
  j["spec"] = {
      {"task", spec.task == Task::Density ? "density" : "regression"},
      {"generator",
       [&] {
         switch (spec.generator) {
           case Generator::DensitySynth: return "density_synth";
           case Generator::RegToy: return "reg_toy";
           case Generator::RegSynthY: return "reg_synth_y";
           case Generator::RegSynthXY: return "reg_synth_xy";
           case Generator::CsvBenchY: return "csv_bench_y";
           case Generator::CsvBenchXY: return "csv_bench_xy";
         }
         return "unknown";
       }()},
      {"n_train", spec.n_train},
      {"n_test", spec.n_test},
      {"d", spec.d},
      {"contamination", spec.contamination},
      {"gammas", spec.gammas},
      {"methods", spec.methods},
      {"replications", spec.replications},
      {"seed", spec.seed},
      {"csv_path", spec.csv_path},
      {"target_column", spec.target_column},
  };
  j["defaults"] = {
      {"fit_tol", 1e-8},
      {"fit_max_iter", 500},
      {"fit_n_starts", 5},
      {"huber_k", 1.345},
      {"lts_subsets", 500},
      {"lts_short_csteps", 10},
      {"lts_refined_candidates", 10},
      {"density_floor", 1e-300},
      {"outlier_count_rounding", "nearest"},
      {"contamination_selection",
       "exact count floor(ratio n) for density_synth/reg_toy, per-sample "
       "Bernoulli(ratio) otherwise"},
      {"lts_trim_source", "true contamination ratio"},
      {"csv_standardization", "train-split column mean/scale, before seeding"},
      {"xy_outlier_resampling", "per coordinate"},
  };
  auto num = [](double v) -> nlohmann::json {
    if (std::isnan(v)) return nullptr;
    return v;
  };
  for (const auto& r : table.rows) {
    j["results"].push_back({
        {"method", r.method},
        {"gamma", num(r.gamma)},
        {"contamination", r.contamination},
        {"rmse_mean", num(r.rmse_mean)},
        {"rmse_std", num(r.rmse_std)},
        {"ratio_mean", num(r.ratio_mean)},
        {"ratio_std", num(r.ratio_std)},
        {"precision", num(r.precision)},
        {"recall", num(r.recall)},
        {"failures", r.failures},
        {"replications", r.replications},
    });
  }
  return j.dump(2);
}

bool all_methods_failed(const ResultTable& table) {
  for (const auto& r : table.rows) {
    if (r.failures < r.replications) return false;
  }
  return !table.rows.empty();
}

}  // namespace enlarge
