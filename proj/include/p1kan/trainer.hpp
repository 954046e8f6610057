#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "p1kan/matrix.hpp"
#include "p1kan/model.hpp"
#include "p1kan/rng.hpp"
#include "p1kan/targets.hpp"

namespace p1kan {

// RNG stream ids derived from the experiment seed.
inline constexpr std::uint64_t kInitStream = 1;
inline constexpr std::uint64_t kTrainStream = 2;
inline constexpr std::uint64_t kEvalStream = 3;

struct ExperimentConfig {
  ModelKind model = ModelKind::p1kan;
  TargetKind function = TargetKind::a;
  std::size_t dim = 2;
  std::vector<std::size_t> hidden{10, 10};
  std::optional<std::size_t> meshes;  // P1-KAN only
  std::size_t iters = 10000;
  std::size_t batch = 1000;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  std::size_t eval_every = 100;
  std::size_t eval_samples = 100000;
  std::size_t moving_avg_window = 10;
  std::size_t log_every = 0;   // extra train-loss rows; 0 = evaluation rows only
  bool record_time = false;    // wall-clock column; off keeps the CSV reproducible
  std::string out_path;
  std::string save_model_path;

  // {dim, hidden..., 1}
  std::vector<std::size_t> widths() const;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void validate_config(const ExperimentConfig& config);

struct MetricsRow {
  std::size_t iter = 0;
  double train_loss = 0.0;
  std::optional<double> eval_mse;
  std::optional<double> log10_eval_mse;
  std::optional<double> mavg_log10;
  std::optional<double> elapsed_s;

  bool operator==(const MetricsRow&) const = default;
};

enum class RunStatus { completed, diverged };

struct MetricsLog {
  std::vector<MetricsRow> rows;
  RunStatus status = RunStatus::completed;
  std::optional<std::size_t> diverged_at;

  // Smallest evaluation MSE seen, if any evaluation happened.
  std::optional<double> best_eval() const;
  // Last moving-average log10 MSE, if the window filled up.
  std::optional<double> final_mavg_log10() const;
};

struct TrainResult {
  MetricsLog log;
  Model model;
};

using Predictor = std::function<Matrix(const Matrix&)>;
using EvalCallback = std::function<void(const MetricsRow&)>;

Model build_model(const ExperimentConfig& config);

// Runs config.iters ADAM steps on minibatch MSE against the target on
// [0,1]^dim. Divergence (non-finite loss, gradient or evaluation) ends the
// run with status `diverged` and a final row at the failing iteration.
TrainResult train(const ExperimentConfig& config, const EvalCallback& on_eval = {});

// Mean squared residual over n uniform samples on [0,1]^dim, drawn in fixed
// chunks from `rng`.
double evaluate(const Predictor& model, TargetKind function, std::size_t dim, std::size_t n_samples, Rng& rng);
double evaluate(const Model& model, TargetKind function, std::size_t dim, std::size_t n_samples, Rng& rng);

struct SweepEntry {
  std::vector<std::size_t> hidden;
  MetricsLog log;
  std::optional<Model> model;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  std::size_t best = 0;
};

class SweepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hidden-layer layouts of the baseline sweep: two hidden layers of
// {10, 20, 40} and three hidden layers of {10, 20, 40, 80, 160} neurons.
std::vector<std::vector<std::size_t>> mlp_sweep_layouts();

// Index of the completed entry with the smallest best-seen evaluation MSE.
// Throws SweepError listing every entry's status when none qualifies.
std::size_t select_best(const std::vector<SweepEntry>& entries);

// Trains every sweep layout with `base` (model forced to mlp, hidden
// overridden) and returns all logs plus the winner.
SweepResult sweep_mlp(const ExperimentConfig& base, const EvalCallback& on_eval = {});

std::string describe_layout(const std::vector<std::size_t>& hidden);

// CSV with header iter,train_loss,eval_mse,log10_eval_mse,mavg_log10,elapsed_s.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kMetricsHeader = "iter,train_loss,eval_mse,log10_eval_mse,mavg_log10,elapsed_s";

std::string format_metrics_csv(const MetricsLog& log);
void write_metrics_csv(const MetricsLog& log, const std::string& path);
MetricsLog parse_metrics_csv(const std::string& text);
MetricsLog read_metrics_csv(const std::string& path);

}  // namespace p1kan
