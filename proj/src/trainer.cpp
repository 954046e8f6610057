#include "p1kan/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "p1kan/errors.hpp"

namespace p1kan {
namespace {

constexpr std::size_t kEvalChunk = 8192;

double mean_of_last(const std::vector<double>& values, std::size_t window) {
  double sum = 0.0;
  for (std::size_t q = values.size() - window; q < values.size(); ++q) sum += values[q];
  return sum / static_cast<double>(window);
}

}  // namespace

std::vector<std::size_t> ExperimentConfig::widths() const {
  std::vector<std::size_t> w{dim};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(1);
  return w;
}

void validate_config(const ExperimentConfig& config) {
  if (config.dim == 0) throw ConfigError("dim must be positive");
  for (std::size_t h : config.hidden) {
    if (h == 0) throw ConfigError("hidden widths must be positive");
  }
  if (config.batch == 0) throw ConfigError("batch must be positive");
  if (config.eval_every == 0) throw ConfigError("eval-every must be positive");
  if (config.eval_samples == 0) throw ConfigError("eval-samples must be positive");
  if (config.moving_avg_window == 0) throw ConfigError("moving-average window must be positive");
  if (!(config.lr > 0.0) || !std::isfinite(config.lr)) throw ConfigError("lr must be positive and finite");
  if (config.model == ModelKind::p1kan) {
    if (!config.meshes) throw ConfigError("--meshes is required for the p1kan model");
    if (*config.meshes == 0) throw ConfigError("meshes must be positive");
  } else if (config.meshes) {
    throw ConfigError("--meshes only applies to the p1kan model");
  }
}

std::optional<double> MetricsLog::best_eval() const {
  std::optional<double> best;
  for (const auto& row : rows) {
    if (row.eval_mse && std::isfinite(*row.eval_mse) && (!best || *row.eval_mse < *best)) best = row.eval_mse;
  }
  return best;
}

std::optional<double> MetricsLog::final_mavg_log10() const {
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    if (it->mavg_log10) return it->mavg_log10;
  }
  return std::nullopt;
}

Model build_model(const ExperimentConfig& config) {
  validate_config(config);
  Rng init = seed_rng(config.seed, kInitStream);
  const auto widths = config.widths();
  if (config.model == ModelKind::p1kan) {
    return build_network(widths, *config.meshes, HyperRectangle::unit(config.dim), init);
  }
  return build_mlp(widths, init);
}

double evaluate(const Predictor& model, TargetKind function, std::size_t dim, std::size_t n_samples, Rng& rng) {
  if (n_samples == 0) throw std::invalid_argument("evaluate: n_samples must be >= 1");
  const HyperRectangle box = HyperRectangle::unit(dim);
  double sum = 0.0;
  for (std::size_t done = 0; done < n_samples;) {
    const std::size_t n = std::min(kEvalChunk, n_samples - done);
    const Matrix x = sample_uniform_batch(rng, n, box);
    const Matrix pred = model(x);
    if (pred.rows != n || pred.cols != 1) throw ShapeError("evaluate: predictor must return n x 1");
    for (std::size_t s = 0; s < n; ++s) {
      const double r = pred(s, 0) - evaluate_target(function, x.row(s));
      sum += r * r;
    }
    done += n;
  }
  return sum / static_cast<double>(n_samples);
}

double evaluate(const Model& model, TargetKind function, std::size_t dim, std::size_t n_samples, Rng& rng) {
  return evaluate([&](const Matrix& x) { return predict(model, x); }, function, dim, n_samples, rng);
}

TrainResult train(const ExperimentConfig& config, const EvalCallback& on_eval) {
  TrainResult result{MetricsLog{}, build_model(config)};
  Model& model = result.model;
  MetricsLog& log = result.log;

  Rng train_rng = seed_rng(config.seed, kTrainStream);
  Rng eval_rng = seed_rng(config.seed, kEvalStream);
  const HyperRectangle box = HyperRectangle::unit(config.dim);
  AdamState adam = adam_init(parameter_sizes(model), config.lr);
  std::vector<double> log_evals;
  const auto start = std::chrono::steady_clock::now();

  auto elapsed = [&]() -> std::optional<double> {
    if (!config.record_time) return std::nullopt;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  auto mark_diverged = [&](std::size_t it, double loss) {
    log.status = RunStatus::diverged;
    log.diverged_at = it;
    MetricsRow row;
    row.iter = it;
    row.train_loss = loss;
    row.elapsed_s = elapsed();
    log.rows.push_back(row);
  };

  for (std::size_t it = 1; it <= config.iters; ++it) {
    const Matrix x = sample_uniform_batch(train_rng, config.batch, box);
    const std::vector<double> y = evaluate_target(config.function, x);

    double loss = std::numeric_limits<double>::quiet_NaN();
    try {
      LossAndGradient lg = mse_loss_and_grad(model, x, y);
      loss = lg.loss;
      if (!std::isfinite(loss)) {
        mark_diverged(it, loss);
        break;
      }
      auto views = parameter_views(model);
      std::vector<std::span<const double>> grads(lg.grads.begin(), lg.grads.end());
      adam_step(adam, views, grads);
      after_step(model);
    } catch (const NumericalError&) {
      mark_diverged(it, loss);
      break;
    }

    const bool eval_now = it % config.eval_every == 0;
    const bool log_now = config.log_every > 0 && it % config.log_every == 0;
    if (!eval_now && !log_now) continue;

    MetricsRow row;
    row.iter = it;
    row.train_loss = loss;
    if (eval_now) {
      double mse = std::numeric_limits<double>::quiet_NaN();
      try {
        mse = evaluate(model, config.function, config.dim, config.eval_samples, eval_rng);
      } catch (const NumericalError&) {
      }
      if (!std::isfinite(mse)) {
        mark_diverged(it, loss);
        break;
      }
      row.eval_mse = mse;
      row.log10_eval_mse = std::log10(mse);
      log_evals.push_back(*row.log10_eval_mse);
      if (log_evals.size() >= config.moving_avg_window) {
        row.mavg_log10 = mean_of_last(log_evals, config.moving_avg_window);
      }
    }
    row.elapsed_s = elapsed();
    log.rows.push_back(row);
    if (eval_now && on_eval) on_eval(row);
  }
  return result;
}

std::vector<std::vector<std::size_t>> mlp_sweep_layouts() {
  std::vector<std::vector<std::size_t>> layouts;
  for (std::size_t n : {10, 20, 40}) layouts.push_back({n, n});
  for (std::size_t n : {10, 20, 40, 80, 160}) layouts.push_back({n, n, n});
  return layouts;
}

std::string describe_layout(const std::vector<std::size_t>& hidden) {
  std::string out;
  for (std::size_t q = 0; q < hidden.size(); ++q) {
    if (q) out += ',';
    out += std::to_string(hidden[q]);
  }
  return out;
}

std::size_t select_best(const std::vector<SweepEntry>& entries) {
  std::optional<std::size_t> best;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < entries.size(); ++q) {
    const auto& log = entries[q].log;
    if (log.status != RunStatus::completed) continue;
    const auto loss = log.best_eval();
    if (loss && (!best || *loss < best_loss)) {
      best = q;
      best_loss = *loss;
    }
  }
  if (!best) {
    std::ostringstream msg;
    msg << "no MLP configuration produced a usable result:";
    for (const auto& e : entries) {
      msg << "\n  [" << describe_layout(e.hidden) << "] ";
      if (e.log.status == RunStatus::diverged) {
        msg << "diverged at iteration " << e.log.diverged_at.value_or(0);
      } else {
        msg << "no evaluation recorded";
      }
    }
    throw SweepError(msg.str());
  }
  return *best;
}

SweepResult sweep_mlp(const ExperimentConfig& base, const EvalCallback& on_eval) {
  SweepResult result;
  for (const auto& hidden : mlp_sweep_layouts()) {
    ExperimentConfig config = base;
    config.model = ModelKind::mlp;
    config.meshes.reset();
    config.hidden = hidden;
    TrainResult run = train(config, on_eval);
    result.entries.push_back({hidden, std::move(run.log), std::move(run.model)});
  }
  result.best = select_best(result.entries);
  return result;
}

}  // namespace p1kan
