#include "p1kan/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "p1kan/checkpoint.hpp"

namespace p1kan {
namespace {

std::vector<std::size_t> parse_widths(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      throw UsageError("--hidden: '" + item + "' is not a positive integer");
    }
    if (used != item.size() || v == 0) throw UsageError("--hidden: '" + item + "' is not a positive integer");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw UsageError("--hidden needs at least one width");
  return out;
}

struct Options {
  std::string model;
  std::string function;
  std::string hidden = "10,10";
  std::size_t meshes = 0;
  ExperimentConfig config;
};

void add_experiment_options(CLI::App& cmd, Options& o, bool with_model) {
  if (with_model) {
    cmd.add_option("--model", o.model, "p1kan or mlp")->required()->check(CLI::IsMember({"p1kan", "mlp"}));
    cmd.add_option("--hidden", o.hidden, "hidden widths, comma separated");
    cmd.add_option("--meshes", o.meshes, "meshes per direction M (p1kan only)");
    cmd.add_option("--save-model", o.config.save_model_path, "checkpoint path");
  }
  cmd.add_option("--function", o.function, "target function A or B")->required()->check(CLI::IsMember({"A", "B", "a", "b"}));
  cmd.add_option("--dim", o.config.dim, "input dimension")->capture_default_str();
  cmd.add_option("--iters", o.config.iters, "gradient iterations")->capture_default_str();
  cmd.add_option("--batch", o.config.batch, "minibatch size")->capture_default_str();
  cmd.add_option("--lr", o.config.lr, "ADAM learning rate")->capture_default_str();
  cmd.add_option("--seed", o.config.seed, "experiment seed")->capture_default_str();
  cmd.add_option("--eval-every", o.config.eval_every, "iterations between evaluations")->capture_default_str();
  cmd.add_option("--eval-samples", o.config.eval_samples, "samples per evaluation")->capture_default_str();
  cmd.add_option("--mavg-window", o.config.moving_avg_window, "moving-average window")->capture_default_str();
  cmd.add_option("--log-every", o.config.log_every, "also log train loss every N iterations");
  cmd.add_flag("--timing", o.config.record_time, "fill the elapsed_s column");
  cmd.add_option("--out", o.config.out_path, "metrics CSV path")->required();
}

}  // namespace

CliRequest parse_cli(const std::vector<std::string>& args) {
  CLI::App app{"P1-KAN function approximation experiments", args.empty() ? "p1kan" : args[0]};
  app.require_subcommand(1);

  Options train_opts;
  Options sweep_opts;
  std::string grid_function;
  std::string grid_out;
  std::size_t grid_points = 201;

  auto* train_cmd = app.add_subcommand("train", "train one model and write its metrics");
  add_experiment_options(*train_cmd, train_opts, true);
  auto* sweep_cmd = app.add_subcommand("sweep-mlp", "train the baseline MLP layouts and keep the best");
  add_experiment_options(*sweep_cmd, sweep_opts, false);
  sweep_cmd->add_option("--save-model", sweep_opts.config.save_model_path, "checkpoint path for the best MLP");
  auto* grid_cmd = app.add_subcommand("dump-grid", "write target values on a 2-D grid");
  grid_cmd->add_option("--function", grid_function, "target function A or B")->required()->check(CLI::IsMember({"A", "B", "a", "b"}));
  grid_cmd->add_option("--grid", grid_points, "points per axis")->capture_default_str()->check(CLI::Range(2, 100000));
  grid_cmd->add_option("--out", grid_out, "CSV path")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("p1kan");

  CliRequest req;
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    req.help_text = app.help();
    return req;
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + "\n\n" + app.help());
  }

  if (train_cmd->parsed()) {
    req.command = Command::train;
    Options& o = train_opts;
    req.config = o.config;
    req.config.model = o.model == "mlp" ? ModelKind::mlp : ModelKind::p1kan;
    req.config.hidden = parse_widths(o.hidden);
    if (train_cmd->count("--meshes") > 0) req.config.meshes = o.meshes;
  } else if (sweep_cmd->parsed()) {
    req.command = Command::sweep_mlp;
    req.config = sweep_opts.config;
    req.config.model = ModelKind::mlp;
  } else {
    req.command = Command::dump_grid;
    req.config.out_path = grid_out;
    req.grid_points = grid_points;
    req.config.function = *parse_target(grid_function);
    return req;
  }
  const Options& o = train_cmd->parsed() ? train_opts : sweep_opts;
  req.config.function = *parse_target(o.function);
  try {
    validate_config(req.config);
  } catch (const ConfigError& e) {
    throw UsageError(std::string(e.what()) + "\n\n" + app.help());
  }
  return req;
}

std::string format_grid_csv(TargetKind function, std::size_t n) {
  std::string out = "x1,x2,f\n";
  char buf[128];
  const double step = 1.0 / static_cast<double>(n - 1);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const double x[2] = {a == n - 1 ? 1.0 : a * step, b == n - 1 ? 1.0 : b * step};
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", x[0], x[1], evaluate_target(function, x));
      out += buf;
    }
  }
  return out;
}

namespace {

void print_row(std::ostream& err, const std::string& tag, const MetricsRow& row) {
  err << tag << " iter " << row.iter << " eval_mse " << *row.eval_mse;
  if (row.mavg_log10) err << " mavg_log10 " << *row.mavg_log10;
  err << '\n';
}

int run_train(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  TrainResult run = train(config, [&](const MetricsRow& row) { print_row(err, "[train]", row); });
  write_metrics_csv(run.log, config.out_path);
  if (run.log.status == RunStatus::diverged) {
    out << "diverged at iteration " << *run.log.diverged_at << "; metrics written to " << config.out_path << '\n';
    return exit_code::diverged;
  }
  if (!config.save_model_path.empty()) save_model(run.model, config.save_model_path);
  out << "completed " << config.iters << " iterations; params " << count_params(run.model);
  if (auto best = run.log.best_eval()) out << "; best eval_mse " << *best;
  if (auto mavg = run.log.final_mavg_log10()) out << "; final mavg_log10 " << *mavg;
  out << '\n';
  return exit_code::ok;
}

int run_sweep(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  SweepResult sweep;
  try {
    sweep = sweep_mlp(config, [&](const MetricsRow& row) { print_row(err, "[sweep]", row); });
  } catch (const SweepError& e) {
    err << e.what() << '\n';
    return exit_code::diverged;
  }
  for (std::size_t q = 0; q < sweep.entries.size(); ++q) {
    const auto& e = sweep.entries[q];
    out << (q == sweep.best ? "* " : "  ") << "[" << describe_layout(e.hidden) << "] ";
    if (e.log.status == RunStatus::diverged) {
      out << "diverged at " << *e.log.diverged_at;
    } else if (auto best = e.log.best_eval()) {
      out << "best eval_mse " << *best;
    }
    out << '\n';
  }
  const SweepEntry& best = sweep.entries[sweep.best];
  write_metrics_csv(best.log, config.out_path);
  if (!config.save_model_path.empty()) save_model(*best.model, config.save_model_path);
  return exit_code::ok;
}

int run_grid(const CliRequest& req) {
  std::ofstream file(req.config.out_path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open grid file for writing: " + req.config.out_path);
  file << format_grid_csv(req.config.function, req.grid_points);
  if (!file) throw IoError("failed writing grid file: " + req.config.out_path);
  return exit_code::ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliRequest req;
  try {
    req = parse_cli(args);
  } catch (const UsageError& e) {
    err << e.what() << '\n';
    return exit_code::usage;
  }
  if (req.help_text) {
    out << *req.help_text;
    return exit_code::ok;
  }
  try {
    switch (req.command) {
      case Command::train:
        return run_train(req.config, out, err);
      case Command::sweep_mlp:
        return run_sweep(req.config, out, err);
      case Command::dump_grid:
        return run_grid(req);
    }
  } catch (const IoError& e) {
    err << e.what() << '\n';
    return exit_code::io;
  } catch (const CheckpointError& e) {
    err << e.what() << '\n';
    return exit_code::io;
  }
  return exit_code::ok;
}

}  // namespace p1kan
