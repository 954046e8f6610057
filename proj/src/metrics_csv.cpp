#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "p1kan/trainer.hpp"

namespace p1kan {
namespace {

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void append_optional(std::string& out, const std::optional<double>& v) {
  out += ',';
  if (v) append_number(out, *v);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw IoError("malformed number in metrics CSV: '" + s + "'");
  return v;
}

std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

}  // namespace

std::string format_metrics_csv(const MetricsLog& log) {
  std::string out = kMetricsHeader;
  out += '\n';
  for (const auto& row : log.rows) {
    out += std::to_string(row.iter);
    out += ',';
    append_number(out, row.train_loss);
    append_optional(out, row.eval_mse);
    append_optional(out, row.log10_eval_mse);
    append_optional(out, row.mavg_log10);
    append_optional(out, row.elapsed_s);
    out += '\n';
  }
  return out;
}

void write_metrics_csv(const MetricsLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open metrics file for writing: " + path);
  const std::string text = format_metrics_csv(log);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw IoError("failed writing metrics file: " + path);
}

MetricsLog parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw IoError("metrics CSV has an unexpected header");
  MetricsLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 6) throw IoError("metrics CSV row has " + std::to_string(f.size()) + " fields");
    MetricsRow row;
    row.iter = static_cast<std::size_t>(std::stoull(f[0]));
    row.train_loss = parse_double(f[1]);
    row.eval_mse = parse_optional(f[2]);
    row.log10_eval_mse = parse_optional(f[3]);
    row.mavg_log10 = parse_optional(f[4]);
    row.elapsed_s = parse_optional(f[5]);
    log.rows.push_back(row);
  }
  return log;
}

MetricsLog read_metrics_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open metrics file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_metrics_csv(buf.str());
}

}  // namespace p1kan
