#include "p1kan/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>

#include "p1kan/trainer.hpp"

namespace p1kan {
namespace {

constexpr char kMagic[4] = {'P', '1', 'K', '1'};
constexpr std::uint32_t kKindP1Kan = 0;
constexpr std::uint32_t kKindMlp = 1;

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out_.push_back(static_cast<char>((v >> (8 * b)) & 0xFFU));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) out_.push_back(static_cast<char>((bits >> (8 * b)) & 0xFFU));
  }
  void f64s(std::span<const double> values) {
    for (double v : values) f64(v);
  }
  void raw(const char* p, std::size_t n) { out_.append(p, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw TruncatedCheckpointError("checkpoint is truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }
  std::vector<double> f64s(std::size_t n) {
    if (n > (bytes_.size() - pos_) / 8) throw TruncatedCheckpointError("checkpoint is truncated");
    std::vector<double> out(n);
    for (double& v : out) v = f64();
    return out;
  }
  bool magic_matches() {
    if (bytes_.size() < 4) {
      if (bytes_.compare(0, bytes_.size(), kMagic, bytes_.size()) == 0) {
        throw TruncatedCheckpointError("checkpoint is truncated");
      }
      return false;
    }
    const bool ok = bytes_.compare(0, 4, kMagic, 4) == 0;
    pos_ = 4;
    return ok;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

void write_widths(Writer& w, const std::vector<std::size_t>& widths) {
  w.u32(static_cast<std::uint32_t>(widths.size()));
  for (std::size_t v : widths) w.u32(static_cast<std::uint32_t>(v));
}

}  // namespace

std::string serialize_model(const Model& model) {
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kCheckpointVersion);
  if (const auto* kan = std::get_if<P1KanNetwork>(&model)) {
    validate_network(*kan);
    w.u32(kKindP1Kan);
    write_widths(w, kan->widths());
    w.u32(static_cast<std::uint32_t>(kan->meshes()));
    w.f64s(kan->domain.lower);
    w.f64s(kan->domain.upper);
    for (const auto& layer : kan->layers) {
      w.f64s(layer.coeffs);
      w.f64s(layer.logits.data);
    }
  } else {
    const auto& mlp = std::get<MlpNetwork>(model);
    validate_mlp(mlp);
    w.u32(kKindMlp);
    write_widths(w, mlp.widths());
    for (const auto& layer : mlp.layers) {
      w.f64s(layer.weights.data);
      w.f64s(layer.bias);
    }
  }
  return w.take();
}

Model deserialize_model(const std::string& bytes) {
  Reader r(bytes);
  if (!r.magic_matches()) throw BadMagicError("not a checkpoint (bad magic bytes)");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw UnsupportedVersionError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t kind = r.u32();
  if (kind != kKindP1Kan && kind != kKindMlp) throw CheckpointError("unknown model kind " + std::to_string(kind));
  const std::uint32_t n_widths = r.u32();
  r.need(4ULL * n_widths);
  if (n_widths < 2) throw CheckpointError("checkpoint declares fewer than two widths");
  std::vector<std::size_t> widths(n_widths);
  for (auto& v : widths) {
    v = r.u32();
    if (v == 0) throw CheckpointError("checkpoint declares a zero width");
  }

  Model model;
  if (kind == kKindP1Kan) {
    const std::uint32_t meshes = r.u32();
    if (meshes == 0) throw CheckpointError("checkpoint declares zero meshes");
    P1KanNetwork net;
    net.domain.lower = r.f64s(widths[0]);
    net.domain.upper = r.f64s(widths[0]);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      P1KanLayer layer;
      layer.d0 = widths[l];
      layer.d1 = widths[l + 1];
      layer.meshes = meshes;
      layer.coeffs = r.f64s(layer.d1 * (meshes + 1) * layer.d0);
      layer.logits.rows = meshes;
      layer.logits.cols = layer.d0;
      layer.logits.data = r.f64s(meshes * layer.d0);
      net.layers.push_back(std::move(layer));
    }
    model = std::move(net);
  } else {
    MlpNetwork net;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      DenseLayer layer;
      layer.weights.rows = widths[l + 1];
      layer.weights.cols = widths[l];
      layer.weights.data = r.f64s(widths[l + 1] * widths[l]);
      layer.bias = r.f64s(widths[l + 1]);
      net.layers.push_back(std::move(layer));
    }
    model = std::move(net);
  }
  if (!r.at_end()) throw CheckpointError("trailing bytes after checkpoint payload");
  return model;
}

void save_model(const Model& model, const std::string& path) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("failed writing checkpoint: " + path);
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace p1kan
