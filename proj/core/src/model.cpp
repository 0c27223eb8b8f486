#include "bevdg/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "bevdg/io_util.hpp"

namespace bevdg {

const char* fusion_mode_name(FusionMode mode) {
  switch (mode) {
    case FusionMode::kNone: return "none";
    case FusionMode::kPoint: return "point";
    case FusionMode::kArea: return "area";
  }
  return "invalid";
}

FusionMode fusion_mode_from_name(const std::string& name) {
  if (name == "none") return FusionMode::kNone;
  if (name == "point") return FusionMode::kPoint;
  if (name == "area") return FusionMode::kArea;
  throw InvalidArgument("unknown fusion mode: " + name);
}

void ModelConfig::validate() const {
  if (image_channels < 1 || knn < 0 || hidden_2d < 1 || hidden_3d < 1 ||
      c_2d < 1 || c_3d < 1 || fc1_out < 1 || fc2_out < 1 || num_classes < 2) {
    throw InvalidArgument("model config: invalid dimensions");
  }
}

namespace {

LinearLayer init_layer(int in_dim, int out_dim, uint64_t seed) {
  LinearLayer l = LinearLayer::zeros(in_dim, out_dim);
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (double& w : l.weight) w = rng.uniform(-scale, scale);
  // Small nonzero biases keep pre-activations off the exact ReLU corner
  // even for inputs that silence a whole hidden layer.
  for (double& b : l.bias) b = rng.uniform(-0.1 * scale, 0.1 * scale);
  return l;
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& config, uint64_t seed) {
  config.validate();
  ModelParams p;
  p.config = config;
  p.net2d_l1 = init_layer(config.input_dim_2d(), config.hidden_2d,
                          derive_seed(seed, "net2d_l1"));
  p.net2d_l2 =
      init_layer(config.hidden_2d, config.c_2d, derive_seed(seed, "net2d_l2"));
  p.net3d_l1 = init_layer(config.input_dim_3d(), config.hidden_3d,
                          derive_seed(seed, "net3d_l1"));
  p.net3d_l2 =
      init_layer(config.hidden_3d, config.c_3d, derive_seed(seed, "net3d_l2"));
  if (config.has_fused_bev()) {
    p.fc1 = init_layer(config.c_2d + config.c_3d, config.fc1_out,
                       derive_seed(seed, "fc1"));
  }
  if (config.has_fc2()) {
    p.fc2_2d = init_layer(config.fc2_in_2d(), config.fc2_out,
                          derive_seed(seed, "fc2_2d"));
    p.fc2_3d = init_layer(config.fc2_in_3d(), config.fc2_out,
                          derive_seed(seed, "fc2_3d"));
  }
  p.head2d = init_layer(config.head_in_2d(), config.num_classes,
                        derive_seed(seed, "head2d"));
  p.head3d = init_layer(config.head_in_3d(), config.num_classes,
                        derive_seed(seed, "head3d"));
  return p;
}

ModelParams ModelParams::zeros_like(const ModelConfig& config) {
  ModelParams p;
  p.config = config;
  p.net2d_l1 = LinearLayer::zeros(config.input_dim_2d(), config.hidden_2d);
  p.net2d_l2 = LinearLayer::zeros(config.hidden_2d, config.c_2d);
  p.net3d_l1 = LinearLayer::zeros(config.input_dim_3d(), config.hidden_3d);
  p.net3d_l2 = LinearLayer::zeros(config.hidden_3d, config.c_3d);
  if (config.has_fused_bev()) {
    p.fc1 = LinearLayer::zeros(config.c_2d + config.c_3d, config.fc1_out);
  }
  if (config.has_fc2()) {
    p.fc2_2d = LinearLayer::zeros(config.fc2_in_2d(), config.fc2_out);
    p.fc2_3d = LinearLayer::zeros(config.fc2_in_3d(), config.fc2_out);
  }
  p.head2d = LinearLayer::zeros(config.head_in_2d(), config.num_classes);
  p.head3d = LinearLayer::zeros(config.head_in_3d(), config.num_classes);
  return p;
}

std::vector<ModelParams::NamedLayer> ModelParams::layers() {
  std::vector<NamedLayer> out{{"net2d_l1", &net2d_l1}, {"net2d_l2", &net2d_l2},
                              {"net3d_l1", &net3d_l1}, {"net3d_l2", &net3d_l2}};
  if (config.has_fused_bev()) out.push_back({"fc1", &fc1});
  if (config.has_fc2()) {
    out.push_back({"fc2_2d", &fc2_2d});
    out.push_back({"fc2_3d", &fc2_3d});
  }
  out.push_back({"head2d", &head2d});
  out.push_back({"head3d", &head3d});
  return out;
}

std::vector<ModelParams::ConstNamedLayer> ModelParams::layers() const {
  std::vector<ConstNamedLayer> out;
  for (const auto& nl : const_cast<ModelParams*>(this)->layers()) {
    out.push_back({nl.name, nl.layer});
  }
  return out;
}

size_t ModelParams::param_count() const {
  size_t n = 0;
  for (const auto& nl : layers()) {
    n += nl.layer->weight.size() + nl.layer->bias.size();
  }
  return n;
}

double& ModelParams::param(size_t flat_index) {
  for (const auto& nl : layers()) {
    LinearLayer& l = *nl.layer;
    if (flat_index < l.weight.size()) return l.weight[flat_index];
    flat_index -= l.weight.size();
    if (flat_index < l.bias.size()) return l.bias[flat_index];
    flat_index -= l.bias.size();
  }
  throw InvalidArgument("param index out of range");
}

double ModelParams::param(size_t flat_index) const {
  return const_cast<ModelParams*>(this)->param(flat_index);
}

void ModelParams::check_finite(const std::string& context) const {
  for (const auto& nl : layers()) {
    for (double w : nl.layer->weight) {
      if (!std::isfinite(w)) {
        throw NumericError("non-finite weight in " + std::string(nl.name) +
                           " (" + context + ")");
      }
    }
    for (double b : nl.layer->bias) {
      if (!std::isfinite(b)) {
        throw NumericError("non-finite bias in " + std::string(nl.name) +
                           " (" + context + ")");
      }
    }
  }
}

void Hyperparams::validate() const {
  if (!(tau > 0.0)) throw InvalidArgument("hyper: tau must be > 0");
  if (lambda_ct < 0.0) throw InvalidArgument("hyper: lambda_ct must be >= 0");
  if (!(lr > 0.0)) throw InvalidArgument("hyper: lr must be > 0");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw InvalidArgument("hyper: betas must be in [0,1)");
  }
  if (batch_size < 1) throw InvalidArgument("hyper: batch_size must be >= 1");
  if (iterations < 0) throw InvalidArgument("hyper: iterations must be >= 0");
  if (val_interval < 1) throw InvalidArgument("hyper: val_interval must be >= 1");
}

double Hyperparams::lr_at(int iteration) const {
  const int d1 = static_cast<int>(lr_drop1 * iterations);
  const int d2 = static_cast<int>(lr_drop2 * iterations);
  double out = lr;
  if (iteration >= d1) out *= 0.1;
  if (iteration >= d2) out *= 0.1;
  return out;
}

void write_checkpoint(const std::string& path, const ModelParams& params) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + path);
  io::write_magic(f, "BDGM");
  io::write_u16(f, 1);
  const ModelConfig& c = params.config;
  io::write_u8(f, static_cast<uint8_t>(c.fusion));
  io::write_u8(f, c.bdcl ? 1 : 0);
  for (int v : {c.image_channels, c.knn, c.hidden_2d, c.hidden_3d, c.c_2d,
                c.c_3d, c.fc1_out, c.fc2_out, c.num_classes}) {
    io::write_u32(f, static_cast<uint32_t>(v));
  }
  const auto layers = params.layers();
  io::write_u32(f, static_cast<uint32_t>(layers.size()));
  for (const auto& nl : layers) {
    const uint8_t len = static_cast<uint8_t>(std::strlen(nl.name));
    io::write_u8(f, len);
    f.write(nl.name, len);
    io::write_u32(f, static_cast<uint32_t>(nl.layer->in_dim));
    io::write_u32(f, static_cast<uint32_t>(nl.layer->out_dim));
  }
  for (const auto& nl : layers) {
    for (double w : nl.layer->weight) io::write_f64(f, w);
    for (double b : nl.layer->bias) io::write_f64(f, b);
  }
  if (!f) throw IoError("write failed: " + path);
}

ModelParams read_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  io::expect_magic(f, "BDGM", path);
  io::expect_version(f, 1, path);
  ModelConfig c;
  c.fusion = static_cast<FusionMode>(io::read_u8(f));
  c.bdcl = io::read_u8(f) != 0;
  for (int* v : {&c.image_channels, &c.knn, &c.hidden_2d, &c.hidden_3d,
                 &c.c_2d, &c.c_3d, &c.fc1_out, &c.fc2_out, &c.num_classes}) {
    *v = static_cast<int>(io::read_u32(f));
  }
  ModelParams params = ModelParams::zeros_like(c);
  auto layers = params.layers();
  const uint32_t layer_count = io::read_u32(f);
  if (layer_count != layers.size()) {
    throw IoError("checkpoint manifest layer count mismatch: " + path);
  }
  for (auto& nl : layers) {
    const uint8_t len = io::read_u8(f);
    std::string name(len, '\0');
    f.read(name.data(), len);
    const uint32_t in = io::read_u32(f);
    const uint32_t out = io::read_u32(f);
    if (name != nl.name || in != static_cast<uint32_t>(nl.layer->in_dim) ||
        out != static_cast<uint32_t>(nl.layer->out_dim)) {
      throw IoError("checkpoint manifest mismatch at layer " + name + ": " +
                    path);
    }
  }
  for (auto& nl : layers) {
    for (double& w : nl.layer->weight) w = io::read_f64(f);
    for (double& b : nl.layer->bias) b = io::read_f64(f);
  }
  if (!f) throw IoError("truncated checkpoint: " + path);
  return params;
}

}  // namespace bevdg
