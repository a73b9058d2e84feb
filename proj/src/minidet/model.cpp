#include "minidet/model.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "cipher/permute.hpp"
#include "minidet/json_io.hpp"
#include "ndkit/binio.hpp"

namespace minidet {

namespace fs = std::filesystem;
using ndkit::Tensor;
using ndkit::Var;

std::vector<ndkit::Param*> ModelState::param_ptrs() {
  std::vector<ndkit::Param*> ptrs;
  ptrs.reserve(params.size());
  for (auto& p : params) ptrs.push_back(&p);
  return ptrs;
}

int64_t ModelState::parameter_count() const {
  int64_t n = 0;
  for (const auto& p : params) n += p.value().numel();
  return n;
}

ndkit::Param& ModelState::param(const std::string& name) {
  for (auto& p : params) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("no parameter named \"" + name + "\"");
}

const ndkit::Param& ModelState::param(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("no parameter named \"" + name + "\"");
}

ModelState build_model(const MiniDetConfig& cfg, uint64_t seed) {
  cfg.validate();
  ModelState model;
  model.config = cfg;
  model.init_seed = seed;
  ndkit::Rng rng(ndkit::derive_seed(seed, "init"));

  const int cls_channels = 2 * (cfg.num_classes + 1);
  const int loc_channels = 2 * 4;
  const auto conv = [&](const std::string& name, int c_out, int c_in) {
    const int fan_in = c_in * 3 * 3;
    model.params.emplace_back(name + ".w", ndkit::he_normal({c_out, c_in, 3, 3}, fan_in, rng));
    model.params.emplace_back(name + ".b", Tensor({c_out}));
  };
  conv("b1.conv", 16, 3);
  conv("b2.conv", 32, 16);
  conv("b3.conv", 64, 32);
  conv("f2.loc", loc_channels, 32);
  conv("f2.cls", cls_channels, 32);
  conv("f3.loc", loc_channels, 64);
  conv("f3.cls", cls_channels, 64);
  return model;
}

namespace {

/// [b, A*k, H, W] -> [b, H*W*A, k]; row order matches make_anchors.
Var reshape_head(const Var& head, int anchors_per_cell, int per_anchor) {
  const Tensor& v = head->value;
  const int b = v.dim(0), ch = v.dim(1), h = v.dim(2), w = v.dim(3);
  if (ch != anchors_per_cell * per_anchor) {
    throw std::invalid_argument("reshape_head: channel count " + std::to_string(ch) +
                                " does not factor into " + std::to_string(anchors_per_cell) +
                                " anchors x " + std::to_string(per_anchor));
  }
  const int rows = h * w * anchors_per_cell;
  Tensor out({b, rows, per_anchor});
  for (int bi = 0; bi < b; ++bi) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int a = 0; a < anchors_per_cell; ++a) {
          const int row = (y * w + x) * anchors_per_cell + a;
          for (int j = 0; j < per_anchor; ++j) {
            out.data[(static_cast<size_t>(bi) * rows + row) * per_anchor + j] =
                v.at4(bi, a * per_anchor + j, y, x);
          }
        }
      }
    }
  }
  return ndkit::make_op(std::move(out), {head},
                        [b, h, w, anchors_per_cell, per_anchor, rows](ndkit::Node& node) {
    Var p = node.parents[0];
    ndkit::ensure_grad(*p);
    for (int bi = 0; bi < b; ++bi) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          for (int a = 0; a < anchors_per_cell; ++a) {
            const int row = (y * w + x) * anchors_per_cell + a;
            for (int j = 0; j < per_anchor; ++j) {
              p->grad.at4(bi, a * per_anchor + j, y, x) +=
                  node.grad.data[(static_cast<size_t>(bi) * rows + row) * per_anchor + j];
            }
          }
        }
      }
    }
  }, "reshape_head");
}

}  // namespace

RawPredictions forward(const ModelState& model, const Tensor& images, const KeyMode& mode,
                       ForwardTaps* taps) {
  const MiniDetConfig& cfg = model.config;
  if (images.rank() != 4 || images.dim(1) != 3 || images.dim(2) != cfg.image_size ||
      images.dim(3) != cfg.image_size) {
    throw std::invalid_argument("forward: expected [b,3,64,64] images, got " +
                                ndkit::shape_str(images.shape));
  }

  std::optional<FeatureMap> permute_at;
  if (mode.kind == KeyMode::Kind::Keyed) {
    permute_at = mode.apply_at ? mode.apply_at : cfg.encrypted_map;
    if (permute_at && mode.key.length() != feature_map_channels(*permute_at)) {
      throw std::invalid_argument(std::string("forward: key length ") +
                                  std::to_string(mode.key.length()) + " does not match " +
                                  feature_map_name(*permute_at) + " channel count " +
                                  std::to_string(feature_map_channels(*permute_at)));
    }
  }
  const auto used = [&](const Var& map, FeatureMap which) {
    if (permute_at && *permute_at == which) return cipher::channel_permute(map, mode.key);
    return map;
  };

  const auto& p = [&model](const std::string& name) -> const ndkit::Param& {
    return model.param(name);
  };
  const Var input = ndkit::constant(images);
  const Var f1 = ndkit::maxpool2d(ndkit::relu(
      ndkit::conv2d(input, p("b1.conv.w").var, p("b1.conv.b").var, 1, 1)));
  const Var f1_used = used(f1, FeatureMap::F1);
  const Var f2 = ndkit::maxpool2d(ndkit::relu(
      ndkit::conv2d(f1_used, p("b2.conv.w").var, p("b2.conv.b").var, 1, 1)));
  const Var f2_used = used(f2, FeatureMap::F2);
  const Var f3 = ndkit::maxpool2d(ndkit::relu(
      ndkit::conv2d(f2_used, p("b3.conv.w").var, p("b3.conv.b").var, 1, 1)));
  const Var f3_used = used(f3, FeatureMap::F3);

  const int k_cls = cfg.num_classes + 1;
  const Var loc2 = reshape_head(
      ndkit::conv2d(f2_used, p("f2.loc.w").var, p("f2.loc.b").var, 1, 1), 2, 4);
  const Var cls2 = reshape_head(
      ndkit::conv2d(f2_used, p("f2.cls.w").var, p("f2.cls.b").var, 1, 1), 2, k_cls);
  const Var loc3 = reshape_head(
      ndkit::conv2d(f3_used, p("f3.loc.w").var, p("f3.loc.b").var, 1, 1), 2, 4);
  const Var cls3 = reshape_head(
      ndkit::conv2d(f3_used, p("f3.cls.w").var, p("f3.cls.b").var, 1, 1), 2, k_cls);

  if (taps) *taps = ForwardTaps{f1, f1_used, f2, f2_used, f3, f3_used};
  return RawPredictions{ndkit::concat_rows(loc2, loc3), ndkit::concat_rows(cls2, cls3)};
}

// ---------------------------------------------------------------------------
// checkpoint io
// ---------------------------------------------------------------------------

namespace {

constexpr char kWeightMagic[4] = {'M', 'D', 'W', '1'};

void write_param_blob(const std::string& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  ndkit::write_magic(out, kWeightMagic);
  ndkit::write_u32_le(out, static_cast<uint32_t>(t.rank()));
  for (int i = 0; i < t.rank(); ++i) ndkit::write_u32_le(out, static_cast<uint32_t>(t.dim(i)));
  for (double v : t.data) ndkit::write_f64_le(out, v);
}

Tensor read_param_blob(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  ndkit::expect_magic(in, kWeightMagic, path);
  const uint32_t rank = ndkit::read_u32_le(in);
  if (rank > 8) throw std::runtime_error(path + ": implausible tensor rank");
  ndkit::Shape shape;
  for (uint32_t i = 0; i < rank; ++i) shape.push_back(static_cast<int>(ndkit::read_u32_le(in)));
  Tensor t(shape);
  for (double& v : t.data) v = ndkit::read_f64_le(in);
  return t;
}

}  // namespace

void save_checkpoint(const std::string& dir, const ModelState& model) {
  fs::create_directories(fs::path(dir) / "params");
  nlohmann::json j;
  j["version"] = 1;
  j["config"] = config_to_json(model.config);
  j["init_seed"] = std::to_string(model.init_seed);
  j["key_fingerprint"] = model.key_fingerprint;
  nlohmann::json log = nlohmann::json::array();
  for (const auto& [iter, loss] : model.loss_log) log.push_back({iter, loss});
  j["loss_log"] = std::move(log);
  j["mean_seconds_per_iteration"] = model.mean_seconds_per_iteration;
  nlohmann::json names = nlohmann::json::array();
  for (const auto& p : model.params) names.push_back(p.name);
  j["params"] = std::move(names);

  std::ofstream out(fs::path(dir) / "model.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint manifest in " + dir);
  out << j.dump(2) << "\n";
  for (const auto& p : model.params) {
    write_param_blob((fs::path(dir) / "params" / (p.name + ".bin")).string(), p.value());
  }
}

ModelState load_checkpoint(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "model.json", std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint manifest in " + dir);
  nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("version", 0) != 1) throw std::runtime_error(dir + ": unsupported checkpoint version");

  ModelState model = build_model(config_from_json(j.at("config")),
                                 std::stoull(j.at("init_seed").get<std::string>()));
  model.key_fingerprint = j.at("key_fingerprint").get<std::string>();
  for (const auto& entry : j.at("loss_log")) {
    model.loss_log.emplace_back(entry[0].get<int>(), entry[1].get<double>());
  }
  model.mean_seconds_per_iteration = j.value("mean_seconds_per_iteration", 0.0);

  const auto names = j.at("params");
  if (names.size() != model.params.size()) {
    throw std::runtime_error(dir + ": parameter list does not match the architecture");
  }
  for (size_t i = 0; i < model.params.size(); ++i) {
    if (names[i].get<std::string>() != model.params[i].name) {
      throw std::runtime_error(dir + ": unexpected parameter " + names[i].get<std::string>());
    }
    Tensor t = read_param_blob((fs::path(dir) / "params" / (model.params[i].name + ".bin")).string());
    if (!ndkit::same_shape(t.shape, model.params[i].value().shape)) {
      throw std::runtime_error(dir + ": shape mismatch for " + model.params[i].name);
    }
    model.params[i].value() = std::move(t);
  }
  return model;
}

}  // namespace minidet
