#include "bench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "bench/manifest.hpp"
#include "evalkit/jsonl.hpp"
#include "ndkit/binio.hpp"
#include "ndkit/rng.hpp"

namespace bench {

namespace fs = std::filesystem;
using evalkit::BoundingBox;
using evalkit::GroundTruth;
using ndkit::Tensor;

const char* shape_class_name(int class_id) {
  switch (class_id) {
    case 0: return "circle";
    case 1: return "square";
    case 2: return "triangle";
  }
  throw std::invalid_argument("unknown shape class " + std::to_string(class_id));
}

void DatasetSpec::validate() const {
  if (n_train < 0 || n_test < 0) throw std::invalid_argument("dataset spec: negative split size");
  if (image_size != 64) throw std::invalid_argument("dataset spec: image size is fixed at 64");
  if (min_objects < 1 || max_objects < min_objects) {
    throw std::invalid_argument("dataset spec: bad objects-per-image range");
  }
  if (!(0.0 < min_size && min_size <= max_size && max_size < 1.0)) {
    throw std::invalid_argument("dataset spec: bad size range");
  }
  if (!(0.0 <= max_pairwise_iou && max_pairwise_iou <= 1.0)) {
    throw std::invalid_argument("dataset spec: bad pairwise IoU bound");
  }
}

namespace {

struct Object {
  int class_id;
  double cx, cy, size;  // size = full side/diameter in pixels

  BoundingBox box() const {
    return BoundingBox::make(cx - 0.5 * size, cy - 0.5 * size, cx + 0.5 * size, cy + 0.5 * size);
  }

  /// Membership test at a pixel center.
  bool contains(double px, double py) const {
    const double r = 0.5 * size;
    switch (class_id) {
      case 0:  // circle
        return (px - cx) * (px - cx) + (py - cy) * (py - cy) <= r * r;
      case 1:  // square
        return std::abs(px - cx) <= r && std::abs(py - cy) <= r;
      case 2: {  // triangle with apex up: (cx, cy-r), (cx-r, cy+r), (cx+r, cy+r)
        if (py < cy - r || py > cy + r) return false;
        // width grows linearly from 0 at the apex to `size` at the base
        const double half_width = (py - (cy - r)) / 2.0;
        return std::abs(px - cx) <= half_width;
      }
    }
    return false;
  }
};

std::vector<Object> place_objects(const DatasetSpec& spec, ndkit::Rng& rng) {
  const double side = spec.image_size;
  for (;;) {
    const int count = rng.uniform_int(spec.min_objects, spec.max_objects);
    std::vector<Object> objects;
    bool ok = true;
    for (int i = 0; i < count && ok; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < 100; ++attempt) {
        Object obj;
        obj.class_id = rng.uniform_int(0, kNumShapeClasses - 1);
        obj.size = rng.uniform(spec.min_size * side, spec.max_size * side);
        const double r = 0.5 * obj.size;
        obj.cx = rng.uniform(r, side - r);
        obj.cy = rng.uniform(r, side - r);
        bool clear = true;
        for (const Object& other : objects) {
          if (evalkit::iou(obj.box(), other.box()) >= spec.max_pairwise_iou) {
            clear = false;
            break;
          }
        }
        if (clear) {
          objects.push_back(obj);
          placed = true;
          break;
        }
      }
      if (!placed) ok = false;  // resample the whole image
    }
    if (ok) return objects;
  }
}

}  // namespace

minidet::Sample make_sample(const DatasetSpec& spec, const std::string& split, int index) {
  spec.validate();
  ndkit::Rng rng(ndkit::derive_seed(ndkit::derive_seed(spec.seed, split),
                                    static_cast<uint64_t>(index)));
  const int side = spec.image_size;

  const std::vector<Object> objects = place_objects(spec, rng);

  minidet::Sample sample;
  sample.image = Tensor({3, side, side});
  const double bg = rng.uniform(spec.background_low, spec.background_high);
  for (int c = 0; c < 3; ++c) {
    for (int64_t i = 0; i < static_cast<int64_t>(side) * side; ++i) {
      sample.image.data[static_cast<size_t>(c) * side * side + static_cast<size_t>(i)] = bg;
    }
  }

  for (const Object& obj : objects) {
    double color[3];
    for (double& ch : color) ch = rng.uniform(spec.color_low, spec.color_high);
    const BoundingBox box = obj.box();
    const int y0 = std::max(0, static_cast<int>(std::floor(box.y_min)));
    const int y1 = std::min(side - 1, static_cast<int>(std::ceil(box.y_max)));
    const int x0 = std::max(0, static_cast<int>(std::floor(box.x_min)));
    const int x1 = std::min(side - 1, static_cast<int>(std::ceil(box.x_max)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        if (!obj.contains(x + 0.5, y + 0.5)) continue;
        for (int c = 0; c < 3; ++c) sample.image.at3(c, y, x) = color[c];
      }
    }
    sample.gts.push_back(GroundTruth{box, obj.class_id});
  }

  if (spec.pixel_noise > 0.0) {
    for (double& v : sample.image.data) {
      v = std::clamp(v + spec.pixel_noise * rng.next_normal(), 0.0, 1.0);
    }
  }
  // the disk format stores f32; snapping here keeps in-memory and reloaded
  // datasets bit-identical
  for (double& v : sample.image.data) v = static_cast<double>(static_cast<float>(v));
  return sample;
}

minidet::Dataset make_split(const DatasetSpec& spec, const std::string& split) {
  spec.validate();
  const int count = split == "train" ? spec.n_train : spec.n_test;
  minidet::Dataset data;
  data.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) data.push_back(make_sample(spec, split, i));
  return data;
}

// ---------------------------------------------------------------------------
// disk format
// ---------------------------------------------------------------------------

namespace {
constexpr char kImageMagic[4] = {'M', 'D', 'T', '1'};

std::string image_name(int index) {
  std::ostringstream os;
  os << "img_" << std::setw(6) << std::setfill('0') << index << ".mdt";
  return os.str();
}

nlohmann::json spec_to_json(const DatasetSpec& spec) {
  nlohmann::json j;
  j["n_train"] = spec.n_train;
  j["n_test"] = spec.n_test;
  j["image_size"] = spec.image_size;
  j["min_objects"] = spec.min_objects;
  j["max_objects"] = spec.max_objects;
  j["min_size"] = spec.min_size;
  j["max_size"] = spec.max_size;
  j["background_low"] = spec.background_low;
  j["background_high"] = spec.background_high;
  j["color_low"] = spec.color_low;
  j["color_high"] = spec.color_high;
  j["pixel_noise"] = spec.pixel_noise;
  j["max_pairwise_iou"] = spec.max_pairwise_iou;
  j["seed"] = std::to_string(spec.seed);
  return j;
}

DatasetSpec spec_from_json(const nlohmann::json& j) {
  DatasetSpec spec;
  spec.n_train = j.at("n_train").get<int>();
  spec.n_test = j.at("n_test").get<int>();
  spec.image_size = j.at("image_size").get<int>();
  spec.min_objects = j.at("min_objects").get<int>();
  spec.max_objects = j.at("max_objects").get<int>();
  spec.min_size = j.at("min_size").get<double>();
  spec.max_size = j.at("max_size").get<double>();
  spec.background_low = j.at("background_low").get<double>();
  spec.background_high = j.at("background_high").get<double>();
  spec.color_low = j.at("color_low").get<double>();
  spec.color_high = j.at("color_high").get<double>();
  spec.pixel_noise = j.at("pixel_noise").get<double>();
  spec.max_pairwise_iou = j.at("max_pairwise_iou").get<double>();
  spec.seed = std::stoull(j.at("seed").get<std::string>());
  spec.validate();
  return spec;
}

}  // namespace

void write_image_mdt(const std::string& path, const Tensor& chw) {
  if (chw.rank() != 3) throw std::invalid_argument("write_image_mdt: expected [c,h,w]");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  ndkit::write_magic(out, kImageMagic);
  for (int i = 0; i < 3; ++i) ndkit::write_u32_le(out, static_cast<uint32_t>(chw.dim(i)));
  for (double v : chw.data) ndkit::write_f32_le(out, static_cast<float>(v));
}

Tensor read_image_mdt(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  ndkit::expect_magic(in, kImageMagic, path);
  ndkit::Shape shape(3);
  for (int i = 0; i < 3; ++i) shape[static_cast<size_t>(i)] = static_cast<int>(ndkit::read_u32_le(in));
  Tensor t(shape);
  for (double& v : t.data) v = static_cast<double>(ndkit::read_f32_le(in));
  return t;
}

namespace {

void write_split(const fs::path& dir, const DatasetSpec& spec, const std::string& split) {
  fs::create_directories(dir / "images");
  const minidet::Dataset data = make_split(spec, split);
  evalkit::GroundTruthSet gts;
  gts.reserve(data.size());
  for (size_t i = 0; i < data.size(); ++i) {
    write_image_mdt((dir / "images" / image_name(static_cast<int>(i))).string(), data[i].image);
    gts.push_back(data[i].gts);
  }
  evalkit::write_groundtruths_jsonl((dir / "annotations.jsonl").string(), gts);
}

}  // namespace

void write_dataset(const std::string& dir, const DatasetSpec& spec) {
  spec.validate();
  fs::create_directories(dir);
  write_split(fs::path(dir) / "train", spec, "train");
  write_split(fs::path(dir) / "test", spec, "test");
  nlohmann::json j;
  j["spec"] = spec_to_json(spec);
  j["digests"] = {{"train", directory_digest((fs::path(dir) / "train").string())},
                  {"test", directory_digest((fs::path(dir) / "test").string())}};
  std::ofstream out(fs::path(dir) / "dataset.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset manifest in " + dir);
  out << j.dump(2) << "\n";
}

minidet::Dataset load_split(const std::string& dir, const std::string& split) {
  const fs::path split_dir = fs::path(dir) / split;
  const auto gts = evalkit::read_groundtruths_jsonl((split_dir / "annotations.jsonl").string());
  minidet::Dataset data;
  data.reserve(gts.size());
  for (size_t i = 0; i < gts.size(); ++i) {
    minidet::Sample sample;
    sample.image = read_image_mdt((split_dir / "images" / image_name(static_cast<int>(i))).string());
    sample.gts = gts[i];
    data.push_back(std::move(sample));
  }
  return data;
}

DatasetSpec read_dataset_spec(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "dataset.json", std::ios::binary);
  if (!in) throw std::runtime_error("cannot read dataset manifest in " + dir);
  return spec_from_json(nlohmann::json::parse(in).at("spec"));
}

std::string directory_digest(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) {
      paths.push_back(fs::relative(entry.path(), dir).generic_string());
    }
  }
  std::sort(paths.begin(), paths.end());
  uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](const void* data, size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const std::string& rel : paths) {
    mix(rel.data(), rel.size());
    std::ifstream in(fs::path(dir) / rel, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    mix(bytes.data(), bytes.size());
  }
  return hex64(h);
}

}  // namespace bench
