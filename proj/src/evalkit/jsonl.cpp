#include "evalkit/jsonl.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace evalkit {

using nlohmann::json;

namespace {

json box_to_json(const BoundingBox& box) {
  return json::array({box.x_min, box.y_min, box.x_max, box.y_max});
}

BoundingBox box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("box must be a 4-element array");
  return BoundingBox::make(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                           j[3].get<double>());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return in;
}

}  // namespace

void write_groundtruths_jsonl(const std::string& path, const GroundTruthSet& gts) {
  auto out = open_out(path);
  for (size_t img = 0; img < gts.size(); ++img) {
    for (const auto& gt : gts[img]) {
      json j;
      j["image_id"] = static_cast<int>(img);
      j["class_id"] = gt.class_id;
      j["box"] = box_to_json(gt.box);
      out << j.dump() << "\n";
    }
  }
}

void write_detections_jsonl(const std::string& path, const DetectionSet& dets) {
  auto out = open_out(path);
  for (size_t img = 0; img < dets.size(); ++img) {
    for (const auto& det : dets[img]) {
      json j;
      j["image_id"] = static_cast<int>(img);
      j["class_id"] = det.class_id;
      j["box"] = box_to_json(det.box);
      j["confidence"] = det.confidence;
      out << j.dump() << "\n";
    }
  }
}

namespace {

template <typename T, typename Parse>
std::vector<std::vector<T>> read_records(const std::string& path, int n_images, Parse parse) {
  auto in = open_in(path);
  std::vector<std::pair<int, T>> records;
  int max_id = -1;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const int image_id = j.at("image_id").get<int>();
    if (image_id < 0) throw std::invalid_argument(path + ": negative image_id");
    max_id = std::max(max_id, image_id);
    records.emplace_back(image_id, parse(j));
  }
  const int size = n_images >= 0 ? n_images : max_id + 1;
  std::vector<std::vector<T>> result(static_cast<size_t>(size));
  for (auto& [image_id, rec] : records) {
    if (image_id >= size) {
      throw std::invalid_argument(path + ": image_id " + std::to_string(image_id) +
                                  " outside expected range " + std::to_string(size));
    }
    result[static_cast<size_t>(image_id)].push_back(std::move(rec));
  }
  return result;
}

}  // namespace

GroundTruthSet read_groundtruths_jsonl(const std::string& path, int n_images) {
  return read_records<GroundTruth>(path, n_images, [](const json& j) {
    return GroundTruth{box_from_json(j.at("box")), j.at("class_id").get<int>()};
  });
}

DetectionSet read_detections_jsonl(const std::string& path, int n_images) {
  return read_records<Detection>(path, n_images, [](const json& j) {
    return make_detection(box_from_json(j.at("box")), j.at("class_id").get<int>(),
                          j.at("confidence").get<double>());
  });
}

}  // namespace evalkit
