#pragma once

#include <cstdint>
#include <string>

#include "minidet/train.hpp"

namespace bench {

constexpr int kNumShapeClasses = 3;
const char* shape_class_name(int class_id);  // circle / square / triangle

struct DatasetSpec {
  int n_train = 2000;
  int n_test = 200;
  int image_size = 64;
  int min_objects = 1;
  int max_objects = 3;
  double min_size = 0.2;  // fraction of image side
  double max_size = 0.5;
  double background_low = 0.05;
  double background_high = 0.35;
  double color_low = 0.45;
  double color_high = 1.0;
  double pixel_noise = 0.02;
  double max_pairwise_iou = 0.3;
  uint64_t seed = 0;

  void validate() const;
};

/// Deterministic function of (spec.seed, split tag, index).
minidet::Sample make_sample(const DatasetSpec& spec, const std::string& split, int index);
minidet::Dataset make_split(const DatasetSpec& spec, const std::string& split);

/// Writes train/ and test/ subdirectories with MDT1 images, annotation JSON
/// lines, and a dataset.json manifest with per-split digests.
void write_dataset(const std::string& dir, const DatasetSpec& spec);
minidet::Dataset load_split(const std::string& dir, const std::string& split);
DatasetSpec read_dataset_spec(const std::string& dir);

/// Image binary: magic "MDT1", u32 c,h,w little-endian, then c*h*w f32 values.
void write_image_mdt(const std::string& path, const ndkit::Tensor& chw);
ndkit::Tensor read_image_mdt(const std::string& path);

/// Digest over sorted relative paths and file contents.
std::string directory_digest(const std::string& dir);

}  // namespace bench
