#pragma once

#include <string>

#include "evalkit/metrics.hpp"

namespace evalkit {

/// Interchange format: one JSON object per line,
/// {"image_id":i,"class_id":c,"box":[x_min,y_min,x_max,y_max],"confidence":p}
/// (confidence present only for detections).
void write_groundtruths_jsonl(const std::string& path, const GroundTruthSet& gts);
void write_detections_jsonl(const std::string& path, const DetectionSet& dets);

/// n_images < 0 sizes the result from the largest image_id seen.
GroundTruthSet read_groundtruths_jsonl(const std::string& path, int n_images = -1);
DetectionSet read_detections_jsonl(const std::string& path, int n_images = -1);

}  // namespace evalkit
