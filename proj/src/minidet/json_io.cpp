#include "minidet/json_io.hpp"

namespace minidet {

using nlohmann::json;

json config_to_json(const MiniDetConfig& cfg) {
  json j;
  j["image_size"] = cfg.image_size;
  j["num_classes"] = cfg.num_classes;
  j["kind"] = encryption_kind_name(cfg.kind);
  j["encrypted_map"] = cfg.encrypted_map ? feature_map_name(*cfg.encrypted_map) : "none";
  j["shf_block"] = cfg.shf_block;
  return j;
}

MiniDetConfig config_from_json(const json& j) {
  MiniDetConfig cfg;
  cfg.image_size = j.at("image_size").get<int>();
  cfg.num_classes = j.at("num_classes").get<int>();
  cfg.kind = encryption_kind_from_name(j.at("kind").get<std::string>());
  const std::string map = j.at("encrypted_map").get<std::string>();
  if (map != "none") cfg.encrypted_map = feature_map_from_name(map);
  cfg.shf_block = j.at("shf_block").get<int>();
  cfg.validate();
  return cfg;
}

json train_config_to_json(const TrainConfig& tc) {
  json j;
  j["iterations"] = tc.iterations;
  json schedule = json::array();
  for (const auto& phase : tc.lr_schedule) schedule.push_back({phase.until_iteration, phase.lr});
  j["lr_schedule"] = std::move(schedule);
  j["momentum"] = tc.momentum;
  j["weight_decay"] = tc.weight_decay;
  j["batch_size"] = tc.batch_size;
  j["seed"] = std::to_string(tc.seed);
  j["loss_weight_loc"] = tc.loss_weight_loc;
  j["log_every"] = tc.log_every;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig tc;
  tc.iterations = j.at("iterations").get<int>();
  tc.lr_schedule.clear();
  for (const auto& phase : j.at("lr_schedule")) {
    tc.lr_schedule.push_back({phase[0].get<int>(), phase[1].get<double>()});
  }
  tc.momentum = j.at("momentum").get<double>();
  tc.weight_decay = j.at("weight_decay").get<double>();
  tc.batch_size = j.at("batch_size").get<int>();
  tc.seed = std::stoull(j.at("seed").get<std::string>());
  tc.loss_weight_loc = j.at("loss_weight_loc").get<double>();
  tc.log_every = j.at("log_every").get<int>();
  tc.validate();
  return tc;
}

}  // namespace minidet
