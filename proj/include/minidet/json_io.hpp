#pragma once

#include <json.hpp>

#include "minidet/config.hpp"

namespace minidet {

nlohmann::json config_to_json(const MiniDetConfig& cfg);
MiniDetConfig config_from_json(const nlohmann::json& j);

nlohmann::json train_config_to_json(const TrainConfig& tc);
TrainConfig train_config_from_json(const nlohmann::json& j);

}  // namespace minidet
