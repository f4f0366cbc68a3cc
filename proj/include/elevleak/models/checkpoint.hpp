#pragma once

#include "elevleak/models/cnn.hpp"
#include "elevleak/models/forest.hpp"
#include "elevleak/models/linear_svm.hpp"
#include "elevleak/models/mlp.hpp"

#include <json.hpp>

#include <string>

namespace elevleak::models {

// Versioned JSON containers with shape metadata. Doubles survive the
// round-trip exactly (serialized at max precision).
inline constexpr int kCheckpointVersion = 1;

nlohmann::ordered_json to_checkpoint(const LinearModel& model);
nlohmann::ordered_json to_checkpoint(const Forest& forest);
nlohmann::ordered_json to_checkpoint(const MlpModel& model);
nlohmann::ordered_json to_checkpoint(const CnnModel& model);

std::string checkpoint_model_type(const nlohmann::json& j);

LinearModel linear_from_checkpoint(const nlohmann::json& j);
Forest forest_from_checkpoint(const nlohmann::json& j);
MlpModel mlp_from_checkpoint(const nlohmann::json& j);
CnnModel cnn_from_checkpoint(const nlohmann::json& j);

void save_checkpoint(const std::string& path, const nlohmann::ordered_json& checkpoint);
nlohmann::json load_checkpoint(const std::string& path);

} // namespace elevleak::models
