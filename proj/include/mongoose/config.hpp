#pragma once

#include <map>
#include <string>

#include "mongoose/trainer.hpp"

namespace mongoose {

// Flat key/value config file: one `key = value` per line, `#` comments.
// Unknown keys are rejected against the TrainConfig schema.
std::map<std::string, std::string> parse_config_file(const std::string& path);

std::map<std::string, std::string> parse_config_text(const std::string& text);

// Applies parsed keys onto the defaults carried by TrainConfig. Throws on
// unknown keys or unparsable values.
TrainConfig train_config_from_map(
    const std::map<std::string, std::string>& kv);

std::map<std::string, std::string> train_config_to_map(
    const TrainConfig& config);

}  // namespace mongoose
