#pragma once

#include <filesystem>
#include <memory>

#include <nlohmann/json.hpp>

#include "tgdfer/model.hpp"

namespace tgdfer {

// JSON checkpoint: config (+ hash), label space, frozen-encoder checksum and
// every learnable tensor by name. Doubles are written with round-trip
// precision, so save -> load reproduces parameters bit for bit.
nlohmann::json checkpoint_to_json(const TgdferModel& model);
std::unique_ptr<TgdferModel> model_from_checkpoint(const nlohmann::json& doc);

void save_checkpoint(const std::filesystem::path& path, const TgdferModel& model);
std::unique_ptr<TgdferModel> load_checkpoint(const std::filesystem::path& path);

}  // namespace tgdfer
