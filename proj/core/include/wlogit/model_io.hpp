#pragma once

#include <filesystem>
#include <string>

#include "wlogit/pipeline.hpp"

namespace wlogit {

inline constexpr const char* kModelFormat = "wlogit-model";
inline constexpr int kModelVersion = 1;

/// JSON text of a fitted model. Doubles are written with shortest round-trip
/// precision, so deserialize(serialize(m)) reproduces every coefficient exactly.
/// The whitening transform and the path are not stored.
std::string serialize_model(const WLogitModel& model);

/// Throws DataError on malformed input, an unknown format tag or a newer version.
WLogitModel deserialize_model(const std::string& text);

/// Writes through a temporary file and renames it into place.
void save_model(const WLogitModel& model, const std::filesystem::path& path);
WLogitModel load_model(const std::filesystem::path& path);

/// Atomic text write used by the model and CSV outputs.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace wlogit
