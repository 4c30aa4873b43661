#pragma once

#include "niforge/state_space.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace niforge {

/// Malformed or unreadable input file; the message names the offending key.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NamedSystem {
    StateSpace sys;
    std::string name;
};

/// SystemFile JSON document: {"A": [[...]], "B": ..., "C": ..., "D": ...,
/// "name": optional}. Row-major nested arrays of finite numbers.
NamedSystem load_system(const std::filesystem::path& path);
void save_system(const StateSpace& sys, const std::filesystem::path& path,
                 const std::string& name = {});

nlohmann::json system_to_json(const StateSpace& sys, const std::string& name = {});
StateSpace system_from_json(const nlohmann::json& doc);

/// Parse a JSON matrix value (nested arrays); `key` names the field in error
/// messages.
Matrix matrix_from_json(const nlohmann::json& value, const std::string& key);

/// Write content to path via a temporary file in the same directory plus an
/// atomic rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// CSV with a header row; each data row is one vector of values.
void write_csv_atomic(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

}  // namespace niforge
