#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace hiermf::io {

using Json = nlohmann::ordered_json;

// Writes via a temporary sibling and rename so readers never see partial files.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

void write_json(const std::filesystem::path& path, const Json& value);
Json read_json(const std::filesystem::path& path);

// One-line JSON written next to a CSV as `<file>.json`.
void write_sidecar(const std::filesystem::path& csv_path, const Json& provenance);
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

std::string read_text(const std::filesystem::path& path);

// Splits one CSV record on `delim`; surrounding double quotes are stripped.
std::vector<std::string> split_csv_line(const std::string& line, char delim);

}  // namespace hiermf::io
