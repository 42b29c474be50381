// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

namespace dmgr::util {

/// Parses JSON text; syntax errors become ParseError with line and byte offset.
nlohmann::json parse_json(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Fixed-format float rendering used by every CSV/JSON report so output
/// bytes depend only on the value.
std::string format_float(double v);

}  // namespace dmgr::util
