// SPDX-License-Identifier: Apache-2.0
#include "util/json_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "dmgr/errors.hpp"

namespace dmgr::util {

nlohmann::json parse_json(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t offset = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line =
        1 + static_cast<std::size_t>(std::count(text.begin(),
                                                text.begin() + static_cast<std::ptrdiff_t>(offset > 0 ? offset - 1 : 0),
                                                '\n'));
    throw ParseError(std::string("invalid JSON: ") + e.what(), line, offset);
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace dmgr::util
