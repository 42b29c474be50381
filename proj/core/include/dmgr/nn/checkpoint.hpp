// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "dmgr/nn/param_set.hpp"

namespace dmgr::nn {

// Binary layout (all integers little-endian):
//   "DMGR1" | u32 tensor count | per tensor:
//   u16 name length, UTF-8 name, u8 rank, u32 dims[rank], f32 data (row-major)

enum class CheckpointErrc {
  io,
  bad_magic,
  truncated,
  missing_tensor,
  shape_mismatch,
  unexpected_tensor,
  malformed,
};

const char* to_string(CheckpointErrc code) noexcept;

class CheckpointError : public Error {
 public:
  CheckpointError(CheckpointErrc code, const std::string& detail)
      : Error(std::string(to_string(code)) + ": " + detail), code_(code) {}
  CheckpointErrc code() const noexcept { return code_; }

 private:
  CheckpointErrc code_;
};

std::string encode_checkpoint(const ParamSet& params);
ParamSet decode_checkpoint(std::string_view bytes);

void save_checkpoint(const ParamSet& params, const std::filesystem::path& path);
ParamSet load_checkpoint(const std::filesystem::path& path);

/// Loads and checks the file against `layout`: every tensor of the layout
/// must be present with the same dims, and nothing else may be.
ParamSet load_checkpoint(const std::filesystem::path& path, const ParamSet& layout);

void validate_layout(const ParamSet& loaded, const ParamSet& layout);

}  // namespace dmgr::nn
