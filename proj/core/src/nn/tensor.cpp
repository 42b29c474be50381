// SPDX-License-Identifier: Apache-2.0
#include "dmgr/nn/tensor.hpp"

namespace dmgr::nn {

std::string format_dims(const std::vector<std::size_t>& dims) {
  std::string out = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(dims[i]);
  }
  return out + "]";
}

}  // namespace dmgr::nn
