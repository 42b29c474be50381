// SPDX-License-Identifier: Apache-2.0
#include "dmgr/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace dmgr::nn {

namespace {

constexpr std::string_view kMagic = "DMGR1";

void put_u8(std::string& out, std::uint8_t v) { out.push_back(static_cast<char>(v)); }

void put_u16(std::string& out, std::uint16_t v) {
  put_u8(out, static_cast<std::uint8_t>(v & 0xff));
  put_u8(out, static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) put_u8(out, static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = 0;
    for (int i = 0; i < 2; ++i) {
      v |= static_cast<std::uint16_t>(static_cast<std::uint8_t>(bytes_[pos_++]) << (8 * i));
    }
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_++])) << (8 * i);
    }
    return v;
  }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const noexcept { return pos_ == bytes_.size(); }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw CheckpointError(CheckpointErrc::truncated,
                            "needed " + std::to_string(n) + " bytes at offset " +
                                std::to_string(pos_));
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const char* to_string(CheckpointErrc code) noexcept {
  switch (code) {
    case CheckpointErrc::io: return "io error";
    case CheckpointErrc::bad_magic: return "bad magic";
    case CheckpointErrc::truncated: return "truncated file";
    case CheckpointErrc::missing_tensor: return "missing tensor";
    case CheckpointErrc::shape_mismatch: return "shape mismatch";
    case CheckpointErrc::unexpected_tensor: return "unexpected tensor";
    case CheckpointErrc::malformed: return "malformed checkpoint";
  }
  return "unknown";
}

std::string encode_checkpoint(const ParamSet& params) {
  std::string out(kMagic);
  put_u32(out, static_cast<std::uint32_t>(params.count()));
  params.for_each([&](const std::string& name, const Tensor& value, const Tensor&) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw CheckpointError(CheckpointErrc::malformed, "name too long: " + name);
    }
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    put_u8(out, static_cast<std::uint8_t>(value.rank()));
    for (auto d : value.dims()) put_u32(out, static_cast<std::uint32_t>(d));
    for (float f : value.data()) put_u32(out, std::bit_cast<std::uint32_t>(f));
  });
  return out;
}

ParamSet decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw CheckpointError(CheckpointErrc::bad_magic, "expected \"DMGR1\" header");
  }
  Reader in(bytes.substr(kMagic.size()));
  const std::uint32_t count = in.u32();
  ParamSet params;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t name_len = in.u16();
    std::string name(in.take(name_len));
    const std::uint8_t rank = in.u8();
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) d = in.u32();
    const std::size_t n = Tensor::element_count(dims);
    if (n > in.remaining() / 4) {
      throw CheckpointError(CheckpointErrc::truncated,
                            "tensor '" + name + "' data runs past end of file");
    }
    std::vector<float> data(n);
    for (auto& f : data) f = std::bit_cast<float>(in.u32());
    if (params.contains(name)) {
      throw CheckpointError(CheckpointErrc::malformed, "duplicate tensor '" + name + "'");
    }
    params.add(name, Tensor(std::move(dims), std::move(data)));
  }
  if (!in.done()) {
    throw CheckpointError(CheckpointErrc::malformed, "trailing bytes after last tensor");
  }
  return params;
}

void save_checkpoint(const ParamSet& params, const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointErrc::io, "cannot open " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointErrc::io, "write failed for " + path.string());
}

ParamSet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrc::io, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

void validate_layout(const ParamSet& loaded, const ParamSet& layout) {
  layout.for_each([&](const std::string& name, const Tensor& value, const Tensor&) {
    if (!loaded.contains(name)) {
      throw CheckpointError(CheckpointErrc::missing_tensor, name);
    }
    const auto& got = loaded.value(name);
    if (got.dims() != value.dims()) {
      throw CheckpointError(CheckpointErrc::shape_mismatch,
                            name + " has dims " + format_dims(got.dims()) + ", expected " +
                                format_dims(value.dims()));
    }
  });
  loaded.for_each([&](const std::string& name, const Tensor&, const Tensor&) {
    if (!layout.contains(name)) {
      throw CheckpointError(CheckpointErrc::unexpected_tensor, name);
    }
  });
}

ParamSet load_checkpoint(const std::filesystem::path& path, const ParamSet& layout) {
  ParamSet loaded = load_checkpoint(path);
  validate_layout(loaded, layout);
  return loaded;
}

}  // namespace dmgr::nn
