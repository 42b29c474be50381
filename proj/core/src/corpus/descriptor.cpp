// SPDX-License-Identifier: Apache-2.0
#include "dmgr/corpus/descriptor.hpp"

#include <algorithm>
#include <string>

#include "dmgr/errors.hpp"

namespace dmgr::corpus {

namespace {

std::span<const std::string_view> names_of(FineField field) {
  switch (field) {
    case FineField::category: return kCategoryNames;
    case FineField::primary_color:
    case FineField::accent_color: return kColorNames;
    case FineField::toe: return kToeNames;
    case FineField::pattern: return kPatternNames;
    case FineField::ornament: return kOrnamentNames;
    case FineField::ornament_position: return kPositionNames;
  }
  return {};
}

}  // namespace

std::size_t FineFeatures::get(FineField f) const noexcept {
  switch (f) {
    case FineField::category: return static_cast<std::size_t>(category);
    case FineField::primary_color: return static_cast<std::size_t>(primary_color);
    case FineField::accent_color: return static_cast<std::size_t>(accent_color);
    case FineField::toe: return static_cast<std::size_t>(toe);
    case FineField::pattern: return static_cast<std::size_t>(pattern);
    case FineField::ornament: return static_cast<std::size_t>(ornament);
    case FineField::ornament_position: return static_cast<std::size_t>(ornament_position);
  }
  return 0;
}

void FineFeatures::set(FineField f, std::size_t value) {
  const auto card = kFineFieldCardinality[static_cast<std::size_t>(f)];
  if (value >= card) {
    throw ValidationError("value " + std::to_string(value) + " out of range for field " +
                          std::string(kFineFieldNames[static_cast<std::size_t>(f)]));
  }
  const auto v = static_cast<std::uint8_t>(value);
  switch (f) {
    case FineField::category: category = static_cast<Category>(v); break;
    case FineField::primary_color: primary_color = static_cast<Color>(v); break;
    case FineField::accent_color: accent_color = static_cast<Color>(v); break;
    case FineField::toe: toe = static_cast<Toe>(v); break;
    case FineField::pattern: pattern = static_cast<Pattern>(v); break;
    case FineField::ornament: ornament = static_cast<Ornament>(v); break;
    case FineField::ornament_position: ornament_position = static_cast<Position>(v); break;
  }
}

bool same_appearance(const ItemDescriptor& a, const ItemDescriptor& b) noexcept {
  return a.fine == b.fine && a.coarse == b.coarse;
}

std::string_view fine_value_name(FineField field, std::size_t value) {
  auto names = names_of(field);
  if (value >= names.size()) throw ValidationError("fine value out of range");
  return names[value];
}

std::optional<std::size_t> parse_fine_value(FineField field, std::string_view name) {
  auto names = names_of(field);
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

}  // namespace dmgr::corpus
