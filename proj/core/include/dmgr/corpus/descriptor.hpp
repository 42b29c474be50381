// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace dmgr::corpus {

using ItemId = std::uint32_t;

inline constexpr std::size_t kCoarseCount = 10;

/// Coarse relative-attribute vocabulary, in vector order.
inline constexpr std::array<std::string_view, kCoarseCount> kCoarseNames{
    "pointy", "open",  "bright", "covered", "shiny",
    "high-heel", "long", "formal", "sporty", "feminine"};

enum class Coarse : std::uint8_t {
  pointy, open, bright, covered, shiny, high_heel, long_, formal, sporty, feminine
};

enum class Category : std::uint8_t { sneaker, boot, heel, sandal, flat };
enum class Color : std::uint8_t {
  black, white, brown, red, blue, green, yellow, pink, gray, beige, purple, orange
};
enum class Toe : std::uint8_t { round, pointed, open };
enum class Pattern : std::uint8_t { solid, stripes, polka, leopard };
enum class Ornament : std::uint8_t { laces, strap, buckle, bow, zipper, none };
enum class Position : std::uint8_t { toe, side, top, ankle };

inline constexpr std::array<std::string_view, 5> kCategoryNames{"sneaker", "boot", "heel",
                                                                 "sandal", "flat"};
inline constexpr std::array<std::string_view, 12> kColorNames{
    "black", "white", "brown", "red", "blue", "green",
    "yellow", "pink", "gray", "beige", "purple", "orange"};
inline constexpr std::array<std::string_view, 3> kToeNames{"round", "pointed", "open"};
inline constexpr std::array<std::string_view, 4> kPatternNames{"solid", "stripes", "polka",
                                                               "leopard"};
inline constexpr std::array<std::string_view, 6> kOrnamentNames{"laces", "strap", "buckle",
                                                                "bow", "zipper", "none"};
inline constexpr std::array<std::string_view, 4> kPositionNames{"toe", "side", "top",
                                                                "ankle"};

/// Categorical part-level features in a fixed field order.
enum class FineField : std::uint8_t {
  category, primary_color, accent_color, toe, pattern, ornament, ornament_position
};
inline constexpr std::size_t kFineFieldCount = 7;
inline constexpr std::array<std::string_view, kFineFieldCount> kFineFieldNames{
    "category", "primary_color", "accent_color", "toe",
    "pattern",  "ornament",      "ornament_position"};
inline constexpr std::array<std::size_t, kFineFieldCount> kFineFieldCardinality{5, 12, 12, 3,
                                                                                4, 6,  4};

struct FineFeatures {
  Category category = Category::sneaker;
  Color primary_color = Color::black;
  Color accent_color = Color::black;
  Toe toe = Toe::round;
  Pattern pattern = Pattern::solid;
  Ornament ornament = Ornament::none;
  Position ornament_position = Position::toe;

  std::size_t get(FineField f) const noexcept;
  void set(FineField f, std::size_t value);

  friend bool operator==(const FineFeatures&, const FineFeatures&) = default;
};

struct ItemDescriptor {
  ItemId id = 0;
  std::array<float, kCoarseCount> coarse{};
  FineFeatures fine;

  float attribute(Coarse c) const noexcept { return coarse[static_cast<std::size_t>(c)]; }

  friend bool operator==(const ItemDescriptor&, const ItemDescriptor&) = default;
};

/// Same appearance: fine features and coarse vector equal (ids ignored).
bool same_appearance(const ItemDescriptor& a, const ItemDescriptor& b) noexcept;

std::string_view fine_value_name(FineField field, std::size_t value);
std::optional<std::size_t> parse_fine_value(FineField field, std::string_view name);

}  // namespace dmgr::corpus
