// SPDX-License-Identifier: Apache-2.0
#include "dmgr/corpus/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "dmgr/errors.hpp"
#include "util/json_io.hpp"
#include "json.hpp"

namespace dmgr::corpus {

namespace {

constexpr std::array<float, 12> kBrightness{0.05f, 0.95f, 0.3f, 0.6f, 0.45f, 0.5f,
                                            0.9f,  0.8f,  0.4f, 0.75f, 0.35f, 0.8f};

constexpr std::size_t idx(Coarse c) { return static_cast<std::size_t>(c); }

float clamp01(float v) { return std::clamp(v, 0.0f, 1.0f); }

}  // namespace

const ItemDescriptor& Corpus::item(ItemId id) const {
  if (id >= items.size()) {
    throw ValidationError("item id " + std::to_string(id) + " out of range [0, " +
                          std::to_string(items.size()) + ")");
  }
  return items[id];
}

bool Corpus::in_split(ItemId id, Split s) const {
  const auto& v = ids(s);
  return std::binary_search(v.begin(), v.end(), id);
}

std::array<float, kCoarseCount> coarse_base(const FineFeatures& f) {
  std::array<float, kCoarseCount> c{};
  const auto cat = f.category;

  c[idx(Coarse::pointy)] = f.toe == Toe::pointed ? 0.85f : f.toe == Toe::open ? 0.35f : 0.25f;
  if (cat == Category::heel) c[idx(Coarse::pointy)] += 0.05f;

  float open = f.toe == Toe::open ? 0.6f : 0.1f;
  if (cat == Category::sandal) open += 0.3f;
  if (cat == Category::boot) open -= 0.1f;
  c[idx(Coarse::open)] = open;

  c[idx(Coarse::bright)] = 0.8f * kBrightness[static_cast<std::size_t>(f.primary_color)] +
                           0.2f * kBrightness[static_cast<std::size_t>(f.accent_color)];

  constexpr std::array<float, 5> covered{0.75f, 0.9f, 0.35f, 0.1f, 0.45f};
  c[idx(Coarse::covered)] =
      covered[static_cast<std::size_t>(cat)] - (f.toe == Toe::open ? 0.15f : 0.0f);

  constexpr std::array<float, 4> shiny_pattern{0.5f, 0.3f, 0.35f, 0.45f};
  constexpr std::array<float, 6> shiny_ornament{-0.1f, 0.05f, 0.3f, 0.1f, 0.2f, 0.0f};
  c[idx(Coarse::shiny)] = shiny_pattern[static_cast<std::size_t>(f.pattern)] +
                          shiny_ornament[static_cast<std::size_t>(f.ornament)];

  constexpr std::array<float, 5> heel{0.1f, 0.45f, 0.85f, 0.45f, 0.15f};
  c[idx(Coarse::high_heel)] = heel[static_cast<std::size_t>(cat)];

  constexpr std::array<float, 5> length{0.3f, 0.9f, 0.25f, 0.2f, 0.15f};
  c[idx(Coarse::long_)] = length[static_cast<std::size_t>(cat)] +
                          (f.ornament != Ornament::none &&
                                   f.ornament_position == Position::ankle
                               ? 0.1f
                               : 0.0f);

  constexpr std::array<float, 5> formal{0.1f, 0.45f, 0.8f, 0.35f, 0.6f};
  constexpr std::array<float, 4> formal_pattern{0.1f, -0.05f, -0.15f, -0.1f};
  c[idx(Coarse::formal)] = formal[static_cast<std::size_t>(cat)] +
                           formal_pattern[static_cast<std::size_t>(f.pattern)] +
                           (f.primary_color == Color::black ? 0.1f : 0.0f);

  constexpr std::array<float, 5> sporty{0.85f, 0.35f, 0.05f, 0.3f, 0.2f};
  c[idx(Coarse::sporty)] = sporty[static_cast<std::size_t>(cat)] +
                           (f.ornament == Ornament::laces ? 0.1f : 0.0f) +
                           (f.pattern == Pattern::stripes ? 0.05f : 0.0f);

  constexpr std::array<float, 5> feminine{0.25f, 0.3f, 0.8f, 0.65f, 0.6f};
  c[idx(Coarse::feminine)] =
      feminine[static_cast<std::size_t>(cat)] + (f.ornament == Ornament::bow ? 0.15f : 0.0f) +
      (f.primary_color == Color::pink || f.primary_color == Color::purple ? 0.1f : 0.0f);

  for (auto& v : c) v = clamp01(v);
  return c;
}

Corpus generate_corpus(std::uint64_t seed, std::size_t n, double train_fraction) {
  if (n < kMinCorpusSize) {
    throw ValidationError("corpus needs at least " + std::to_string(kMinCorpusSize) +
                          " items, got " + std::to_string(n));
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ValidationError("split fraction must lie in (0, 1)");
  }
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * train_fraction));
  if (n_train == 0 || n_train >= n) {
    throw ValidationError("split fraction leaves an empty split");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> jitter(-kCoarseJitter, kCoarseJitter);
  Corpus corpus;
  corpus.seed = seed;
  corpus.items.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& item = corpus.items[i];
    item.id = static_cast<ItemId>(i);
    for (std::size_t f = 0; f < kFineFieldCount; ++f) {
      std::uniform_int_distribution<std::size_t> pick(0, kFineFieldCardinality[f] - 1);
      item.fine.set(static_cast<FineField>(f), pick(rng));
    }
    const auto base = coarse_base(item.fine);
    for (std::size_t k = 0; k < kCoarseCount; ++k) {
      item.coarse[k] = clamp01(base[k] + jitter(rng));
    }
  }

  std::vector<ItemId> order(n);
  std::iota(order.begin(), order.end(), ItemId{0});
  std::shuffle(order.begin(), order.end(), rng);
  corpus.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  corpus.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(corpus.train.begin(), corpus.train.end());
  std::sort(corpus.test.begin(), corpus.test.end());
  return corpus;
}

void validate(const Corpus& corpus) {
  if (corpus.items.size() < kMinCorpusSize) {
    throw ValidationError("corpus has fewer than " + std::to_string(kMinCorpusSize) +
                          " items");
  }
  for (std::size_t i = 0; i < corpus.items.size(); ++i) {
    const auto& item = corpus.items[i];
    if (item.id != i) throw ValidationError("item ids must be dense and ordered");
    for (std::size_t k = 0; k < kCoarseCount; ++k) {
      const float v = item.coarse[k];
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw ValidationError("item " + std::to_string(i) + " coarse '" +
                              std::string(kCoarseNames[k]) + "' = " + std::to_string(v) +
                              " outside [0, 1]");
      }
    }
  }
  std::set<ItemId> seen;
  for (const auto* split : {&corpus.train, &corpus.test}) {
    for (auto id : *split) {
      if (id >= corpus.items.size()) throw ValidationError("split id out of range");
      if (!seen.insert(id).second) {
        throw ValidationError("item " + std::to_string(id) + " appears in both splits");
      }
    }
    if (!std::is_sorted(split->begin(), split->end())) {
      throw ValidationError("split ids must be ascending");
    }
  }
  if (seen.size() != corpus.items.size()) {
    throw ValidationError("splits do not cover every item");
  }
  if (corpus.train.empty() || corpus.test.empty()) {
    throw ValidationError("both splits must be non-empty");
  }
}

std::string corpus_to_json(const Corpus& corpus) {
  using nlohmann::json;
  json items = json::array();
  for (const auto& item : corpus.items) {
    json fine = json::object();
    for (std::size_t f = 0; f < kFineFieldCount; ++f) {
      const auto field = static_cast<FineField>(f);
      fine[std::string(kFineFieldNames[f])] =
          std::string(fine_value_name(field, item.fine.get(field)));
    }
    items.push_back({{"id", item.id},
                     {"coarse", std::vector<float>(item.coarse.begin(), item.coarse.end())},
                     {"fine", fine}});
  }
  json doc = {{"version", kCorpusFormatVersion},
              {"seed", corpus.seed},
              {"n", corpus.items.size()},
              {"split", {{"train", corpus.train}, {"test", corpus.test}}},
              {"items", items}};
  return doc.dump() + "\n";
}

Corpus corpus_from_json(const std::string& text) {
  using nlohmann::json;
  const json doc = util::parse_json(text);
  Corpus corpus;
  try {
    if (doc.at("version").get<int>() != kCorpusFormatVersion) {
      throw ValidationError("unsupported corpus version");
    }
    corpus.seed = doc.at("seed").get<std::uint64_t>();
    const auto n = doc.at("n").get<std::size_t>();
    for (const auto& j : doc.at("items")) {
      ItemDescriptor item;
      item.id = j.at("id").get<ItemId>();
      const auto coarse = j.at("coarse").get<std::vector<float>>();
      if (coarse.size() != kCoarseCount) throw ValidationError("coarse vector must have 10 entries");
      std::copy(coarse.begin(), coarse.end(), item.coarse.begin());
      const auto& fine = j.at("fine");
      for (std::size_t f = 0; f < kFineFieldCount; ++f) {
        const auto field = static_cast<FineField>(f);
        const auto name = fine.at(std::string(kFineFieldNames[f])).get<std::string>();
        auto v = parse_fine_value(field, name);
        if (!v) {
          throw ValidationError("unknown value '" + name + "' for field " +
                                std::string(kFineFieldNames[f]));
        }
        item.fine.set(field, *v);
      }
      corpus.items.push_back(item);
    }
    if (corpus.items.size() != n) throw ValidationError("item count does not match n");
    corpus.train = doc.at("split").at("train").get<std::vector<ItemId>>();
    corpus.test = doc.at("split").at("test").get<std::vector<ItemId>>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("corpus schema: ") + e.what());
  }
  validate(corpus);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  util::write_text_file(path, corpus_to_json(corpus));
}

Corpus load_corpus(const std::filesystem::path& path) {
  return corpus_from_json(util::read_text_file(path));
}

}  // namespace dmgr::corpus
