#include "hcn/babi/knowledge.hpp"

#include <algorithm>
#include <charconv>
#include <regex>

#include <fmt/format.h>

#include "hcn/util/error.hpp"
#include "hcn/util/io.hpp"

namespace hcn::babi {
namespace {

constexpr std::array<std::pair<std::string_view, std::string_view>, 7> kAttributeTypes{{
    {"R_cuisine", "cuisine"},
    {"R_location", "location"},
    {"R_price", "price"},
    {"R_number", "party_size"},
    {"R_phone", "phone"},
    {"R_address", "address"},
    {"R_post_code", "postcode"},
}};

constexpr std::array<Slot, 3> kTask6Slots{Slot::cuisine, Slot::location, Slot::price};

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    const auto start = i;
    while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::string join(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

bool is_placeholder(std::string_view token) { return token.starts_with("R_"); }

}  // namespace

std::string_view slot_name(Slot slot) {
  switch (slot) {
    case Slot::cuisine:
      return "cuisine";
    case Slot::location:
      return "location";
    case Slot::party_size:
      return "party_size";
    case Slot::price:
      return "price";
  }
  return {};
}

std::optional<Slot> slot_from_name(std::string_view name) {
  for (auto s : kAllSlots)
    if (slot_name(s) == name) return s;
  return std::nullopt;
}

std::span<const Slot> task_slots(Task task) {
  if (task == Task::task5) return kAllSlots;
  return kTask6Slots;
}

std::optional<std::string> attribute_type(std::string_view attribute) {
  for (const auto& [attr, type] : kAttributeTypes)
    if (attr == attribute) return std::string(type);
  return std::nullopt;
}

std::optional<std::string> type_attribute(std::string_view type) {
  for (const auto& [attr, t] : kAttributeTypes)
    if (t == type) return std::string(attr);
  return std::nullopt;
}

bool is_identity_type(std::string_view type) {
  return type == "name" || type == "phone" || type == "address" || type == "postcode";
}

const std::string* Restaurant::attribute(std::string_view attr) const {
  for (const auto& [a, v] : attributes)
    if (a == attr) return &v;
  return nullptr;
}

std::optional<std::string> Restaurant::value_of(std::string_view type) const {
  if (type == "name") return name;
  const auto attr = type_attribute(type);
  if (!attr) return std::nullopt;
  if (const auto* v = attribute(*attr)) return *v;
  return std::nullopt;
}

std::vector<Restaurant> group_rows(std::span<const DbRow> rows) {
  std::vector<Restaurant> out;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& row : rows) {
    auto [it, fresh] = index.try_emplace(row.restaurant, out.size());
    if (fresh) out.push_back(Restaurant{row.restaurant, {}, 0});
    auto& r = out[it->second];
    if (row.attribute == "R_rating") {
      int rating = 0;
      const auto* b = row.value.data();
      if (std::from_chars(b, b + row.value.size(), rating).ec == std::errc()) r.rating = rating;
    }
    r.attributes.emplace_back(row.attribute, row.value);
  }
  return out;
}

void sort_by_rating(std::vector<Restaurant>& restaurants) {
  std::stable_sort(restaurants.begin(), restaurants.end(),
                   [](const Restaurant& a, const Restaurant& b) { return a.rating > b.rating; });
}

void KnowledgeBase::add_rows(std::span<const DbRow> rows) {
  for (auto& r : group_rows(rows)) {
    auto [it, fresh] = by_name_.try_emplace(r.name, restaurants_.size());
    if (fresh) {
      restaurants_.push_back(std::move(r));
    } else {
      auto& known = restaurants_[it->second];
      for (auto& attr : r.attributes)
        if (!known.attribute(attr.first)) known.attributes.push_back(std::move(attr));
      if (known.rating == 0) known.rating = r.rating;
    }
    const auto& stored = restaurants_[it->second];
    by_identity_.try_emplace(stored.name, it->second);
    for (const auto& [attr, value] : stored.attributes) {
      const auto type = attribute_type(attr);
      if (type && is_identity_type(*type)) by_identity_.try_emplace(value, it->second);
    }
  }
}

void KnowledgeBase::add_dialogs(std::span<const BabiDialog> dialogs) {
  for (const auto& d : dialogs) {
    for (const auto& block : d.db_blocks) add_rows(block.rows);
    add_rows(d.trailing.rows);
  }
}

const Restaurant* KnowledgeBase::find(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  return it == by_name_.end() ? nullptr : &restaurants_[it->second];
}

const Restaurant* KnowledgeBase::owner(std::string_view value) const {
  const auto it = by_identity_.find(std::string(value));
  return it == by_identity_.end() ? nullptr : &restaurants_[it->second];
}

std::vector<Restaurant> KnowledgeBase::query(const SlotValues& slots) const {
  std::vector<Restaurant> out;
  for (const auto& r : restaurants_) {
    bool ok = true;
    for (auto s : {Slot::cuisine, Slot::location, Slot::price}) {
      const auto& want = slots[static_cast<std::size_t>(s)];
      if (!want) continue;
      const auto have = r.value_of(slot_name(s));
      if (!have || *have != *want) ok = false;
    }
    if (ok) out.push_back(r);
  }
  sort_by_rating(out);
  return out;
}

KnowledgeBase load_knowledge_base(const std::filesystem::path& path) {
  std::vector<DbRow> rows;
  std::size_t line_no = 0;
  for (const auto& line : io::read_lines(path)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    std::size_t first = 0;
    int n = 0;
    const auto& t0 = tokens[0];
    if (std::from_chars(t0.data(), t0.data() + t0.size(), n).ptr == t0.data() + t0.size()) first = 1;
    if (tokens.size() < first + 3 || !is_placeholder(tokens[first + 1]))
      throw DataError(fmt::format("{}:{}: expected 'restaurant R_attribute value'", path.string(),
                                  line_no));
    rows.push_back({tokens[first], tokens[first + 1],
                    join(std::span(tokens).subspan(first + 2))});
  }
  KnowledgeBase kb;
  kb.add_rows(rows);
  return kb;
}

std::optional<SlotValues> parse_api_call(std::string_view text, Task task) {
  const auto tokens = split_ws(text);
  if (tokens.empty() || tokens[0] != "api_call") return std::nullopt;
  SlotValues out;
  auto set = [&](Slot s, std::string value) {
    if (!is_placeholder(value)) out[static_cast<std::size_t>(s)] = std::move(value);
  };
  if (task == Task::task5) {
    if (tokens.size() != 5) return std::nullopt;
    set(Slot::cuisine, tokens[1]);
    set(Slot::location, tokens[2]);
    set(Slot::party_size, tokens[3]);
    set(Slot::price, tokens[4]);
  } else {
    if (tokens.size() < 4) return std::nullopt;
    const auto n = tokens.size();
    set(Slot::price, tokens[n - 1]);
    set(Slot::location, tokens[n - 2]);
    set(Slot::cuisine, join(std::span(tokens).subspan(1, n - 3)));
  }
  return out;
}

void Lexicon::add(std::string_view type, std::string_view value) {
  auto tokens = split_ws(value);
  if (tokens.empty()) return;
  max_len_ = std::max(max_len_, tokens.size());
  entries_[std::move(tokens)].insert(std::string(type));
  by_type_[std::string(type)].insert(std::string(value));
}

void Lexicon::merge(const Lexicon& other) {
  for (const auto& [type, values] : other.by_type_)
    for (const auto& v : values) add(type, v);
}

bool Lexicon::contains(std::string_view value) const {
  return entries_.contains(split_ws(value));
}

const std::set<std::string>& Lexicon::values(std::string_view type) const {
  static const std::set<std::string> none;
  const auto it = by_type_.find(type);
  return it == by_type_.end() ? none : it->second;
}

engine::Mentions Lexicon::match(std::span<const std::string> tokens,
                                const std::set<std::string>* types) const {
  engine::Mentions out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    std::size_t matched = 0;
    for (auto len = std::min(max_len_, tokens.size() - i); len > 0 && matched == 0; --len) {
      const std::vector<std::string> key(tokens.begin() + i, tokens.begin() + i + len);
      const auto it = entries_.find(key);
      if (it == entries_.end()) continue;
      for (const auto& type : it->second) {
        if (types && !types->contains(type)) continue;
        out.push_back({type, join(key), i, i + len});
        matched = len;
      }
    }
    i += matched ? matched : 1;
  }
  return out;
}

Lexicon build_lexicon(const KnowledgeBase& kb, std::span<const BabiDialog> dialogs, Task task,
                      bool mine_refusals) {
  Lexicon lex;
  for (const auto& r : kb.restaurants()) {
    lex.add("name", r.name);
    for (const auto& [attr, value] : r.attributes)
      if (const auto type = attribute_type(attr)) lex.add(*type, value);
  }
  std::vector<std::string> refused;
  static const std::regex refusal(R"(there is no ([a-z_ ]+?) restaurant|no restaurant serving ([a-z_ ]+?) food)");
  for (const auto& d : dialogs) {
    for (const auto& turn : d.turns) {
      if (const auto slots = parse_api_call(turn.system, task)) {
        for (auto s : kAllSlots)
          if (const auto& v = (*slots)[static_cast<std::size_t>(s)]) lex.add(slot_name(s), *v);
      } else if (task == Task::task6 && mine_refusals) {
        std::smatch m;
        if (std::regex_search(turn.system, m, refusal))
          refused.push_back(m[1].matched ? m[1].str() : m[2].str());
      }
    }
  }
  // Refusals name cuisines absent from the database; anything already known
  // as another entity (a price or area) is left alone.
  static const std::set<std::string> not_cuisine{"priced", "price", "range", "part", "town",
                                                  "area", "of", "the", "in", "and", "such"};
  for (const auto& value : refused) {
    const auto tokens = split_ws(value);
    const bool plausible =
        !tokens.empty() && tokens.size() <= 3 &&
        std::none_of(tokens.begin(), tokens.end(), [&](const std::string& t) {
          return not_cuisine.contains(t) || lex.contains(t);
        });
    if (plausible) lex.add("cuisine", value);
  }
  return lex;
}

std::vector<std::string> split_spaces(std::string_view text) { return split_ws(text); }

}  // namespace hcn::babi
