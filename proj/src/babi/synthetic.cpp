#include "hcn/babi/synthetic.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <string_view>

#include <fmt/format.h>

namespace hcn::babi {
namespace {

constexpr std::array<std::string_view, 10> kCuisines{
    "italian", "french", "british", "spanish", "indian",
    "japanese", "thai", "korean", "vietnamese", "cantonese"};
constexpr std::array<std::string_view, 10> kLocations{
    "paris", "rome", "london", "madrid", "bombay", "tokyo", "seoul", "beijing", "hanoi", "bangkok"};
constexpr std::array<std::string_view, 4> kOovCuisines{"ethiopian", "greek", "mexican", "polish"};
constexpr std::array<std::string_view, 4> kOovLocations{"lisbon", "oslo", "cairo", "lima"};
constexpr std::array<std::string_view, 3> kPrices{"cheap", "moderate", "expensive"};
constexpr std::array<std::string_view, 4> kSizes{"two", "four", "six", "eight"};

constexpr std::uint64_t kKbSeed = 20170401;

struct Pools {
  std::vector<std::string_view> cuisines;
  std::vector<std::string_view> locations;
};

Pools pools(bool oov) {
  if (oov) return {{kOovCuisines.begin(), kOovCuisines.end()}, {kOovLocations.begin(), kOovLocations.end()}};
  return {{kCuisines.begin(), kCuisines.end()}, {kLocations.begin(), kLocations.end()}};
}

template <class C>
const auto& pick(const C& c, std::mt19937_64& rng) {
  return c[std::uniform_int_distribution<std::size_t>(0, c.size() - 1)(rng)];
}

bool chance(double p, std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

std::vector<DbRow> restaurant_rows(const Restaurant& r) {
  std::vector<DbRow> rows;
  for (const auto& [attr, value] : r.attributes) rows.push_back({r.name, attr, value});
  return rows;
}

struct Goal {
  std::string cuisine, location, size, price;
};

class Writer {
 public:
  void say(std::string user, std::string system) {
    dialog_.turns.push_back({std::move(user), std::move(system)});
    dialog_.db_blocks.push_back(std::move(pending_));
    pending_ = {};
  }
  void results(std::vector<DbRow> rows) { pending_.rows = std::move(rows); }
  BabiDialog finish() {
    dialog_.trailing = std::move(pending_);
    return std::move(dialog_);
  }

 private:
  BabiDialog dialog_;
  DbBlock pending_;
};

std::string slot_phrase(int slot, const Goal& g, std::mt19937_64& rng) {
  switch (slot) {
    case 0: {
      static constexpr std::array<std::string_view, 3> f{"with {} food", "i love {} food",
                                                         "{} cuisine please"};
      return fmt::format(fmt::runtime(pick(f, rng)), g.cuisine);
    }
    case 1: {
      static constexpr std::array<std::string_view, 2> f{"in {}", "somewhere in {}"};
      return fmt::format(fmt::runtime(pick(f, rng)), g.location);
    }
    case 2: {
      static constexpr std::array<std::string_view, 2> f{"for {} people please", "we will be {}"};
      return fmt::format(fmt::runtime(pick(f, rng)), g.size);
    }
    default: {
      static constexpr std::array<std::string_view, 2> f{"in a {} price range please",
                                                         "i am looking for a {} restaurant"};
      return fmt::format(fmt::runtime(pick(f, rng)), g.price);
    }
  }
}

constexpr std::array<std::string_view, 4> kAsks{
    "any preference on a type of cuisine", "where should it be",
    "how many people would be in your party", "which price range are looking for"};

std::string api_call(const Goal& g) {
  return fmt::format("api_call {} {} {} {}", g.cuisine, g.location, g.size, g.price);
}

}  // namespace

KnowledgeBase synthetic_task5_kb(bool oov) {
  std::mt19937_64 rng(kKbSeed + (oov ? 1 : 0));
  const auto p = pools(oov);
  std::vector<DbRow> rows;
  for (auto loc : p.locations)
    for (auto price : kPrices)
      for (auto cuisine : p.cuisines) {
        std::vector<int> ratings{1, 2, 3, 4, 5, 6, 7, 8};
        std::shuffle(ratings.begin(), ratings.end(), rng);
        const auto n = std::uniform_int_distribution<int>(2, 4)(rng);
        for (int k = 0; k < n; ++k) {
          const auto name = fmt::format("resto_{}_{}_{}_{}stars", loc, price, cuisine, ratings[k]);
          rows.push_back({name, "R_phone", name + "_phone"});
          rows.push_back({name, "R_cuisine", std::string(cuisine)});
          rows.push_back({name, "R_address", name + "_address"});
          rows.push_back({name, "R_location", std::string(loc)});
          rows.push_back({name, "R_number", std::string(pick(kSizes, rng))});
          rows.push_back({name, "R_price", std::string(price)});
          rows.push_back({name, "R_rating", std::to_string(ratings[k])});
        }
      }
  KnowledgeBase kb;
  kb.add_rows(rows);
  return kb;
}

SyntheticCorpus generate_synthetic_task5(std::size_t count, std::uint64_t seed, bool oov) {
  SyntheticCorpus corpus{{}, synthetic_task5_kb(oov)};
  const auto p = pools(oov);
  std::mt19937_64 rng(seed);

  auto random_goal = [&] {
    return Goal{std::string(pick(p.cuisines, rng)), std::string(pick(p.locations, rng)),
                std::string(pick(kSizes, rng)), std::string(pick(kPrices, rng))};
  };

  for (std::size_t n = 0; n < count; ++n) {
    Writer w;
    Goal goal = random_goal();
    static constexpr std::array<std::string_view, 3> greetings{"hello", "hi", "good morning"};
    w.say(std::string(pick(greetings, rng)), "hello what can i help you with today");

    std::array<bool, 4> known{};
    std::string request = "can you book a table";
    for (int s = 0; s < 4; ++s) {
      if (!chance(0.3, rng)) continue;
      known[s] = true;
      request += " " + slot_phrase(s, goal, rng);
    }
    auto next_missing = [&]() -> int {
      for (int s = 0; s < 4; ++s)
        if (!known[s]) return s;
      return -1;
    };
    w.say(request, "i'm on it");
    std::string user;  // silence
    for (int s = next_missing(); s >= 0; s = next_missing()) {
      w.say(user, std::string(kAsks[s]));
      known[s] = true;
      user = slot_phrase(s, goal, rng);
    }
    w.say(user, "ok let me look into some options for you");

    static constexpr std::array<std::string_view, 4> update_forms{
        "instead could it be with {} food", "actually i would prefer in {}",
        "can you make a restaurant reservation for {} people instead",
        "actually i would prefer a {} price range"};
    int updates = chance(0.4, rng) ? 1 : 0;
    while (true) {
      if (updates == 0) break;
      w.say("", api_call(goal));
      const int slot = std::uniform_int_distribution<int>(0, 3)(rng);
      Goal changed = random_goal();
      std::string value;
      switch (slot) {
        case 0: goal.cuisine = value = changed.cuisine; break;
        case 1: goal.location = value = changed.location; break;
        case 2: goal.size = value = changed.size; break;
        default: goal.price = value = changed.price; break;
      }
      w.say(fmt::format(fmt::runtime(update_forms[slot]), value), "sure is there anything else to update");
      w.say("no", "ok let me look into some options for you");
      --updates;
    }

    auto results = corpus.kb.query({goal.cuisine, goal.location, std::nullopt, goal.price});
    std::vector<DbRow> block;
    auto shown = results;
    std::shuffle(shown.begin(), shown.end(), rng);
    for (const auto& r : shown) {
      auto rows = restaurant_rows(r);
      block.insert(block.end(), rows.begin(), rows.end());
    }
    w.say("", api_call(goal));
    w.results(std::move(block));

    const auto rejections = std::uniform_int_distribution<std::size_t>(0, results.size() - 1)(rng);
    static constexpr std::array<std::string_view, 3> rejects{
        "no this does not work for me", "do you have something else", "no i don't like that"};
    static constexpr std::array<std::string_view, 3> accepts{"it's perfect", "let's do it",
                                                             "that looks great"};
    user.clear();
    for (std::size_t k = 0; k <= rejections; ++k) {
      w.say(user, "what do you think of this option: " + results[k].name);
      if (k < rejections) {
        w.say(std::string(pick(rejects, rng)), "sure let me find an other option for you");
        user.clear();
      }
    }
    const auto& chosen = results[rejections];
    w.say(std::string(pick(accepts, rng)), "great let me do the reservation");

    const auto info_requests = std::uniform_int_distribution<int>(0, 2)(rng);
    for (int k = 0; k < info_requests; ++k) {
      if (chance(0.5, rng))
        w.say("may i have the phone number of the restaurant", "here it is " + *chosen.value_of("phone"));
      else
        w.say("can you provide the address", "here it is " + *chosen.value_of("address"));
    }
    w.say("thanks", "is there anything i can help you with");
    w.say("no thank you", "you're welcome");
    corpus.dialogs.push_back(w.finish());
  }
  return corpus;
}

}  // namespace hcn::babi
