#include <doctest.h>

#include <algorithm>

#include "hcn/babi/pack.hpp"
#include "hcn/babi/synthetic.hpp"
#include "hcn/features/observation.hpp"
#include "hcn/util/error.hpp"
#include "support/fixtures.hpp"

using namespace hcn;
using namespace hcn::babi;

namespace {

const SyntheticCorpus& corpus() {
  static const auto c = generate_synthetic_task5(300, 11);
  return c;
}

const BabiPack& task5_pack() {
  static const auto p = BabiPack::build(corpus().dialogs, corpus().kb, {Task::task5});
  return p;
}

ActionId find_template(const BabiPack& pack, std::string_view surface) {
  for (const auto& t : pack.templates())
    if (t.surface == surface) return t.id;
  FAIL("no template " << surface);
  return 0;
}

features::Featurizer context_only(const BabiPack& pack) {
  return features::Featurizer(std::nullopt, nullptr, pack.context_size(), 0);
}

std::vector<BabiDialog> task6_example() {
  return load_babi_dialogs(testing::fixture_path("task6_example.txt"));
}

}  // namespace

TEST_CASE("synthetic Task5 corpus has 16 templates") {
  const auto& pack = task5_pack();
  CHECK(pack.action_count() == 16);
  CHECK_FALSE(pack.unk_action());
  for (const char* s : {"hello what can i help you with today",
                        "api_call <cuisine> <location> <party_size> <price>",
                        "what do you think of this option: <name>", "here it is <phone>",
                        "here it is <address>", "which price range are looking for"})
    CHECK(std::count_if(pack.templates().begin(), pack.templates().end(),
                        [&](const auto& t) { return t.surface == s; }) == 1);
  const auto api = find_template(pack, "api_call <cuisine> <location> <party_size> <price>");
  CHECK(pack.action(api).kind == engine::ActionKind::api);
}

TEST_CASE("template roles are inferred from the data") {
  const auto& pack = task5_pack();
  const auto& info = pack.template_info();
  CHECK(info[find_template(pack, "what do you think of this option: <name>")].role ==
        TemplateRole::offer);
  CHECK(info[find_template(pack, "here it is <phone>")].role == TemplateRole::inform);
  const auto price = find_template(pack, "which price range are looking for");
  CHECK(info[price].role == TemplateRole::ask_slot);
  CHECK(info[price].asks == Slot::price);
  CHECK(info[find_template(pack, "where should it be")].asks == Slot::location);
  CHECK(info[find_template(pack, "you're welcome")].role == TemplateRole::plain);
}

TEST_CASE("every training turn renders back to its reference and is permitted") {
  const auto& pack = task5_pack();
  const auto fz = context_only(pack);
  std::size_t turns = 0;
  for (const auto& d : corpus().dialogs) {
    const auto enc = pack.encode(d, fz);
    REQUIRE(enc.size() == d.turns.size());
    for (std::size_t t = 0; t < enc.size(); ++t) {
      REQUIRE(enc.masks[t].test(enc.labels[t]));
      REQUIRE(engine::render_action(pack, pack.action(enc.labels[t]), enc.states[t]) ==
              enc.references[t]);
      ++turns;
    }
  }
  CHECK(turns > 3000);
}

TEST_CASE("the example Task5 dialog encodes and renders") {
  const auto d = load_babi_dialogs(testing::fixture_path("task5_example.txt"));
  const auto pack = task5_pack().with_knowledge(d);
  const auto enc = pack.encode(d[0], context_only(pack));
  REQUIRE(enc.size() == 16);
  CHECK(pack.action(enc.labels[0]).surface == "hello what can i help you with today");
  CHECK(pack.action(enc.labels[6]).kind == engine::ActionKind::api);
  CHECK(pack.action(enc.labels[7]).surface == "what do you think of this option: <name>");
  CHECK(pack.action(enc.labels[13]).surface == "here it is <phone>");
  for (std::size_t t = 0; t < enc.size(); ++t) {
    CHECK(enc.masks[t].test(enc.labels[t]));
    CHECK(engine::render_action(pack, pack.action(enc.labels[t]), enc.states[t]) ==
          enc.references[t]);
  }
}

TEST_CASE("entity extraction") {
  const auto& pack = task5_pack();
  auto m = pack.extract_entities("i'd like to book a table with italian food");
  REQUIRE(m.size() == 1);
  CHECK(m[0].type == "cuisine");
  CHECK(m[0].value == "italian");
  CHECK(m[0].token_begin == 7);
  m = pack.extract_entities("in a cheap price range please");
  REQUIRE(m.size() == 1);
  CHECK(m[0].type == "price");
  CHECK(m[0].value == "cheap");
  CHECK(pack.extract_entities("good morning").empty());
  CHECK(pack.extract_entities("").empty());
}

TEST_CASE("longest match wins and multi-word values match") {
  Lexicon lex;
  lex.add("cuisine", "north american");
  lex.add("location", "north");
  const std::vector<std::string> tokens{"some", "north", "american", "food", "in", "the", "north"};
  const auto m = lex.match(tokens);
  REQUIRE(m.size() == 2);
  CHECK(m[0].type == "cuisine");
  CHECK(m[0].value == "north american");
  CHECK(m[0].token_end == 3);
  CHECK(m[1].type == "location");
  CHECK(m[1].token_begin == 6);
}

TEST_CASE("mentions overwrite slots") {
  BabiState s;
  s = update_entity_state(s, {{"price", "cheap", 0, 1}}, {});
  CHECK(s.slot(Slot::price) == "cheap");
  s = update_entity_state(s, {{"price", "expensive", 3, 4}}, {});
  CHECK(s.slot(Slot::price) == "expensive");
  const auto before = s.slots;
  s = update_entity_state(s, {}, {});
  CHECK(s.slots == before);
  CHECK_FALSE(s.db_returned);
}

TEST_CASE("result rows are sorted by rating") {
  DbBlock block;
  for (auto [name, rating] : {std::pair{"a", "3"}, {"b", "8"}, {"c", "5"}}) {
    block.rows.push_back({name, "R_cuisine", "thai"});
    block.rows.push_back({name, "R_rating", rating});
  }
  const auto s = update_entity_state({}, {}, block);
  REQUIRE(s.db);
  REQUIRE(s.db->size() == 3);
  CHECK((*s.db)[0].rating == 8);
  CHECK((*s.db)[1].rating == 5);
  CHECK((*s.db)[2].rating == 3);
  CHECK(s.results_nonempty());
  CHECK(s.next_unoffered()->name == "b");
}

TEST_CASE("Task5 action masks") {
  const auto& pack = task5_pack();
  const auto api = find_template(pack, "api_call <cuisine> <location> <party_size> <price>");
  const auto offer = find_template(pack, "what do you think of this option: <name>");
  const auto ask_price = find_template(pack, "which price range are looking for");
  const auto phone = find_template(pack, "here it is <phone>");

  BabiState s;
  auto mask = pack.mask_for(s);
  CHECK_FALSE(mask.test(api));
  CHECK_FALSE(mask.test(offer));
  CHECK_FALSE(mask.test(phone));
  CHECK(mask.test(ask_price));

  s.slots = {"italian", "paris", "six", "cheap"};
  mask = pack.mask_for(s);
  CHECK(mask.test(api));
  CHECK_FALSE(mask.test(offer));
  CHECK_FALSE(mask.test(ask_price));

  const auto unmasked = pack.with_options(false, false).mask_for(BabiState{});
  CHECK(unmasked.count() == unmasked.size());
}

TEST_CASE("Task5 context features") {
  const auto& pack = task5_pack();
  CHECK(pack.context_size() == 4);
  BabiState s;
  s.slots[0] = "italian";
  s.slots[1] = "paris";
  const auto f = pack.features_for(s, {});
  REQUIRE(f.size() == 4);
  CHECK(f[0] == 1.0);
  CHECK(f[1] == 1.0);
  CHECK(f[2] == 0.0);
  CHECK(f[3] == 0.0);
}

TEST_CASE("Task6 example: templates, roles and the empty-query table") {
  const auto dialogs = task6_example();
  const auto pack = BabiPack::build(dialogs, {}, {Task::task6});
  CHECK(pack.context_size() == 14);
  std::vector<std::string> surfaces;
  for (const auto& t : pack.templates()) surfaces.push_back(t.surface);
  CHECK(surfaces[2] == "api_call <cuisine> <location> <price>");
  CHECK(surfaces[3] ==
        "<name> is a great restaurant serving <cuisine> food and it is in the <price> price range");
  CHECK(surfaces[5] == "<name> serves <cuisine> food .");
  CHECK(surfaces[6] == "The phone number of <name> is <phone>");
  CHECK(pack.template_info()[3].role == TemplateRole::offer);
  CHECK(pack.template_info()[5].role == TemplateRole::inform);

  const auto& table = pack.empty_query_table();
  CHECK(table.cuisines.contains("canapes"));
  CHECK(table.queries.contains("canapes|*|*"));

  const auto enc = pack.encode(dialogs[0], context_only(pack));
  // Context bits at the refusal turn: cuisine in state and utterance, then
  // both known-empty bits.
  const auto& f = enc.observations[1];
  CHECK(f[0] == 1.0);
  CHECK(f[3] == 1.0);
  CHECK(f[6] == 0.0);
  CHECK(f[12] == 1.0);
  CHECK(f[13] == 1.0);
  // After the api_call: queried, non-empty, nothing presented yet.
  const auto& g = enc.observations[3];
  CHECK(g[6] == 1.0);
  CHECK(g[7] == 0.0);
  CHECK(g[8] == 1.0);
  CHECK(g[9] == 0.0);
  CHECK(g[11] == 1.0);
  CHECK(g[12] == 0.0);
  // After the offer: all presented, none available.
  const auto& h = enc.observations[4];
  CHECK(h[9] == 1.0);
  CHECK(h[10] == 1.0);
  CHECK(h[11] == 0.0);
  for (std::size_t t = 0; t < enc.size(); ++t)
    CHECK(engine::render_action(pack, pack.action(enc.labels[t]), enc.states[t]) ==
          enc.references[t]);
}

TEST_CASE("Task6 api_call renders placeholders for unset slots") {
  const auto dialogs = task6_example();
  const auto pack = BabiPack::build(dialogs, {}, {Task::task6});
  BabiState s;
  s.slots[0] = "european";
  CHECK(engine::render_action(pack, pack.action(2), s) == "api_call european R_location R_price");
}

TEST_CASE("templatization grounded in the referenced restaurant") {
  const auto dialogs = parse_babi_dialogs(
      "1 hello\tapi_call italian R_location R_price\n"
      "2 prezzo R_location west\n3 prezzo R_price moderate\n4 prezzo R_cuisine italian\n"
      "5 <SILENCE>\tprezzo is a nice restaurant in the west of town in the moderate price range\n"
      "6 cheap please\tthere are no cheap restaurants in the west\n\n");
  const auto pack = BabiPack::build(dialogs, {}, {Task::task6});
  BabiState s;
  CHECK(pack.templatize("prezzo is a nice restaurant in the west of town in the moderate price range", s)
            .surface == "<name> is a nice restaurant in the <location> of town in the <price> price range");
  // No restaurant referenced: values are replaced only when they match the
  // user's own constraints.
  CHECK(pack.templatize("there are no cheap restaurants in the west", s).surface ==
        "there are no cheap restaurants in the west");
  s.slots[static_cast<std::size_t>(Slot::price)] = "moderate";
  CHECK(pack.templatize("there are no moderate restaurants in the west", s).surface ==
        "there are no <price> restaurants in the west");
}

TEST_CASE("no refusals, empty table") {
  CHECK(mine_empty_query_table(corpus().dialogs, corpus().kb, Task::task5).empty());
  const auto t6 = task6_example();
  const auto table = mine_empty_query_table(t6, {}, Task::task6);
  CHECK(table.cuisines == std::set<std::string>{"canapes"});
}

TEST_CASE("rare templates fold into UNK, masked only at test time") {
  auto dialogs = corpus().dialogs;
  dialogs.resize(50);
  auto odd = dialogs[0];
  odd.turns.back().system = "goodbye and good luck";
  dialogs.push_back(odd);
  const auto pack = BabiPack::build(dialogs, corpus().kb, {Task::task5, true, false, 2});
  REQUIRE(pack.unk_action());
  const auto unk = *pack.unk_action();
  CHECK(unk == pack.action_count() - 1);
  CHECK(pack.action(unk).surface == "UNK");
  const auto enc = pack.encode(dialogs.back(), context_only(pack));
  CHECK(enc.labels.back() == unk);
  CHECK(enc.masks.back().test(unk));
  CHECK_FALSE(pack.with_options(true, true).mask_for(BabiState{}).test(unk));
  CHECK_FALSE(pack.with_options(false, true).mask_for(BabiState{}).test(unk));
}

TEST_CASE("unknown utterance without UNK is an error") {
  auto d = corpus().dialogs[0];
  d.turns.back().system = "never seen before";
  CHECK_THROWS_AS(task5_pack().encode(d, context_only(task5_pack())), DataError);
}

TEST_CASE("template inventory persists as id, kind, surface lines") {
  const auto& t = task5_pack().templates();
  const auto text = format_template_inventory(t);
  CHECK(text.find("0\ttext\thello what can i help you with today\n") == 0);
  const auto back = parse_template_inventory(text);
  REQUIRE(back.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(back[i].surface == t[i].surface);
    CHECK(back[i].kind == t[i].kind);
  }
  CHECK_THROWS_AS(parse_template_inventory("1\ttext\tx\n"), DataError);
  CHECK_THROWS_AS(parse_template_inventory("0\tfoo\tx\n"), DataError);
}

TEST_CASE("live api dispatch queries the knowledge base") {
  const auto& pack = task5_pack();
  engine::EntityState state = pack.initial_state();
  const auto api = find_template(pack, "api_call <cuisine> <location> <party_size> <price>");
  pack.record_action(state, pack.action(api), "api_call thai rome two cheap");
  const auto result = pack.dispatch_api(pack.action(api), "api_call thai rome two cheap", state);
  const auto& s = std::any_cast<const BabiState&>(state);
  CHECK(s.db_queried);
  REQUIRE(s.results_nonempty());
  for (std::size_t i = 1; i < s.db->size(); ++i) CHECK((*s.db)[i - 1].rating >= (*s.db)[i].rating);
  CHECK(result.text.find("R_rating") != std::string::npos);
}

TEST_CASE("api_call parsing") {
  auto q = parse_api_call("api_call italian paris six cheap", Task::task5);
  REQUIRE(q);
  CHECK((*q)[0] == "italian");
  CHECK((*q)[2] == "six");
  q = parse_api_call("api_call modern european R_location cheap", Task::task6);
  REQUIRE(q);
  CHECK((*q)[0] == "modern european");
  CHECK_FALSE((*q)[1]);
  CHECK((*q)[3] == "cheap");
  CHECK_FALSE(parse_api_call("api_call a b", Task::task5));
  CHECK_FALSE(parse_api_call("hello", Task::task6));
}
