#include <doctest.h>

#include "hcn/babi/dialog_io.hpp"
#include "hcn/util/error.hpp"
#include "hcn/util/io.hpp"
#include "support/fixtures.hpp"

using namespace hcn;
using namespace hcn::babi;

TEST_CASE("example Task5 dialog round-trips exactly") {
  const auto text = io::read_file(testing::fixture_path("task5_example.txt"));
  const auto dialogs = parse_babi_dialogs(text);
  REQUIRE(dialogs.size() == 1);
  CHECK(dialogs[0].turns.size() == 16);
  CHECK(serialize_babi_dialogs(dialogs) == text);
}

TEST_CASE("example Task6 dialog round-trips exactly") {
  const auto text = io::read_file(testing::fixture_path("task6_example.txt"));
  CHECK(serialize_babi_dialogs(parse_babi_dialogs(text)) == text);
}

TEST_CASE("result rows attach to the following turn") {
  const auto d = load_babi_dialogs(testing::fixture_path("task5_example.txt")).at(0);
  REQUIRE(d.db_blocks.size() == d.turns.size());
  CHECK(d.db_blocks[7].rows.size() == 21);
  CHECK(d.db_blocks[7].rows[0].restaurant == "resto_madrid_cheap_spanish_1stars");
  CHECK(d.db_blocks[7].rows[0].attribute == "R_phone");
  for (std::size_t t = 0; t < d.turns.size(); ++t)
    if (t != 7) CHECK(d.db_blocks[t].empty());
  CHECK(d.trailing.empty());
}

TEST_CASE("silence is an empty user turn") {
  const auto d = parse_babi_dialogs("1 hi\thello\n2 <SILENCE>\tapi_call a b c d\n\n");
  REQUIRE(d.size() == 1);
  REQUIRE(d[0].turns.size() == 2);
  CHECK(d[0].turns[1].user.empty());
  CHECK(d[0].turns[1].system == "api_call a b c d");
  CHECK(user_utterances(d) == std::vector<std::string>{"hi", ""});
}

TEST_CASE("multiple dialogs, trailing rows and no-result markers") {
  const std::string text =
      "1 a\tb\n2 c\td\n\n"
      "1 e\tapi_call x R_location R_price\n2 api_call no result\n3 f\tg\n4 r1 R_rating 3\n\n";
  const auto d = parse_babi_dialogs(text);
  REQUIRE(d.size() == 2);
  CHECK(d[0].turns.size() == 2);
  CHECK(d[1].db_blocks[1].no_result);
  CHECK(d[1].trailing.rows.size() == 1);
  CHECK(serialize_babi_dialogs(d) == text);
}

TEST_CASE("missing final blank line still closes the dialog") {
  CHECK(parse_babi_dialogs("1 a\tb\n2 c\td").size() == 1);
  CHECK(parse_babi_dialogs("").empty());
}

TEST_CASE("malformed input") {
  CHECK_THROWS_AS(parse_babi_dialogs("x a\tb\n"), DataError);
  CHECK_THROWS_AS(parse_babi_dialogs("1 a\tb\n3 c\td\n"), DataError);
  CHECK_THROWS_AS(parse_babi_dialogs("2 a\tb\n"), DataError);
  CHECK_THROWS_AS(parse_babi_dialogs("1 a\tb\n1 c\td\n"), DataError);
  CHECK_THROWS_AS(parse_babi_dialogs("1 just some words\n"), DataError);
  CHECK_THROWS_AS(parse_babi_dialogs("1 r1 R_rating 3\n\n"), DataError);
}

TEST_CASE("missing separator error mentions the blank line") {
  try {
    parse_babi_dialogs("1 a\tb\n2 c\td\n1 e\tf\n", "f.txt");
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("f.txt:3") != std::string::npos);
    CHECK(std::string(e.what()).find("blank") != std::string::npos);
  }
}
