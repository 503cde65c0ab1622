#include "hcn/babi/dialog_io.hpp"

#include <charconv>

#include <fmt/format.h>

#include "hcn/util/error.hpp"
#include "hcn/util/io.hpp"

namespace hcn::babi {
namespace {

constexpr std::string_view kSilence = "<SILENCE>";
constexpr std::string_view kNoResult = "api_call no result";

struct NumberedLine {
  std::size_t number = 0;
  std::string_view rest;
};

NumberedLine split_number(std::string_view line, std::string_view source, std::size_t line_no) {
  const auto space = line.find(' ');
  std::size_t n = 0;
  const auto head = line.substr(0, space);
  auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), n);
  if (space == std::string_view::npos || ec != std::errc() || ptr != head.data() + head.size() ||
      n == 0)
    throw DataError(fmt::format("{}:{}: malformed line number in '{}'", source, line_no, line));
  return {n, line.substr(space + 1)};
}

DbRow parse_row(std::string_view rest, std::string_view source, std::size_t line_no) {
  const auto a = rest.find(' ');
  const auto b = a == std::string_view::npos ? a : rest.find(' ', a + 1);
  if (b == std::string_view::npos || rest.substr(a + 1, 2) != "R_")
    throw DataError(
        fmt::format("{}:{}: expected 'restaurant R_attribute value', got '{}'", source, line_no, rest));
  return {std::string(rest.substr(0, a)), std::string(rest.substr(a + 1, b - a - 1)),
          std::string(rest.substr(b + 1))};
}

void write_block(std::string& out, const DbBlock& block, std::size_t& n) {
  if (block.no_result) out += fmt::format("{} {}\n", n++, kNoResult);
  for (const auto& r : block.rows)
    out += fmt::format("{} {} {} {}\n", n++, r.restaurant, r.attribute, r.value);
}

}  // namespace

std::vector<BabiDialog> parse_babi_dialogs(std::string_view text, std::string_view source) {
  std::vector<BabiDialog> dialogs;
  BabiDialog current;
  DbBlock pending;
  std::size_t expected = 1;
  bool open = false;

  auto close = [&] {
    if (!open) return;
    if (current.turns.empty())
      throw DataError(fmt::format("{}: dialog {} has no turns", source, dialogs.size() + 1));
    current.trailing = std::move(pending);
    dialogs.push_back(std::move(current));
    current = {};
    pending = {};
    expected = 1;
    open = false;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      close();
      continue;
    }
    const auto [number, rest] = split_number(line, source, line_no);
    if (number != expected) {
      if (number == 1)
        throw DataError(fmt::format("{}:{}: new dialog starts without a blank separator line",
                                    source, line_no));
      throw DataError(fmt::format("{}:{}: line number {} where {} was expected", source, line_no,
                                  number, expected));
    }
    ++expected;
    open = true;
    const auto tab = rest.find('\t');
    if (tab != std::string_view::npos) {
      const auto user = rest.substr(0, tab);
      current.turns.push_back({user == kSilence ? std::string() : std::string(user),
                               std::string(rest.substr(tab + 1))});
      current.db_blocks.push_back(std::move(pending));
      pending = {};
    } else if (rest == kNoResult) {
      pending.no_result = true;
    } else {
      pending.rows.push_back(parse_row(rest, source, line_no));
    }
  }
  close();
  return dialogs;
}

std::vector<BabiDialog> load_babi_dialogs(const std::filesystem::path& path) {
  return parse_babi_dialogs(io::read_file(path), path.string());
}

std::string serialize_babi_dialogs(const std::vector<BabiDialog>& dialogs) {
  std::string out;
  for (const auto& d : dialogs) {
    std::size_t n = 1;
    for (std::size_t t = 0; t < d.turns.size(); ++t) {
      if (t < d.db_blocks.size()) write_block(out, d.db_blocks[t], n);
      const auto& turn = d.turns[t];
      out += fmt::format("{} {}\t{}\n", n++, turn.user.empty() ? kSilence : turn.user, turn.system);
    }
    write_block(out, d.trailing, n);
    out += '\n';
  }
  return out;
}

std::vector<std::string> user_utterances(const std::vector<BabiDialog>& dialogs) {
  std::vector<std::string> out;
  for (const auto& d : dialogs)
    for (const auto& t : d.turns) out.push_back(t.user);
  return out;
}

}  // namespace hcn::babi
