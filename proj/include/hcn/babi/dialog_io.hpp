#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hcn::babi {

/// "restaurant R_attribute value" line from an inline database result.
struct DbRow {
  std::string restaurant;
  std::string attribute;
  std::string value;
};

/// Non-dialog lines appearing between two turns: result rows, or the Task6
/// marker "api_call no result".
struct DbBlock {
  std::vector<DbRow> rows;
  bool no_result = false;

  bool empty() const { return rows.empty() && !no_result; }
};

struct BabiTurn {
  std::string user;  // empty for <SILENCE>
  std::string system;
};

/// One dialog. `db_blocks[t]` holds the lines that precede turn t.
struct BabiDialog {
  std::vector<BabiTurn> turns;
  std::vector<DbBlock> db_blocks;
  DbBlock trailing;  // result lines after the last turn, if any
};

/// Parses the bAbI dialog format: "N user<TAB>system" turn lines, "N name
/// R_attr value" result lines, blank lines between dialogs. Line numbers
/// restart at 1 in every dialog.
std::vector<BabiDialog> parse_babi_dialogs(std::string_view text,
                                           std::string_view source = "<text>");
std::vector<BabiDialog> load_babi_dialogs(const std::filesystem::path& path);

/// Inverse of parse_babi_dialogs; every dialog is followed by a blank line.
std::string serialize_babi_dialogs(const std::vector<BabiDialog>& dialogs);

/// Every user utterance, in file order (empty turns included).
std::vector<std::string> user_utterances(const std::vector<BabiDialog>& dialogs);

}  // namespace hcn::babi
