#include "hcn/engine/domain_pack.hpp"

#include <fmt/format.h>

#include "hcn/util/error.hpp"

namespace hcn::engine {

std::vector<std::string> template_slots(std::string_view surface) {
  std::vector<std::string> slots;
  std::size_t pos = 0;
  while ((pos = surface.find('<', pos)) != std::string_view::npos) {
    const auto close = surface.find('>', pos + 1);
    if (close == std::string_view::npos) break;
    slots.emplace_back(surface.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
  return slots;
}

std::string render_action(const DomainPack& pack, const ActionTemplate& action,
                          const EntityState& state) {
  std::string out;
  std::string_view s = action.surface;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto open = s.find('<', pos);
    const auto close = open == std::string_view::npos ? open : s.find('>', open + 1);
    if (close == std::string_view::npos) {
      out.append(s.substr(pos));
      break;
    }
    out.append(s.substr(pos, open - pos));
    const auto slot = s.substr(open + 1, close - open - 1);
    auto value = pack.slot_value(state, action, slot);
    if (!value)
      throw DataError(fmt::format("no tracked value for slot <{}> in action {} \"{}\"", slot,
                                  action.id, action.surface));
    out.append(*value);
    pos = close + 1;
  }
  return out;
}

}  // namespace hcn::engine
