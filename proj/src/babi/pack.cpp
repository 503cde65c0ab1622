#include "hcn/babi/pack.hpp"

#include <algorithm>
#include <array>

#include <fmt/format.h>

#include "hcn/features/tokenizer.hpp"
#include "hcn/util/error.hpp"
#include "hcn/util/io.hpp"
#include "hcn/util/log.hpp"

namespace hcn::babi {

struct BabiPack::Model {
  Task task = Task::task5;
  KnowledgeBase kb;
  Lexicon lexicon;
  std::vector<engine::ActionTemplate> templates;
  std::vector<TemplateInfo> info;
  std::unordered_map<std::string, ActionId> index;
  std::optional<ActionId> unk;
  EmptyQueryTable empty_table;
};

namespace {

using Model = BabiPack::Model;

const std::set<std::string> kIdentityTypes{"name", "phone", "address", "postcode"};

std::size_t idx(Slot s) { return static_cast<std::size_t>(s); }

// Splits on single spaces, keeping empty pieces so that joining restores the
// original text exactly.
std::vector<std::string> split_exact(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto sp = text.find(' ', pos);
    out.emplace_back(text.substr(pos, sp == std::string_view::npos ? sp : sp - pos));
    if (sp == std::string_view::npos) break;
    pos = sp + 1;
  }
  return out;
}

std::string join_exact(const std::vector<std::string>& pieces) {
  std::string out;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (i) out += ' ';
    out += pieces[i];
  }
  return out;
}

bool is_api_text(std::string_view text) {
  return text == "api_call" || text.starts_with("api_call ");
}

std::set<std::string> slot_types(Task task) {
  std::set<std::string> out;
  for (auto s : task_slots(task)) out.emplace(slot_name(s));
  return out;
}

engine::Mentions extract(const Model& m, std::string_view user_text) {
  const auto tokens = features::tokenize(user_text);
  const auto types = slot_types(m.task);
  return m.lexicon.match(tokens, &types);
}

const Restaurant* referenced_restaurant(const Model& m, const std::vector<std::string>& tokens) {
  for (const auto& mention : m.lexicon.match(tokens, &kIdentityTypes))
    if (const auto* r = m.kb.owner(mention.value)) return r;
  return nullptr;
}

const Restaurant* lookup(const Model& m, const BabiState& state, std::string_view name) {
  if (state.db)
    for (const auto& r : *state.db)
      if (r.name == name) return &r;
  return m.kb.find(name);
}

void begin_query(BabiState& state) {
  state.db_queried = true;
  state.db_returned = false;
  state.db.reset();
  state.offered.clear();
  state.current.reset();
}

void note_system_text(const Model& m, BabiState& state, std::string_view text) {
  if (is_api_text(text)) {
    begin_query(state);
    return;
  }
  const auto* r = referenced_restaurant(m, split_exact(text));
  if (!r) return;
  state.current = r->name;
  if (!state.was_offered(r->name)) state.offered.push_back(r->name);
}

bool required_slots_filled(Task task, const BabiState& state) {
  if (task == Task::task6) return true;
  return std::all_of(kAllSlots.begin(), kAllSlots.end(),
                     [&](Slot s) { return state.slot(s).has_value(); });
}

std::string api_surface(Task task) {
  return task == Task::task5 ? "api_call <cuisine> <location> <party_size> <price>"
                             : "api_call <cuisine> <location> <price>";
}

Templatized templatize_with(const Model& m, std::string_view text, const BabiState& state) {
  if (is_api_text(text)) {
    if (parse_api_call(text, m.task)) return {api_surface(m.task), nullptr};
    return {std::string(text), nullptr};
  }
  auto tokens = split_exact(text);
  const auto* r = referenced_restaurant(m, tokens);
  const auto mentions = m.lexicon.match(tokens);
  std::vector<std::string> out;
  std::size_t next = 0;
  std::size_t i = 0;
  while (i < mentions.size()) {
    // Mentions of one span are adjacent; pick the first grounded type.
    std::size_t j = i;
    std::optional<std::string> chosen;
    for (; j < mentions.size() && mentions[j].token_begin == mentions[i].token_begin; ++j) {
      if (chosen) continue;
      const auto& mention = mentions[j];
      bool grounded = false;
      if (is_identity_type(mention.type)) {
        grounded = r && m.kb.owner(mention.value) == r;
      } else if (r) {
        grounded = r->value_of(mention.type) == mention.value;
      } else if (const auto s = slot_from_name(mention.type)) {
        grounded = state.slot(*s) == mention.value;
      }
      if (grounded) chosen = mention.type;
    }
    if (chosen) {
      for (; next < mentions[i].token_begin; ++next) out.push_back(tokens[next]);
      out.push_back("<" + *chosen + ">");
      next = mentions[i].token_end;
    }
    i = j;
  }
  for (; next < tokens.size(); ++next) out.push_back(tokens[next]);
  return {join_exact(out), r};
}

template <class OnTurn>
void replay(const Model& m, const BabiDialog& dialog, OnTurn&& on_turn) {
  BabiState state;
  for (std::size_t t = 0; t < dialog.turns.size(); ++t) {
    if (t < dialog.db_blocks.size()) apply_db_block(state, dialog.db_blocks[t]);
    const auto mentions = extract(m, dialog.turns[t].user);
    apply_mentions(state, mentions);
    on_turn(t, std::as_const(state), mentions);
    note_system_text(m, state, dialog.turns[t].system);
  }
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_refusal(std::string_view system_text) {
  return lowercase(system_text).find("there is no") != std::string::npos;
}

void mine_turn(EmptyQueryTable& table, const BabiState& state, std::string_view system) {
  if (!is_refusal(system) || state.results_nonempty()) return;
  table.queries.insert(EmptyQueryTable::key(state.slots));
  if (const auto& c = state.slot(Slot::cuisine)) table.cuisines.insert(*c);
}

struct SurfaceStats {
  std::size_t first_seen = 0;
  std::size_t count = 0;
  std::size_t offer_votes = 0;
  std::size_t inform_votes = 0;
  bool refers_to_restaurant = false;
  bool required_ok = true;
  bool available_ok = true;
  bool current_ok = true;
  std::array<std::size_t, 4> unfilled{};
  std::array<std::size_t, 4> next_mentioned{};
};

std::shared_ptr<const Model> share(Model m) { return std::make_shared<const Model>(std::move(m)); }

}  // namespace

bool BabiState::was_offered(std::string_view name) const {
  return std::find(offered.begin(), offered.end(), name) != offered.end();
}

const Restaurant* BabiState::next_unoffered() const {
  if (!db) return nullptr;
  for (const auto& r : *db)
    if (!was_offered(r.name)) return &r;
  return nullptr;
}

bool BabiState::all_offered() const {
  return results_nonempty() && next_unoffered() == nullptr;
}

void apply_mentions(BabiState& state, const engine::Mentions& mentions) {
  for (const auto& m : mentions)
    if (const auto s = slot_from_name(m.type)) state.slots[idx(*s)] = m.value;
}

void apply_db_block(BabiState& state, const DbBlock& block) {
  if (block.empty()) return;
  auto results = group_rows(block.rows);
  sort_by_rating(results);
  state.db = std::make_shared<const std::vector<Restaurant>>(std::move(results));
  state.db_returned = true;
  state.offered.clear();
  state.current.reset();
}

BabiState update_entity_state(BabiState state, const engine::Mentions& mentions,
                              const DbBlock& block) {
  apply_db_block(state, block);
  apply_mentions(state, mentions);
  return state;
}

std::string EmptyQueryTable::key(const SlotValues& slots) {
  auto part = [&](Slot s) { return slots[idx(s)].value_or("*"); };
  return fmt::format("{}|{}|{}", part(Slot::cuisine), part(Slot::location), part(Slot::price));
}

bool EmptyQueryTable::query_known_empty(const SlotValues& slots) const {
  return queries.contains(key(slots));
}

bool EmptyQueryTable::cuisine_known_empty(const SlotValues& slots) const {
  const auto& c = slots[idx(Slot::cuisine)];
  return c && cuisines.contains(*c);
}

EmptyQueryTable mine_empty_query_table(std::span<const BabiDialog> training,
                                       const KnowledgeBase& kb, Task task) {
  Model m;
  m.task = task;
  m.kb = kb;
  m.kb.add_dialogs(training);
  m.lexicon = build_lexicon(m.kb, training, task);
  EmptyQueryTable table;
  for (const auto& d : training)
    replay(m, d, [&](std::size_t t, const BabiState& state, const engine::Mentions&) {
      mine_turn(table, state, d.turns[t].system);
    });
  return table;
}

BabiPack BabiPack::build(std::span<const BabiDialog> training, KnowledgeBase kb,
                         const BabiOptions& options) {
  Model m;
  m.task = options.task;
  m.kb = std::move(kb);
  m.kb.add_dialogs(training);
  m.lexicon = build_lexicon(m.kb, training, m.task);

  std::unordered_map<std::string, SurfaceStats> stats;
  std::vector<std::string> order;
  const auto tracked = task_slots(m.task);

  for (const auto& d : training) {
    std::vector<std::string> surfaces;
    std::vector<std::array<bool, 4>> mentioned;
    replay(m, d, [&](std::size_t t, const BabiState& state, const engine::Mentions& mentions) {
      mine_turn(m.empty_table, state, d.turns[t].system);
      std::array<bool, 4> hit{};
      for (const auto& mention : mentions)
        if (const auto s = slot_from_name(mention.type)) hit[idx(*s)] = true;
      mentioned.push_back(hit);

      const auto tz = templatize_with(m, d.turns[t].system, state);
      auto [it, fresh] = stats.try_emplace(tz.surface);
      auto& st = it->second;
      if (fresh) {
        st.first_seen = order.size();
        order.push_back(tz.surface);
      }
      ++st.count;
      if (tz.restaurant) {
        st.refers_to_restaurant = true;
        const auto* next = state.next_unoffered();
        if (next && next->name == tz.restaurant->name) ++st.offer_votes;
        if (state.current == tz.restaurant->name) ++st.inform_votes;
      }
      st.required_ok = st.required_ok && required_slots_filled(m.task, state);
      st.available_ok = st.available_ok && state.next_unoffered() != nullptr;
      st.current_ok = st.current_ok && state.current.has_value() &&
                      lookup(m, state, *state.current) != nullptr;
      for (auto s : tracked)
        if (!state.slot(s)) ++st.unfilled[idx(s)];
      surfaces.push_back(tz.surface);
    });
    for (std::size_t t = 0; t + 1 < surfaces.size(); ++t)
      for (auto s : tracked)
        if (mentioned[t + 1][idx(s)]) ++stats[surfaces[t]].next_mentioned[idx(s)];
  }

  bool folded = false;
  for (const auto& surface : order) {
    const auto& st = stats.at(surface);
    if (options.unk_min_count > 0 && st.count < options.unk_min_count) {
      folded = true;
      continue;
    }
    const ActionId id = m.templates.size();
    engine::ActionTemplate tmpl{id, engine::ActionKind::text, surface, {}};
    TemplateInfo info;
    info.count = st.count;
    if (is_api_text(surface)) {
      tmpl.kind = engine::ActionKind::api;
      tmpl.api_name = "api_call";
      info.role = TemplateRole::api_call;
      info.rules.needs_required_slots = m.task == Task::task5;
      if (info.rules.needs_required_slots && !st.required_ok) {
        log::logger()->info("template {} \"{}\": api_call slot rule dropped", id, surface);
        info.rules.needs_required_slots = false;
      }
    } else if (st.refers_to_restaurant) {
      const bool offer = st.offer_votes > 0 && st.offer_votes >= st.inform_votes;
      info.role = offer ? TemplateRole::offer : TemplateRole::inform;
      info.rules.needs_available = offer && st.available_ok;
      info.rules.needs_current = !offer && st.current_ok;
      if ((offer && !st.available_ok) || (!offer && !st.current_ok))
        log::logger()->info("template {} \"{}\": restaurant rule dropped", id, surface);
    } else {
      std::optional<Slot> asked;
      for (auto s : tracked) {
        const auto n = st.next_mentioned[idx(s)];
        if (st.unfilled[idx(s)] != st.count || 2 * n < st.count || n == 0) continue;
        if (!asked || n > st.next_mentioned[idx(*asked)]) asked = s;
      }
      if (asked) {
        info.role = TemplateRole::ask_slot;
        info.asks = asked;
        info.rules.blocked_when_filled = asked;
      }
    }
    m.index.emplace(surface, id);
    m.templates.push_back(std::move(tmpl));
    m.info.push_back(info);
  }
  if (folded) {
    const ActionId id = m.templates.size();
    m.templates.push_back({id, engine::ActionKind::text, std::string(kUnkSurface), {}});
    TemplateInfo info;
    info.role = TemplateRole::unk;
    for (const auto& surface : order)
      if (!m.index.contains(surface)) info.count += stats.at(surface).count;
    m.info.push_back(info);
    m.unk = id;
  }
  log::logger()->info("built {} templates from {} training dialogs", m.templates.size(),
                      training.size());
  return BabiPack(share(std::move(m)), options);
}

BabiPack BabiPack::with_options(bool use_mask, bool test_mode) const {
  auto opts = options_;
  opts.use_mask = use_mask;
  opts.test_mode = test_mode;
  return BabiPack(model_, opts);
}

BabiPack BabiPack::with_knowledge(std::span<const BabiDialog> dialogs) const {
  Model m = *model_;
  m.kb.add_dialogs(dialogs);
  m.lexicon.merge(build_lexicon(m.kb, dialogs, m.task, false));
  return BabiPack(share(std::move(m)), options_);
}

const std::vector<engine::ActionTemplate>& BabiPack::templates() const { return model_->templates; }

std::size_t BabiPack::context_size() const { return model_->task == Task::task5 ? 4 : 14; }

Task BabiPack::task() const { return model_->task; }
const std::vector<TemplateInfo>& BabiPack::template_info() const { return model_->info; }
std::optional<ActionId> BabiPack::unk_action() const { return model_->unk; }
const EmptyQueryTable& BabiPack::empty_query_table() const { return model_->empty_table; }
const Lexicon& BabiPack::lexicon() const { return model_->lexicon; }
const KnowledgeBase& BabiPack::knowledge_base() const { return model_->kb; }

engine::EntityState BabiPack::initial_state() const { return BabiState{}; }

engine::Mentions BabiPack::extract_entities(std::string_view text) const {
  return extract(*model_, text);
}

void BabiPack::update_state(engine::EntityState& state, const engine::Mentions& mentions,
                            std::string_view) const {
  apply_mentions(std::any_cast<BabiState&>(state), mentions);
}

ActionMask BabiPack::mask_for(const BabiState& state) const {
  const auto& m = *model_;
  ActionMask mask = ActionMask::all(m.templates.size());
  for (std::size_t a = 0; a < m.info.size(); ++a) {
    const auto& info = m.info[a];
    if (info.role == TemplateRole::unk) {
      mask.set(a, !options_.test_mode);
      continue;
    }
    if (!options_.use_mask) continue;
    const auto& r = info.rules;
    bool ok = true;
    if (r.needs_required_slots) ok = ok && required_slots_filled(m.task, state);
    if (r.needs_available) ok = ok && state.next_unoffered() != nullptr;
    if (r.needs_current) ok = ok && state.current && lookup(m, state, *state.current);
    if (r.blocked_when_filled) ok = ok && !state.slot(*r.blocked_when_filled);
    mask.set(a, ok);
  }
  return mask;
}

ActionMask BabiPack::action_mask(const engine::EntityState& state) const {
  return mask_for(std::any_cast<const BabiState&>(state));
}

Eigen::VectorXd BabiPack::features_for(const BabiState& state,
                                       const engine::Mentions& mentions) const {
  const auto& m = *model_;
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(context_size()));
  Eigen::Index k = 0;
  auto bit = [&](bool b) { f[k++] = b ? 1.0 : 0.0; };
  const auto tracked = task_slots(m.task);
  for (auto s : tracked) bit(state.slot(s).has_value());
  if (m.task == Task::task5) return f;
  for (auto s : tracked)
    bit(std::any_of(mentions.begin(), mentions.end(),
                    [&](const engine::Mention& x) { return x.type == slot_name(s); }));
  bit(state.db_queried);
  bit(state.results_empty());
  bit(state.results_nonempty());
  bit(state.results_nonempty() && !state.offered.empty());
  bit(state.all_offered());
  bit(state.next_unoffered() != nullptr);
  bit(m.empty_table.query_known_empty(state.slots));
  bit(m.empty_table.cuisine_known_empty(state.slots));
  return f;
}

Eigen::VectorXd BabiPack::context_features(const engine::EntityState& state,
                                           const engine::Mentions& mentions) const {
  return features_for(std::any_cast<const BabiState&>(state), mentions);
}

std::optional<std::string> BabiPack::slot_value(const engine::EntityState& any_state,
                                                const engine::ActionTemplate& action,
                                                std::string_view slot) const {
  const auto& m = *model_;
  const auto& state = std::any_cast<const BabiState&>(any_state);
  const auto role = action.id < m.info.size() ? m.info[action.id].role : TemplateRole::plain;
  const Restaurant* r = nullptr;
  if (role == TemplateRole::offer) r = state.next_unoffered();
  if (role == TemplateRole::inform && state.current) r = lookup(m, state, *state.current);
  if (r) return r->value_of(slot);
  if (role == TemplateRole::offer || role == TemplateRole::inform) return std::nullopt;

  const auto s = slot_from_name(slot);
  if (!s) return std::nullopt;
  if (const auto& v = state.slot(*s)) return v;
  if (role == TemplateRole::api_call && m.task == Task::task6) return "R_" + std::string(slot);
  return std::nullopt;
}

engine::ApiResult BabiPack::dispatch_api(const engine::ActionTemplate&, std::string_view rendered,
                                         engine::EntityState& any_state) const {
  auto& state = std::any_cast<BabiState&>(any_state);
  const auto query = parse_api_call(rendered, model_->task).value_or(state.slots);
  auto results = model_->kb.query(query);
  std::string text;
  for (const auto& r : results)
    for (const auto& [attr, value] : r.attributes)
      text += fmt::format("{} {} {}\n", r.name, attr, value);
  if (results.empty()) text = "api_call no result\n";
  state.db = std::make_shared<const std::vector<Restaurant>>(std::move(results));
  state.db_returned = true;
  return {std::move(text), Eigen::VectorXd()};
}

void BabiPack::record_action(engine::EntityState& state, const engine::ActionTemplate&,
                             std::string_view rendered) const {
  note_system_text(*model_, std::any_cast<BabiState&>(state), rendered);
}

Templatized BabiPack::templatize(std::string_view system_text, const BabiState& state) const {
  return templatize_with(*model_, system_text, state);
}

std::optional<ActionId> BabiPack::label_of(std::string_view system_text,
                                           const BabiState& state) const {
  const auto surface = templatize(system_text, state).surface;
  const auto it = model_->index.find(surface);
  if (it != model_->index.end()) return it->second;
  return model_->unk;
}

engine::EncodedDialog BabiPack::encode(const BabiDialog& dialog,
                                       const features::Featurizer& featurizer) const {
  engine::EncodedDialog out;
  const Eigen::VectorXd no_api;
  replay(*model_, dialog, [&](std::size_t t, const BabiState& state,
                              const engine::Mentions& mentions) {
    const auto& turn = dialog.turns[t];
    const auto label = label_of(turn.system, state);
    if (!label)
      throw DataError(fmt::format("system utterance \"{}\" matches no template", turn.system));
    out.masks.push_back(mask_for(state));
    out.observations.push_back(
        featurizer.featurize(turn.user, features_for(state, mentions), no_api).values());
    out.labels.push_back(*label);
    out.references.push_back(turn.system);
    out.states.emplace_back(state);
  });
  return out;
}

std::string format_template_inventory(const std::vector<engine::ActionTemplate>& templates) {
  std::string out;
  for (const auto& t : templates)
    out += fmt::format("{}\t{}\t{}\n", t.id, t.kind == engine::ActionKind::api ? "api" : "text",
                       t.surface);
  return out;
}

void save_template_inventory(const std::filesystem::path& path,
                             const std::vector<engine::ActionTemplate>& templates) {
  io::write_file_atomic(path, format_template_inventory(templates));
}

std::vector<engine::ActionTemplate> parse_template_inventory(std::string_view text) {
  std::vector<engine::ActionTemplate> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto a = line.find('\t');
    const auto b = a == std::string_view::npos ? a : line.find('\t', a + 1);
    if (b == std::string_view::npos)
      throw DataError(fmt::format("template inventory line {}: expected id<TAB>kind<TAB>surface",
                                  line_no));
    const auto id = std::stoul(std::string(line.substr(0, a)));
    if (id != out.size())
      throw DataError(fmt::format("template inventory line {}: id {} out of order", line_no, id));
    const auto kind = line.substr(a + 1, b - a - 1);
    if (kind != "api" && kind != "text")
      throw DataError(fmt::format("template inventory line {}: unknown kind '{}'", line_no, kind));
    engine::ActionTemplate t{id, kind == "api" ? engine::ActionKind::api : engine::ActionKind::text,
                             std::string(line.substr(b + 1)), {}};
    if (t.kind == engine::ActionKind::api) t.api_name = "api_call";
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace hcn::babi
