#include "hcn/dialer/directory.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <set>

#include <fmt/format.h>

#include "hcn/util/error.hpp"
#include "hcn/util/io.hpp"

namespace hcn::dialer {
namespace {

struct FirstName {
  std::string_view name;
  std::vector<std::string_view> nicknames;
};

const std::vector<FirstName>& first_names() {
  static const std::vector<FirstName> names{
      {"Joe", {}},          {"Michael", {"Mike"}},   {"Sally", {}},
      {"Robert", {"Bob", "Rob"}}, {"William", {"Bill", "Will"}}, {"Elizabeth", {"Liz", "Beth"}},
      {"Katherine", {"Kate"}},    {"Richard", {"Rick"}},        {"James", {"Jim"}},
      {"Jennifer", {"Jen"}},      {"Thomas", {"Tom"}},          {"Daniel", {"Dan"}},
      {"Margaret", {"Meg"}},      {"Christopher", {"Chris"}},   {"Susan", {"Sue"}},
      {"Anthony", {"Tony"}},      {"Alexander", {"Alex"}},      {"Alexandra", {"Alex"}},
      {"Samuel", {"Sam"}},        {"Samantha", {"Sam"}},        {"Laura", {}},
      {"Peter", {"Pete"}},        {"Nancy", {}},                {"Steven", {"Steve"}},
  };
  return names;
}

constexpr std::string_view kLastNames[] = {
    "Adamson", "Smith",  "Johnson", "Lee",    "Brown",   "Garcia",   "Miller",  "Davis",
    "Wilson",  "Moore",  "Taylor",  "Clark",  "Lewis",   "Walker",   "Hall",    "Young",
    "King",    "Wright", "Scott",   "Green",  "Baker",   "Nelson",   "Carter",  "Mitchell",
    "Perez",   "Roberts", "Turner", "Phillips", "Campbell", "Parker", "Evans",   "Edwards"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(s.substr(pos, next == std::string_view::npos ? next : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

std::size_t shared_first_count(const std::vector<Person>& people) {
  std::size_t n = 0;
  for (const auto& p : people)
    n += std::count_if(people.begin(), people.end(),
                       [&](const Person& q) { return q.firstname == p.firstname; }) > 1;
  return n;
}

}  // namespace

std::optional<std::string> canonical_phonetype(std::string_view word) {
  const auto w = lower(word);
  if (w == "cell" || w == "mobile") return "mobile";
  if (w == "office" || w == "work") return "work";
  if (w == "home") return "home";
  return std::nullopt;
}

const PhoneEntry* Person::phone(std::string_view type) const {
  for (const auto& p : phones)
    if (p.type == type) return &p;
  return nullptr;
}

Directory::Directory(std::vector<Person> people) : people_(std::move(people)) {
  for (const auto& p : people_)
    if (p.phones.empty()) throw DataError(fmt::format("{} has no phone entry", p.fullname()));
}

std::vector<std::size_t> Directory::candidates(const std::optional<std::string>& first,
                                               const std::optional<std::string>& last) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < people_.size(); ++i) {
    const auto& p = people_[i];
    if (first && lower(p.firstname) != lower(*first) &&
        std::none_of(p.nicknames.begin(), p.nicknames.end(),
                     [&](const std::string& n) { return lower(n) == lower(*first); }))
      continue;
    if (last && lower(p.lastname) != lower(*last)) continue;
    out.push_back(i);
  }
  return out;
}

std::optional<std::string> Directory::canonical_firstname(std::string_view nickname) const {
  std::optional<std::string> found;
  for (const auto& p : people_)
    for (const auto& n : p.nicknames)
      if (lower(n) == lower(nickname)) {
        if (found && *found != p.firstname) return std::nullopt;
        found = p.firstname;
      }
  return found;
}

Directory generate_directory(std::uint64_t seed, std::size_t n_people) {
  if (n_people < 2) throw UsageError("a directory needs at least 2 people");
  const auto max_people = first_names().size() * std::size(kLastNames);
  if (n_people > max_people)
    throw UsageError(fmt::format("at most {} people can be generated", max_people));
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  std::vector<std::size_t> firsts(n_people);
  for (auto& f : firsts) f = uniform(first_names().size());
  if (n_people == 2) firsts[1] = firsts[0];

  std::vector<Person> people;
  std::set<std::pair<std::size_t, std::string_view>> used;
  auto make_person = [&](std::size_t first) {
    const auto& fn = first_names()[first];
    std::string_view last;
    do {
      last = kLastNames[uniform(std::size(kLastNames))];
    } while (used.contains({first, last}));
    used.insert({first, last});
    Person p{std::string(fn.name), {fn.nicknames.begin(), fn.nicknames.end()}, std::string(last), {}};
    const auto n_types = 1 + uniform(3);
    std::vector<std::string_view> types(std::begin(kPhoneTypes), std::end(kPhoneTypes));
    std::shuffle(types.begin(), types.end(), rng);
    types.resize(n_types);
    for (auto t : kPhoneTypes)
      if (std::find(types.begin(), types.end(), t) != types.end())
        p.phones.push_back({std::string(t), fmt::format("555-{:04d}", uniform(10000))});
    return p;
  };
  for (auto f : firsts) {
    while (used.size() < max_people &&
           std::count_if(used.begin(), used.end(), [&](const auto& u) { return u.first == f; }) ==
               static_cast<std::ptrdiff_t>(std::size(kLastNames)))
      f = uniform(first_names().size());
    people.push_back(make_person(f));
  }

  // Top up ambiguity and multi-phone coverage where the draw fell short.
  for (std::size_t i = 1; shared_first_count(people) * 10 < n_people && i < n_people; ++i) {
    const auto& target = people[0];
    if (people[i].firstname == target.firstname) continue;
    auto it = std::find_if(first_names().begin(), first_names().end(),
                           [&](const FirstName& f) { return f.name == target.firstname; });
    const auto first = static_cast<std::size_t>(it - first_names().begin());
    auto phones = people[i].phones;
    people[i] = make_person(first);
    people[i].phones = std::move(phones);
  }
  auto multi = [&] {
    return std::count_if(people.begin(), people.end(),
                         [](const Person& p) { return p.phones.size() >= 2; });
  };
  for (auto& p : people) {
    if (static_cast<std::size_t>(multi()) * 10 >= n_people * 3) break;
    if (p.phones.size() >= 2) continue;
    for (auto t : kPhoneTypes)
      if (!p.phone(t)) {
        p.phones.push_back({std::string(t), fmt::format("555-{:04d}", uniform(10000))});
        break;
      }
    std::sort(p.phones.begin(), p.phones.end(), [](const PhoneEntry& a, const PhoneEntry& b) {
      auto rank = [](std::string_view t) {
        return std::find(std::begin(kPhoneTypes), std::end(kPhoneTypes), t) - std::begin(kPhoneTypes);
      };
      return rank(a.type) < rank(b.type);
    });
  }
  return Directory(std::move(people));
}

std::string format_directory(const Directory& dir) {
  std::string out;
  for (const auto& p : dir.people()) {
    std::vector<std::string> phones;
    for (const auto& e : p.phones) phones.push_back(e.type + ":" + e.number);
    out += fmt::format("{}|{}|{}|{}\n", p.firstname, fmt::join(p.nicknames, ","), p.lastname,
                       fmt::join(phones, ";"));
  }
  return out;
}

Directory parse_directory(std::string_view text) {
  std::vector<Person> people;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split(line, '|');
    if (fields.size() != 4 || fields[0].empty() || fields[2].empty())
      throw DataError(fmt::format("directory line {}: expected first|nicknames|last|phones", line_no));
    Person p{std::string(fields[0]), {}, std::string(fields[2]), {}};
    if (!fields[1].empty())
      for (auto n : split(fields[1], ',')) p.nicknames.emplace_back(n);
    for (auto entry : split(fields[3], ';')) {
      const auto colon = entry.find(':');
      const auto type = colon == std::string_view::npos
                            ? std::nullopt
                            : canonical_phonetype(entry.substr(0, colon));
      if (!type)
        throw DataError(fmt::format("directory line {}: bad phone entry '{}'", line_no, entry));
      p.phones.push_back({*type, std::string(entry.substr(colon + 1))});
    }
    people.push_back(std::move(p));
  }
  return Directory(std::move(people));
}

void save_directory(const std::filesystem::path& path, const Directory& dir) {
  io::write_file_atomic(path, format_directory(dir));
}

Directory load_directory(const std::filesystem::path& path) {
  return parse_directory(io::read_file(path));
}

}  // namespace hcn::dialer
