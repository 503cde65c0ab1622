#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hcn::dialer {

/// Canonical phone types, in lookup order.
inline constexpr std::string_view kPhoneTypes[] = {"mobile", "work", "home"};

/// "cell" -> "mobile", "office" -> "work"; canonical names map to
/// themselves; nullopt for anything else. Case-insensitive.
std::optional<std::string> canonical_phonetype(std::string_view word);

struct PhoneEntry {
  std::string type;  // canonical
  std::string number;
  friend bool operator==(const PhoneEntry&, const PhoneEntry&) = default;
};

struct Person {
  std::string firstname;
  std::vector<std::string> nicknames;
  std::string lastname;
  std::vector<PhoneEntry> phones;  // at least one, in kPhoneTypes order

  std::string fullname() const { return firstname + " " + lastname; }
  const PhoneEntry* phone(std::string_view type) const;
  friend bool operator==(const Person&, const Person&) = default;
};

class Directory {
 public:
  Directory() = default;
  explicit Directory(std::vector<Person> people);

  const std::vector<Person>& people() const { return people_; }
  std::size_t size() const { return people_.size(); }
  const Person& person(std::size_t i) const { return people_.at(i); }

  /// Indices of people whose first name or one of whose nicknames equals
  /// `first`, and whose last name equals `last`; unset arguments match all.
  std::vector<std::size_t> candidates(const std::optional<std::string>& first,
                                      const std::optional<std::string>& last) const;
  /// The first name `nickname` stands for, when all people using it share
  /// one first name.
  std::optional<std::string> canonical_firstname(std::string_view nickname) const;

  friend bool operator==(const Directory&, const Directory&) = default;

 private:
  std::vector<Person> people_;
};

/// Deterministic synthetic directory. At least 10% of people share a first
/// name with someone else (everyone, when n = 2) and at least 30% have two or
/// more phone types. Full names are unique.
Directory generate_directory(std::uint64_t seed, std::size_t n_people);

/// One person per line: "first|nick,nick|last|type:number;type:number".
std::string format_directory(const Directory& dir);
Directory parse_directory(std::string_view text);
void save_directory(const std::filesystem::path& path, const Directory& dir);
Directory load_directory(const std::filesystem::path& path);

}  // namespace hcn::dialer
