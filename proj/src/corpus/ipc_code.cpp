#include "priorart/corpus/ipc_code.h"

#include <cctype>
#include <charconv>

#include "priorart/error.h"

namespace priorart::corpus {
namespace {

bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }
bool is_upper(char c) noexcept { return c >= 'A' && c <= 'Z'; }

}  // namespace

std::optional<IpcCode> IpcCode::try_parse(std::string_view text) noexcept {
  std::string s;
  s.reserve(text.size());
  for (char c : text) {
    if (c != ' ' && c != '\t') s.push_back(c);
  }
  // Section, two class digits, subclass letter.
  if (s.size() < 4) return std::nullopt;
  if (s[0] < 'A' || s[0] > 'H') return std::nullopt;
  if (!is_digit(s[1]) || !is_digit(s[2]) || !is_upper(s[3])) return std::nullopt;

  IpcCode code;
  if (s.size() == 4) {
    code.canonical_ = std::move(s);
    return code;
  }

  std::size_t i = 4;
  while (i < s.size() && is_digit(s[i])) ++i;
  const std::size_t group_len = i - 4;
  if (group_len == 0 || group_len > 4) return std::nullopt;
  int group = 0;
  std::from_chars(s.data() + 4, s.data() + i, group);
  if (group == 0) return std::nullopt;

  std::string canonical = s.substr(0, 4) + std::to_string(group);
  if (i < s.size()) {
    if (s[i] != '/') return std::nullopt;
    const std::string_view sub = std::string_view(s).substr(i + 1);
    if (sub.size() < 2 || sub.size() > 6) return std::nullopt;
    for (char c : sub) {
      if (!is_digit(c)) return std::nullopt;
    }
    code.subgroup_pos_ = canonical.size();
    canonical.push_back('/');
    canonical.append(sub);
  }
  code.canonical_ = std::move(canonical);
  code.group_ = group;
  return code;
}

IpcCode IpcCode::parse(std::string_view text) {
  auto code = try_parse(text);
  if (!code) throw DataError("invalid IPC code '" + std::string(text) + "'");
  return *std::move(code);
}

std::optional<std::string_view> IpcCode::subgroup() const noexcept {
  if (subgroup_pos_ == std::string::npos) return std::nullopt;
  return std::string_view(canonical_).substr(subgroup_pos_ + 1);
}

IpcCode::Level IpcCode::level() const noexcept {
  if (!group_) return Level::subclass;
  return subgroup_pos_ == std::string::npos ? Level::group : Level::subgroup;
}

IpcCode IpcCode::subclass_code() const {
  IpcCode code;
  code.canonical_ = canonical_.substr(0, 4);
  return code;
}

IpcCode IpcCode::group_code() const {
  if (!group_) throw std::invalid_argument("subclass-level code " + canonical_ + " has no group");
  IpcCode code;
  code.canonical_ = canonical_.substr(0, subgroup_pos_);
  code.group_ = group_;
  return code;
}

bool IpcCode::covers(const IpcCode& other) const noexcept {
  switch (level()) {
    case Level::subclass:
      return other.canonical_.compare(0, 4, canonical_) == 0;
    case Level::group:
      return other.group_ == group_ && other.canonical_.compare(0, 4, canonical_, 0, 4) == 0;
    case Level::subgroup:
      return other == *this;
  }
  return false;
}

}  // namespace priorart::corpus
