#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace priorart::corpus {

// International Patent Classification symbol, e.g. "H04L25/03".
//
// Three specificities are accepted: subclass ("H04L"), group ("H04L25") and
// subgroup ("H04L25/03"). The subgroup keeps its digit string so that codes
// such as "A61B5/0002" render back unchanged.
class IpcCode {
 public:
  enum class Level { subclass, group, subgroup };

  // Throws DataError naming the offending text. Interior spaces are ignored
  // ("H04L 25/03" parses), everything else must already be upper case.
  static IpcCode parse(std::string_view text);
  static std::optional<IpcCode> try_parse(std::string_view text) noexcept;

  char section() const noexcept { return canonical_[0]; }
  std::string_view class_digits() const noexcept { return std::string_view(canonical_).substr(1, 2); }
  char subclass() const noexcept { return canonical_[3]; }
  std::optional<int> group() const noexcept { return group_; }
  std::optional<std::string_view> subgroup() const noexcept;
  Level level() const noexcept;

  const std::string& str() const noexcept { return canonical_; }

  // Enclosing codes. group_code() requires level() != subclass.
  IpcCode subclass_code() const;
  IpcCode group_code() const;

  // True when `other` falls under this code at this code's specificity:
  // subclass codes cover every group and subgroup beneath them, group codes
  // cover their subgroups, subgroup codes cover only themselves.
  bool covers(const IpcCode& other) const noexcept;

  friend bool operator==(const IpcCode& a, const IpcCode& b) noexcept { return a.canonical_ == b.canonical_; }
  friend std::strong_ordering operator<=>(const IpcCode& a, const IpcCode& b) noexcept {
    return a.canonical_ <=> b.canonical_;
  }

 private:
  IpcCode() = default;

  std::string canonical_;
  std::optional<int> group_;
  std::size_t subgroup_pos_ = std::string::npos;  // index of '/' in canonical_
};

}  // namespace priorart::corpus
