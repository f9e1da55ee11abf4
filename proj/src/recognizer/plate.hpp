#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace lotwatch {

// Normalized plate identity: 6 or 7 characters from [A-Z0-9].
class PlateString {
 public:
  // Accepts only already-normalized text.
  static std::optional<PlateString> from_normalized(std::string_view text);

  const std::string& str() const noexcept { return value_; }
  std::size_t size() const noexcept { return value_.size(); }

  auto operator<=>(const PlateString&) const = default;

 private:
  explicit PlateString(std::string value) : value_(std::move(value)) {}
  std::string value_;
};

inline std::ostream& operator<<(std::ostream& os, const PlateString& p) { return os << p.str(); }

// The single normalizer used by every backend and by dataset loading:
// trim surrounding whitespace and quote characters, uppercase, drop spaces
// and hyphens, then require ^[A-Z0-9]{6,7}$. nullopt means a "format"
// failure.
std::optional<PlateString> normalize_plate(std::string_view raw);

}  // namespace lotwatch
