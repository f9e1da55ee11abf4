#include "recognizer/plate.hpp"

namespace lotwatch {

namespace {

bool is_plate_char(char c) { return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'); }

bool is_trim_char(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v' || c == '"' ||
         c == '\'' || c == '`';
}

}  // namespace

std::optional<PlateString> PlateString::from_normalized(std::string_view text) {
  if (text.size() < 6 || text.size() > 7) return std::nullopt;
  for (char c : text) {
    if (!is_plate_char(c)) return std::nullopt;
  }
  return PlateString(std::string(text));
}

std::optional<PlateString> normalize_plate(std::string_view raw) {
  std::size_t begin = 0, end = raw.size();
  while (begin < end && is_trim_char(raw[begin])) ++begin;
  while (end > begin && is_trim_char(raw[end - 1])) --end;
  std::string out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    char c = raw[i];
    if (c == ' ' || c == '-') continue;
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    out.push_back(c);
  }
  return PlateString::from_normalized(out);
}

}  // namespace lotwatch
