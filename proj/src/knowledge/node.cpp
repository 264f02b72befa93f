#include "hcbr/node.hpp"

#include <cctype>
#include <limits>

namespace hcbr {

std::string_view side_code(Side s) noexcept {
  return s == Side::Plaintiff ? "p" : "d";
}

std::string_view side_word(Side s) noexcept {
  return s == Side::Plaintiff ? "plaintiff" : "defendant";
}

std::optional<Side> parse_side(std::string_view text) noexcept {
  if (text == "p" || text == "plaintiff") return Side::Plaintiff;
  if (text == "d" || text == "defendant") return Side::Defendant;
  return std::nullopt;
}

char level_letter(Level l) noexcept {
  switch (l) {
    case Level::Factor: return 'F';
    case Level::Concern: return 'C';
    case Level::Issue: return 'I';
  }
  return '?';
}

std::string NodeId::canonical() const {
  std::string out(1, level_letter(level));
  out += std::to_string(number);
  if (!name.empty()) {
    out += '_';
    out += name;
  }
  if (side) {
    out += '(';
    out += side_code(*side);
    out += ')';
  }
  return out;
}

std::string NodeId::short_label() const {
  std::string out(1, level_letter(level));
  out += std::to_string(number);
  if (side) {
    out += '(';
    out += side_code(*side);
    out += ')';
  }
  return out;
}

namespace {

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-';
}

}  // namespace

std::optional<NodeId> parse_node_label(std::string_view text) {
  if (text.size() < 2) return std::nullopt;
  NodeId id;
  switch (text[0]) {
    case 'F': id.level = Level::Factor; break;
    case 'C': id.level = Level::Concern; break;
    case 'I': id.level = Level::Issue; break;
    default: return std::nullopt;
  }
  std::size_t pos = 1;
  std::uint64_t number = 0;
  const std::size_t digits_begin = pos;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
    number = number * 10 + static_cast<std::uint64_t>(text[pos] - '0');
    if (number > std::numeric_limits<std::uint32_t>::max()) return std::nullopt;
    ++pos;
  }
  if (pos == digits_begin || number == 0) return std::nullopt;
  id.number = static_cast<std::uint32_t>(number);

  if (pos < text.size() && text[pos] == '_') {
    ++pos;
    const std::size_t name_begin = pos;
    while (pos < text.size() && is_name_char(text[pos])) ++pos;
    if (pos == name_begin) return std::nullopt;
    id.name = std::string(text.substr(name_begin, pos - name_begin));
  }

  if (pos < text.size() && text[pos] == '(') {
    if (pos + 3 != text.size() || text[pos + 2] != ')') return std::nullopt;
    auto side = parse_side(text.substr(pos + 1, 1));
    if (!side || id.level != Level::Factor) return std::nullopt;
    id.side = side;
    pos += 3;
  }
  if (pos != text.size()) return std::nullopt;
  return id;
}

}  // namespace hcbr
