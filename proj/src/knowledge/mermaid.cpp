#include "hcbr/mermaid.hpp"

#include <algorithm>
#include <cctype>

#include "hcbr/error.hpp"
#include "hcbr/hash.hpp"

namespace hcbr {

namespace {

constexpr std::string_view kWeakArrow = "-.->";
constexpr std::string_view kStrongArrow = "-->";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_header(std::string_view line) {
  for (std::string_view kw : {"graph", "flowchart"}) {
    if (line.starts_with(kw) &&
        (line.size() == kw.size() || std::isspace(static_cast<unsigned char>(line[kw.size()])))) {
      return true;
    }
  }
  return false;
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& reason) {
  throw Error(Errc::MalformedLine, "line " + std::to_string(line_no) + ": " + reason, line_no);
}

NodeId parse_label_or_throw(std::string_view text, std::size_t line_no) {
  auto id = parse_node_label(text);
  if (!id) malformed(line_no, "invalid node identifier '" + std::string(text) + "'");
  return *std::move(id);
}

}  // namespace

Hierarchy parse_hierarchy(std::string_view text, const ParseOptions& options) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  Hierarchy::Builder builder;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const std::size_t nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    const std::string_view line = trim(raw);
    if (line.empty() || line.starts_with("%%") || is_header(line)) continue;

    std::string compact;
    compact.reserve(line.size());
    for (char c : line) {
      if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
    }
    if (compact.ends_with(';')) compact.pop_back();

    std::string_view body = compact;
    std::size_t arrow = body.find(kWeakArrow);
    EdgeStrength strength = EdgeStrength::Weak;
    std::size_t arrow_len = kWeakArrow.size();
    if (arrow == std::string_view::npos) {
      arrow = body.find(kStrongArrow);
      strength = EdgeStrength::Strong;
      arrow_len = kStrongArrow.size();
    }

    if (arrow == std::string_view::npos) {
      builder.declare(parse_label_or_throw(body, line_no), line_no);
      continue;
    }
    const std::string_view lhs = body.substr(0, arrow);
    const std::string_view rhs = body.substr(arrow + arrow_len);
    if (lhs.empty() || rhs.empty()) malformed(line_no, "edge is missing an endpoint");
    builder.add_edge(parse_label_or_throw(lhs, line_no), parse_label_or_throw(rhs, line_no),
                     strength, line_no);
  }
  return builder.build(options.strict);
}

std::string render_edges(const Hierarchy& h) {
  std::string out;
  for (const Edge& e : h.edges()) {
    out += "    ";
    out += h.node(e.source).canonical();
    out += e.strength == EdgeStrength::Strong ? " --> " : " -.-> ";
    out += h.node(e.target).canonical();
    out += '\n';
  }
  return out;
}

std::string serialize_hierarchy(const Hierarchy& h) {
  std::string out = "graph TD\n%% nodes\n";
  for (const NodeId& n : h.nodes()) {
    out += "    ";
    out += n.canonical();
    out += '\n';
  }
  out += "%% edges\n";
  out += render_edges(h);
  return out;
}

Hierarchy load_hierarchy(const std::filesystem::path& path, const ParseOptions& options) {
  return parse_hierarchy(read_file(path), options);
}

std::string hierarchy_fingerprint(const Hierarchy& h) {
  return sha256_hex(serialize_hierarchy(h));
}

}  // namespace hcbr
