#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "hcbr/hierarchy.hpp"

namespace hcbr {

struct ParseOptions {
  /// Require every edge endpoint to appear on its own declaration line.
  bool strict = false;
};

/// Parses the Mermaid flowchart subset:
///
///   graph TD
///   %% comment
///   F6_Security-Measures(p)
///   F6_Security-Measures(p) --> C102_Efforts-To-Maintain-Secrecy
///   F23_Waiver-of-Confidentiality(d) -.-> C102
///
/// `-->` is a strong edge, `-.->` a weak one. Whitespace inside a line is
/// ignored and a trailing `;` is allowed.
Hierarchy parse_hierarchy(std::string_view text, const ParseOptions& options = {});

/// Deterministic document: header, then every node sorted by (level, number),
/// then every edge sorted by (source, target). Reparses to an equal Hierarchy
/// in both lax and strict mode.
std::string serialize_hierarchy(const Hierarchy& h);

/// Edge lines only, for prompts.
std::string render_edges(const Hierarchy& h);

Hierarchy load_hierarchy(const std::filesystem::path& path, const ParseOptions& options = {});

/// SHA-256 of the serialized form; independent of source formatting.
std::string hierarchy_fingerprint(const Hierarchy& h);

}  // namespace hcbr
