#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace depembed {

// Canonicalizes a package name: lowercase, with every run of '-', '_' and
// '.' collapsed to a single hyphen. Idempotent. Throws Errc::empty_name if
// the input trims to nothing and Errc::invalid_name if a disallowed
// character remains or the result would start/end with a hyphen.
std::string normalize_name(std::string_view raw);

struct ParseWarning {
  int line = 0;  // 1-based physical line where the logical line starts
  std::string reason;
};

struct ParseReport {
  std::set<std::string> names;
  int parsed_lines = 0;   // logical lines that contributed a name
  int skipped_lines = 0;  // non-blank logical lines that did not
  int blank_lines = 0;
  std::vector<ParseWarning> warnings;

  // Empty and all-commented files yield no names; callers drop them.
  bool skippable() const { return names.empty(); }
};

// Parses pip-style requirements text into normalized base package names.
// Version specifiers, extras, environment markers, inline comments and hash
// options are stripped; option/directive lines are skipped, except editable
// or URL requirements with an explicit #egg= fragment, whose egg name is
// kept. Never throws: problem lines become warnings.
ParseReport parse_requirements(std::string_view content);

}  // namespace depembed
