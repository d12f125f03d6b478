#include "depembed/reqparse.hpp"

#include <algorithm>
#include <cctype>

#include "depembed/error.hpp"

namespace depembed {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool is_separator(char c) { return c == '-' || c == '_' || c == '.'; }

}  // namespace

std::string normalize_name(std::string_view raw) {
  std::string_view s = trim(raw);
  if (s.empty()) fail(Errc::empty_name, "name is empty after trimming");

  std::string out;
  out.reserve(s.size());
  bool pending_sep = false;
  for (char c : s) {
    if (is_separator(c)) {
      pending_sep = true;
      continue;
    }
    unsigned char uc = static_cast<unsigned char>(c);
    if (uc >= 0x80 || !std::isalnum(uc)) {
      fail(Errc::invalid_name,
           "disallowed character '" + std::string(1, c) + "' in \"" + std::string(s) + "\"");
    }
    if (pending_sep) {
      if (out.empty()) {
        fail(Errc::invalid_name, "name starts with a separator: \"" + std::string(s) + "\"");
      }
      out.push_back('-');
      pending_sep = false;
    }
    out.push_back(static_cast<char>(std::tolower(uc)));
  }
  if (pending_sep) {
    fail(Errc::invalid_name, "name ends with a separator: \"" + std::string(s) + "\"");
  }
  return out;
}

namespace {

struct LogicalLine {
  std::string text;
  int first_physical = 0;  // 1-based
};

// Splits on LF, tolerates CRLF, strips a UTF-8 BOM, and joins lines whose
// last character is a backslash.
std::vector<LogicalLine> logical_lines(std::string_view content) {
  if (content.starts_with("\xEF\xBB\xBF")) content.remove_prefix(3);

  std::vector<std::string_view> physical;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    std::size_t nl = content.find('\n', pos);
    std::string_view line = (nl == std::string_view::npos)
                                ? content.substr(pos)
                                : content.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    physical.push_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  // A trailing newline produces one final empty piece; drop it so that the
  // count matches the file's physical lines.
  if (!physical.empty() && physical.back().empty() && content.ends_with("\n")) {
    physical.pop_back();
  }

  std::vector<LogicalLine> logical;
  for (std::size_t i = 0; i < physical.size(); ++i) {
    LogicalLine out;
    out.first_physical = static_cast<int>(i + 1);
    std::string_view line = physical[i];
    while (line.ends_with("\\") && i + 1 < physical.size()) {
      line.remove_suffix(1);
      out.text.append(line);
      line = physical[++i];
    }
    out.text.append(line);
    logical.push_back(std::move(out));
  }
  return logical;
}

bool looks_like_url(std::string_view s) {
  std::size_t space = s.find_first_of(" \t");
  std::string_view head = (space == std::string_view::npos) ? s : s.substr(0, space);
  return head.find("://") != std::string_view::npos;
}

// Extracts the name from a "#egg=name" fragment, if present.
std::string egg_name(std::string_view s) {
  std::size_t at = s.find("#egg=");
  if (at == std::string_view::npos) return {};
  std::string_view rest = s.substr(at + 5);
  std::size_t end = rest.find_first_of("&#[ \t");
  if (end != std::string_view::npos) rest = rest.substr(0, end);
  return std::string(trim(rest));
}

}  // namespace

ParseReport parse_requirements(std::string_view content) {
  ParseReport report;

  auto skip = [&report](int line, std::string reason) {
    ++report.skipped_lines;
    report.warnings.push_back({line, std::move(reason)});
  };
  auto accept = [&report](int line, std::string_view raw,
                          const char* note) -> bool {
    try {
      report.names.insert(normalize_name(raw));
    } catch (const Error& e) {
      ++report.skipped_lines;
      report.warnings.push_back({line, e.what()});
      return false;
    }
    ++report.parsed_lines;
    if (note) report.warnings.push_back({line, note});
    return true;
  };

  for (const LogicalLine& ll : logical_lines(content)) {
    std::string_view s = trim(ll.text);
    const int ln = ll.first_physical;

    if (s.empty()) {
      ++report.blank_lines;
      continue;
    }
    if (s.front() == '#') {
      skip(ln, "comment");
      continue;
    }
    if (s.front() == '-') {
      // pip option or directive (-r, -e, --index-url, ...)
      bool editable = s.starts_with("-e ") || s.starts_with("-e\t") ||
                      s.starts_with("--editable ") || s.starts_with("--editable=");
      if (editable) {
        std::string egg = egg_name(s);
        if (!egg.empty()) {
          accept(ln, egg, "egg name extracted from editable requirement");
        } else {
          skip(ln, "editable requirement without egg name");
        }
      } else {
        skip(ln, "option line");
      }
      continue;
    }
    if (looks_like_url(s)) {
      std::string egg = egg_name(s);
      if (!egg.empty()) {
        accept(ln, egg, "egg name extracted from URL requirement");
      } else {
        skip(ln, "URL requirement without egg name");
      }
      continue;
    }

    // Plain requirement: drop inline comment, environment marker, per-line
    // options (e.g. --hash), then cut the base name before any extras
    // bracket, version specifier, or direct-reference '@'.
    std::size_t cut = s.find('#');
    if (cut != std::string_view::npos) s = s.substr(0, cut);
    cut = s.find(';');
    if (cut != std::string_view::npos) s = s.substr(0, cut);
    cut = s.find(" --");
    if (cut != std::string_view::npos) s = s.substr(0, cut);
    cut = s.find_first_of("[<>=!~@( \t");
    if (cut != std::string_view::npos) s = s.substr(0, cut);
    s = trim(s);
    if (s.empty()) {
      skip(ln, "no package name found");
      continue;
    }
    accept(ln, s, nullptr);
  }
  return report;
}

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::empty_name: return "EmptyName";
    case Errc::invalid_name: return "InvalidName";
    case Errc::missing_root: return "MissingRoot";
    case Errc::malformed_layout: return "MalformedLayout";
    case Errc::malformed_record: return "MalformedRecord";
    case Errc::duplicate_snapshot: return "DuplicateSnapshot";
    case Errc::empty_corpus: return "EmptyCorpus";
    case Errc::empty_scope: return "EmptyScope";
    case Errc::rank_too_large: return "RankTooLarge";
    case Errc::empty_matrix: return "EmptyMatrix";
    case Errc::unknown_libraries: return "UnknownLibraries";
    case Errc::zero_vector: return "ZeroVector";
    case Errc::version_mismatch: return "VersionMismatch";
    case Errc::malformed_model: return "MalformedModel";
    case Errc::too_few_points: return "TooFewPoints";
    case Errc::invalid_refs: return "InvalidRefs";
    case Errc::too_few_items: return "TooFewItems";
    case Errc::empty_slice: return "EmptySlice";
    case Errc::both_empty: return "BothEmpty";
    case Errc::no_candidates: return "NoCandidates";
    case Errc::empty_targets: return "EmptyTargets";
    case Errc::no_consecutive_pairs: return "NoConsecutivePairs";
    case Errc::usage: return "Usage";
  }
  return "Error";
}

}  // namespace depembed
