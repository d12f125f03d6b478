#include "depembed/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "depembed/error.hpp"
#include "depembed/format.hpp"
#include "depembed/reqparse.hpp"

namespace depembed {

namespace fs = std::filesystem;
using nlohmann::json;

Corpus Corpus::from_snapshots(std::vector<ProjectSnapshot> snapshots) {
  for (ProjectSnapshot& s : snapshots) {
    if (s.deps.empty()) {
      fail(Errc::malformed_record,
           "snapshot " + s.repo_id + "@" + std::to_string(s.year) + " has no dependencies");
    }
    std::sort(s.deps.begin(), s.deps.end());
    s.deps.erase(std::unique(s.deps.begin(), s.deps.end()), s.deps.end());
  }
  std::sort(snapshots.begin(), snapshots.end(),
            [](const ProjectSnapshot& a, const ProjectSnapshot& b) {
              return std::tie(a.repo_id, a.year) < std::tie(b.repo_id, b.year);
            });
  for (std::size_t i = 1; i < snapshots.size(); ++i) {
    if (snapshots[i].repo_id == snapshots[i - 1].repo_id &&
        snapshots[i].year == snapshots[i - 1].year) {
      fail(Errc::duplicate_snapshot,
           snapshots[i].repo_id + "@" + std::to_string(snapshots[i].year));
    }
  }

  Corpus c;
  c.snapshots_ = std::move(snapshots);
  for (std::size_t i = 0; i < c.snapshots_.size(); ++i) {
    c.year_index_[c.snapshots_[i].year].push_back(i);
  }
  return c;
}

const std::vector<std::size_t>& Corpus::slice(int year) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = year_index_.find(year);
  return it == year_index_.end() ? kEmpty : it->second;
}

std::optional<std::size_t> Corpus::find(std::string_view repo, int year) const {
  auto it = std::lower_bound(
      snapshots_.begin(), snapshots_.end(), std::pair(repo, year),
      [](const ProjectSnapshot& s, const std::pair<std::string_view, int>& key) {
        return std::tie(s.repo_id, s.year) < std::tie(key.first, key.second);
      });
  if (it == snapshots_.end() || it->repo_id != repo || it->year != year) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - snapshots_.begin());
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::malformed_record, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

// requirements-<year>.txt
std::optional<int> year_from_filename(const std::string& name) {
  constexpr std::string_view prefix = "requirements-";
  constexpr std::string_view suffix = ".txt";
  if (name.size() != prefix.size() + 4 + suffix.size()) return std::nullopt;
  if (!name.starts_with(prefix) || !name.ends_with(suffix)) return std::nullopt;
  int year = 0;
  const char* first = name.data() + prefix.size();
  auto [ptr, ec] = std::from_chars(first, first + 4, year);
  if (ec != std::errc() || ptr != first + 4) return std::nullopt;
  return year;
}

}  // namespace

IngestResult ingest_tree(const fs::path& root) {
  if (!fs::exists(root) || !fs::is_directory(root)) {
    fail(Errc::missing_root, root.string());
  }

  IngestResult result;
  std::vector<ProjectSnapshot> snapshots;

  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());

  for (const fs::path& dir : dirs) {
    if (!fs::is_directory(dir)) {
      result.issues.push_back({dir.string(), "not a repository directory"});
      continue;
    }
    const std::string dirname = dir.filename().string();
    std::size_t sep = dirname.find("__");
    if (sep == std::string::npos || sep == 0 || sep + 2 >= dirname.size()) {
      result.issues.push_back({dir.string(), "directory name is not owner__name"});
      continue;
    }
    const std::string repo_id = dirname.substr(0, sep) + "/" + dirname.substr(sep + 2);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    for (const fs::path& file : files) {
      auto year = year_from_filename(file.filename().string());
      if (!year) {
        result.issues.push_back({file.string(), "file name is not requirements-<year>.txt"});
        continue;
      }
      ParseReport report = parse_requirements(read_file(file));
      if (report.skippable()) {
        result.issues.push_back({file.string(), "no dependencies after parsing, skipped"});
        continue;
      }
      snapshots.push_back({repo_id, *year,
                           {report.names.begin(), report.names.end()}});
    }
  }

  result.corpus = Corpus::from_snapshots(std::move(snapshots));
  return result;
}

void save_corpus(const Corpus& corpus, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::malformed_record, "cannot write " + path.string());
  for (const ProjectSnapshot& s : corpus.snapshots()) {
    json rec{{"repo", s.repo_id}, {"year", s.year}, {"deps", s.deps}};
    out << rec.dump() << '\n';
  }
}

Corpus load_corpus(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::malformed_record, "cannot open " + path.string());

  std::vector<ProjectSnapshot> snapshots;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object() || !rec.contains("repo") ||
        !rec.contains("year") || !rec.contains("deps") ||
        !rec["repo"].is_string() || !rec["year"].is_number_integer() ||
        !rec["deps"].is_array()) {
      fail(Errc::malformed_record, path.string() + ":" + std::to_string(lineno));
    }
    ProjectSnapshot s;
    s.repo_id = rec["repo"].get<std::string>();
    s.year = rec["year"].get<int>();
    if (s.repo_id.empty()) {
      fail(Errc::malformed_record,
           path.string() + ":" + std::to_string(lineno) + ": empty repo id");
    }
    for (const json& d : rec["deps"]) {
      if (!d.is_string()) {
        fail(Errc::malformed_record,
             path.string() + ":" + std::to_string(lineno) + ": dep is not a string");
      }
      try {
        s.deps.push_back(normalize_name(d.get<std::string>()));
      } catch (const Error& e) {
        fail(Errc::malformed_record,
             path.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    if (s.deps.empty()) {
      fail(Errc::malformed_record,
           path.string() + ":" + std::to_string(lineno) + ": empty dependency set");
    }
    snapshots.push_back(std::move(s));
  }
  return Corpus::from_snapshots(std::move(snapshots));
}

std::vector<std::uint32_t> CooccurrenceMatrix::column_counts() const {
  std::vector<std::uint32_t> counts(cols.size(), 0);
  for (std::uint32_t c : col_idx) ++counts[c];
  return counts;
}

CooccurrenceMatrix build_matrix(const Corpus& corpus) {
  if (corpus.empty()) fail(Errc::empty_corpus, "cannot build matrix");

  CooccurrenceMatrix m;
  std::set<std::string> vocab;
  for (const ProjectSnapshot& s : corpus.snapshots()) {
    vocab.insert(s.deps.begin(), s.deps.end());
  }
  m.cols.assign(vocab.begin(), vocab.end());

  std::unordered_map<std::string, std::uint32_t> col_of;
  col_of.reserve(m.cols.size());
  for (std::uint32_t j = 0; j < m.cols.size(); ++j) col_of[m.cols[j]] = j;

  m.rows.reserve(corpus.size());
  m.row_ptr.reserve(corpus.size() + 1);
  m.row_ptr.push_back(0);
  for (const ProjectSnapshot& s : corpus.snapshots()) {
    m.rows.push_back({s.repo_id, s.year});
    for (const std::string& dep : s.deps) m.col_idx.push_back(col_of[dep]);
    std::sort(m.col_idx.begin() + m.row_ptr.back(), m.col_idx.end());
    m.row_ptr.push_back(static_cast<std::uint32_t>(m.col_idx.size()));
  }
  return m;
}

IdfTable idf_table(const Corpus& corpus, std::optional<int> year) {
  IdfTable table;
  table.year = year;

  auto count_snapshot = [&table](const ProjectSnapshot& s) {
    ++table.n_snapshots;
    for (const std::string& dep : s.deps) ++table.entries[dep].df;
  };
  if (year) {
    for (std::size_t i : corpus.slice(*year)) count_snapshot(corpus.snapshots()[i]);
  } else {
    for (const ProjectSnapshot& s : corpus.snapshots()) count_snapshot(s);
  }
  if (table.n_snapshots == 0) {
    fail(Errc::empty_scope,
         year ? "no snapshots in year " + std::to_string(*year) : "corpus is empty");
  }

  const double n = static_cast<double>(table.n_snapshots);
  for (auto& [name, entry] : table.entries) {
    entry.idf = std::log((1.0 + n) / (1.0 + entry.df)) + 1.0;
  }
  return table;
}

DistributionReport stats(const Corpus& corpus, std::optional<int> year) {
  IdfTable table = idf_table(corpus, year);

  DistributionReport report;
  report.year = year;
  report.n_snapshots = table.n_snapshots;
  report.vocab_size = table.entries.size();

  report.by_popularity.reserve(table.entries.size());
  std::size_t le10 = 0;
  std::size_t eq1 = 0;
  for (const auto& [name, entry] : table.entries) {
    report.by_popularity.push_back(
        {name, entry.df, 100.0 * entry.df / static_cast<double>(table.n_snapshots)});
    if (entry.df <= 10) ++le10;
    if (entry.df == 1) ++eq1;
  }
  std::sort(report.by_popularity.begin(), report.by_popularity.end(),
            [](const LibraryCount& a, const LibraryCount& b) {
              if (a.df != b.df) return a.df > b.df;
              return a.library < b.library;
            });
  report.fraction_df_le_10 = static_cast<double>(le10) / report.vocab_size;
  report.fraction_df_eq_1 = static_cast<double>(eq1) / report.vocab_size;
  return report;
}

void write_stats_csv(const DistributionReport& report, std::ostream& out) {
  out << "library,df,percent\n";
  for (const LibraryCount& c : report.by_popularity) {
    out << c.library << ',' << c.df << ',' << fmt_double(c.percent) << '\n';
  }
  out << "# snapshots," << report.n_snapshots << '\n';
  out << "# vocabulary," << report.vocab_size << '\n';
  if (report.year) out << "# year," << *report.year << '\n';
  out << "# fraction_df_le_10," << fmt_double(report.fraction_df_le_10) << '\n';
  out << "# fraction_df_eq_1," << fmt_double(report.fraction_df_eq_1) << '\n';
}

}  // namespace depembed
