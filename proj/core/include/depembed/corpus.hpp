#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace depembed {

// One repository's normalized dependency set at one yearly slice.
struct ProjectSnapshot {
  std::string repo_id;  // "owner/name"
  int year = 0;
  std::vector<std::string> deps;  // sorted, unique, normalized, nonempty

  bool operator==(const ProjectSnapshot&) const = default;
};

struct RepoYear {
  std::string repo;
  int year = 0;

  auto operator<=>(const RepoYear&) const = default;
};

class Corpus {
 public:
  Corpus() = default;

  // Sorts by (repo, year) and validates uniqueness and nonempty dep sets.
  static Corpus from_snapshots(std::vector<ProjectSnapshot> snapshots);

  const std::vector<ProjectSnapshot>& snapshots() const { return snapshots_; }
  std::size_t size() const { return snapshots_.size(); }
  bool empty() const { return snapshots_.empty(); }

  const std::map<int, std::vector<std::size_t>>& year_index() const {
    return year_index_;
  }

  // Snapshot indices for one year, ordered by repo. Empty if year absent.
  const std::vector<std::size_t>& slice(int year) const;

  std::optional<std::size_t> find(std::string_view repo, int year) const;

  bool operator==(const Corpus& other) const {
    return snapshots_ == other.snapshots_;
  }

 private:
  std::vector<ProjectSnapshot> snapshots_;
  std::map<int, std::vector<std::size_t>> year_index_;
};

struct IngestIssue {
  std::string path;
  std::string reason;
};

struct IngestResult {
  Corpus corpus;
  std::vector<IngestIssue> issues;  // skipped files and layout problems
};

// Walks root/owner__name/requirements-<year>.txt, parsing each file.
// Files with no surviving dependencies are skipped, as are files and
// directories that do not match the layout (reported in issues).
IngestResult ingest_tree(const std::filesystem::path& root);

// JSON Lines, one {"repo", "year", "deps"} object per snapshot, sorted by
// (repo, year) with deps sorted. load(save(c)) == c.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

// Sparse binary incidence of snapshots over the global library vocabulary.
// Row order matches corpus snapshot order; columns are the sorted vocabulary.
struct CooccurrenceMatrix {
  std::vector<RepoYear> rows;
  std::vector<std::string> cols;
  std::vector<std::uint32_t> row_ptr;  // size rows+1, CSR offsets
  std::vector<std::uint32_t> col_idx;  // sorted within each row

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return cols.size(); }
  std::size_t nnz() const { return col_idx.size(); }

  // Column indices of row r.
  std::pair<const std::uint32_t*, const std::uint32_t*> row_span(std::size_t r) const {
    return {col_idx.data() + row_ptr[r], col_idx.data() + row_ptr[r + 1]};
  }

  std::vector<std::uint32_t> column_counts() const;
};

CooccurrenceMatrix build_matrix(const Corpus& corpus);

struct IdfEntry {
  std::uint32_t df = 0;
  double idf = 0.0;
};

// Smoothed inverse document frequency over a scope (whole corpus or one
// year): idf = ln((1+N)/(1+df)) + 1, always positive.
struct IdfTable {
  std::optional<int> year;  // nullopt: whole corpus
  std::size_t n_snapshots = 0;
  std::unordered_map<std::string, IdfEntry> entries;

  const IdfEntry* lookup(const std::string& name) const {
    auto it = entries.find(name);
    return it == entries.end() ? nullptr : &it->second;
  }
};

IdfTable idf_table(const Corpus& corpus, std::optional<int> year = std::nullopt);

struct LibraryCount {
  std::string library;
  std::uint32_t df = 0;
  double percent = 0.0;  // of snapshots in scope
};

struct DistributionReport {
  std::optional<int> year;
  std::size_t n_snapshots = 0;
  std::size_t vocab_size = 0;
  std::vector<LibraryCount> by_popularity;  // df descending, then name
  double fraction_df_le_10 = 0.0;
  double fraction_df_eq_1 = 0.0;
};

DistributionReport stats(const Corpus& corpus, std::optional<int> year = std::nullopt);

// CSV with library,df,percent rows and a comment footer of summary values.
void write_stats_csv(const DistributionReport& report, std::ostream& out);

}  // namespace depembed
