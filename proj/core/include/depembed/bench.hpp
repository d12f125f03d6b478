#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "depembed/corpus.hpp"
#include "depembed/embed.hpp"
#include "depembed/recommend.hpp"

namespace depembed {

// One replay task: the dependencies a project had at `year`, and the
// libraries it had added by the next year.
struct BenchmarkEntry {
  std::string repo;
  int year = 0;
  std::set<std::string> given;
  std::set<std::string> targets;  // nonempty, disjoint from given
};

// Entries for every repo with snapshots in consecutive years where at least
// one library was added and at most 10 were added or removed in total.
std::vector<BenchmarkEntry> build_benchmark(const Corpus& corpus);

// JSON Lines {"repo", "year", "given", "targets"}.
void save_benchmark(const std::vector<BenchmarkEntry>& entries,
                    const std::filesystem::path& path);
std::vector<BenchmarkEntry> load_benchmark(const std::filesystem::path& path);

// Rank of the first target in the full ranking (1/rank, 0 if absent).
double reciprocal_rank(const std::vector<std::string>& ranked,
                       const std::set<std::string>& targets);
double precision_at_k(const std::vector<std::string>& ranked,
                      const std::set<std::string>& targets, std::size_t k);
double recall_at_k(const std::vector<std::string>& ranked,
                   const std::set<std::string>& targets, std::size_t k);

struct MetricsReport {
  std::size_t n_entries = 0;
  double prec1 = 0.0;
  double prec3 = 0.0;
  double prec5 = 0.0;
  double prec10 = 0.0;
  double rec5 = 0.0;
  double rec10 = 0.0;
  double mrr = 0.0;
};

// Caches per-year slices, idf tables, and snapshot vectors so repeated
// evaluation over one corpus/model pair stays cheap.
class EvalContext {
 public:
  EvalContext(const Corpus& corpus, const EmbeddingModel& model)
      : corpus_(corpus), model_(model) {}

  const Corpus& corpus() const { return corpus_; }
  const EmbeddingModel& model() const { return model_; }

  const IdfTable& idf(int year);
  const Eigen::MatrixXd& vectors(int year, ModelKind kind);

 private:
  const Corpus& corpus_;
  const EmbeddingModel& model_;
  std::map<int, IdfTable> idf_;
  std::map<std::pair<int, int>, Eigen::MatrixXd> vectors_;  // (year, kind)
};

// Full candidate ranking for one entry, restricted to the entry's year:
// neighbors, idf, and the baseline all come from the year-Y slice only, and
// the query's own snapshot is excluded from its neighbors.
std::vector<std::string> rank_for_entry(const BenchmarkEntry& entry, ModelKind kind,
                                        const ScoringParams& params, EvalContext& ctx);
std::vector<std::string> rank_for_entry(const BenchmarkEntry& entry, ModelKind kind,
                                        const ScoringParams& params,
                                        const Corpus& corpus, const EmbeddingModel& model);

// Metrics averaged uniformly over entries (in a canonical entry order, so
// the result is independent of input permutation).
MetricsReport evaluate(ModelKind kind, const ScoringParams& params,
                       const std::vector<BenchmarkEntry>& benchmark, EvalContext& ctx);
MetricsReport evaluate(ModelKind kind, const ScoringParams& params,
                       const std::vector<BenchmarkEntry>& benchmark,
                       const Corpus& corpus, const EmbeddingModel& model);

struct GridSpec {
  std::vector<ModelKind> kinds{ModelKind::rle, ModelKind::dre, ModelKind::jaccard,
                               ModelKind::baseline};
  std::vector<double> alphas{-3, -2, -1, 0, 1, 2};
  std::vector<double> betas{0, 1, 2};
  std::vector<std::size_t> k_values{1, 5, 10, 50, 100, 200, 500, kAllNeighbors};
};

struct GridRow {
  ModelKind kind = ModelKind::rle;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t k_neighbors = kAllNeighbors;
  MetricsReport metrics;
};

// One evaluate run per grid point. Neighbor lists are computed once per
// (kind, entry) and shared across the (alpha, beta) grid.
std::vector<GridRow> grid_search(const GridSpec& spec,
                                 const std::vector<BenchmarkEntry>& benchmark,
                                 EvalContext& ctx);

// CSV: model,alpha,beta,k_neighbors,prec1,prec3,prec5,rec5,rec10,mrr,n_entries
void write_grid_csv(const std::vector<GridRow>& rows, std::ostream& out);

}  // namespace depembed
