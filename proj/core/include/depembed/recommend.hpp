#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "depembed/corpus.hpp"
#include "depembed/embed.hpp"

namespace depembed {

enum class ModelKind { rle, dre, jaccard, baseline };

std::string_view model_kind_name(ModelKind kind);
std::optional<ModelKind> model_kind_from_name(std::string_view name);

inline constexpr std::size_t kAllNeighbors = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kUntruncated = std::numeric_limits<std::size_t>::max();

// score_L = idf(L)^alpha * sum over the K nearest neighbors containing L of
// clamp(1 - dist, 0, 1)^beta.
struct ScoringParams {
  double alpha = -1.0;
  double beta = 2.0;
  std::size_t k_neighbors = kAllNeighbors;
  ModelKind kind = ModelKind::rle;
  std::size_t top_n = kUntruncated;
};

// Best benchmark parameters per kind (K=500 for the embedding models,
// K=100 for Jaccard).
ScoringParams relevant_preset(ModelKind kind);
// Rare-library preset: idf power +3, 50 neighbors.
ScoringParams explore_preset(ModelKind kind);

// Query representation: always the dep set; plus an embedding-space vector
// for the rle/dre kinds.
struct QueryRepr {
  std::set<std::string> deps;
  std::optional<Eigen::VectorXd> vec;
};

struct Neighbor {
  std::size_t snapshot = 0;  // corpus snapshot index
  double distance = 0.0;
};

// Per-snapshot vectors for a slice: rle means or stored dre rows.
Eigen::MatrixXd slice_vectors(const Corpus& corpus,
                              const std::vector<std::size_t>& slice,
                              const EmbeddingModel& model, ModelKind kind);

// Exact K nearest neighbors by cosine distance (Jaccard distance on dep
// sets for the jaccard kind). Ties break by ascending repo id; `exclude`
// removes the query's own snapshot. Pass `vecs` to reuse slice_vectors
// output; otherwise it is computed on the fly.
std::vector<Neighbor> nearest_neighbors(const QueryRepr& query,
                                        const std::vector<std::size_t>& slice,
                                        const Corpus& corpus,
                                        const EmbeddingModel& model,
                                        ModelKind kind, std::size_t k,
                                        std::optional<std::size_t> exclude,
                                        const Eigen::MatrixXd* vecs = nullptr);

// 1 - |A and B| / |A or B|. Throws Errc::both_empty.
double jaccard_distance(const std::set<std::string>& a, const std::set<std::string>& b);

struct Recommendation {
  std::string library;
  double score = 0.0;
  int supporting_neighbors = 0;
};

// Candidates are the union of neighbor dependencies minus the query's own.
// Sorted by score descending, ties by higher df in the idf table, then by
// ascending name; truncated to params.top_n.
std::vector<Recommendation> score_candidates(const std::set<std::string>& query_deps,
                                             const std::vector<Neighbor>& neighbors,
                                             const Corpus& corpus,
                                             const ScoringParams& params,
                                             const IdfTable& idf);

// Popularity ranking of a slice, excluding the query's dependencies. The
// score of a library is its document frequency in the slice.
std::vector<Recommendation> popularity_ranking(const Corpus& corpus,
                                               const std::vector<std::size_t>& slice,
                                               const std::set<std::string>& exclude_deps,
                                               std::size_t top_n);

struct RecommendResult {
  std::vector<Recommendation> items;
  std::vector<std::string> ignored_deps;  // query names outside the vocabulary
  bool used_fold_in = false;              // dre query answered via fold-in
};

// Ad-hoc query from a dependency set. With a year, neighbors and idf are
// restricted to that slice; otherwise the whole corpus is used.
RecommendResult recommend_for_deps(const std::set<std::string>& deps,
                                   const EmbeddingModel& model, const Corpus& corpus,
                                   const ScoringParams& params,
                                   std::optional<int> year = std::nullopt);

// Query by an in-corpus snapshot. Neighbors come from the snapshot's own
// year and the snapshot itself is excluded.
RecommendResult recommend_for_repo(const std::string& repo_id, int year,
                                   const EmbeddingModel& model, const Corpus& corpus,
                                   const ScoringParams& params);

}  // namespace depembed
