#include "depembed/recommend.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "depembed/error.hpp"

namespace depembed {

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::rle: return "rle";
    case ModelKind::dre: return "dre";
    case ModelKind::jaccard: return "jaccard";
    case ModelKind::baseline: return "baseline";
  }
  return "?";
}

std::optional<ModelKind> model_kind_from_name(std::string_view name) {
  if (name == "rle") return ModelKind::rle;
  if (name == "dre") return ModelKind::dre;
  if (name == "jaccard") return ModelKind::jaccard;
  if (name == "baseline") return ModelKind::baseline;
  return std::nullopt;
}

ScoringParams relevant_preset(ModelKind kind) {
  ScoringParams p;
  p.kind = kind;
  p.alpha = -1.0;
  p.beta = 2.0;
  p.k_neighbors = (kind == ModelKind::jaccard) ? 100 : 500;
  return p;
}

ScoringParams explore_preset(ModelKind kind) {
  ScoringParams p;
  p.kind = kind;
  p.alpha = 3.0;
  p.beta = 2.0;
  p.k_neighbors = 50;
  return p;
}

double jaccard_distance(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) fail(Errc::both_empty, "jaccard of two empty sets");
  std::size_t inter = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) ++ia;
    else if (*ib < *ia) ++ib;
    else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

Eigen::MatrixXd slice_vectors(const Corpus& corpus,
                              const std::vector<std::size_t>& slice,
                              const EmbeddingModel& model, ModelKind kind) {
  Eigen::MatrixXd vecs(static_cast<Eigen::Index>(slice.size()), model.dim);
  for (std::size_t i = 0; i < slice.size(); ++i) {
    const ProjectSnapshot& snap = corpus.snapshots()[slice[i]];
    if (kind == ModelKind::rle) {
      std::set<std::string> deps(snap.deps.begin(), snap.deps.end());
      vecs.row(static_cast<Eigen::Index>(i)) = rle_vector(deps, model).transpose();
    } else if (kind == ModelKind::dre) {
      auto idx = model.repo_index({snap.repo_id, snap.year});
      if (!idx) {
        fail(Errc::malformed_model,
             "snapshot " + snap.repo_id + "@" + std::to_string(snap.year) +
                 " missing from the model (model built from a different corpus?)");
      }
      vecs.row(static_cast<Eigen::Index>(i)) =
          model.repo_vectors.row(static_cast<Eigen::Index>(*idx));
    } else {
      fail(Errc::usage, "slice_vectors only applies to rle/dre kinds");
    }
  }
  return vecs;
}

std::vector<Neighbor> nearest_neighbors(const QueryRepr& query,
                                        const std::vector<std::size_t>& slice,
                                        const Corpus& corpus,
                                        const EmbeddingModel& model,
                                        ModelKind kind, std::size_t k,
                                        std::optional<std::size_t> exclude,
                                        const Eigen::MatrixXd* vecs) {
  if (slice.empty()) fail(Errc::empty_slice, "no snapshots to search");

  Eigen::MatrixXd local;
  if (kind != ModelKind::jaccard && vecs == nullptr) {
    local = slice_vectors(corpus, slice, model, kind);
    vecs = &local;
  }

  std::vector<Neighbor> result;
  result.reserve(slice.size());
  for (std::size_t i = 0; i < slice.size(); ++i) {
    const std::size_t snap_idx = slice[i];
    if (exclude && snap_idx == *exclude) continue;
    double d;
    if (kind == ModelKind::jaccard) {
      const ProjectSnapshot& snap = corpus.snapshots()[snap_idx];
      std::set<std::string> deps(snap.deps.begin(), snap.deps.end());
      d = jaccard_distance(query.deps, deps);
    } else {
      if (!query.vec) fail(Errc::zero_vector, "query vector missing");
      d = cosine_distance(*query.vec,
                          vecs->row(static_cast<Eigen::Index>(i)).transpose());
    }
    result.push_back({snap_idx, d});
  }
  if (result.empty()) fail(Errc::empty_slice, "slice only contains the query itself");

  std::sort(result.begin(), result.end(),
            [&corpus](const Neighbor& a, const Neighbor& b) {
              if (a.distance != b.distance) return a.distance < b.distance;
              return corpus.snapshots()[a.snapshot].repo_id <
                     corpus.snapshots()[b.snapshot].repo_id;
            });
  if (k != kAllNeighbors && result.size() > k) result.resize(k);
  return result;
}

std::vector<Recommendation> score_candidates(const std::set<std::string>& query_deps,
                                             const std::vector<Neighbor>& neighbors,
                                             const Corpus& corpus,
                                             const ScoringParams& params,
                                             const IdfTable& idf) {
  if (neighbors.empty()) fail(Errc::empty_slice, "no neighbors to score from");

  struct Acc {
    double sim_sum = 0.0;
    int count = 0;
  };
  // Ordered map: the final sort's name tie-break sees a deterministic order.
  std::map<std::string, Acc> acc;
  for (const Neighbor& nb : neighbors) {
    const double sim = std::clamp(1.0 - nb.distance, 0.0, 1.0);
    const double weight = std::pow(sim, params.beta);  // pow(0, 0) == 1
    for (const std::string& dep : corpus.snapshots()[nb.snapshot].deps) {
      if (query_deps.contains(dep)) continue;
      Acc& a = acc[dep];
      a.sim_sum += weight;
      a.count += 1;
    }
  }
  if (acc.empty()) {
    fail(Errc::no_candidates, "every neighbor library is already a dependency");
  }

  std::vector<Recommendation> recs;
  recs.reserve(acc.size());
  std::vector<std::uint32_t> dfs;
  dfs.reserve(acc.size());
  for (const auto& [name, a] : acc) {
    const IdfEntry* entry = idf.lookup(name);
    // Candidates come from scope snapshots, so the idf entry exists.
    const double idf_term = std::pow(entry ? entry->idf : 1.0, params.alpha);
    recs.push_back({name, idf_term * a.sim_sum, a.count});
    dfs.push_back(entry ? entry->df : 0);
  }

  std::vector<std::size_t> order(recs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (recs[a].score != recs[b].score) return recs[a].score > recs[b].score;
    if (dfs[a] != dfs[b]) return dfs[a] > dfs[b];
    return recs[a].library < recs[b].library;
  });

  std::vector<Recommendation> out;
  const std::size_t n = std::min(params.top_n, order.size());
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::move(recs[order[i]]));
  return out;
}

std::vector<Recommendation> popularity_ranking(const Corpus& corpus,
                                               const std::vector<std::size_t>& slice,
                                               const std::set<std::string>& exclude_deps,
                                               std::size_t top_n) {
  if (slice.empty()) fail(Errc::empty_slice, "no snapshots in slice");

  std::map<std::string, int> df;
  for (std::size_t idx : slice) {
    for (const std::string& dep : corpus.snapshots()[idx].deps) {
      if (!exclude_deps.contains(dep)) ++df[dep];
    }
  }
  if (df.empty()) fail(Errc::no_candidates, "slice has no other libraries");

  std::vector<Recommendation> recs;
  recs.reserve(df.size());
  for (const auto& [name, count] : df) {
    recs.push_back({name, static_cast<double>(count), count});
  }
  std::sort(recs.begin(), recs.end(), [](const Recommendation& a, const Recommendation& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.library < b.library;
  });
  if (recs.size() > top_n) recs.resize(top_n);
  return recs;
}

namespace {

std::vector<std::size_t> whole_corpus_slice(const Corpus& corpus) {
  std::vector<std::size_t> all(corpus.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

RecommendResult run_query(const QueryRepr& query, const EmbeddingModel& model,
                          const Corpus& corpus, const ScoringParams& params,
                          const std::vector<std::size_t>& slice,
                          const IdfTable& idf, std::optional<std::size_t> exclude,
                          RecommendResult result) {
  if (params.kind == ModelKind::baseline) {
    result.items = popularity_ranking(corpus, slice, query.deps, params.top_n);
    return result;
  }
  std::vector<Neighbor> neighbors = nearest_neighbors(
      query, slice, corpus, model, params.kind, params.k_neighbors, exclude);
  result.items = score_candidates(query.deps, neighbors, corpus, params, idf);
  return result;
}

}  // namespace

RecommendResult recommend_for_deps(const std::set<std::string>& deps,
                                   const EmbeddingModel& model, const Corpus& corpus,
                                   const ScoringParams& params,
                                   std::optional<int> year) {
  RecommendResult result;
  QueryRepr query;
  query.deps = deps;
  if (params.kind == ModelKind::rle) {
    query.vec = rle_vector(deps, model, &result.ignored_deps);
  } else if (params.kind == ModelKind::dre) {
    query.vec = dre_vector(deps, model, &result.ignored_deps);
    result.used_fold_in = true;
  }

  const std::vector<std::size_t>& slice =
      year ? corpus.slice(*year) : whole_corpus_slice(corpus);
  if (year && slice.empty()) {
    fail(Errc::empty_slice, "no snapshots in year " + std::to_string(*year));
  }
  IdfTable scoped = year ? idf_table(corpus, *year) : model.idf;
  return run_query(query, model, corpus, params, slice, scoped, std::nullopt,
                   std::move(result));
}

RecommendResult recommend_for_repo(const std::string& repo_id, int year,
                                   const EmbeddingModel& model, const Corpus& corpus,
                                   const ScoringParams& params) {
  auto snap_idx = corpus.find(repo_id, year);
  if (!snap_idx) {
    fail(Errc::malformed_record,
         "snapshot " + repo_id + "@" + std::to_string(year) + " not in corpus");
  }
  const ProjectSnapshot& snap = corpus.snapshots()[*snap_idx];

  RecommendResult result;
  QueryRepr query;
  query.deps.insert(snap.deps.begin(), snap.deps.end());
  if (params.kind == ModelKind::rle) {
    query.vec = rle_vector(query.deps, model, &result.ignored_deps);
  } else if (params.kind == ModelKind::dre) {
    auto repo_row = model.repo_index({repo_id, year});
    if (repo_row) {
      query.vec = model.repo_vectors.row(static_cast<Eigen::Index>(*repo_row)).transpose();
    } else {
      query.vec = dre_vector(query.deps, model, &result.ignored_deps);
      result.used_fold_in = true;
    }
  }

  const std::vector<std::size_t>& slice = corpus.slice(year);
  IdfTable scoped = idf_table(corpus, year);
  return run_query(query, model, corpus, params, slice, scoped, snap_idx,
                   std::move(result));
}

}  // namespace depembed
