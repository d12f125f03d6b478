#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "depembed/corpus.hpp"

namespace depembed {

// Truncated singular value decomposition M ~= U diag(sigma) V^T.
struct SvdFactors {
  Eigen::MatrixXd u;       // n_rows x dim
  Eigen::VectorXd sigma;   // dim, descending, nonnegative
  Eigen::MatrixXd v;       // n_cols x dim
};

inline constexpr int kSvdOversampling = 10;
inline constexpr int kSvdPowerIterations = 4;

// Randomized truncated SVD. The range basis is grown as a block Krylov
// space: the oversampled Gaussian start block plus the block produced by
// each of the power iterations. Deterministic given seed. Each right
// singular vector is oriented so its largest-magnitude entry is positive.
SvdFactors truncated_svd(const CooccurrenceMatrix& m, int dim, std::uint64_t seed);

enum class Scaling { sigma, none };

std::string_view scaling_name(Scaling s);
std::optional<Scaling> scaling_from_name(std::string_view name);

// Library and repository vectors from one SVD run, plus the whole-corpus
// IDF table. Immutable after construction.
struct EmbeddingModel {
  int dim = 0;
  Scaling scaling = Scaling::sigma;
  std::uint64_t seed = 0;
  Eigen::VectorXd singular_values;

  std::vector<std::string> vocab;   // sorted library names
  Eigen::MatrixXd library_vectors;  // vocab.size() x dim, scaled per `scaling`
  Eigen::MatrixXd right_factors;    // vocab.size() x dim, raw V (fold-in basis)

  std::vector<RepoYear> repo_keys;  // training snapshots, corpus order
  Eigen::MatrixXd repo_vectors;     // repo_keys.size() x dim, scaled per `scaling`

  IdfTable idf;  // whole-corpus scope

  std::optional<std::size_t> library_index(const std::string& name) const;
  std::optional<std::size_t> repo_index(const RepoYear& key) const;

  std::map<std::string, std::size_t> vocab_index;
  std::map<RepoYear, std::size_t> repo_key_index;

  void rebuild_indexes();
};

EmbeddingModel build_model(const Corpus& corpus, int dim = 32,
                           Scaling scaling = Scaling::sigma,
                           std::uint64_t seed = 0);

// Mean of the library vectors of deps that are in the vocabulary. Names
// outside the vocabulary are appended to `ignored` when given; throws
// Errc::unknown_libraries if none are known.
Eigen::VectorXd rle_vector(const std::set<std::string>& deps,
                           const EmbeddingModel& model,
                           std::vector<std::string>* ignored = nullptr);

// Fold-in projection: binary indicator of deps over the vocabulary times V.
// For a training snapshot this reproduces its U_i * sigma row.
Eigen::VectorXd dre_vector(const std::set<std::string>& deps,
                           const EmbeddingModel& model,
                           std::vector<std::string>* ignored = nullptr);

// 1 - cos(x, y), clamped to [0, 2]. Throws Errc::zero_vector.
double cosine_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Single JSON document; doubles use shortest round-trip encoding, so a
// load(save(m)) round trip is bit-exact and builds are byte-reproducible.
void save_model(const EmbeddingModel& model, const std::filesystem::path& path);
EmbeddingModel load_model(const std::filesystem::path& path);

}  // namespace depembed
