#include "depembed/embed.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "depembed/error.hpp"
#include "depembed/rng.hpp"

namespace depembed {

namespace {

// Y = M * X for CSR binary M (n_rows x n_cols), X dense (n_cols x l).
Eigen::MatrixXd sparse_mul(const CooccurrenceMatrix& m, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.n_rows()), x.cols());
  for (std::size_t r = 0; r < m.n_rows(); ++r) {
    auto [first, last] = m.row_span(r);
    for (const std::uint32_t* it = first; it != last; ++it) {
      y.row(static_cast<Eigen::Index>(r)) += x.row(*it);
    }
  }
  return y;
}

// Z = M^T * X, X dense (n_rows x l).
Eigen::MatrixXd sparse_mul_t(const CooccurrenceMatrix& m, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.n_cols()), x.cols());
  for (std::size_t r = 0; r < m.n_rows(); ++r) {
    auto [first, last] = m.row_span(r);
    for (const std::uint32_t* it = first; it != last; ++it) {
      z.row(*it) += x.row(static_cast<Eigen::Index>(r));
    }
  }
  return z;
}

Eigen::MatrixXd thin_q(const Eigen::MatrixXd& a) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::Index k = std::min(a.rows(), a.cols());
  return qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), k);
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  }
  return g;
}

}  // namespace

SvdFactors truncated_svd(const CooccurrenceMatrix& m, int dim, std::uint64_t seed) {
  const Eigen::Index rows = static_cast<Eigen::Index>(m.n_rows());
  const Eigen::Index cols = static_cast<Eigen::Index>(m.n_cols());
  if (rows == 0 || cols == 0) fail(Errc::empty_matrix, "matrix has no rows or columns");
  const Eigen::Index min_dim = std::min(rows, cols);
  if (dim < 1 || dim > min_dim) {
    fail(Errc::rank_too_large, "dim " + std::to_string(dim) + " not in [1, " +
                                   std::to_string(min_dim) + "]");
  }

  const Eigen::Index block = std::min<Eigen::Index>(dim + kSvdOversampling, min_dim);

  Rng rng(seed);
  Eigen::MatrixXd omega = gaussian_matrix(cols, block, rng);

  // Block Krylov range finder: keep the basis of every power-iteration
  // block, not just the last one. At small sizes the accumulated space
  // covers the full range, which makes the factors match a dense SVD to
  // machine precision.
  Eigen::MatrixXd krylov(rows, block * (kSvdPowerIterations + 1));
  Eigen::MatrixXd q = thin_q(sparse_mul(m, omega));
  krylov.leftCols(block) = q;
  for (int it = 1; it <= kSvdPowerIterations; ++it) {
    Eigen::MatrixXd z = thin_q(sparse_mul_t(m, q));
    q = thin_q(sparse_mul(m, z));
    krylov.middleCols(block * it, block) = q;
  }
  Eigen::MatrixXd basis = thin_q(krylov);  // rows x min(rows, block*(q+1))

  // Project and decompose the small matrix B = basis^T M (basis_cols x cols).
  Eigen::MatrixXd b = sparse_mul_t(m, basis).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);

  SvdFactors f;
  f.u = basis * svd.matrixU().leftCols(dim);
  f.sigma = svd.singularValues().head(dim);
  f.v = svd.matrixV().leftCols(dim);

  // Sign convention: largest-magnitude entry of each V column nonnegative.
  for (Eigen::Index k = 0; k < dim; ++k) {
    Eigen::Index at = 0;
    f.v.col(k).cwiseAbs().maxCoeff(&at);
    if (f.v(at, k) < 0.0) {
      f.v.col(k) = -f.v.col(k);
      f.u.col(k) = -f.u.col(k);
    }
  }
  return f;
}

std::string_view scaling_name(Scaling s) {
  return s == Scaling::sigma ? "sigma" : "none";
}

std::optional<Scaling> scaling_from_name(std::string_view name) {
  if (name == "sigma") return Scaling::sigma;
  if (name == "none") return Scaling::none;
  return std::nullopt;
}

void EmbeddingModel::rebuild_indexes() {
  vocab_index.clear();
  for (std::size_t i = 0; i < vocab.size(); ++i) vocab_index[vocab[i]] = i;
  repo_key_index.clear();
  for (std::size_t i = 0; i < repo_keys.size(); ++i) repo_key_index[repo_keys[i]] = i;
}

std::optional<std::size_t> EmbeddingModel::library_index(const std::string& name) const {
  auto it = vocab_index.find(name);
  if (it == vocab_index.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> EmbeddingModel::repo_index(const RepoYear& key) const {
  auto it = repo_key_index.find(key);
  if (it == repo_key_index.end()) return std::nullopt;
  return it->second;
}

EmbeddingModel build_model(const Corpus& corpus, int dim, Scaling scaling,
                           std::uint64_t seed) {
  if (corpus.empty()) fail(Errc::empty_corpus, "cannot build model");

  CooccurrenceMatrix m = build_matrix(corpus);
  SvdFactors f = truncated_svd(m, dim, seed);

  EmbeddingModel model;
  model.dim = dim;
  model.scaling = scaling;
  model.seed = seed;
  model.singular_values = f.sigma;
  model.vocab = m.cols;
  model.repo_keys = m.rows;
  model.right_factors = f.v;

  if (scaling == Scaling::sigma) {
    model.library_vectors = f.v * f.sigma.asDiagonal();
    model.repo_vectors = f.u * f.sigma.asDiagonal();
  } else {
    model.library_vectors = f.v;
    model.repo_vectors = f.u;
  }
  model.idf = idf_table(corpus);
  model.rebuild_indexes();
  return model;
}

Eigen::VectorXd rle_vector(const std::set<std::string>& deps,
                           const EmbeddingModel& model,
                           std::vector<std::string>* ignored) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(model.dim);
  int known = 0;
  for (const std::string& dep : deps) {
    if (auto idx = model.library_index(dep)) {
      sum += model.library_vectors.row(static_cast<Eigen::Index>(*idx));
      ++known;
    } else if (ignored) {
      ignored->push_back(dep);
    }
  }
  if (known == 0) {
    fail(Errc::unknown_libraries, "no query dependency is in the vocabulary");
  }
  return sum / static_cast<double>(known);
}

Eigen::VectorXd dre_vector(const std::set<std::string>& deps,
                           const EmbeddingModel& model,
                           std::vector<std::string>* ignored) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(model.dim);
  int known = 0;
  for (const std::string& dep : deps) {
    if (auto idx = model.library_index(dep)) {
      sum += model.right_factors.row(static_cast<Eigen::Index>(*idx));
      ++known;
    } else if (ignored) {
      ignored->push_back(dep);
    }
  }
  if (known == 0) {
    fail(Errc::unknown_libraries, "no query dependency is in the vocabulary");
  }
  return sum;
}

double cosine_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) fail(Errc::zero_vector, "cosine distance of zero vector");
  const double d = 1.0 - x.dot(y) / (nx * ny);
  return std::clamp(d, 0.0, 2.0);
}

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json row_to_json(const Eigen::MatrixXd& m, Eigen::Index row) {
  json a = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(m(row, j));
  return a;
}

std::string repo_key_string(const RepoYear& key) {
  return key.repo + "@" + std::to_string(key.year);
}

constexpr int kModelVersion = 1;

}  // namespace

void save_model(const EmbeddingModel& model, const std::filesystem::path& path) {
  json doc;
  doc["version"] = kModelVersion;
  doc["dim"] = model.dim;
  doc["scaling"] = std::string(scaling_name(model.scaling));
  doc["seed"] = model.seed;
  doc["singular_values"] = vector_to_json(model.singular_values);
  doc["vocab"] = model.vocab;

  json libs = json::object();
  for (std::size_t i = 0; i < model.vocab.size(); ++i) {
    libs[model.vocab[i]] = row_to_json(model.library_vectors, static_cast<Eigen::Index>(i));
  }
  doc["libraries"] = std::move(libs);

  json repos = json::object();
  for (std::size_t i = 0; i < model.repo_keys.size(); ++i) {
    repos[repo_key_string(model.repo_keys[i])] =
        row_to_json(model.repo_vectors, static_cast<Eigen::Index>(i));
  }
  doc["repos"] = std::move(repos);

  json idf = json::object();
  for (const std::string& name : model.vocab) {
    const IdfEntry* e = model.idf.lookup(name);
    idf[name] = json{{"df", e ? e->df : 0}, {"idf", e ? e->idf : 0.0}};
  }
  doc["idf"] = json{{"n_snapshots", model.idf.n_snapshots}, {"entries", std::move(idf)}};

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::malformed_model, "cannot write " + path.string());
  out << doc.dump() << '\n';
}

EmbeddingModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::malformed_model, "cannot open " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    fail(Errc::malformed_model, path.string() + " is not a JSON object");
  }
  if (!doc.contains("version") || !doc["version"].is_number_integer()) {
    fail(Errc::malformed_model, "missing version");
  }
  if (doc["version"].get<int>() != kModelVersion) {
    fail(Errc::version_mismatch,
         "model version " + doc["version"].dump() + ", expected " +
             std::to_string(kModelVersion));
  }

  EmbeddingModel model;
  try {
    model.dim = doc.at("dim").get<int>();
    auto scaling = scaling_from_name(doc.at("scaling").get<std::string>());
    if (!scaling) fail(Errc::malformed_model, "unknown scaling");
    model.scaling = *scaling;
    model.seed = doc.at("seed").get<std::uint64_t>();

    const json& sv = doc.at("singular_values");
    model.singular_values.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t i = 0; i < sv.size(); ++i) {
      model.singular_values(static_cast<Eigen::Index>(i)) = sv.at(i).get<double>();
    }

    model.vocab = doc.at("vocab").get<std::vector<std::string>>();

    const json& libs = doc.at("libraries");
    model.library_vectors.resize(static_cast<Eigen::Index>(model.vocab.size()), model.dim);
    for (std::size_t i = 0; i < model.vocab.size(); ++i) {
      const json& row = libs.at(model.vocab[i]);
      if (row.size() != static_cast<std::size_t>(model.dim)) {
        fail(Errc::malformed_model, "library vector size mismatch: " + model.vocab[i]);
      }
      for (int j = 0; j < model.dim; ++j) {
        model.library_vectors(static_cast<Eigen::Index>(i), j) = row.at(j).get<double>();
      }
    }

    // Object iteration is lexicographic in "repo@year"; restore (repo, year)
    // order so loaded models match freshly built ones row-for-row.
    const json& repos = doc.at("repos");
    std::vector<std::pair<RepoYear, const json*>> rows;
    rows.reserve(repos.size());
    for (const auto& [key, row] : repos.items()) {
      std::size_t at = key.rfind('@');
      int year = 0;
      if (at != std::string::npos && at > 0) {
        const char* first = key.data() + at + 1;
        auto [ptr, ec] = std::from_chars(first, key.data() + key.size(), year);
        if (ec != std::errc() || ptr != key.data() + key.size()) at = std::string::npos;
      }
      if (at == std::string::npos || at == 0) {
        fail(Errc::malformed_model, "bad repo key: " + key);
      }
      if (row.size() != static_cast<std::size_t>(model.dim)) {
        fail(Errc::malformed_model, "repo vector size mismatch: " + key);
      }
      rows.emplace_back(RepoYear{key.substr(0, at), year}, &row);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    model.repo_keys.reserve(rows.size());
    model.repo_vectors.resize(static_cast<Eigen::Index>(rows.size()), model.dim);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      model.repo_keys.push_back(rows[i].first);
      for (int j = 0; j < model.dim; ++j) {
        model.repo_vectors(static_cast<Eigen::Index>(i), j) = rows[i].second->at(j).get<double>();
      }
    }

    const json& idf = doc.at("idf");
    model.idf.year = std::nullopt;
    model.idf.n_snapshots = idf.at("n_snapshots").get<std::size_t>();
    for (const auto& [name, entry] : idf.at("entries").items()) {
      model.idf.entries[name] = {entry.at("df").get<std::uint32_t>(),
                                 entry.at("idf").get<double>()};
    }
  } catch (const json::exception& e) {
    fail(Errc::malformed_model, path.string() + ": " + e.what());
  }

  // Recover the raw right factors used for fold-in. Components whose
  // singular value vanished carry no information; leave them zero.
  model.right_factors = model.library_vectors;
  if (model.scaling == Scaling::sigma) {
    for (int j = 0; j < model.dim; ++j) {
      const double s = model.singular_values(j);
      if (s > 0.0) {
        model.right_factors.col(j) /= s;
      } else {
        model.right_factors.col(j).setZero();
      }
    }
  }
  model.rebuild_indexes();
  return model;
}

}  // namespace depembed
