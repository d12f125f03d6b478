#include "depembed/cluster.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include "depembed/embed.hpp"
#include "depembed/error.hpp"
#include "depembed/format.hpp"
#include "depembed/rng.hpp"

namespace depembed {

namespace {

double squared_distance(const Eigen::MatrixXd& a, Eigen::Index i,
                        const Eigen::MatrixXd& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

// k-means++: first center uniform, then D^2-weighted picks.
std::vector<Eigen::Index> plus_plus_init(const Eigen::MatrixXd& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  std::vector<Eigen::Index> centers;
  centers.reserve(k);
  centers.push_back(static_cast<Eigen::Index>(rng.index(n)));

  Eigen::VectorXd dist2 = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) {
      dist2(i) = std::min(dist2(i), squared_distance(x, i, x, centers.back()));
    }
    const double total = dist2.sum();
    Eigen::Index pick;
    if (total <= 0.0) {
      pick = static_cast<Eigen::Index>(rng.index(n));
    } else {
      double r = rng.uniform() * total;
      pick = n - 1;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += dist2(i);
        if (r < acc) {
          pick = i;
          break;
        }
      }
    }
    centers.push_back(pick);
  }
  return centers;
}

double partition_inertia(const Eigen::MatrixXd& x, const std::vector<int>& assignment,
                         const Eigen::MatrixXd& centroids) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    total += squared_distance(x, i, centroids, assignment[i]);
  }
  return total;
}

}  // namespace

ClusterPartition kmeans(const Eigen::MatrixXd& vectors, int k, std::uint64_t seed,
                        int max_iter, double tol, std::vector<double>* inertia_trace) {
  const Eigen::Index n = vectors.rows();
  if (k < 1 || n < k) {
    fail(Errc::too_few_points,
         std::to_string(n) + " points for k=" + std::to_string(k));
  }

  Rng rng(seed);
  Eigen::MatrixXd centroids(k, vectors.cols());
  {
    std::vector<Eigen::Index> init = plus_plus_init(vectors, k, rng);
    for (int c = 0; c < k; ++c) centroids.row(c) = vectors.row(init[c]);
  }

  std::vector<int> assignment(n, 0);
  std::vector<Eigen::Index> counts(k, 0);

  for (int iter = 0; iter < max_iter; ++iter) {
    // Assignment step; ties go to the lower cluster id.
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(vectors, i, centroids, 0);
      for (int c = 1; c < k; ++c) {
        double d = squared_distance(vectors, i, centroids, c);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      assignment[i] = best;
      ++counts[best];
    }

    // Repair empty clusters from the globally farthest point.
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      Eigen::Index farthest = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (counts[assignment[i]] <= 1) continue;  // keep singletons alive
        double d = squared_distance(vectors, i, centroids, assignment[i]);
        if (d > far_d) {
          far_d = d;
          farthest = i;
        }
      }
      if (farthest < 0) continue;  // all clusters are singletons already
      --counts[assignment[farthest]];
      assignment[farthest] = c;
      ++counts[c];
      centroids.row(c) = vectors.row(farthest);
    }

    // Update step.
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, vectors.cols());
    for (Eigen::Index i = 0; i < n; ++i) next.row(assignment[i]) += vectors.row(i);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) next.row(c) /= static_cast<double>(counts[c]);
      else next.row(c) = centroids.row(c);
    }

    double shift = 0.0;
    for (int c = 0; c < k; ++c) {
      shift = std::max(shift, (next.row(c) - centroids.row(c)).norm());
    }
    centroids = std::move(next);
    if (inertia_trace) {
      inertia_trace->push_back(partition_inertia(vectors, assignment, centroids));
    }
    if (shift < tol) break;
  }

  // Final assignment against the settled centroids, then make centroids the
  // exact means of their members.
  std::fill(counts.begin(), counts.end(), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = 0;
    double best_d = squared_distance(vectors, i, centroids, 0);
    for (int c = 1; c < k; ++c) {
      double d = squared_distance(vectors, i, centroids, c);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    assignment[i] = best;
    ++counts[best];
  }
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, vectors.cols());
  for (Eigen::Index i = 0; i < n; ++i) means.row(assignment[i]) += vectors.row(i);
  for (int c = 0; c < k; ++c) {
    if (counts[c] > 0) means.row(c) /= static_cast<double>(counts[c]);
    else means.row(c) = centroids.row(c);
  }

  ClusterPartition part;
  part.k = k;
  part.assignment = std::move(assignment);
  part.centroids = std::move(means);
  part.inertia = partition_inertia(vectors, part.assignment, part.centroids);
  return part;
}

namespace {

GapEntry gap_entry_for_k(const Eigen::MatrixXd& vectors, int k, int n_refs,
                         std::uint64_t seed) {
  ClusterPartition part = kmeans(vectors, k, seed);

  GapEntry entry;
  entry.k = k;
  entry.w = part.inertia;

  Rng rng(mix_seed(seed, 0x5eedu));
  std::vector<int> labels = part.assignment;
  double sum = 0.0;
  double sumsq = 0.0;
  for (int r = 0; r < n_refs; ++r) {
    // Fisher-Yates; preserves the multiset of labels, hence cluster sizes.
    for (std::size_t i = labels.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(rng.index(i));
      std::swap(labels[i - 1], labels[j]);
    }
    Eigen::MatrixXd means = Eigen::MatrixXd::Zero(k, vectors.cols());
    std::vector<Eigen::Index> counts(k, 0);
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      means.row(labels[i]) += vectors.row(i);
      ++counts[labels[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) means.row(c) /= static_cast<double>(counts[c]);
    }
    double w = partition_inertia(vectors, labels, means);
    sum += w;
    sumsq += w * w;
  }
  entry.w_ref_mean = sum / n_refs;
  entry.w_ref_std = std::sqrt(std::max(0.0, sumsq / n_refs - entry.w_ref_mean * entry.w_ref_mean));
  entry.gap = entry.w_ref_mean - entry.w;
  return entry;
}

}  // namespace

GapCurve gap_curve(const Eigen::MatrixXd& vectors, int k_min, int k_max,
                   int n_refs, std::uint64_t seed, int threads) {
  if (n_refs < 1) fail(Errc::invalid_refs, "n_refs must be positive");
  if (k_min < 1 || k_max < k_min) {
    fail(Errc::too_few_points, "invalid k range");
  }
  if (vectors.rows() < k_max) {
    fail(Errc::too_few_points, "k range exceeds number of points");
  }

  const int n_k = k_max - k_min + 1;
  GapCurve curve;
  curve.entries.resize(n_k);

  // Per-k work is independent; seeds are derived up front so the result is
  // identical for any thread count.
  if (threads <= 1) {
    for (int i = 0; i < n_k; ++i) {
      int k = k_min + i;
      curve.entries[i] = gap_entry_for_k(vectors, k, n_refs, mix_seed(seed, k));
    }
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (int i = next.fetch_add(1); i < n_k; i = next.fetch_add(1)) {
        int k = k_min + i;
        curve.entries[i] = gap_entry_for_k(vectors, k, n_refs, mix_seed(seed, k));
      }
    };
    std::vector<std::future<void>> futures;
    for (int t = 0; t < threads; ++t) {
      futures.push_back(std::async(std::launch::async, worker));
    }
    for (auto& f : futures) f.get();
  }
  return curve;
}

KSelection select_k(const GapCurve& curve, double epsilon, int window) {
  const auto& e = curve.entries;
  if (e.empty()) fail(Errc::too_few_points, "empty gap curve");
  if (e.size() == 1) return {e.front().k, false};

  std::vector<double> gain(e.size(), 0.0);  // gain[i] = gap[i] - gap[i-1]
  double max_gain = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < e.size(); ++i) {
    gain[i] = e[i].gap - e[i - 1].gap;
    max_gain = std::max(max_gain, gain[i]);
  }
  if (max_gain <= 0.0) return {e.back().k, false};

  const double threshold = epsilon * max_gain;
  for (std::size_t i = 0; i + window < e.size(); ++i) {
    bool flat = true;
    for (int w = 1; w <= window; ++w) {
      if (gain[i + w] >= threshold) {
        flat = false;
        break;
      }
    }
    if (flat) return {e[i].k, true};
  }
  return {e.back().k, false};
}

Dendrogram agglomerate(const Eigen::MatrixXd& items) {
  const int n = static_cast<int>(items.rows());
  if (n < 2) fail(Errc::too_few_items, "need at least 2 items");

  // Distances between active nodes, indexed by node id. Lance-Williams
  // update for average linkage keeps D(x, y) equal to the mean pairwise
  // cosine distance between the leaves under x and y.
  const int total = 2 * n - 1;
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(total, total);
  std::vector<int> size(total, 0);
  std::vector<int> ids;

  for (int i = 0; i < n; ++i) {
    size[i] = 1;
    ids.push_back(i);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double d = cosine_distance(items.row(i).transpose(), items.row(j).transpose());
      dist(i, j) = dist(j, i) = d;
    }
  }

  Dendrogram tree;
  tree.leaves = n;
  for (int step = 0; step < n - 1; ++step) {
    int best_a = -1;
    int best_b = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < ids.size(); ++x) {
      for (std::size_t y = x + 1; y < ids.size(); ++y) {
        int a = ids[x];
        int b = ids[y];
        double d = dist(a, b);
        if (d < best_d) {
          best_d = d;
          best_a = a;
          best_b = b;
        }
      }
    }

    const int merged = n + step;
    for (int other : ids) {
      if (other == best_a || other == best_b) continue;
      double d = (size[best_a] * dist(best_a, other) + size[best_b] * dist(best_b, other)) /
                 static_cast<double>(size[best_a] + size[best_b]);
      dist(merged, other) = dist(other, merged) = d;
    }
    size[merged] = size[best_a] + size[best_b];
    std::erase(ids, best_a);
    std::erase(ids, best_b);
    ids.push_back(merged);
    std::sort(ids.begin(), ids.end());

    tree.merges.push_back({best_a, best_b, best_d, merged});
  }
  return tree;
}

namespace {

struct NewickNode {
  double height = 0.0;
  int child_a = -1;
  int child_b = -1;
};

void write_newick(std::string& out, const std::vector<NewickNode>& nodes, int id,
                  double parent_height) {
  const NewickNode& node = nodes[id];
  if (node.child_a < 0) {
    out += std::to_string(id);
  } else {
    out += '(';
    write_newick(out, nodes, node.child_a, node.height);
    out += ',';
    write_newick(out, nodes, node.child_b, node.height);
    out += ')';
  }
  out += ':';
  out += fmt_double(parent_height - node.height);
}

}  // namespace

std::string to_newick(const Dendrogram& tree) {
  const int total = tree.leaves + static_cast<int>(tree.merges.size());
  std::vector<NewickNode> nodes(total);
  for (const Merge& m : tree.merges) {
    nodes[m.id] = {m.height, m.a, m.b};
  }
  const int root = total - 1;
  std::string out;
  out += '(';
  write_newick(out, nodes, nodes[root].child_a, nodes[root].height);
  out += ',';
  write_newick(out, nodes, nodes[root].child_b, nodes[root].height);
  out += ");";
  return out;
}

Eigen::MatrixXd l2_normalized_rows(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    double norm = out.row(i).norm();
    if (norm > 0.0) out.row(i) /= norm;
  }
  return out;
}

}  // namespace depembed
