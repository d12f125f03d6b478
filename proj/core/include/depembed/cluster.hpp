#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace depembed {

struct ClusterPartition {
  int k = 0;
  std::vector<int> assignment;  // per input row, values in [0, k)
  Eigen::MatrixXd centroids;    // k x d, mean of assigned rows
  double inertia = 0.0;         // sum of squared distances to own centroid
};

// Lloyd's algorithm with k-means++ seeding. Empty clusters are repaired by
// reseeding from the point farthest from its centroid. Deterministic given
// seed. `inertia_trace`, when given, records the objective after every
// update step (it is nonincreasing).
ClusterPartition kmeans(const Eigen::MatrixXd& vectors, int k, std::uint64_t seed,
                        int max_iter = 300, double tol = 1e-4,
                        std::vector<double>* inertia_trace = nullptr);

struct GapEntry {
  int k = 0;
  double w = 0.0;           // fitted intra-cluster distance
  double w_ref_mean = 0.0;  // mean over reference clusterings
  double w_ref_std = 0.0;
  double gap = 0.0;         // w_ref_mean - w
};

struct GapCurve {
  std::vector<GapEntry> entries;  // ascending k
};

// For each k, the reference clusterings permute the fitted assignment
// labels over the same points (preserving cluster sizes) and remeasure the
// intra-cluster distance against the permuted groups' means.
GapCurve gap_curve(const Eigen::MatrixXd& vectors, int k_min = 2, int k_max = 64,
                   int n_refs = 10, std::uint64_t seed = 0, int threads = 1);

struct KSelection {
  int k = 0;
  bool saturated = false;  // false: no window of small gains found
};

// Smallest k after which `window` consecutive marginal gap gains all fall
// below epsilon times the largest marginal gain of the curve.
KSelection select_k(const GapCurve& curve, double epsilon = 0.02, int window = 3);

struct Merge {
  int a = 0;
  int b = 0;  // a < b; leaves are 0..n-1, merged nodes n, n+1, ...
  double height = 0.0;
  int id = 0;
};

struct Dendrogram {
  int leaves = 0;
  std::vector<Merge> merges;  // n-1 merges, heights nondecreasing
};

// Bottom-up agglomeration with cosine distance and average linkage (mean
// pairwise distance between member leaves). Ties pick the smallest (a, b).
Dendrogram agglomerate(const Eigen::MatrixXd& items);

// Newick text with branch lengths; leaves are named by their row index.
std::string to_newick(const Dendrogram& tree);

Eigen::MatrixXd l2_normalized_rows(const Eigen::MatrixXd& m);

}  // namespace depembed
