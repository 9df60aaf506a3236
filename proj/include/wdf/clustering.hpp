#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wdf/repr.hpp"
#include "wdf/rng.hpp"
#include "wdf/series.hpp"

// K-Means over meter embeddings with silhouette-driven choice of k, plus the
// per-cluster demand aggregation the forecaster consumes.
namespace wdf::clustering {

using data::DemandSeries;
using data::MeterSeries;
using Matrix = std::vector<std::vector<double>>;

struct ClusterResult {
    int k = 0;
    std::map<std::string, int> assignment;  // meter_id -> dense index in [0, k)
    Matrix centroids;                       // k rows
    double silhouette = 0.0;                // 0.0 for the degenerate k=1 result
    std::uint64_t seed = 0;
};

namespace detail {

// One Lloyd descent from the given initial centroids. The per-iteration trace
// records the cost after each centroid update and is non-increasing.
struct LloydRun {
    std::vector<int> labels;
    Matrix centroids;
    double wcss = 0.0;
    std::vector<double> wcss_per_iteration;
};

Matrix kmeanspp_init(const Matrix& x, int k, Rng& rng);
LloydRun lloyd(const Matrix& x, Matrix centroids, int max_iterations = 300);

}  // namespace detail

// Best of `restarts` k-means++/Lloyd runs (lowest within-cluster sum of
// squares; ties keep the earliest restart). Meter ids must be unique.
ClusterResult kmeans(const std::vector<repr::MeterEmbedding>& embeddings, int k,
                     std::uint64_t seed, int restarts = 10);

// Mean silhouette over points, Euclidean metric; singleton clusters
// contribute 0. Throws UndefinedMetricError when only one cluster exists.
double silhouette(const Matrix& x, const std::vector<int>& labels);

// Runs kmeans for k = 2..k_max and keeps the highest silhouette, ties toward
// smaller k. When every embedding sits within 1e-6 of the mean the DMA is
// degenerate and a single-cluster result is returned instead.
ClusterResult select_k(const std::vector<repr::MeterEmbedding>& embeddings, std::uint64_t seed,
                       int k_max = 4);

// Element-wise sum of each cluster's member meters, labeled cluster0..k-1.
// Every meter must be assigned and every cluster must have a member.
std::vector<DemandSeries> cluster_demands(const ClusterResult& result,
                                          const std::vector<MeterSeries>& meters);

// Agreement between two labelings of the same points, chance-corrected:
// 1 for identical partitions (up to label names), ~0 for independent ones.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

void write_assignment_csv(const std::string& path, const ClusterResult& result);
std::map<std::string, int> load_assignment_csv(const std::string& path);

}  // namespace wdf::clustering
