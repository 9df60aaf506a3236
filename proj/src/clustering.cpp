#include "wdf/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "wdf/data_ops.hpp"
#include "wdf/errors.hpp"
#include "wdf/log.hpp"

namespace wdf::clustering {

namespace {

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double total_cost(const Matrix& x, const std::vector<int>& labels, const Matrix& centroids) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += dist2(x[i], centroids[labels[i]]);
    return s;
}

void check_matrix(const Matrix& x) {
    if (x.empty()) throw InvalidArgumentError("clustering: empty point set");
    for (const auto& row : x) {
        if (row.size() != x[0].size() || row.empty()) {
            throw InvalidArgumentError("clustering: ragged point rows");
        }
    }
}

Matrix embedding_matrix(const std::vector<repr::MeterEmbedding>& embeddings) {
    Matrix x;
    x.reserve(embeddings.size());
    std::set<std::string> ids;
    for (const auto& e : embeddings) {
        if (!ids.insert(e.meter_id).second) {
            throw InvalidArgumentError("clustering: duplicate meter id " + e.meter_id);
        }
        x.push_back(e.vec);
    }
    check_matrix(x);
    return x;
}

}  // namespace

namespace detail {

Matrix kmeanspp_init(const Matrix& x, int k, Rng& rng) {
    const std::size_t n = x.size();
    Matrix centroids;
    centroids.reserve(k);
    centroids.push_back(x[rng.below(n)]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = dist2(x[i], centroids[0]);
    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (double v : d2) total += v;
        std::size_t pick;
        if (total <= 0.0) {
            pick = rng.below(n);  // all remaining mass at the chosen centroids
        } else {
            const double r = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.push_back(x[pick]);
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], dist2(x[i], centroids.back()));
        }
    }
    return centroids;
}

LloydRun lloyd(const Matrix& x, Matrix centroids, int max_iterations) {
    const std::size_t n = x.size();
    const int k = static_cast<int>(centroids.size());
    const std::size_t dim = x[0].size();
    LloydRun run;
    run.labels.assign(n, -1);

    for (int iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        std::vector<int> count(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = dist2(x[i], centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = dist2(x[i], centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (run.labels[i] != best) {
                run.labels[i] = best;
                changed = true;
            }
            ++count[run.labels[i]];
        }

        // Re-home the point farthest from its centroid into any empty cluster
        // so indices stay dense.
        for (int c = 0; c < k; ++c) {
            if (count[c] > 0) continue;
            std::size_t donor = n;
            double worst = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (count[run.labels[i]] < 2) continue;
                const double d = dist2(x[i], centroids[run.labels[i]]);
                if (d > worst) {
                    worst = d;
                    donor = i;
                }
            }
            if (donor == n) throw InvalidArgumentError("kmeans: cannot fill empty cluster");
            --count[run.labels[donor]];
            run.labels[donor] = c;
            ++count[c];
            changed = true;
        }

        if (!changed) break;

        for (auto& row : centroids) std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < dim; ++d) centroids[run.labels[i]][d] += x[i][d];
        }
        for (int c = 0; c < k; ++c) {
            for (std::size_t d = 0; d < dim; ++d) centroids[c][d] /= count[c];
        }
        run.wcss_per_iteration.push_back(total_cost(x, run.labels, centroids));
    }

    run.centroids = std::move(centroids);
    run.wcss = total_cost(x, run.labels, run.centroids);
    return run;
}

}  // namespace detail

ClusterResult kmeans(const std::vector<repr::MeterEmbedding>& embeddings, int k,
                     std::uint64_t seed, int restarts) {
    if (k < 1) throw InvalidArgumentError("kmeans: k must be >= 1");
    if (restarts < 1) throw InvalidArgumentError("kmeans: need at least one restart");
    const Matrix x = embedding_matrix(embeddings);
    if (x.size() < static_cast<std::size_t>(k)) {
        throw InvalidArgumentError("kmeans: fewer points than clusters (n=" +
                                   std::to_string(x.size()) + ", k=" + std::to_string(k) + ")");
    }

    detail::LloydRun best;
    best.wcss = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(r)));
        auto run = detail::lloyd(x, detail::kmeanspp_init(x, k, rng));
        if (run.wcss < best.wcss) best = std::move(run);
    }

    ClusterResult result;
    result.k = k;
    result.centroids = std::move(best.centroids);
    result.seed = seed;
    for (std::size_t i = 0; i < embeddings.size(); ++i) {
        result.assignment[embeddings[i].meter_id] = best.labels[i];
    }
    result.silhouette = (k >= 2) ? silhouette(x, best.labels) : 0.0;
    return result;
}

double silhouette(const Matrix& x, const std::vector<int>& labels) {
    check_matrix(x);
    const std::size_t n = x.size();
    if (labels.size() != n) throw InvalidArgumentError("silhouette: labels/points mismatch");
    int k = 0;
    for (int l : labels) {
        if (l < 0) throw InvalidArgumentError("silhouette: negative cluster index");
        k = std::max(k, l + 1);
    }
    std::vector<int> count(k, 0);
    for (int l : labels) ++count[l];
    for (int c = 0; c < k; ++c) {
        if (count[c] == 0) throw InvalidArgumentError("silhouette: empty cluster " +
                                                      std::to_string(c));
    }
    if (k < 2) throw UndefinedMetricError("silhouette is undefined for a single cluster");

    double total = 0.0;
    std::vector<double> mean_to(k);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(mean_to.begin(), mean_to.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            mean_to[labels[j]] += std::sqrt(dist2(x[i], x[j]));
        }
        if (count[labels[i]] < 2) continue;  // singleton contributes 0
        const double a = mean_to[labels[i]] / (count[labels[i]] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c == labels[i]) continue;
            b = std::min(b, mean_to[c] / count[c]);
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

ClusterResult select_k(const std::vector<repr::MeterEmbedding>& embeddings, std::uint64_t seed,
                       int k_max) {
    if (k_max < 2) throw InvalidArgumentError("select_k: k_max must be >= 2");
    const Matrix x = embedding_matrix(embeddings);
    if (x.size() <= static_cast<std::size_t>(k_max)) {
        throw InvalidArgumentError("select_k: need more points than k_max");
    }

    // Degenerate DMA guard: all embeddings effectively one point.
    std::vector<double> mean(x[0].size(), 0.0);
    for (const auto& row : x) {
        for (std::size_t d = 0; d < row.size(); ++d) mean[d] += row[d];
    }
    for (auto& v : mean) v /= static_cast<double>(x.size());
    double spread = 0.0;
    for (const auto& row : x) spread = std::max(spread, std::sqrt(dist2(row, mean)));
    if (spread <= 1e-6) {
        log::info("select_k: embeddings collapsed (spread " + std::to_string(spread) +
                  "), reporting a single cluster");
        ClusterResult flat;
        flat.k = 1;
        flat.centroids = {mean};
        flat.seed = seed;
        for (const auto& e : embeddings) flat.assignment[e.meter_id] = 0;
        return flat;
    }

    ClusterResult best;
    bool have = false;
    for (int k = 2; k <= k_max; ++k) {
        ClusterResult candidate = kmeans(embeddings, k, seed);
        log::info("select_k: k=" + std::to_string(k) +
                  " silhouette=" + std::to_string(candidate.silhouette));
        if (!have || candidate.silhouette > best.silhouette) {
            best = std::move(candidate);
            have = true;
        }
    }
    log::info("select_k: chose k=" + std::to_string(best.k));
    return best;
}

std::vector<DemandSeries> cluster_demands(const ClusterResult& result,
                                          const std::vector<MeterSeries>& meters) {
    if (result.k < 1) throw InvalidArgumentError("cluster_demands: empty clustering");
    std::vector<std::vector<MeterSeries>> members(result.k);
    for (const auto& m : meters) {
        auto it = result.assignment.find(m.meter_id);
        if (it == result.assignment.end()) {
            throw InvalidArgumentError("cluster_demands: meter " + m.meter_id +
                                       " has no cluster assignment");
        }
        if (it->second < 0 || it->second >= result.k) {
            throw InvalidArgumentError("cluster_demands: assignment of " + m.meter_id +
                                       " is out of range");
        }
        members[it->second].push_back(m);
    }
    std::vector<DemandSeries> out;
    out.reserve(result.k);
    for (int c = 0; c < result.k; ++c) {
        if (members[c].empty()) {
            throw InvalidArgumentError("cluster_demands: cluster " + std::to_string(c) +
                                       " has no meters");
        }
        out.push_back(data::aggregate_dma(members[c], "cluster" + std::to_string(c)));
    }
    return out;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw InvalidArgumentError("adjusted_rand_index: size mismatch");
    if (a.empty()) throw InvalidArgumentError("adjusted_rand_index: empty labelings");
    std::map<std::pair<int, int>, long long> cells;
    std::map<int, long long> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++cells[{a[i], b[i]}];
        ++rows[a[i]];
        ++cols[b[i]];
    }
    auto comb2 = [](long long v) { return 0.5 * static_cast<double>(v) * (v - 1); };
    double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& [key, v] : cells) sum_cells += comb2(v);
    for (const auto& [key, v] : rows) sum_rows += comb2(v);
    for (const auto& [key, v] : cols) sum_cols += comb2(v);
    const double total = comb2(static_cast<long long>(a.size()));
    const double expected = sum_rows * sum_cols / total;
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (std::abs(max_index - expected) < 1e-15) return 1.0;  // both partitions trivial
    return (sum_cells - expected) / (max_index - expected);
}

void write_assignment_csv(const std::string& path, const ClusterResult& result) {
    if (result.assignment.empty()) {
        throw InvalidArgumentError("write_assignment_csv: empty assignment");
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << "meter_id,cluster\n";
    for (const auto& [meter, cluster] : result.assignment) {
        out << meter << "," << cluster << "\n";
    }
    if (!out) throw ParseError("failed writing: " + path);
}

std::map<std::string, int> load_assignment_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "meter_id,cluster") {
        throw ParseError("expected header meter_id,cluster", 1);
    }
    std::map<std::string, int> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || comma == 0) {
            throw ParseError("expected meter_id,cluster row", line_no);
        }
        const std::string meter = line.substr(0, comma);
        const std::string rest = line.substr(comma + 1);
        char* end = nullptr;
        const long cluster = std::strtol(rest.c_str(), &end, 10);
        if (end == rest.c_str() || *end != '\0' || cluster < 0) {
            throw ParseError("bad cluster index '" + rest + "'", line_no);
        }
        if (!out.emplace(meter, static_cast<int>(cluster)).second) {
            throw ParseError("duplicate meter " + meter, line_no);
        }
    }
    if (out.empty()) throw ParseError("assignment file has no rows: " + path);
    return out;
}

}  // namespace wdf::clustering
