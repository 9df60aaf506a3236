#include "wdf/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>

#include "wdf/data_ops.hpp"
#include "wdf/errors.hpp"
#include "wdf/rng.hpp"
#include "wdf/synth.hpp"

using namespace wdf;
using clustering::Matrix;
using data::aggregate_dma;
using data::MeterSeries;

namespace {

std::string temp_path(const std::string& stem) {
    static int counter = 0;
    return (std::filesystem::temp_directory_path() /
            (stem + "-" + std::to_string(++counter) + ".csv"))
        .string();
}

// Gaussian blob around a center, one embedding per point.
std::vector<repr::MeterEmbedding> blob(const std::string& prefix, const std::vector<double>& center,
                                       double std_dev, int count, Rng& rng) {
    std::vector<repr::MeterEmbedding> out;
    for (int i = 0; i < count; ++i) {
        repr::MeterEmbedding e;
        e.meter_id = prefix + std::to_string(i);
        for (double c : center) e.vec.push_back(c + rng.normal(0.0, std_dev));
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<double> axis_center(int dim, int axis, double value) {
    std::vector<double> c(dim, 0.0);
    c[axis] = value;
    return c;
}

Matrix matrix_of(const std::vector<repr::MeterEmbedding>& embeddings) {
    Matrix x;
    for (const auto& e : embeddings) x.push_back(e.vec);
    return x;
}

double wcss_of(const std::vector<repr::MeterEmbedding>& embeddings,
               const clustering::ClusterResult& result) {
    double s = 0.0;
    for (const auto& e : embeddings) {
        const auto& c = result.centroids[result.assignment.at(e.meter_id)];
        for (std::size_t d = 0; d < e.vec.size(); ++d) {
            s += (e.vec[d] - c[d]) * (e.vec[d] - c[d]);
        }
    }
    return s;
}

MeterSeries make_meter(const std::string& id, std::vector<double> values) {
    return MeterSeries{id, 0, std::move(values)};
}

}  // namespace

TEST_CASE("kmeans with one cluster returns the column mean") {
    Rng rng(1);
    auto points = blob("p", {0.0, 0.0, 0.0}, 2.0, 10, rng);
    const auto result = clustering::kmeans(points, 1, 7);

    CHECK(result.k == 1);
    CHECK(result.silhouette == 0.0);
    CHECK(result.seed == 7);
    REQUIRE(result.centroids.size() == 1);
    for (const auto& [meter, cluster] : result.assignment) CHECK(cluster == 0);

    for (int d = 0; d < 3; ++d) {
        double mean = 0.0;
        for (const auto& p : points) mean += p.vec[d];
        mean /= 10.0;
        CHECK(result.centroids[0][d] == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("kmeans separates two distant clouds exactly") {
    Rng rng(2);
    // separation 20, spread 2 -> 10x
    auto a = blob("a", axis_center(5, 0, 0.0), 2.0, 15, rng);
    auto b = blob("b", axis_center(5, 0, 20.0), 2.0, 15, rng);
    std::vector<repr::MeterEmbedding> all = a;
    all.insert(all.end(), b.begin(), b.end());

    const auto result = clustering::kmeans(all, 2, 3);
    REQUIRE(result.k == 2);
    const int label_a = result.assignment.at("a0");
    const int label_b = result.assignment.at("b0");
    CHECK(label_a != label_b);
    for (int i = 0; i < 15; ++i) {
        CHECK(result.assignment.at("a" + std::to_string(i)) == label_a);
        CHECK(result.assignment.at("b" + std::to_string(i)) == label_b);
    }
    CHECK(result.silhouette > 0.5);
}

TEST_CASE("kmeans beats random assignments on within-cluster scatter") {
    Rng rng(3);
    std::vector<repr::MeterEmbedding> points;
    for (int i = 0; i < 15; ++i) {
        points.push_back({"p" + std::to_string(i), {rng.uniform(0, 10), rng.uniform(0, 10)}});
    }
    const auto result = clustering::kmeans(points, 3, 11);
    const double fitted = wcss_of(points, result);

    const Matrix x = matrix_of(points);
    Rng lab_rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<int> labels(15);
        for (auto& l : labels) l = static_cast<int>(lab_rng.below(3));
        // centroids of this random assignment
        Matrix cent(3, std::vector<double>(2, 0.0));
        std::vector<int> count(3, 0);
        for (int i = 0; i < 15; ++i) {
            ++count[labels[i]];
            for (int d = 0; d < 2; ++d) cent[labels[i]][d] += x[i][d];
        }
        for (int c = 0; c < 3; ++c) {
            if (count[c] == 0) continue;
            for (int d = 0; d < 2; ++d) cent[c][d] /= count[c];
        }
        double random_wcss = 0.0;
        for (int i = 0; i < 15; ++i) {
            for (int d = 0; d < 2; ++d) {
                random_wcss += (x[i][d] - cent[labels[i]][d]) * (x[i][d] - cent[labels[i]][d]);
            }
        }
        CHECK(fitted <= random_wcss + 1e-12);
    }
}

TEST_CASE("kmeans validates its inputs") {
    Rng rng(5);
    auto points = blob("p", {0.0, 0.0}, 1.0, 4, rng);
    CHECK_THROWS_AS(clustering::kmeans(points, 5, 1), InvalidArgumentError);  // n < k
    CHECK_THROWS_AS(clustering::kmeans(points, 0, 1), InvalidArgumentError);
    CHECK_THROWS_AS(clustering::kmeans(points, 2, 1, 0), InvalidArgumentError);
    CHECK_THROWS_AS(clustering::kmeans({}, 1, 1), InvalidArgumentError);

    auto dupes = points;
    dupes[1].meter_id = dupes[0].meter_id;
    CHECK_THROWS_AS(clustering::kmeans(dupes, 2, 1), InvalidArgumentError);

    auto ragged = points;
    ragged[2].vec.push_back(0.5);
    CHECK_THROWS_AS(clustering::kmeans(ragged, 2, 1), InvalidArgumentError);
}

TEST_CASE("lloyd iterations never increase the within-cluster scatter") {
    Rng rng(6);
    Matrix x;
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < 12; ++i) {
            x.push_back({c * 6.0 + rng.normal(0.0, 1.5), rng.normal(0.0, 1.5)});
        }
    }
    Rng init_rng(7);
    const auto run = clustering::detail::lloyd(x, clustering::detail::kmeanspp_init(x, 3, init_rng));
    REQUIRE(!run.wcss_per_iteration.empty());
    for (std::size_t i = 1; i < run.wcss_per_iteration.size(); ++i) {
        CHECK(run.wcss_per_iteration[i] <= run.wcss_per_iteration[i - 1] + 1e-12);
    }
    CHECK(run.wcss == doctest::Approx(run.wcss_per_iteration.back()).epsilon(1e-12));
}

TEST_CASE("silhouette matches the hand-evaluated two-pair geometry") {
    const Matrix x = {{0.0, 0.0}, {0.0, 1.0}, {10.0, 0.0}, {10.0, 1.0}};
    const std::vector<int> labels = {0, 0, 1, 1};
    // every point: a = 1 (its pair partner), b = (10 + sqrt(101)) / 2
    const double b = (10.0 + std::sqrt(101.0)) / 2.0;
    const double expected = (b - 1.0) / b;
    CHECK(clustering::silhouette(x, labels) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("silhouette grades tight separation high and fake splits low") {
    Rng rng(8);
    SUBCASE("two tight far clusters") {
        Matrix x;
        std::vector<int> labels;
        for (int i = 0; i < 15; ++i) {
            x.push_back({rng.normal(0.0, 0.1), rng.normal(0.0, 0.1)});
            labels.push_back(0);
            x.push_back({20.0 + rng.normal(0.0, 0.1), rng.normal(0.0, 0.1)});
            labels.push_back(1);
        }
        CHECK(clustering::silhouette(x, labels) > 0.9);
    }
    SUBCASE("a uniform ball split in half scores near zero") {
        Matrix x;
        std::vector<int> labels;
        for (int i = 0; i < 40; ++i) {
            x.push_back({rng.uniform(), rng.uniform()});
            labels.push_back(i % 2);
        }
        CHECK(clustering::silhouette(x, labels) < 0.2);
    }
    SUBCASE("singletons contribute zero") {
        const Matrix x = {{0.0}, {0.1}, {5.0}};
        const std::vector<int> labels = {0, 0, 1};
        // points 0 and 1: a = 0.1, b = mean distance to the singleton
        const double s0 = (5.0 - 0.1) / 5.0;
        const double s1 = (4.9 - 0.1) / 4.9;
        const double expected = (s0 + s1 + 0.0) / 3.0;
        CHECK(clustering::silhouette(x, labels) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("silhouette rejects degenerate labelings") {
    const Matrix x = {{0.0}, {1.0}, {2.0}};
    CHECK_THROWS_AS(clustering::silhouette(x, {0, 0, 0}), UndefinedMetricError);
    CHECK_THROWS_AS(clustering::silhouette(x, {0, 0, 2}), InvalidArgumentError);  // gap at 1
    CHECK_THROWS_AS(clustering::silhouette(x, {0, 1}), InvalidArgumentError);
    CHECK_THROWS_AS(clustering::silhouette(x, {0, -1, 1}), InvalidArgumentError);
    CHECK_THROWS_AS(clustering::silhouette({}, {}), InvalidArgumentError);
}

TEST_CASE("silhouette ignores rigid motions and uniform scaling") {
    Rng rng(9);
    Matrix x;
    std::vector<int> labels;
    for (int i = 0; i < 18; ++i) {
        x.push_back({rng.normal(), rng.normal(), rng.normal(), rng.normal()});
        labels.push_back(i % 3);
    }
    const double base = clustering::silhouette(x, labels);

    Matrix shifted = x;
    for (auto& row : shifted) {
        row[0] += 3.0;
        row[1] -= 1.0;
        row[2] += 2.0;
        row[3] += 0.5;
    }
    CHECK(clustering::silhouette(shifted, labels) == doctest::Approx(base).epsilon(1e-12));

    // Gram-Schmidt rotation in 4-D
    double q[4][4];
    Rng qrng(10);
    for (auto& row : q) {
        for (auto& v : row) v = qrng.normal();
    }
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < i; ++j) {
            double dot = 0.0;
            for (int k = 0; k < 4; ++k) dot += q[i][k] * q[j][k];
            for (int k = 0; k < 4; ++k) q[i][k] -= dot * q[j][k];
        }
        double norm = 0.0;
        for (int k = 0; k < 4; ++k) norm += q[i][k] * q[i][k];
        norm = std::sqrt(norm);
        for (int k = 0; k < 4; ++k) q[i][k] /= norm;
    }
    Matrix rotated;
    for (const auto& row : x) {
        std::vector<double> r(4, 0.0);
        for (int j = 0; j < 4; ++j) {
            for (int c = 0; c < 4; ++c) r[j] += row[c] * q[c][j];
        }
        rotated.push_back(std::move(r));
    }
    CHECK(clustering::silhouette(rotated, labels) == doctest::Approx(base).epsilon(1e-9));

    Matrix scaled = x;
    for (auto& row : scaled) {
        for (auto& v : row) v *= 3.7;
    }
    CHECK(clustering::silhouette(scaled, labels) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("select_k recovers the planted number of blobs") {
    SUBCASE("three blobs across ten seeds") {
        Rng rng(11);
        std::vector<repr::MeterEmbedding> points = blob("r", axis_center(16, 0, 0.0), 0.5, 12, rng);
        auto more = blob("c", axis_center(16, 1, 8.0), 0.5, 9, rng);
        points.insert(points.end(), more.begin(), more.end());
        more = blob("f", axis_center(16, 2, 8.0), 0.5, 15, rng);
        points.insert(points.end(), more.begin(), more.end());

        int picked_three = 0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            if (clustering::select_k(points, seed).k == 3) ++picked_three;
        }
        CHECK(picked_three >= 8);
    }
    SUBCASE("two blobs, imbalanced the way real DMAs are") {
        Rng rng(12);
        std::vector<repr::MeterEmbedding> points = blob("s", axis_center(16, 0, 0.0), 0.5, 14, rng);
        auto more = blob("l", axis_center(16, 3, 7.0), 0.5, 53, rng);
        points.insert(points.end(), more.begin(), more.end());

        const auto result = clustering::select_k(points, 21);
        REQUIRE(result.k == 2);
        std::vector<int> sizes(2, 0);
        for (const auto& [meter, cluster] : result.assignment) ++sizes[cluster];
        std::sort(sizes.begin(), sizes.end());
        CHECK(sizes[0] == 14);
        CHECK(sizes[1] == 53);
    }
}

TEST_CASE("select_k is deterministic and guards the degenerate cases") {
    Rng rng(13);
    auto points = blob("p", axis_center(8, 0, 0.0), 1.0, 6, rng);
    auto more = blob("q", axis_center(8, 0, 9.0), 1.0, 7, rng);
    points.insert(points.end(), more.begin(), more.end());

    const auto first = clustering::select_k(points, 99);
    const auto second = clustering::select_k(points, 99);
    CHECK(first.k == second.k);
    CHECK(first.assignment == second.assignment);
    CHECK(first.centroids == second.centroids);
    CHECK(first.silhouette == second.silhouette);

    SUBCASE("variance collapse reports a single cluster") {
        std::vector<repr::MeterEmbedding> flat;
        for (int i = 0; i < 8; ++i) {
            flat.push_back({"f" + std::to_string(i), {0.5, 0.5 + i * 1e-9, -1.25}});
        }
        const auto result = clustering::select_k(flat, 1);
        CHECK(result.k == 1);
        CHECK(result.silhouette == 0.0);
        for (const auto& [meter, cluster] : result.assignment) CHECK(cluster == 0);
        REQUIRE(result.centroids.size() == 1);
        CHECK(result.centroids[0][0] == doctest::Approx(0.5).epsilon(1e-12));
    }

    SUBCASE("too few points for the candidate range") {
        std::vector<repr::MeterEmbedding> four(points.begin(), points.begin() + 4);
        CHECK_THROWS_AS(clustering::select_k(four, 1), InvalidArgumentError);
        CHECK_THROWS_AS(clustering::select_k(points, 1, 1), InvalidArgumentError);
    }
}

TEST_CASE("cluster demands partition the DMA total") {
    std::vector<MeterSeries> meters;
    meters.push_back(make_meter("m0", {1.0, 2.0, 3.0, 4.0, 5.0}));
    meters.push_back(make_meter("m1", {0.5, 0.5, 0.5, 0.5, 0.5}));
    meters.push_back(make_meter("m2", {2.0, 0.0, 1.0, 0.0, 2.0}));
    meters.push_back(make_meter("m3", {0.1, 0.2, 0.3, 0.4, 0.5}));

    clustering::ClusterResult result;
    result.k = 2;
    result.assignment = {{"m0", 0}, {"m1", 0}, {"m2", 1}, {"m3", 1}};

    const auto demands = clustering::cluster_demands(result, meters);
    REQUIRE(demands.size() == 2);
    CHECK(demands[0].label == "cluster0");
    CHECK(demands[1].label == "cluster1");
    CHECK(demands[0].values == std::vector<double>{1.5, 2.5, 3.5, 4.5, 5.5});
    CHECK(demands[1].values == std::vector<double>{2.1, 0.2, 1.3, 0.4, 2.5});

    const auto total = aggregate_dma(meters);
    for (std::size_t h = 0; h < total.values.size(); ++h) {
        const double sum = demands[0].values[h] + demands[1].values[h];
        CHECK(std::abs(sum - total.values[h]) <= 1e-9 * std::max(1.0, std::abs(total.values[h])));
    }

    SUBCASE("a single cluster reproduces the DMA total bit-exactly") {
        clustering::ClusterResult one;
        one.k = 1;
        for (const auto& m : meters) one.assignment[m.meter_id] = 0;
        const auto single = clustering::cluster_demands(one, meters);
        REQUIRE(single.size() == 1);
        CHECK(single[0].values == total.values);
    }

    SUBCASE("unassigned and empty clusters are errors") {
        clustering::ClusterResult missing = result;
        missing.assignment.erase("m3");
        CHECK_THROWS_AS(clustering::cluster_demands(missing, meters), InvalidArgumentError);

        clustering::ClusterResult hollow;
        hollow.k = 2;
        for (const auto& m : meters) hollow.assignment[m.meter_id] = 0;
        CHECK_THROWS_AS(clustering::cluster_demands(hollow, meters), InvalidArgumentError);
    }
}

TEST_CASE("true-label clusters inherit the corporate weekend shutdown") {
    std::vector<synth::ArchetypeSpec> specs(3);
    specs[0] = {synth::ArchetypeKind::residential, 6, 0.1, 0.005, 0};
    specs[1] = {synth::ArchetypeKind::corporate, 3, 0.4, 0.02, 0};
    specs[2] = {synth::ArchetypeKind::poultry_farm, 3, 0.6, 0.03, 0};
    const auto dma = synth::generate_dma(specs, 16, 7);

    clustering::ClusterResult truth;
    truth.k = 3;
    int corporate_cluster = -1;
    {
        std::map<std::string, int> kind_index;
        for (const auto& m : dma.dataset.meters) {
            const auto& kind = dma.labels.at(m.meter_id);
            auto [it, fresh] = kind_index.try_emplace(kind, static_cast<int>(kind_index.size()));
            truth.assignment[m.meter_id] = it->second;
        }
        corporate_cluster = kind_index.at("corporate");
    }

    const auto demands = clustering::cluster_demands(truth, dma.dataset.meters);
    REQUIRE(demands.size() == 3);

    // grid starts on a Monday: Wednesday noon = hour 60, Sunday noon = 156
    const auto& corp = demands[corporate_cluster].values;
    double sunday = 0.0, wednesday = 0.0;
    int weeks = 0;
    for (std::size_t w = 0; w + 168 <= corp.size(); w += 168) {
        sunday += corp[w + 156];
        wednesday += corp[w + 60];
        ++weeks;
    }
    CHECK(sunday / weeks < 0.05 * (wednesday / weeks));

    // partition property on generated data
    const auto total = aggregate_dma(dma.dataset.meters);
    for (std::size_t h = 0; h < total.values.size(); ++h) {
        double sum = 0.0;
        for (const auto& d : demands) sum += d.values[h];
        REQUIRE(std::abs(sum - total.values[h]) <=
                1e-9 * std::max(1.0, std::abs(total.values[h])));
    }
}

TEST_CASE("adjusted rand index scores agreement on a chance-corrected scale") {
    CHECK(clustering::adjusted_rand_index({0, 1, 2, 0, 1}, {2, 0, 1, 2, 0}) == 1.0);
    CHECK(clustering::adjusted_rand_index({0, 0, 1, 1}, {0, 1, 0, 1}) ==
          doctest::Approx(-0.5).epsilon(1e-12));
    // one point moved between otherwise-matching pairs
    CHECK(clustering::adjusted_rand_index({0, 0, 1, 1}, {0, 0, 1, 2}) ==
          doctest::Approx(4.0 / 7.0).epsilon(1e-12));
    CHECK(clustering::adjusted_rand_index({0, 0, 0}, {1, 1, 1}) == 1.0);  // both trivial
    CHECK_THROWS_AS(clustering::adjusted_rand_index({0, 1}, {0}), InvalidArgumentError);
    CHECK_THROWS_AS(clustering::adjusted_rand_index({}, {}), InvalidArgumentError);
}

TEST_CASE("assignment csv round-trips") {
    clustering::ClusterResult result;
    result.k = 3;
    result.assignment = {{"alpha", 0}, {"beta", 2}, {"gamma", 1}, {"delta", 0}};

    const std::string path = temp_path("assignment");
    clustering::write_assignment_csv(path, result);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "meter_id,cluster");

    const auto loaded = clustering::load_assignment_csv(path);
    CHECK(loaded == result.assignment);

    SUBCASE("malformed files are rejected") {
        const std::string bad = temp_path("assignment-bad");
        std::ofstream(bad) << "meter,cluster\nm1,0\n";
        CHECK_THROWS_AS(clustering::load_assignment_csv(bad), ParseError);

        const std::string negative = temp_path("assignment-neg");
        std::ofstream(negative) << "meter_id,cluster\nm1,-2\n";
        CHECK_THROWS_AS(clustering::load_assignment_csv(negative), ParseError);

        const std::string dup = temp_path("assignment-dup");
        std::ofstream(dup) << "meter_id,cluster\nm1,0\nm1,1\n";
        CHECK_THROWS_AS(clustering::load_assignment_csv(dup), ParseError);

        CHECK_THROWS_AS(clustering::load_assignment_csv(temp_path("assignment-none")),
                        ParseError);
        clustering::ClusterResult empty;
        CHECK_THROWS_AS(clustering::write_assignment_csv(temp_path("assignment-empty"), empty),
                        InvalidArgumentError);
    }
}
