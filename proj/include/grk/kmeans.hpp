#pragma once

// Deterministic Lloyd k-means with k-means++ seeding.

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <vector>

namespace grk {

struct KMeansOptions {
    std::size_t clusters = 1;
    std::uint64_t seed = 0;
    int max_iterations = 50;
    double shift_tol = 1e-8;
};

struct KMeansResult {
    Eigen::MatrixXd centroids; // clusters x dims
    std::vector<std::size_t> assignment;
    std::vector<std::size_t> usage;
    int iterations = 0;
};

// Rows of `data` are samples. Clusters that lose all members are reseeded to
// the sample with the largest error.
KMeansResult kmeans(const Eigen::MatrixXd& data, const KMeansOptions& options);

// Index of the nearest row of `codes` (lowest index on ties) and its squared distance.
std::size_t nearest_code(const Eigen::MatrixXd& codes, const Eigen::Ref<const Eigen::VectorXd>& x,
                         double* squared_distance = nullptr);

// Uniform double in [0, 1) built from the raw engine bits, so sequences do not
// depend on the standard library's distribution implementation.
double uniform01(std::mt19937_64& rng);

} // namespace grk
