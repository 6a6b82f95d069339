#include "grk/kmeans.hpp"

#include "grk/error.hpp"

#include <limits>

namespace grk {

double uniform01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t nearest_code(const Eigen::MatrixXd& codes, const Eigen::Ref<const Eigen::VectorXd>& x,
                         double* squared_distance)
{
    if (codes.rows() == 0) fail_usage("nearest_code on an empty codebook");
    if (codes.cols() != x.size()) fail_data("feature dimension does not match the codebook");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < codes.rows(); ++k) {
        const double d = (codes.row(k).transpose() - x).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<std::size_t>(k);
        }
    }
    if (squared_distance) *squared_distance = best_d;
    return best;
}

namespace {

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& data, std::size_t k, std::mt19937_64& rng)
{
    const Eigen::Index n = data.rows();
    Eigen::MatrixXd c(static_cast<Eigen::Index>(k), data.cols());
    const auto first = std::min<Eigen::Index>(static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(n)), n - 1);
    c.row(0) = data.row(first);
    Eigen::VectorXd d2 = (data.rowwise() - c.row(0)).rowwise().squaredNorm();
    for (std::size_t j = 1; j < k; ++j) {
        const double total = d2.sum();
        Eigen::Index pick = 0;
        if (total > 0.0) {
            const double u = uniform01(rng) * total;
            double acc = 0.0;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > u && d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
            // Rounding at the tail may land on an already chosen point.
            while (d2[pick] <= 0.0 && pick > 0) --pick;
        } else {
            pick = std::min<Eigen::Index>(static_cast<Eigen::Index>(uniform01(rng) * static_cast<double>(n)), n - 1);
        }
        c.row(static_cast<Eigen::Index>(j)) = data.row(pick);
        d2 = d2.cwiseMin((data.rowwise() - c.row(static_cast<Eigen::Index>(j))).rowwise().squaredNorm());
    }
    return c;
}

} // namespace

KMeansResult kmeans(const Eigen::MatrixXd& data, const KMeansOptions& options)
{
    const Eigen::Index n = data.rows();
    if (n == 0) fail_data("k-means on an empty dataset");
    if (options.clusters == 0) fail_usage("k-means needs at least one cluster");
    if (options.clusters > static_cast<std::size_t>(n))
        fail_data("codebook size " + std::to_string(options.clusters) + " exceeds dataset size " + std::to_string(n));
    if (!data.allFinite()) fail_data("k-means input contains non-finite values");

    std::mt19937_64 rng(options.seed);
    const auto k = static_cast<Eigen::Index>(options.clusters);
    KMeansResult res;
    res.centroids = seed_plus_plus(data, options.clusters, rng);
    res.assignment.assign(static_cast<std::size_t>(n), 0);
    Eigen::VectorXd err(n);

    auto assign = [&] {
        for (Eigen::Index i = 0; i < n; ++i) {
            double d = 0.0;
            res.assignment[static_cast<std::size_t>(i)] = nearest_code(res.centroids, data.row(i).transpose(), &d);
            err[i] = d;
        }
    };

    for (int it = 0; it < options.max_iterations; ++it) {
        assign();
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, data.cols());
        std::vector<std::size_t> counts(options.clusters, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto a = res.assignment[static_cast<std::size_t>(i)];
            sums.row(static_cast<Eigen::Index>(a)) += data.row(i);
            ++counts[a];
        }
        Eigen::MatrixXd next = res.centroids;
        for (Eigen::Index j = 0; j < k; ++j) {
            const auto cnt = counts[static_cast<std::size_t>(j)];
            if (cnt > 0) {
                next.row(j) = sums.row(j) / static_cast<double>(cnt);
            } else {
                // Dead code: move it onto the worst-served sample.
                Eigen::Index worst = 0;
                err.maxCoeff(&worst);
                next.row(j) = data.row(worst);
                err[worst] = 0.0;
            }
        }
        const double shift = (next - res.centroids).rowwise().norm().maxCoeff();
        res.centroids = std::move(next);
        res.iterations = it + 1;
        if (shift < options.shift_tol) break;
    }
    assign();
    res.usage.assign(options.clusters, 0);
    for (auto a : res.assignment) ++res.usage[a];
    return res;
}

} // namespace grk
