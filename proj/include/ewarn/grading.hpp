#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string_view>
#include <vector>

#include "ewarn/errors.hpp"
#include "ewarn/random.hpp"

namespace ewarn {

/// Three-tier warning level with the numeric codes used as network targets.
enum class WarningLevel : int { Minor = 1, Warning = 2, Severe = 3 };

inline int level_code(WarningLevel l) { return static_cast<int>(l); }

inline std::string_view level_name(WarningLevel l) {
    switch (l) {
        case WarningLevel::Minor: return "minor";
        case WarningLevel::Warning: return "warning";
        case WarningLevel::Severe: return "severe";
    }
    return "invalid";
}

inline WarningLevel level_from_code(int code) {
    if (code < 1 || code > 3) throw InvalidInput("level_from_code: code must be 1, 2 or 3");
    return static_cast<WarningLevel>(code);
}

/// K-Means output plus the threshold structure derived from it.
struct GradingModel {
    std::size_t k = 0;
    std::vector<std::vector<double>> centers; // ascending by first coordinate
    std::vector<double> thresholds;           // adjacent-center midpoints (1-D models only)
    std::vector<std::size_t> assignments;     // per input point, index into centers
    std::size_t iterations = 0;
    double sse = 0.0;
    std::vector<double> sse_history; // SSE after each Lloyd iteration
};

namespace detail {

inline double dist_sq(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double d = a[t] - b[t];
        s += d * d;
    }
    return s;
}

inline std::size_t nearest_center(const std::vector<double>& p, const std::vector<std::vector<double>>& centers) {
    std::size_t best = 0;
    double best_d = dist_sq(p, centers[0]);
    for (std::size_t c = 1; c < centers.size(); ++c) {
        const double d = dist_sq(p, centers[c]);
        if (d < best_d) { // ties stay with the lower index
            best_d = d;
            best = c;
        }
    }
    return best;
}

struct LloydRun {
    std::vector<std::vector<double>> centers;
    std::vector<std::size_t> assignments;
    std::size_t iterations = 0;
    double sse = 0.0;
    std::vector<double> sse_history;
};

inline LloydRun lloyd(const std::vector<std::vector<double>>& points, std::vector<std::vector<double>> centers,
                      std::size_t max_iter) {
    const std::size_t n = points.size();
    const std::size_t k = centers.size();
    const std::size_t dim = points.front().size();

    LloydRun run;
    run.assignments.resize(n);
    for (std::size_t i = 0; i < n; ++i) run.assignments[i] = nearest_center(points[i], centers);

    auto total_sse = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += dist_sq(points[i], centers[run.assignments[i]]);
        return s;
    };

    for (std::size_t iter = 1; iter <= max_iter; ++iter) {
        run.iterations = iter;

        std::vector<std::vector<double>> sum(k, std::vector<double>(dim, 0.0));
        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t t = 0; t < dim; ++t) sum[run.assignments[i]][t] += points[i][t];
            ++count[run.assignments[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] == 0) {
                // Reseed an emptied cluster at the point farthest from its
                // stale center (ties to the lowest point index).
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = dist_sq(points[i], centers[c]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                centers[c] = points[far];
                continue;
            }
            for (std::size_t t = 0; t < dim; ++t) centers[c][t] = sum[c][t] / static_cast<double>(count[c]);
        }

        run.sse_history.push_back(total_sse());

        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t a = nearest_center(points[i], centers);
            if (a != run.assignments[i]) {
                run.assignments[i] = a;
                changed = true;
            }
        }
        if (!changed) break;
    }

    run.sse = total_sse();
    run.centers = std::move(centers);
    return run;
}

/// Deterministic init: points at the k quantile ranks ceil((2j-1)*n/(2k))
/// of the sorted input (lexicographic order; plain value order in 1-D).
inline std::vector<std::vector<double>> quantile_init(const std::vector<std::vector<double>>& points,
                                                      std::size_t k) {
    const std::size_t n = points.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
    std::vector<std::vector<double>> centers;
    centers.reserve(k);
    for (std::size_t j = 1; j <= k; ++j) {
        const std::size_t rank = ((2 * j - 1) * n + 2 * k - 1) / (2 * k); // ceil((2j-1)n / 2k), 1-based
        centers.push_back(points[order[rank - 1]]);
    }
    return centers;
}

} // namespace detail

/// Lloyd K-Means. The default single run starts from the quantile-rank
/// initialization, which is fully deterministic; optional extra seeded
/// random restarts keep the lowest-SSE result (ties to the earliest run).
inline GradingModel kmeans(const std::vector<std::vector<double>>& points, std::size_t k, std::uint64_t seed,
                           std::size_t max_iter = 100, std::size_t restarts = 0) {
    if (points.empty()) throw InvalidInput("kmeans: empty input");
    if (k == 0 || k > points.size()) throw InvalidInput("kmeans: k must lie in [1, number of points]");
    const std::size_t dim = points.front().size();
    if (dim == 0) throw InvalidInput("kmeans: zero-dimensional points");
    for (const auto& p : points)
        if (p.size() != dim) throw InvalidInput("kmeans: points have mixed dimensions");
    if (max_iter == 0) throw InvalidInput("kmeans: max_iter must be positive");

    detail::LloydRun best = detail::lloyd(points, detail::quantile_init(points, k), max_iter);
    for (std::size_t r = 1; r <= restarts; ++r) {
        Rng rng(mix_seed(seed, r));
        std::vector<std::size_t> idx(points.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        rng.shuffle(idx);
        std::vector<std::vector<double>> init;
        init.reserve(k);
        for (std::size_t j = 0; j < k; ++j) init.push_back(points[idx[j]]);
        detail::LloydRun run = detail::lloyd(points, std::move(init), max_iter);
        if (run.sse < best.sse) best = std::move(run);
    }

    // Sort centers ascending by coordinates and remap assignments.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return best.centers[a] < best.centers[b]; });
    std::vector<std::size_t> rank(k);
    for (std::size_t pos = 0; pos < k; ++pos) rank[order[pos]] = pos;

    GradingModel model;
    model.k = k;
    model.centers.reserve(k);
    for (std::size_t pos = 0; pos < k; ++pos) model.centers.push_back(best.centers[order[pos]]);
    model.assignments.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) model.assignments[i] = rank[best.assignments[i]];
    model.iterations = best.iterations;
    model.sse = best.sse;
    model.sse_history = std::move(best.sse_history);

    if (dim == 1 && k >= 2) {
        bool ascending = true;
        for (std::size_t c = 0; c + 1 < k; ++c)
            if (!(model.centers[c][0] < model.centers[c + 1][0])) ascending = false;
        if (ascending) {
            model.thresholds.reserve(k - 1);
            for (std::size_t c = 0; c + 1 < k; ++c)
                model.thresholds.push_back((model.centers[c][0] + model.centers[c + 1][0]) / 2.0);
        }
    }
    return model;
}

/// 1-D convenience overload for association degrees.
inline GradingModel kmeans(const std::vector<double>& degrees, std::size_t k, std::uint64_t seed,
                           std::size_t max_iter = 100, std::size_t restarts = 0) {
    std::vector<std::vector<double>> pts;
    pts.reserve(degrees.size());
    for (double d : degrees) pts.push_back({d});
    return kmeans(pts, k, seed, max_iter, restarts);
}

/// Midpoints of adjacent centers: the nearest-center decision boundaries.
inline std::vector<double> derive_thresholds(const std::vector<double>& centers) {
    if (centers.size() < 2) throw InvalidInput("derive_thresholds: need at least 2 centers");
    for (std::size_t i = 0; i + 1 < centers.size(); ++i)
        if (!(centers[i] < centers[i + 1])) throw InvalidInput("derive_thresholds: centers must be strictly ascending");
    std::vector<double> th;
    th.reserve(centers.size() - 1);
    for (std::size_t i = 0; i + 1 < centers.size(); ++i) th.push_back((centers[i] + centers[i + 1]) / 2.0);
    return th;
}

/// Half-open level bands: degree < t1 is Minor, [t1, t2) Warning,
/// >= t2 Severe. Boundary values go to the higher level.
inline WarningLevel classify(double degree, double t1, double t2) {
    if (!(t1 < t2)) throw InvalidInput("classify: thresholds must satisfy t1 < t2");
    if (degree < t1) return WarningLevel::Minor;
    if (degree < t2) return WarningLevel::Warning;
    return WarningLevel::Severe;
}

inline std::vector<WarningLevel> classify_all(const std::vector<double>& degrees, double t1, double t2) {
    std::vector<WarningLevel> out;
    out.reserve(degrees.size());
    for (double d : degrees) out.push_back(classify(d, t1, t2));
    return out;
}

} // namespace ewarn
