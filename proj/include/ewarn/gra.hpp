#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "ewarn/errors.hpp"
#include "ewarn/indicator_matrix.hpp"
#include "ewarn/linalg.hpp"

namespace ewarn {

/// Grey relational analysis output for one matrix against its reference.
struct GraResult {
    std::vector<double> reference;   // per-indicator maxima
    double rho = 0.5;
    linalg::Matrix coefficients;     // slices x indicators
    std::vector<double> degrees;     // per-slice mean coefficient
    std::vector<std::size_t> ranking; // slice indices, degree descending
};

/// Element k is the maximum of indicator k over all slices.
inline std::vector<double> reference_sequence(const IndicatorMatrix& m) {
    if (m.n_slices() == 0 || m.n_indicators() == 0) throw InvalidInput("reference_sequence: empty matrix");
    std::vector<double> ref(m.n_indicators());
    for (std::size_t j = 0; j < m.n_indicators(); ++j) {
        double hi = m.values(0, j);
        for (std::size_t i = 1; i < m.n_slices(); ++i) hi = std::max(hi, m.values(i, j));
        ref[j] = hi;
    }
    return ref;
}

/// Relational coefficient of slice i at component k:
///   (dmin + rho*dmax) / (|ref_k - x_ik| + rho*dmax)
/// with dmin/dmax the global extremes of the deviations. If every
/// comparative equals the reference (dmax = 0) all coefficients are 1.
inline linalg::Matrix relational_coefficients(const std::vector<double>& reference,
                                              const linalg::Matrix& comparatives, double rho) {
    if (comparatives.rows == 0 || comparatives.cols == 0)
        throw InvalidInput("relational_coefficients: empty comparative matrix");
    if (reference.size() != comparatives.cols)
        throw InvalidInput("relational_coefficients: reference length does not match indicator count");
    if (!(rho > 0.0 && rho < 1.0)) throw InvalidInput("relational_coefficients: rho must lie in (0, 1)");

    linalg::Matrix delta(comparatives.rows, comparatives.cols);
    double dmin = std::numeric_limits<double>::infinity();
    double dmax = 0.0;
    for (std::size_t i = 0; i < comparatives.rows; ++i) {
        for (std::size_t k = 0; k < comparatives.cols; ++k) {
            const double d = std::abs(reference[k] - comparatives(i, k));
            delta(i, k) = d;
            dmin = std::min(dmin, d);
            dmax = std::max(dmax, d);
        }
    }

    linalg::Matrix eta(comparatives.rows, comparatives.cols, 1.0);
    if (dmax == 0.0) return eta; // all sequences coincide with the reference
    const double num = dmin + rho * dmax;
    for (std::size_t i = 0; i < comparatives.rows; ++i)
        for (std::size_t k = 0; k < comparatives.cols; ++k) eta(i, k) = num / (delta(i, k) + rho * dmax);
    return eta;
}

/// Row means of the coefficient matrix.
inline std::vector<double> association_degrees(const linalg::Matrix& coefficients) {
    if (coefficients.rows == 0 || coefficients.cols == 0)
        throw InvalidInput("association_degrees: empty coefficient matrix");
    std::vector<double> deg(coefficients.rows);
    for (std::size_t i = 0; i < coefficients.rows; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < coefficients.cols; ++k) s += coefficients(i, k);
        deg[i] = s / static_cast<double>(coefficients.cols);
    }
    return deg;
}

/// Slice indices sorted by descending degree; ties keep input order.
inline std::vector<std::size_t> rank_degrees(const std::vector<double>& degrees) {
    std::vector<std::size_t> order(degrees.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return degrees[a] > degrees[b]; });
    return order;
}

inline std::vector<std::string> rank_degrees(const std::vector<double>& degrees,
                                             const std::vector<std::string>& labels) {
    if (degrees.size() != labels.size()) throw InvalidInput("rank_degrees: degree/label count mismatch");
    std::vector<std::string> out;
    out.reserve(labels.size());
    for (std::size_t idx : rank_degrees(degrees)) out.push_back(labels[idx]);
    return out;
}

inline GraResult run_gra(const IndicatorMatrix& m, double rho = 0.5) {
    GraResult res;
    res.rho = rho;
    res.reference = reference_sequence(m);
    res.coefficients = relational_coefficients(res.reference, m.values, rho);
    res.degrees = association_degrees(res.coefficients);
    res.ranking = rank_degrees(res.degrees);
    return res;
}

} // namespace ewarn
