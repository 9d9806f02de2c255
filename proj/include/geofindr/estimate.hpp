#pragma once

#include "geofindr/catalog.hpp"
#include "geofindr/probe.hpp"

#include <string>
#include <utility>
#include <vector>

namespace geofindr {

/// A landmark together with its normalized delay weight in (0, 1].
struct WeightedLandmark {
    Landmark landmark;
    double weight = 0.0;
};

/**
 * Turn raw delay samples into weighted landmarks: weights are each rtt
 * divided by the largest rtt in the batch, and the result is sorted by
 * landmark id. Throws when samples are empty, a landmark is missing from
 * the catalog, or an rtt is not positive.
 */
std::vector<WeightedLandmark> normalize_delays(const std::vector<DelaySample>& samples,
                                               const Catalog& catalog);

struct PositionEstimate {
    GeoPoint position{0.0, 0.0};
    double smre_km = 0.0;         // sqrt(mean squared residual) of the fit
    double scale_km_per_unit = 0.0;
    std::vector<std::pair<std::string, double>> contributing; // (id, weight), id sorted
    bool converged = false;
    bool low_confidence = false;  // degenerate input (under 3 distinct positions)
};

/**
 * Joint residual of a candidate position and delay-to-distance scale:
 * the sum over landmarks of (distance(p, lm) - scale * weight)^2. The fit
 * minimizes this; zero means every weighted circle passes through p.
 */
double circle_residual(const GeoPoint& p, double scale_km,
                       const std::vector<WeightedLandmark>& landmarks);

/// Scale minimizing circle_residual at a fixed position, clamped at zero.
double best_scale_at(const GeoPoint& p, const std::vector<WeightedLandmark>& landmarks);

/**
 * Estimate the position whose distances to the landmarks are best
 * proportional to their weights. Joint search over position and scale:
 * simplex descent from initial_guess (scale seeded with the mean of
 * distance over weight) plus spare starts at the landmark centroid, a
 * coarse grid optimum, and the nearest landmark, each refined by an
 * axis-aligned pattern polish. Fully deterministic. Degenerate inputs
 * (one landmark, two landmarks, or all landmarks in one place) fall back
 * to the closest sensible point and set low_confidence.
 *
 * Throws std::invalid_argument on empty input or non-positive weights.
 */
PositionEstimate fit(const std::vector<WeightedLandmark>& landmarks,
                     const GeoPoint& initial_guess);

} // namespace geofindr
