#pragma once

#include "geofindr/catalog.hpp"
#include "geofindr/geodesy.hpp"

#include <functional>
#include <vector>

namespace geofindr {

struct DispersionSelection {
    std::vector<Landmark> selected;       // selection order, not id order
    double dispersion_score = 0.0;        // sum of pairwise distances
};

using DistanceFn = std::function<double(const GeoPoint&, const GeoPoint&)>;

/**
 * Pick m geographically dispersed landmarks out of candidates.
 *
 * Greedy single pass: the first m candidates seed the selection; every
 * remaining candidate challenges its nearest selected point (ties broken
 * toward the lowest id) and replaces it when doing so increases the sum
 * of distances to the rest of the selection. Runs in O(n * m) distance
 * evaluations, a deliberate trade against the exact (NP-hard) dispersion
 * problem. Deterministic for a fixed candidate order.
 *
 * Throws std::invalid_argument when m <= 0 or m > candidates.size().
 * The distance function defaults to great-circle distance and is
 * injectable for testing.
 */
DispersionSelection dispoints(const std::vector<Landmark>& candidates, int m,
                              const DistanceFn& distance = {});

/// Sum of distances over all unordered pairs of the given landmarks.
double dispersion_score(const std::vector<Landmark>& points,
                        const DistanceFn& distance = {});

} // namespace geofindr
