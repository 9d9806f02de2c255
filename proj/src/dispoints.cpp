#include "geofindr/dispoints.hpp"

#include <stdexcept>

namespace geofindr {

namespace {

double default_distance(const GeoPoint& a, const GeoPoint& b) {
    return great_circle_km(a, b);
}

} // namespace

DispersionSelection dispoints(const std::vector<Landmark>& candidates, int m,
                              const DistanceFn& distance) {
    const DistanceFn& dist = distance ? distance : DistanceFn(default_distance);
    if (m <= 0) throw std::invalid_argument("dispoints: m must be positive");
    if (static_cast<std::size_t>(m) > candidates.size()) {
        throw std::invalid_argument("dispoints: m exceeds candidate count");
    }

    std::vector<Landmark> selected(candidates.begin(), candidates.begin() + m);
    std::vector<double> to_selected(static_cast<std::size_t>(m));

    for (std::size_t c = static_cast<std::size_t>(m); c < candidates.size(); ++c) {
        const Landmark& p = candidates[c];

        double sum_all = 0.0;
        std::size_t nearest = 0;
        for (std::size_t i = 0; i < selected.size(); ++i) {
            to_selected[i] = dist(p.position, selected[i].position);
            sum_all += to_selected[i];
            if (i > 0) {
                bool closer = to_selected[i] < to_selected[nearest];
                bool tie_lower_id = to_selected[i] == to_selected[nearest] &&
                                    selected[i].id < selected[nearest].id;
                if (closer || tie_lower_id) nearest = i;
            }
        }

        // Challenge the nearest selected point: whichever of the pair is
        // farther from the rest of the selection stays.
        double sum_p = sum_all - to_selected[nearest];
        double sum_q = 0.0;
        for (std::size_t i = 0; i < selected.size(); ++i) {
            if (i == nearest) continue;
            sum_q += dist(selected[nearest].position, selected[i].position);
        }
        if (sum_p > sum_q) selected[nearest] = p;
    }

    DispersionSelection result;
    result.selected = std::move(selected);
    result.dispersion_score = dispersion_score(result.selected, dist);
    return result;
}

double dispersion_score(const std::vector<Landmark>& points, const DistanceFn& distance) {
    const DistanceFn& dist = distance ? distance : DistanceFn(default_distance);
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + 1; j < points.size(); ++j) {
            total += dist(points[i].position, points[j].position);
        }
    }
    return total;
}

} // namespace geofindr
