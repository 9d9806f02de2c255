#include "geofindr/estimate.hpp"

#include "geofindr/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace geofindr {

namespace {

constexpr double kMinScaleKm = 1e-9; // floor for a fit that collapses to scale zero
constexpr double kLogScaleClamp = 30.0;
constexpr double kPolishStartDeg = 0.05;
constexpr double kPolishStopDeg = 1e-8;

struct Candidate {
    GeoPoint position{0.0, 0.0};
    double scale_km = 0.0;
    double residual = std::numeric_limits<double>::infinity();
};

/// Evaluate a position with its closed-form optimal scale.
Candidate at_point(const GeoPoint& p, const std::vector<WeightedLandmark>& landmarks) {
    Candidate c;
    c.position = p;
    c.scale_km = best_scale_at(p, landmarks);
    c.residual = circle_residual(p, c.scale_km, landmarks);
    return c;
}

GeoPoint vector_centroid(const std::vector<WeightedLandmark>& landmarks) {
    double x = 0.0, y = 0.0, z = 0.0;
    for (const WeightedLandmark& wl : landmarks) {
        double phi = deg_to_rad(wl.landmark.position.lat());
        double lam = deg_to_rad(wl.landmark.position.lon());
        x += std::cos(phi) * std::cos(lam);
        y += std::cos(phi) * std::sin(lam);
        z += std::sin(phi);
    }
    double norm = std::sqrt(x * x + y * y + z * z);
    if (norm < 1e-12) return landmarks.front().landmark.position;
    return GeoPoint(rad_to_deg(std::asin(z / norm)), rad_to_deg(std::atan2(y, x)));
}

/// Best point of a coarse grid over the landmarks' padded bounding box.
Candidate grid_scan(const std::vector<WeightedLandmark>& landmarks) {
    double lat_min = 90.0, lat_max = -90.0, lon_min = 180.0, lon_max = -180.0;
    for (const WeightedLandmark& wl : landmarks) {
        lat_min = std::min(lat_min, wl.landmark.position.lat());
        lat_max = std::max(lat_max, wl.landmark.position.lat());
        lon_min = std::min(lon_min, wl.landmark.position.lon());
        lon_max = std::max(lon_max, wl.landmark.position.lon());
    }
    // Noise can push the optimum well outside the landmark hull, so pad
    // generously; a too-small box silently hides the global basin.
    double lat_pad = std::max(1.0, 0.5 * (lat_max - lat_min));
    double lon_pad = std::max(1.0, 0.5 * (lon_max - lon_min));
    lat_min -= lat_pad;
    lat_max += lat_pad;
    lon_min -= lon_pad;
    lon_max += lon_pad;

    constexpr int kSteps = 48;
    Candidate best;
    for (int i = 0; i <= kSteps; ++i) {
        double lat = lat_min + (lat_max - lat_min) * i / kSteps;
        for (int j = 0; j <= kSteps; ++j) {
            double lon = lon_min + (lon_max - lon_min) * j / kSteps;
            Candidate c = at_point(GeoPoint::normalized(lat, lon), landmarks);
            if (c.residual < best.residual) best = c;
        }
    }
    return best;
}

/// Axis-aligned descent with halving steps; converges to the local
/// minimum with far more precision than the simplex alone.
Candidate pattern_polish(const GeoPoint& start, const std::vector<WeightedLandmark>& landmarks) {
    Candidate current = at_point(start, landmarks);
    double step = kPolishStartDeg;
    while (step >= kPolishStopDeg) {
        const double moves[4][2] = {{step, 0.0}, {-step, 0.0}, {0.0, step}, {0.0, -step}};
        Candidate best_move = current;
        for (const auto& mv : moves) {
            GeoPoint q = GeoPoint::normalized(current.position.lat() + mv[0],
                                              current.position.lon() + mv[1]);
            Candidate c = at_point(q, landmarks);
            if (c.residual < best_move.residual) best_move = c;
        }
        if (best_move.residual < current.residual) {
            current = best_move;
        } else {
            step *= 0.5;
        }
    }
    return current;
}

Candidate simplex_descent(const GeoPoint& start, double scale0,
                          const std::vector<WeightedLandmark>& landmarks) {
    auto objective = [&landmarks](const std::vector<double>& x) {
        double u = std::clamp(x[2], -kLogScaleClamp, kLogScaleClamp);
        GeoPoint p = GeoPoint::normalized(x[0], x[1]);
        return circle_residual(p, std::exp(u), landmarks);
    };
    NelderMeadOptions options;
    options.f_tolerance = 1e-14;
    options.max_evals = 4000;
    options.initial_step = {0.5, 0.5, 0.25};
    double u0 = std::log(std::max(scale0, kMinScaleKm));
    NelderMeadResult nm =
        nelder_mead(objective, {start.lat(), start.lon(), std::clamp(u0, -kLogScaleClamp,
                                                                     kLogScaleClamp)},
                    options);
    GeoPoint p = GeoPoint::normalized(nm.x[0], nm.x[1]);
    // Re-evaluate with the closed-form scale, which is never worse.
    return at_point(p, landmarks);
}

PositionEstimate finish(Candidate best, const std::vector<WeightedLandmark>& landmarks,
                        bool low_confidence) {
    PositionEstimate estimate;
    estimate.position = best.position;
    estimate.scale_km_per_unit = std::max(best.scale_km, kMinScaleKm);
    if (best.scale_km < kMinScaleKm) low_confidence = true;
    estimate.smre_km = std::sqrt(best.residual / static_cast<double>(landmarks.size()));
    estimate.converged = true;
    estimate.low_confidence = low_confidence;
    estimate.contributing.reserve(landmarks.size());
    for (const WeightedLandmark& wl : landmarks) {
        estimate.contributing.emplace_back(wl.landmark.id, wl.weight);
    }
    return estimate;
}

} // namespace

std::vector<WeightedLandmark> normalize_delays(const std::vector<DelaySample>& samples,
                                               const Catalog& catalog) {
    if (samples.empty()) throw std::invalid_argument("normalize_delays: no samples");
    double max_rtt = 0.0;
    for (const DelaySample& s : samples) {
        if (!std::isfinite(s.rtt_ms) || !(s.rtt_ms > 0.0)) {
            throw std::invalid_argument("normalize_delays: non-positive rtt for " +
                                        s.landmark_id);
        }
        max_rtt = std::max(max_rtt, s.rtt_ms);
    }
    std::vector<WeightedLandmark> weighted;
    weighted.reserve(samples.size());
    for (const DelaySample& s : samples) {
        const Landmark* lm = catalog.find(s.landmark_id);
        if (lm == nullptr) {
            throw std::invalid_argument("normalize_delays: unknown landmark " + s.landmark_id);
        }
        weighted.push_back({*lm, s.rtt_ms / max_rtt});
    }
    std::sort(weighted.begin(), weighted.end(),
              [](const WeightedLandmark& a, const WeightedLandmark& b) {
                  return a.landmark.id < b.landmark.id;
              });
    auto dup = std::adjacent_find(weighted.begin(), weighted.end(),
                                  [](const WeightedLandmark& a, const WeightedLandmark& b) {
                                      return a.landmark.id == b.landmark.id;
                                  });
    if (dup != weighted.end()) {
        throw std::invalid_argument("normalize_delays: duplicate samples for " +
                                    dup->landmark.id);
    }
    return weighted;
}

double circle_residual(const GeoPoint& p, double scale_km,
                       const std::vector<WeightedLandmark>& landmarks) {
    double total = 0.0;
    for (const WeightedLandmark& wl : landmarks) {
        double r = great_circle_km(p, wl.landmark.position) - scale_km * wl.weight;
        total += r * r;
    }
    return total;
}

double best_scale_at(const GeoPoint& p, const std::vector<WeightedLandmark>& landmarks) {
    double num = 0.0, den = 0.0;
    for (const WeightedLandmark& wl : landmarks) {
        num += wl.weight * great_circle_km(p, wl.landmark.position);
        den += wl.weight * wl.weight;
    }
    if (den <= 0.0) return 0.0;
    return std::max(0.0, num / den);
}

PositionEstimate fit(const std::vector<WeightedLandmark>& landmarks,
                     const GeoPoint& initial_guess) {
    if (landmarks.empty()) throw std::invalid_argument("fit: no landmarks");
    for (const WeightedLandmark& wl : landmarks) {
        if (!std::isfinite(wl.weight) || !(wl.weight > 0.0)) {
            throw std::invalid_argument("fit: non-positive weight for " + wl.landmark.id);
        }
    }
    // Deterministic summation order regardless of caller ordering.
    std::vector<WeightedLandmark> lms = landmarks;
    std::sort(lms.begin(), lms.end(), [](const WeightedLandmark& a, const WeightedLandmark& b) {
        return a.landmark.id < b.landmark.id;
    });

    std::size_t distinct = 1;
    for (std::size_t i = 1; i < lms.size(); ++i) {
        if (!(lms[i].landmark.position == lms[0].landmark.position)) {
            distinct = 2;
            break;
        }
    }
    if (distinct == 2) {
        std::vector<GeoPoint> seen{lms[0].landmark.position};
        for (const WeightedLandmark& wl : lms) {
            bool known = false;
            for (const GeoPoint& p : seen) {
                if (p == wl.landmark.position) {
                    known = true;
                    break;
                }
            }
            if (!known) seen.push_back(wl.landmark.position);
        }
        distinct = seen.size();
    }

    // One landmark, or several in the same place: the landmark position is
    // the only defensible answer, with no usable scale.
    if (distinct == 1) {
        return finish(at_point(lms.front().landmark.position, lms), lms, true);
    }

    // Two landmarks: the point on the connecting arc splitting it in the
    // ratio of the weights. Underdetermined, so flagged.
    if (lms.size() == 2) {
        const GeoPoint& a = lms[0].landmark.position;
        const GeoPoint& b = lms[1].landmark.position;
        double separation = great_circle_km(a, b);
        double t = lms[0].weight / (lms[0].weight + lms[1].weight);
        GeoPoint p = destination_point(a, initial_bearing_deg(a, b), t * separation);
        return finish(at_point(p, lms), lms, true);
    }

    // Primary start: the caller's guess, scale seeded with mean(d / w).
    Candidate guess_start;
    guess_start.position = initial_guess;
    {
        double sum = 0.0;
        for (const WeightedLandmark& wl : lms) {
            sum += great_circle_km(initial_guess, wl.landmark.position) / wl.weight;
        }
        guess_start.scale_km = sum / static_cast<double>(lms.size());
    }
    Candidate centroid_start = at_point(vector_centroid(lms), lms);
    Candidate grid_start = grid_scan(lms);
    const WeightedLandmark* nearest = &lms.front();
    for (const WeightedLandmark& wl : lms) {
        if (wl.weight < nearest->weight) nearest = &wl;
    }
    Candidate nearest_start = at_point(nearest->landmark.position, lms);

    Candidate best;
    for (const Candidate& start : {guess_start, centroid_start, grid_start, nearest_start}) {
        Candidate descended = simplex_descent(start.position, std::max(start.scale_km, 1.0),
                                              lms);
        Candidate polished = pattern_polish(descended.position, lms);
        if (polished.residual < best.residual) best = polished;
        // The simplex's 0.5 degree opening moves can hop out of a shallow
        // basin the start already sat in; descend from the start too.
        Candidate direct = pattern_polish(start.position, lms);
        if (direct.residual < best.residual) best = direct;
    }
    return finish(best, lms, distinct == 2);
}

} // namespace geofindr
