#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

namespace geofindr {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kPi = 3.14159265358979323846;

/// Longest possible great-circle arc (antipodal distance) on the R=6371 sphere.
inline constexpr double kMaxArcKm = kPi * kEarthRadiusKm;

constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Fold an arbitrary longitude into [-180, 180).
double normalize_lon(double lon_deg);

/**
 * Latitude/longitude pair on the spherical Earth model.
 *
 * Longitude is normalized into [-180, 180) at construction so equality and
 * hashing are well-defined. Latitude must already be within [-90, +90];
 * out-of-range latitudes are a caller bug and throw. At the poles the
 * longitude is forced to 0 (all longitudes are the same point there).
 */
class GeoPoint {
public:
    GeoPoint() = default;
    GeoPoint(double lat_deg, double lon_deg);

    /// Fold any (lat, lon) in R^2 onto the sphere (reflecting across the
    /// poles when |lat| > 90). Never throws; used by optimizers that walk
    /// outside the valid ranges.
    static GeoPoint normalized(double lat_deg, double lon_deg);

    double lat() const { return lat_; }
    double lon() const { return lon_; }

    bool operator==(const GeoPoint&) const = default;

private:
    double lat_ = 0.0;
    double lon_ = 0.0;
};

/// Great-circle distance in kilometers (haversine, R = 6371 km).
/// Symmetric, non-negative, at most kMaxArcKm.
double great_circle_km(const GeoPoint& a, const GeoPoint& b);

/// Raw-degree variant without range validation, for optimizer inner loops.
double great_circle_km(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg);

/// Point reached by travelling distance_km from origin along the initial
/// bearing (degrees clockwise from north).
GeoPoint destination_point(const GeoPoint& origin, double bearing_deg, double distance_km);

/// Initial bearing from a to b, degrees in [0, 360).
double initial_bearing_deg(const GeoPoint& a, const GeoPoint& b);

} // namespace geofindr

template <>
struct std::hash<geofindr::GeoPoint> {
    std::size_t operator()(const geofindr::GeoPoint& p) const noexcept {
        auto canon = [](double v) { return v == 0.0 ? 0.0 : v; };
        std::size_t h1 = std::hash<double>{}(canon(p.lat()));
        std::size_t h2 = std::hash<double>{}(canon(p.lon()));
        return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
    }
};
