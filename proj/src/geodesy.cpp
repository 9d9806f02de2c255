#include "geofindr/geodesy.hpp"

#include <stdexcept>
#include <string>

namespace geofindr {

double normalize_lon(double lon_deg) {
    double lon = std::fmod(lon_deg + 180.0, 360.0);
    if (lon < 0.0) lon += 360.0;
    return lon - 180.0;
}

GeoPoint::GeoPoint(double lat_deg, double lon_deg) {
    if (!(lat_deg >= -90.0 && lat_deg <= 90.0)) {
        throw std::invalid_argument("latitude out of [-90, 90]: " + std::to_string(lat_deg));
    }
    if (!std::isfinite(lon_deg)) {
        throw std::invalid_argument("longitude is not finite");
    }
    lat_ = lat_deg;
    lon_ = (lat_deg == 90.0 || lat_deg == -90.0) ? 0.0 : normalize_lon(lon_deg);
}

GeoPoint GeoPoint::normalized(double lat_deg, double lon_deg) {
    double lat = std::fmod(lat_deg, 360.0);
    if (lat > 180.0) lat -= 360.0;
    if (lat < -180.0) lat += 360.0;
    // Reflect across the poles: walking past a pole lands on the far meridian.
    if (lat > 90.0) {
        lat = 180.0 - lat;
        lon_deg += 180.0;
    } else if (lat < -90.0) {
        lat = -180.0 - lat;
        lon_deg += 180.0;
    }
    return GeoPoint(lat, normalize_lon(lon_deg));
}

double great_circle_km(double lat1_deg, double lon1_deg, double lat2_deg, double lon2_deg) {
    const double lat1 = deg_to_rad(lat1_deg);
    const double lat2 = deg_to_rad(lat2_deg);
    const double dlat = deg_to_rad(lat2_deg - lat1_deg);
    const double dlon = deg_to_rad(lon2_deg - lon1_deg);

    const double sin_lat = std::sin(dlat * 0.5);
    const double sin_lon = std::sin(dlon * 0.5);
    double a = sin_lat * sin_lat + std::cos(lat1) * std::cos(lat2) * sin_lon * sin_lon;
    if (a > 1.0) a = 1.0;
    if (a < 0.0) a = 0.0;

    return 2.0 * kEarthRadiusKm * std::atan2(std::sqrt(a), std::sqrt(1.0 - a));
}

double great_circle_km(const GeoPoint& a, const GeoPoint& b) {
    return great_circle_km(a.lat(), a.lon(), b.lat(), b.lon());
}

GeoPoint destination_point(const GeoPoint& origin, double bearing_deg, double distance_km) {
    if (distance_km < 0.0) {
        throw std::invalid_argument("destination_point: negative distance");
    }
    const double delta = distance_km / kEarthRadiusKm;
    const double theta = deg_to_rad(bearing_deg);
    const double phi1 = deg_to_rad(origin.lat());
    const double lam1 = deg_to_rad(origin.lon());

    double sin_phi2 = std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(theta);
    if (sin_phi2 > 1.0) sin_phi2 = 1.0;
    if (sin_phi2 < -1.0) sin_phi2 = -1.0;
    const double phi2 = std::asin(sin_phi2);
    const double lam2 = lam1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                                          std::cos(delta) - std::sin(phi1) * sin_phi2);

    return GeoPoint::normalized(rad_to_deg(phi2), rad_to_deg(lam2));
}

double initial_bearing_deg(const GeoPoint& a, const GeoPoint& b) {
    const double phi1 = deg_to_rad(a.lat());
    const double phi2 = deg_to_rad(b.lat());
    const double dlon = deg_to_rad(b.lon() - a.lon());

    const double y = std::sin(dlon) * std::cos(phi2);
    const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlon);
    const double theta = std::atan2(y, x);

    return std::fmod(rad_to_deg(theta) + 360.0, 360.0);
}

} // namespace geofindr
