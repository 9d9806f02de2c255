#include "geofindr/geodesy.hpp"

#include <doctest.h>

#include <stdexcept>
#include <unordered_set>

using namespace geofindr;

// Reference distances computed with an independent haversine implementation
// (R = 6371 km). Frozen here; the code must reproduce them.
TEST_CASE("great_circle_km matches reference distances") {
    const GeoPoint paris{48.8566, 2.3522};
    const GeoPoint london{51.5074, -0.1278};
    const GeoPoint evry{48.6238, 2.4296};
    const GeoPoint tokyo{35.6762, 139.6503};

    CHECK(great_circle_km(paris, london) == doctest::Approx(343.55606).epsilon(1e-6));
    CHECK(great_circle_km(paris, evry) == doctest::Approx(26.50110).epsilon(1e-5));
    CHECK(great_circle_km(paris, tokyo) == doctest::Approx(9711.72482).epsilon(1e-6));
    CHECK(great_circle_km({40.7128, -74.0060}, {-33.8688, 151.2093}) ==
          doctest::Approx(15988.75551).epsilon(1e-6));
    CHECK(great_circle_km({0, 0}, {0, 1}) == doctest::Approx(111.1949266).epsilon(1e-6));
}

TEST_CASE("great_circle_km endpoints and extremes") {
    const GeoPoint a{12.34, 56.78};
    CHECK(great_circle_km(a, a) == 0.0);

    // Antipodal points sit half a circumference apart.
    CHECK(great_circle_km({0, 0}, {0, 180}) == doctest::Approx(20015.0867960).epsilon(1e-9));
    CHECK(great_circle_km({90, 0}, {-90, 0}) == doctest::Approx(kMaxArcKm).epsilon(1e-9));
    CHECK(great_circle_km({0, 0}, {0, 180}) <= kMaxArcKm);
}

TEST_CASE("great_circle_km is symmetric and respects the triangle inequality") {
    const GeoPoint pts[] = {{48.8566, 2.3522}, {-33.8688, 151.2093}, {64.1466, -21.9426},
                            {0.0, 0.0},        {35.6762, 139.6503}};
    for (const auto& a : pts) {
        for (const auto& b : pts) {
            CHECK(great_circle_km(a, b) == doctest::Approx(great_circle_km(b, a)));
            for (const auto& c : pts) {
                CHECK(great_circle_km(a, c) <=
                      great_circle_km(a, b) + great_circle_km(b, c) + 1e-9);
            }
        }
    }
}

TEST_CASE("normalize_lon folds into [-180, 180)") {
    CHECK(normalize_lon(0.0) == 0.0);
    CHECK(normalize_lon(190.0) == doctest::Approx(-170.0));
    CHECK(normalize_lon(-190.0) == doctest::Approx(170.0));
    CHECK(normalize_lon(180.0) == doctest::Approx(-180.0));
    CHECK(normalize_lon(-180.0) == doctest::Approx(-180.0));
    CHECK(normalize_lon(540.0) == doctest::Approx(-180.0));
    CHECK(normalize_lon(361.0) == doctest::Approx(1.0));
}

TEST_CASE("GeoPoint validates latitude and normalizes longitude") {
    CHECK_THROWS_AS(GeoPoint(90.0001, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(GeoPoint(-91.0, 0.0), std::invalid_argument);

    CHECK(GeoPoint(10.0, 190.0).lon() == doctest::Approx(-170.0));
    CHECK(GeoPoint(10.0, 190.0) == GeoPoint(10.0, -170.0));

    // All longitudes collapse at the poles.
    CHECK(GeoPoint(90.0, 123.0).lon() == 0.0);
    CHECK(GeoPoint(90.0, 123.0) == GeoPoint(90.0, -45.0));
}

TEST_CASE("GeoPoint::normalized reflects across the poles") {
    // 100 deg north of the equator = 10 deg past the pole, far meridian.
    const GeoPoint over = GeoPoint::normalized(100.0, 10.0);
    CHECK(over.lat() == doctest::Approx(80.0));
    CHECK(over.lon() == doctest::Approx(-170.0));

    const GeoPoint under = GeoPoint::normalized(-100.0, 10.0);
    CHECK(under.lat() == doctest::Approx(-80.0));
    CHECK(under.lon() == doctest::Approx(-170.0));

    // In-range input folds only the longitude.
    const GeoPoint plain = GeoPoint::normalized(50.0, 370.0);
    CHECK(plain.lat() == doctest::Approx(50.0));
    CHECK(plain.lon() == doctest::Approx(10.0));

    // Folding never throws and always lands in range.
    for (double lat = -400.0; lat <= 400.0; lat += 37.0) {
        for (double lon = -700.0; lon <= 700.0; lon += 53.0) {
            const GeoPoint p = GeoPoint::normalized(lat, lon);
            CHECK(p.lat() >= -90.0);
            CHECK(p.lat() <= 90.0);
            CHECK(p.lon() >= -180.0);
            CHECK(p.lon() < 180.0);
        }
    }
}

TEST_CASE("normalized keeps the point fixed on the sphere") {
    // Walking 100 deg up a meridian equals walking 80 deg up the opposite one:
    // both name the same physical point, so distances to it must agree.
    const GeoPoint folded = GeoPoint::normalized(100.0, 10.0);
    const GeoPoint probe{20.0, 30.0};
    CHECK(great_circle_km(folded, probe) ==
          doctest::Approx(great_circle_km(GeoPoint{80.0, -170.0}, probe)));
}

TEST_CASE("destination_point walks known paths") {
    // Quarter circumference east along the equator.
    const GeoPoint east = destination_point({0, 0}, 90.0, 10007.5433980);
    CHECK(east.lat() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(east.lon() == doctest::Approx(90.0));

    // Due north by 5 degrees of meridian (5 * pi * R / 180 km).
    const GeoPoint north = destination_point({10, 20}, 0.0, 555.9746332);
    CHECK(north.lat() == doctest::Approx(15.0));
    CHECK(north.lon() == doctest::Approx(20.0));

    // Zero distance is the identity.
    const GeoPoint stay = destination_point({48.8566, 2.3522}, 123.0, 0.0);
    CHECK(stay.lat() == doctest::Approx(48.8566));
    CHECK(stay.lon() == doctest::Approx(2.3522));

    CHECK_THROWS_AS(destination_point({0, 0}, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("destination_point agrees with great_circle_km") {
    const GeoPoint origins[] = {{48.8566, 2.3522}, {-33.8688, 151.2093}, {0.0, -179.5}};
    for (const auto& origin : origins) {
        for (double bearing = 0.0; bearing < 360.0; bearing += 45.0) {
            for (double dist : {1.0, 250.0, 3000.0, 9000.0}) {
                const GeoPoint dest = destination_point(origin, bearing, dist);
                CHECK(great_circle_km(origin, dest) == doctest::Approx(dist).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("initial_bearing_deg points the right way") {
    CHECK(initial_bearing_deg({0, 0}, {10, 0}) == doctest::Approx(0.0));
    CHECK(initial_bearing_deg({0, 0}, {0, 90}) == doctest::Approx(90.0));
    CHECK(initial_bearing_deg({0, 0}, {-10, 0}) == doctest::Approx(180.0));
    CHECK(initial_bearing_deg({0, 0}, {0, -90}) == doctest::Approx(270.0));

    // Round trip: walking the bearing for the distance reaches the target.
    const GeoPoint a{48.8566, 2.3522};
    const GeoPoint b{-33.8688, 151.2093};
    const GeoPoint reach = destination_point(a, initial_bearing_deg(a, b), great_circle_km(a, b));
    CHECK(great_circle_km(reach, b) < 1e-6);
}

TEST_CASE("GeoPoint hashes respect equality") {
    const std::hash<GeoPoint> h;
    CHECK(h(GeoPoint{10, 190}) == h(GeoPoint{10, -170}));
    CHECK(h(GeoPoint{90, 5}) == h(GeoPoint{90, -120}));

    // Binary-exact longitudes so the +-360 fold is bit-stable.
    std::unordered_set<GeoPoint> set;
    set.insert({48.5, 2.25});
    set.insert({48.5, 2.25 + 360.0});
    CHECK(set.size() == 1);
}
