#include "geofindr/probe.hpp"

#include <doctest.h>

#include "temp_dir.hpp"

#include <stdexcept>
#include <string>

using namespace geofindr;
using testutil::TempDir;

namespace {

Landmark lm(const std::string& id) { return Landmark{id, GeoPoint{0, 0}, std::nullopt}; }

} // namespace

TEST_CASE("ReplayBackend replays scalar and sequence delays") {
    TempDir dir;
    auto path = dir.write("replay.json", R"({
        "delays": {"lm-1": 12.5, "lm-2": [10.0, 11.0, 12.0]},
        "in_cloud": {"loopback_rtt_ms": 0.04, "proxy_rtt_ms": 0.66}
    })");
    ReplayBackend backend(path);
    CHECK(backend.name() == "replay");

    auto s = backend.measure(lm("lm-1"));
    REQUIRE(s.has_value());
    CHECK(s->landmark_id == "lm-1");
    CHECK(s->rtt_ms == doctest::Approx(12.5));

    // Scalar delays repeat forever.
    CHECK(backend.measure(lm("lm-1"))->rtt_ms == doctest::Approx(12.5));

    // Sequences advance, then hold the last value.
    CHECK(backend.measure(lm("lm-2"))->rtt_ms == doctest::Approx(10.0));
    CHECK(backend.measure(lm("lm-2"))->rtt_ms == doctest::Approx(11.0));
    CHECK(backend.measure(lm("lm-2"))->rtt_ms == doctest::Approx(12.0));
    CHECK(backend.measure(lm("lm-2"))->rtt_ms == doctest::Approx(12.0));
}

TEST_CASE("ReplayBackend fails cleanly on unknown landmarks") {
    TempDir dir;
    auto path = dir.write("replay.json", R"({"delays": {"lm-1": 5.0}})");
    ReplayBackend backend(path);
    CHECK_FALSE(backend.measure(lm("other")).has_value());
}

TEST_CASE("ReplayBackend in-cloud readings") {
    TempDir dir;
    auto path = dir.write("replay.json", R"({
        "delays": {"lm-1": 5.0},
        "in_cloud": {"loopback_rtt_ms": 0.07, "proxy_rtt_ms": 0.9}
    })");
    ReplayBackend backend(path);

    auto bare = backend.measure_in_cloud(std::nullopt);
    CHECK(bare.loopback_rtt_ms == doctest::Approx(0.07));
    CHECK_FALSE(bare.proxy_rtt_ms.has_value()); // no proxy asked for

    auto with_proxy = backend.measure_in_cloud(std::string("198.51.100.1"));
    CHECK(with_proxy.loopback_rtt_ms == doctest::Approx(0.07));
    REQUIRE(with_proxy.proxy_rtt_ms.has_value());
    CHECK(*with_proxy.proxy_rtt_ms == doctest::Approx(0.9));
}

TEST_CASE("ReplayBackend defaults the loopback delay") {
    TempDir dir;
    auto path = dir.write("replay.json", R"({"delays": {"lm-1": 5.0}})");
    ReplayBackend backend(path);
    auto reading = backend.measure_in_cloud(std::nullopt);
    CHECK(reading.loopback_rtt_ms == doctest::Approx(0.05));
}

TEST_CASE("ReplayBackend rejects bad recordings") {
    TempDir dir;
    CHECK_THROWS(ReplayBackend(dir.file("missing.json")));
    CHECK_THROWS(ReplayBackend(dir.write("nojson.json", "hello")));
    CHECK_THROWS(ReplayBackend(dir.write("negative.json", R"({"delays":{"x":-1.0}})")));
    CHECK_THROWS(ReplayBackend(dir.write("zero.json", R"({"delays":{"x":0.0}})")));
    CHECK_THROWS(ReplayBackend(dir.write("notnum.json", R"({"delays":{"x":"fast"}})")));
}

TEST_CASE("ReplayBackend treats an empty sequence as an unreachable landmark") {
    TempDir dir;
    ReplayBackend backend(dir.write("emptyseq.json", R"({"delays":{"x":[]}})"));
    CHECK_FALSE(backend.measure(lm("x")).has_value());
}

TEST_CASE("IcmpBackend either works or explains what is missing") {
    // Socket permissions differ per host; both outcomes are legitimate,
    // but a failure must carry remediation guidance.
    try {
        IcmpBackend backend;
        CHECK(backend.name() == "icmp");
        // Loopback is always reachable when sockets are available at all.
        auto reading = backend.measure_in_cloud(std::nullopt);
        CHECK(reading.loopback_rtt_ms > 0.0);
        CHECK(reading.loopback_rtt_ms < 1000.0);

        // No address, no measurement.
        CHECK_FALSE(backend.measure(lm("no-ip")).has_value());
    } catch (const std::runtime_error& e) {
        std::string message = e.what();
        CHECK(message.find("CAP_NET_RAW") != std::string::npos);
    }
}

TEST_CASE("IcmpBackend constants match the probing policy") {
    CHECK(IcmpBackend::kPingsPerLandmark == 3);
    CHECK(IcmpBackend::kPayloadBytes == 64);
    CHECK(IcmpBackend::kTimeoutPerPing.count() == 2000);
}
