#include "geofindr/audit.hpp"

#include <doctest.h>

#include "geofindr/sim.hpp"
#include "temp_dir.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

using namespace geofindr;
using testutil::TempDir;

namespace {

constexpr uint64_t kSeed = 20240901;

WorldSpec paris_spec(int count, double jitter) {
    WorldSpec spec;
    spec.count = count;
    spec.center = GeoPoint{48.8566, 2.3522};
    spec.half_width_km = 1200.0;
    spec.half_height_km = 1200.0;
    spec.jitter = jitter;
    spec.vm_position = GeoPoint{48.8566, 2.3522}; // the VM really is in Paris
    return spec;
}

struct SimFixture {
    SimWorld world;
    MeshMatrix mesh;

    explicit SimFixture(const WorldSpec& spec, uint64_t seed = kSeed)
        : world(generate_world(spec, seed)), mesh(simulate_mesh(world, seed)) {}

    AuditReport run(AuditConfig config, uint64_t seed = kSeed) const {
        SimBackend backend(world, seed);
        return run_audit(config, world.catalog, mesh, backend);
    }
};

AuditConfig declared_at(const GeoPoint& p) {
    AuditConfig config;
    config.declared_position = p;
    return config;
}

} // namespace

TEST_CASE("AuditConfig::validate rejects out-of-range settings") {
    AuditConfig config;
    CHECK_NOTHROW(config.validate());

    AuditConfig bad = config;
    bad.tolerance_km = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = config;
    bad.zone_size_km = -5.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = config;
    bad.nb_lm = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = config;
    bad.interval_percent = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = config;
    bad.max_iterations = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("honest declaration converges and passes") {
    SimFixture fx(paris_spec(250, 0.05));
    AuditReport report = fx.run(declared_at(fx.world.vm_position));

    CHECK(report.converged);
    CHECK_FALSE(report.lie_detected);
    CHECK_FALSE(report.error.has_value());
    CHECK(report.exit_code() == 0);
    CHECK(report.nb_iterations >= 1);
    CHECK(report.nb_iterations <= report.config.max_iterations);
    CHECK(report.distance_estimated_declared_km <= report.config.tolerance_km);
    CHECK(great_circle_km(report.estimated_position, fx.world.vm_position) < 100.0);
    CHECK(report.backend == "sim");
    CHECK(report.audit_time_s >= 0.0);
    CHECK(report.in_cloud.loopback_rtt_ms > 0.0);
    CHECK_FALSE(report.in_cloud.proxy_rtt_ms.has_value()); // no proxy configured
}

TEST_CASE("a distant false declaration is detected") {
    SimFixture fx(paris_spec(250, 0.05));
    // VM claims Tokyo while sitting in Paris.
    AuditReport report = fx.run(declared_at(GeoPoint{35.6762, 139.6503}));

    CHECK(report.converged);
    CHECK(report.lie_detected);
    CHECK(report.exit_code() == 2);
    CHECK(report.distance_estimated_declared_km > 5000.0);
    CHECK(great_circle_km(report.estimated_position, fx.world.vm_position) < 100.0);

    // The first zone had no landmarks near Tokyo, so it must have grown.
    REQUIRE_FALSE(report.traces.empty());
    CHECK(report.traces.front().effective_zone_km > report.config.zone_size_km);
}

TEST_CASE("landmark starvation aborts before measuring") {
    SimFixture fx(paris_spec(10, 0.0));
    AuditConfig config = declared_at(fx.world.vm_position);
    config.nb_lm = 16; // more than the catalog holds
    AuditReport report = fx.run(config);

    CHECK_FALSE(report.converged);
    REQUIRE(report.error.has_value());
    CHECK(report.error->find("starvation") != std::string::npos);
    CHECK(report.nb_iterations == 0);
    CHECK(report.traces.empty());
    CHECK(report.exit_code() == 3);
    // The report still answers with the declared position.
    CHECK(report.estimated_position == config.declared_position);
}

TEST_CASE("an empty mesh aborts with a diagnostic") {
    SimFixture fx(paris_spec(30, 0.0));
    AuditConfig config = declared_at(fx.world.vm_position);
    SimBackend backend(fx.world, kSeed);
    AuditReport report = run_audit(config, fx.world.catalog, MeshMatrix{}, backend);
    CHECK_FALSE(report.converged);
    REQUIRE(report.error.has_value());
    CHECK(report.error->find("mesh") != std::string::npos);
    CHECK(report.exit_code() == 3);
}

TEST_CASE("too few successful probes aborts the iteration with a partial trace") {
    SimFixture fx(paris_spec(40, 0.0));
    AuditConfig config = declared_at(fx.world.vm_position);

    // A backend that answers for only two landmarks.
    struct TwoAnswers final : ProbeBackend {
        const SimWorld& world;
        std::set<std::string> allowed;
        explicit TwoAnswers(const SimWorld& w) : world(w) {
            allowed = {w.catalog.landmarks()[0].id, w.catalog.landmarks()[1].id};
        }
        std::optional<DelaySample> measure(const Landmark& lm) override {
            if (allowed.count(lm.id) == 0) return std::nullopt;
            DelaySample s;
            s.landmark_id = lm.id;
            s.rtt_ms = world.base_vm_rtt_ms(*world.catalog.find(lm.id));
            s.attempts = 3;
            return s;
        }
        InCloudReading measure_in_cloud(const std::optional<std::string>&) override {
            return {};
        }
        std::string name() const override { return "two-answers"; }
    } backend(fx.world);

    AuditReport report = run_audit(config, fx.world.catalog, fx.mesh, backend);
    CHECK_FALSE(report.converged);
    REQUIRE(report.error.has_value());
    CHECK(report.error->find("multilateration needs 3") != std::string::npos);
    REQUIRE(report.nb_iterations == 1);
    const IterationTrace& trace = report.traces.front();
    CHECK_FALSE(trace.estimate.has_value());
    CHECK(trace.samples.size() <= 2);
    CHECK(report.exit_code() == 3);
}

TEST_CASE("iteration traces record the audit trail in order") {
    SimFixture fx(paris_spec(250, 0.05));
    AuditConfig config = declared_at(GeoPoint{52.52, 13.405}); // Berlin declared
    AuditReport report = fx.run(config);

    REQUIRE_FALSE(report.traces.empty());
    CHECK(report.traces.front().initial_position == config.declared_position);

    int expected_index = 1;
    GeoPoint expected_start = config.declared_position;
    for (const IterationTrace& trace : report.traces) {
        CHECK(trace.index == expected_index++);
        CHECK(trace.initial_position == expected_start);
        CHECK(trace.lm_a_ids.size() == static_cast<std::size_t>(config.nb_lm));
        CHECK(trace.effective_zone_km >= config.zone_size_km);
        CHECK(trace.interval_percent_used >= config.interval_percent);

        // Samples are sorted by landmark id and drawn from LM_A.
        std::set<std::string> lm_a(trace.lm_a_ids.begin(), trace.lm_a_ids.end());
        for (std::size_t i = 0; i < trace.samples.size(); ++i) {
            CHECK(lm_a.count(trace.samples[i].landmark_id) == 1);
            if (i > 0) {
                CHECK(trace.samples[i - 1].landmark_id < trace.samples[i].landmark_id);
            }
        }

        REQUIRE(trace.estimate.has_value());
        CHECK(trace.step_km ==
              doctest::Approx(great_circle_km(trace.initial_position,
                                              trace.estimate->position)));
        expected_start = trace.estimate->position;
    }

    // The last step is the converging one.
    CHECK(report.traces.back().step_km < config.tolerance_km);
    CHECK(report.estimated_position == report.traces.back().estimate->position);
    CHECK(report.smre_km == report.traces.back().estimate->smre_km);
}

TEST_CASE("the sector moves toward the truth when the declaration lies") {
    SimFixture fx(paris_spec(250, 0.05));
    AuditReport report = fx.run(declared_at(GeoPoint{40.4168, -3.7038})); // Madrid

    REQUIRE(report.converged);
    double d_declared = great_circle_km(GeoPoint{40.4168, -3.7038}, fx.world.vm_position);
    double d_final = great_circle_km(report.estimated_position, fx.world.vm_position);
    CHECK(d_final < d_declared);
    CHECK(d_final < 100.0);
}

TEST_CASE("proxy delays are measured once per iteration and summarized") {
    SimFixture fx(paris_spec(250, 0.05));
    AuditConfig config = declared_at(fx.world.vm_position);
    config.proxy_address = "proxy.internal";
    AuditReport report = fx.run(config);

    REQUIRE(report.in_cloud.proxy_rtt_ms.has_value());
    CHECK(*report.in_cloud.proxy_rtt_ms > 0.0);
    // Median of multiplicative jitter around 0.5 ms stays in the band.
    CHECK(*report.in_cloud.proxy_rtt_ms >= 0.5 * (1.0 - fx.world.jitter));
    CHECK(*report.in_cloud.proxy_rtt_ms <= 0.5 * (1.0 + fx.world.jitter));
}

TEST_CASE("max_iterations caps the loop and reports non-convergence") {
    SimFixture fx(paris_spec(250, 0.05));
    AuditConfig config = declared_at(GeoPoint{35.6762, 139.6503});
    config.max_iterations = 1;
    config.tolerance_km = 1.0; // the first hop is way over 1 km
    AuditReport report = fx.run(config);

    CHECK_FALSE(report.converged);
    CHECK(report.nb_iterations == 1);
    // Non-convergence wins over lie detection in the exit code.
    CHECK(report.distance_estimated_declared_km > config.tolerance_km);
    CHECK(report.exit_code() == 3);
}

TEST_CASE("a huge tolerance converges in exactly one iteration") {
    SimFixture fx(paris_spec(250, 0.05));
    AuditConfig config = declared_at(GeoPoint{35.6762, 139.6503});
    config.tolerance_km = kMaxArcKm; // every step is under half a circumference
    AuditReport report = fx.run(config);
    CHECK(report.converged);
    CHECK(report.nb_iterations == 1);
    CHECK_FALSE(report.lie_detected); // nothing exceeds this tolerance
    CHECK(report.exit_code() == 0);
}

TEST_CASE("evaluate_against_truth fills the accuracy block") {
    SimFixture fx(paris_spec(250, 0.05));
    AuditReport report = fx.run(declared_at(GeoPoint{35.6762, 139.6503}));
    evaluate_against_truth(report, fx.world.vm_position);

    REQUIRE(report.truth.has_value());
    const TruthEvaluation& truth = *report.truth;
    CHECK(truth.true_position == fx.world.vm_position);
    CHECK(truth.distance_real_estimated_km ==
          doctest::Approx(great_circle_km(fx.world.vm_position, report.estimated_position)));
    // Paris to Tokyo, the size of the lie.
    CHECK(truth.distance_real_declared_km == doctest::Approx(9711.72482).epsilon(1e-4));
    CHECK(truth.satisfactory == (truth.distance_real_estimated_km < 50.0));
    CHECK(truth.lie_detected == report.lie_detected);
}

TEST_CASE("audits are reproducible: same seed, byte-identical report") {
    SimFixture fx(paris_spec(200, 0.1));
    AuditConfig config = declared_at(GeoPoint{50.0, 8.0});
    config.proxy_address = "p1";

    AuditReport r1 = fx.run(config, 77);
    AuditReport r2 = fx.run(config, 77);
    evaluate_against_truth(r1, fx.world.vm_position);
    evaluate_against_truth(r2, fx.world.vm_position);

    // audit_time_s is wall clock and legitimately differs; neutralize it
    // and require everything else to serialize identically.
    auto j1 = report_to_json(r1);
    auto j2 = report_to_json(r2);
    j1["audit_time_s"] = 0.0;
    j2["audit_time_s"] = 0.0;
    CHECK(j1.dump() == j2.dump());

    AuditReport r3 = fx.run(config, 78); // different probe seed
    auto j3 = report_to_json(r3);
    j3["audit_time_s"] = 0.0;
    CHECK(j1.dump() != j3.dump());
}

TEST_CASE("report JSON carries the full structure") {
    SimFixture fx(paris_spec(120, 0.05));
    AuditConfig config = declared_at(fx.world.vm_position);
    config.proxy_address = "gw";
    AuditReport report = fx.run(config);
    evaluate_against_truth(report, fx.world.vm_position);

    auto j = report_to_json(report);
    CHECK(j["config"]["declared_position"]["lat"] == doctest::Approx(48.8566));
    CHECK(j["config"]["tolerance_km"] == 100.0);
    CHECK(j["config"]["nb_lm"] == 16);
    CHECK(j["config"]["backend"] == "sim");
    CHECK(j["config"]["proxy_address"] == "gw");
    CHECK(j.contains("estimated_position"));
    CHECK(j.contains("converged"));
    CHECK(j.contains("audit_time_s"));
    CHECK(j.contains("distance_estimated_declared_km"));
    CHECK(j.contains("lie_detected"));
    CHECK(j.contains("smre_km"));
    CHECK(j["in_cloud"].contains("loopback_rtt_ms"));
    CHECK(j["in_cloud"].contains("proxy_rtt_ms"));
    CHECK(j["truth"].contains("satisfactory"));
    CHECK_FALSE(j.contains("error"));

    REQUIRE(j["traces"].is_array());
    REQUIRE(!j["traces"].empty());
    const auto& t = j["traces"][0];
    CHECK(t.contains("iteration"));
    CHECK(t.contains("initial_position"));
    CHECK(t.contains("effective_zone_km"));
    CHECK(t.contains("interval_percent_used"));
    CHECK(t.contains("lm_a_ids"));
    CHECK(t.contains("samples"));
    CHECK(t.contains("lm_s_ids"));
    CHECK(t.contains("estimate"));
    CHECK(t.contains("step_km"));
    CHECK(t["samples"][0].contains("landmark_id"));
    CHECK(t["samples"][0].contains("rtt_ms"));
    CHECK(t["samples"][0].contains("attempts"));
    CHECK(t["estimate"].contains("position"));
    CHECK(t["estimate"].contains("contributing"));

    TempDir dir;
    write_report(report, dir.file("report.json"));
    CHECK(std::filesystem::file_size(dir.file("report.json")) > 100);
}

TEST_CASE("zone growth is capped so starvation inside a zone terminates") {
    // All landmarks cluster far from the declared sector, fewer than nb_lm
    // of them overall would trip starvation, so give it enough landmarks
    // but verify the zone still expands to cover them rather than looping.
    SimFixture fx(paris_spec(40, 0.0));
    AuditConfig config = declared_at(GeoPoint{-45.0, -170.0}); // remote south Pacific
    config.nb_lm = 16;
    AuditReport report = fx.run(config);
    REQUIRE_FALSE(report.traces.empty());
    // The zone grew beyond its initial size to reach the European cluster.
    CHECK(report.traces.front().effective_zone_km >= 16000.0);
}
