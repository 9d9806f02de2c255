#pragma once

#include "geofindr/catalog.hpp"
#include "geofindr/probe.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <string_view>

namespace geofindr {

namespace rng {

/// Bijective 64-bit mixer; the core of the deterministic noise stream.
uint64_t splitmix64(uint64_t x);

/// FNV-1a over the bytes of s, for folding identifiers into the stream.
uint64_t fnv1a64(std::string_view s);

/// Map a hash to a double in [0, 1), platform independent.
double to_unit(uint64_t h);

/// Deterministic unit draw keyed by (seed, tag, id, index).
double unit_draw(uint64_t seed, std::string_view tag, std::string_view id, uint64_t index);

} // namespace rng

/**
 * A synthetic internet: landmarks with known positions, a VM with a true
 * position, and a delay model
 *
 *   rtt(a, b) = offset(a) + offset(b) + distance(a, b) / speed
 *
 * perturbed multiplicatively by +-jitter and floored at 0.01 ms. Offsets
 * model per-host processing delay; speed is the effective propagation
 * speed in km per ms.
 */
struct SimWorld {
    Catalog catalog;                          // synthetic landmarks
    std::map<std::string, double> offsets_ms; // per-landmark processing delay
    GeoPoint vm_position{0.0, 0.0};
    double vm_offset_ms = 0.0;
    double jitter = 0.0;                      // fraction of the base delay
    double speed_km_per_ms = 100.0;
    double loopback_rtt_ms = 0.05;
    double proxy_rtt_ms = 0.5;

    /// Processing delay of a landmark (0 when unknown).
    double offset_ms(const std::string& id) const;

    /// Jitter-free delay between the VM and one landmark.
    double base_vm_rtt_ms(const Landmark& landmark) const;

    /// Jitter-free delay between two landmarks.
    double base_mesh_rtt_ms(const Landmark& a, const Landmark& b) const;
};

constexpr double kMinSimRttMs = 0.01;

/// Parameters for generating a random world around a center point.
struct WorldSpec {
    int count = 300;
    GeoPoint center{48.8566, 2.3522};
    double half_width_km = 1000.0;  // east-west half extent of the box
    double half_height_km = 1000.0; // north-south half extent of the box
    double offset_min_ms = 0.0;
    double offset_max_ms = 0.0;
    double jitter = 0.1;
    double speed_km_per_ms = 100.0;
    GeoPoint vm_position{48.8566, 2.3522};
    double vm_offset_ms = 0.0;
};

/**
 * Generate a world of `count` landmarks spread uniformly over the box,
 * with ids "sim-0001".. and offsets drawn uniformly from
 * [offset_min_ms, offset_max_ms]. Same seed, same world.
 */
SimWorld generate_world(const WorldSpec& spec, uint64_t seed);

/// Full directed landmark mesh under the world's delay model.
MeshMatrix simulate_mesh(const SimWorld& world, uint64_t seed);

SimWorld load_scenario(const std::filesystem::path& path);
void save_scenario(const SimWorld& world, const std::filesystem::path& path);

/**
 * Probe backend that answers from a SimWorld. Repeated measurements of
 * one landmark draw successive jitter values, but the stream depends only
 * on (seed, landmark, query index), never on timing or thread schedule.
 */
class SimBackend final : public ProbeBackend {
public:
    SimBackend(SimWorld world, uint64_t seed);

    std::optional<DelaySample> measure(const Landmark& landmark) override;
    InCloudReading measure_in_cloud(const std::optional<std::string>& proxy_address) override;
    std::string name() const override { return "sim"; }

    const SimWorld& world() const { return world_; }
    uint64_t seed() const { return seed_; }

private:
    SimWorld world_;
    uint64_t seed_ = 0;
    std::mutex mutex_;
    std::map<std::string, uint64_t> query_counts_;
    uint64_t in_cloud_counter_ = 0;
};

} // namespace geofindr
