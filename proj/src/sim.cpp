#include "geofindr/sim.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace geofindr {

namespace rng {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

double to_unit(uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double unit_draw(uint64_t seed, std::string_view tag, std::string_view id, uint64_t index) {
    uint64_t h = seed;
    h = splitmix64(h ^ fnv1a64(tag));
    h = splitmix64(h ^ fnv1a64(id));
    h = splitmix64(h ^ index);
    return to_unit(h);
}

} // namespace rng

namespace {

double jittered(double base_ms, double jitter, double u) {
    double rtt = base_ms * (1.0 + (2.0 * u - 1.0) * jitter);
    return std::max(rtt, kMinSimRttMs);
}

} // namespace

double SimWorld::offset_ms(const std::string& id) const {
    auto it = offsets_ms.find(id);
    return it == offsets_ms.end() ? 0.0 : it->second;
}

double SimWorld::base_vm_rtt_ms(const Landmark& landmark) const {
    return vm_offset_ms + offset_ms(landmark.id) +
           great_circle_km(vm_position, landmark.position) / speed_km_per_ms;
}

double SimWorld::base_mesh_rtt_ms(const Landmark& a, const Landmark& b) const {
    return offset_ms(a.id) + offset_ms(b.id) +
           great_circle_km(a.position, b.position) / speed_km_per_ms;
}

SimWorld generate_world(const WorldSpec& spec, uint64_t seed) {
    if (spec.count <= 0) throw std::invalid_argument("generate_world: count must be positive");
    if (spec.half_width_km < 0.0 || spec.half_height_km < 0.0) {
        throw std::invalid_argument("generate_world: extents must be non-negative");
    }
    if (spec.offset_max_ms < spec.offset_min_ms) {
        throw std::invalid_argument("generate_world: offset range is inverted");
    }
    if (!(spec.speed_km_per_ms > 0.0)) {
        throw std::invalid_argument("generate_world: speed must be positive");
    }
    if (spec.jitter < 0.0 || spec.jitter >= 1.0) {
        throw std::invalid_argument("generate_world: jitter must be in [0, 1)");
    }

    const double km_per_deg = kPi * kEarthRadiusKm / 180.0;
    const double cos_lat = std::cos(deg_to_rad(spec.center.lat()));
    std::vector<Landmark> landmarks;
    std::map<std::string, double> offsets;
    landmarks.reserve(static_cast<std::size_t>(spec.count));
    for (int i = 1; i <= spec.count; ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "sim-%04d", i);
        double ux = rng::unit_draw(seed, "world-x", id, 0);
        double uy = rng::unit_draw(seed, "world-y", id, 0);
        double uo = rng::unit_draw(seed, "world-o", id, 0);
        double dx = (2.0 * ux - 1.0) * spec.half_width_km;
        double dy = (2.0 * uy - 1.0) * spec.half_height_km;
        double lat = spec.center.lat() + dy / km_per_deg;
        double lon = cos_lat > 1e-9 ? spec.center.lon() + dx / (km_per_deg * cos_lat)
                                    : spec.center.lon();
        Landmark lm;
        lm.id = id;
        lm.position = GeoPoint::normalized(lat, lon);
        landmarks.push_back(std::move(lm));
        offsets[id] = spec.offset_min_ms + uo * (spec.offset_max_ms - spec.offset_min_ms);
    }

    SimWorld world;
    world.catalog = Catalog(std::move(landmarks), CatalogSource::synthetic);
    world.offsets_ms = std::move(offsets);
    world.vm_position = spec.vm_position;
    world.vm_offset_ms = spec.vm_offset_ms;
    world.jitter = spec.jitter;
    world.speed_km_per_ms = spec.speed_km_per_ms;
    return world;
}

MeshMatrix simulate_mesh(const SimWorld& world, uint64_t seed) {
    std::vector<MeshEntry> entries;
    const auto& lms = world.catalog.landmarks();
    entries.reserve(lms.size() * (lms.size() - 1));
    for (const Landmark& src : lms) {
        for (const Landmark& dst : lms) {
            if (src.id == dst.id) continue;
            double u = rng::unit_draw(seed, "mesh", src.id + "\x1f" + dst.id, 0);
            entries.push_back({src.id, dst.id,
                               jittered(world.base_mesh_rtt_ms(src, dst), world.jitter, u)});
        }
    }
    return MeshMatrix(std::move(entries));
}

SimWorld load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad scenario " + path.string() + ": " + e.what());
    }

    SimWorld world;
    try {
        const auto& vm = j.at("vm");
        world.vm_position = GeoPoint(vm.at("lat").get<double>(), vm.at("lon").get<double>());
        world.vm_offset_ms = vm.value("offset_ms", 0.0);
        world.jitter = j.value("jitter", 0.0);
        world.speed_km_per_ms = j.value("speed_km_per_ms", 100.0);
        world.loopback_rtt_ms = j.value("loopback_rtt_ms", 0.05);
        world.proxy_rtt_ms = j.value("proxy_rtt_ms", 0.5);

        std::vector<Landmark> landmarks;
        for (const auto& item : j.at("landmarks")) {
            Landmark lm;
            lm.id = item.at("id").get<std::string>();
            lm.position =
                GeoPoint(item.at("lat").get<double>(), item.at("lon").get<double>());
            if (item.contains("ip")) lm.ip = item["ip"].get<std::string>();
            landmarks.push_back(lm);
            world.offsets_ms[lm.id] = item.value("offset_ms", 0.0);
        }
        world.catalog = Catalog(std::move(landmarks), CatalogSource::synthetic);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad scenario " + path.string() + ": " + e.what());
    }
    if (world.jitter < 0.0 || world.jitter >= 1.0) {
        throw std::runtime_error("bad scenario " + path.string() + ": jitter out of [0, 1)");
    }
    if (!(world.speed_km_per_ms > 0.0)) {
        throw std::runtime_error("bad scenario " + path.string() + ": speed must be positive");
    }
    return world;
}

void save_scenario(const SimWorld& world, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["vm"] = {{"lat", world.vm_position.lat()},
               {"lon", world.vm_position.lon()},
               {"offset_ms", world.vm_offset_ms}};
    j["jitter"] = world.jitter;
    j["speed_km_per_ms"] = world.speed_km_per_ms;
    j["loopback_rtt_ms"] = world.loopback_rtt_ms;
    j["proxy_rtt_ms"] = world.proxy_rtt_ms;
    j["landmarks"] = nlohmann::ordered_json::array();
    for (const Landmark& lm : world.catalog) {
        nlohmann::ordered_json item;
        item["id"] = lm.id;
        item["lat"] = lm.position.lat();
        item["lon"] = lm.position.lon();
        item["offset_ms"] = world.offset_ms(lm.id);
        if (lm.ip) item["ip"] = *lm.ip;
        j["landmarks"].push_back(std::move(item));
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

SimBackend::SimBackend(SimWorld world, uint64_t seed)
    : world_(std::move(world)), seed_(seed) {}

std::optional<DelaySample> SimBackend::measure(const Landmark& landmark) {
    const Landmark* lm = world_.catalog.find(landmark.id);
    if (lm == nullptr) return std::nullopt;

    uint64_t index;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        index = query_counts_[landmark.id]++;
    }
    double u = rng::unit_draw(seed_, "probe", landmark.id, index);
    DelaySample sample;
    sample.landmark_id = landmark.id;
    sample.rtt_ms = jittered(world_.base_vm_rtt_ms(*lm), world_.jitter, u);
    sample.attempts = 1;
    sample.taken_at = std::chrono::steady_clock::now();
    return sample;
}

InCloudReading SimBackend::measure_in_cloud(const std::optional<std::string>& proxy_address) {
    uint64_t index;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        index = in_cloud_counter_++;
    }
    InCloudReading reading;
    reading.loopback_rtt_ms =
        jittered(world_.loopback_rtt_ms, world_.jitter,
                 rng::unit_draw(seed_, "loopback", "vm", index));
    if (proxy_address) {
        reading.proxy_rtt_ms =
            jittered(world_.proxy_rtt_ms, world_.jitter,
                     rng::unit_draw(seed_, "proxy", *proxy_address, index));
    }
    return reading;
}

} // namespace geofindr
