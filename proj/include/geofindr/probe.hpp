#pragma once

#include "geofindr/catalog.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace geofindr {

/// One round-trip delay measurement toward a landmark.
struct DelaySample {
    std::string landmark_id;
    double rtt_ms = 0.0;
    int attempts = 0; // echo requests sent to obtain this sample
    std::chrono::steady_clock::time_point taken_at{};
};

/// Delays measured from inside the audited VM itself.
struct InCloudReading {
    double loopback_rtt_ms = 0.0;
    std::optional<double> proxy_rtt_ms; // absent when no proxy was given
};

/**
 * Source of delay measurements. Implementations must be safe to call from
 * multiple threads and deterministic where their nature allows.
 */
class ProbeBackend {
public:
    virtual ~ProbeBackend() = default;

    /// Measure the round trip toward one landmark. Empty on failure
    /// (timeout, unreachable, unknown id).
    virtual std::optional<DelaySample> measure(const Landmark& landmark) = 0;

    /// Measure loopback delay and, when an address is given, the delay to
    /// the local proxy hop.
    virtual InCloudReading measure_in_cloud(const std::optional<std::string>& proxy_address) = 0;

    virtual std::string name() const = 0;
};

/**
 * Live ICMP echo backend. Sends 3 echo requests with a 64 byte payload per
 * landmark and keeps the minimum round trip, which best approximates the
 * propagation delay. Each request waits up to 2 seconds.
 *
 * Needs a raw ICMP socket; falls back to an unprivileged ICMP datagram
 * socket where the kernel allows it. Construction throws with a
 * remediation hint when neither is available.
 */
class IcmpBackend final : public ProbeBackend {
public:
    IcmpBackend();

    std::optional<DelaySample> measure(const Landmark& landmark) override;
    InCloudReading measure_in_cloud(const std::optional<std::string>& proxy_address) override;
    std::string name() const override { return "icmp"; }

    static constexpr int kPingsPerLandmark = 3;
    static constexpr int kPayloadBytes = 64;
    static constexpr std::chrono::milliseconds kTimeoutPerPing{2000};

private:
    std::optional<double> ping_min_ms(const std::string& host, int count);

    bool use_dgram_ = false;
};

/**
 * Replays delays recorded in a JSON file:
 *
 *   {"delays": {"lm-1": 12.3, "lm-2": [12.3, 11.9]},
 *    "in_cloud": {"loopback_rtt_ms": 0.05, "proxy_rtt_ms": 0.5}}
 *
 * Successive measurements of the same landmark consume successive array
 * values; the last value repeats once exhausted. Landmarks absent from the
 * file fail to measure.
 */
class ReplayBackend final : public ProbeBackend {
public:
    explicit ReplayBackend(const std::filesystem::path& path);

    std::optional<DelaySample> measure(const Landmark& landmark) override;
    InCloudReading measure_in_cloud(const std::optional<std::string>& proxy_address) override;
    std::string name() const override { return "replay"; }

private:
    struct Track {
        std::vector<double> values;
        std::size_t next = 0;
    };

    std::mutex mutex_;
    std::map<std::string, Track> tracks_;
    InCloudReading in_cloud_;
};

} // namespace geofindr
