#include "geofindr/probe.hpp"

#include <json.hpp>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/ip.h>
#include <netinet/ip_icmp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace geofindr {

namespace {

constexpr const char* kPermissionHint =
    "icmp backend: cannot open an ICMP socket (run as root, grant "
    "CAP_NET_RAW, or widen net.ipv4.ping_group_range)";

uint16_t icmp_checksum(const void* data, std::size_t len) {
    const auto* words = static_cast<const uint16_t*>(data);
    uint32_t sum = 0;
    while (len > 1) {
        sum += *words++;
        len -= 2;
    }
    if (len == 1) sum += *reinterpret_cast<const uint8_t*>(words);
    sum = (sum >> 16) + (sum & 0xffff);
    sum += sum >> 16;
    return static_cast<uint16_t>(~sum);
}

int open_icmp_socket(bool& dgram_out) {
    int fd = ::socket(AF_INET, SOCK_RAW, IPPROTO_ICMP);
    if (fd >= 0) {
        dgram_out = false;
        return fd;
    }
    if (errno != EPERM && errno != EACCES) {
        throw std::runtime_error(std::string("icmp backend: socket() failed: ") +
                                 std::strerror(errno));
    }
    fd = ::socket(AF_INET, SOCK_DGRAM, IPPROTO_ICMP);
    if (fd >= 0) {
        dgram_out = true;
        return fd;
    }
    throw std::runtime_error(kPermissionHint);
}

std::optional<sockaddr_in> resolve_ipv4(const std::string& host) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_RAW;
    addrinfo* result = nullptr;
    if (::getaddrinfo(host.c_str(), nullptr, &hints, &result) != 0 || result == nullptr) {
        return std::nullopt;
    }
    sockaddr_in addr{};
    std::memcpy(&addr, result->ai_addr, sizeof(addr));
    ::freeaddrinfo(result);
    return addr;
}

/// One echo request/reply round trip; empty on timeout or socket error.
std::optional<double> ping_once(int fd, bool dgram, const sockaddr_in& addr,
                                uint16_t ident, uint16_t seq,
                                std::chrono::milliseconds timeout) {
    constexpr int kPayload = IcmpBackend::kPayloadBytes;
    unsigned char packet[sizeof(icmphdr) + kPayload];
    std::memset(packet, 0xa5, sizeof(packet));
    auto* hdr = reinterpret_cast<icmphdr*>(packet);
    hdr->type = ICMP_ECHO;
    hdr->code = 0;
    hdr->un.echo.id = htons(ident);
    hdr->un.echo.sequence = htons(seq);
    hdr->checksum = 0;
    hdr->checksum = icmp_checksum(packet, sizeof(packet));

    auto start = std::chrono::steady_clock::now();
    if (::sendto(fd, packet, sizeof(packet), 0,
                 reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0) {
        return std::nullopt;
    }

    auto deadline = start + timeout;
    unsigned char buf[2048];
    for (;;) {
        auto now = std::chrono::steady_clock::now();
        auto remain = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
        if (remain.count() <= 0) return std::nullopt;

        pollfd pfd{fd, POLLIN, 0};
        int ready = ::poll(&pfd, 1, static_cast<int>(remain.count()));
        if (ready <= 0) return std::nullopt;

        ssize_t got = ::recv(fd, buf, sizeof(buf), 0);
        auto received = std::chrono::steady_clock::now();
        if (got <= 0) return std::nullopt;

        const unsigned char* icmp = buf;
        std::size_t icmp_len = static_cast<std::size_t>(got);
        if (!dgram) {
            // Raw sockets deliver the IP header too.
            if (icmp_len < sizeof(iphdr)) continue;
            const auto* ip = reinterpret_cast<const iphdr*>(buf);
            std::size_t ihl = static_cast<std::size_t>(ip->ihl) * 4;
            if (icmp_len < ihl + sizeof(icmphdr)) continue;
            icmp += ihl;
            icmp_len -= ihl;
        } else if (icmp_len < sizeof(icmphdr)) {
            continue;
        }

        const auto* reply = reinterpret_cast<const icmphdr*>(icmp);
        if (reply->type != ICMP_ECHOREPLY) continue;
        // Datagram sockets rewrite the identifier, so match it only on raw.
        if (!dgram && ntohs(reply->un.echo.id) != ident) continue;
        if (ntohs(reply->un.echo.sequence) != seq) continue;

        return std::chrono::duration<double, std::milli>(received - start).count();
    }
}

} // namespace

IcmpBackend::IcmpBackend() {
    bool dgram = false;
    int fd = open_icmp_socket(dgram);
    ::close(fd);
    use_dgram_ = dgram;
}

std::optional<double> IcmpBackend::ping_min_ms(const std::string& host, int count) {
    auto addr = resolve_ipv4(host);
    if (!addr) return std::nullopt;

    bool dgram = use_dgram_;
    int fd = ::socket(AF_INET, dgram ? SOCK_DGRAM : SOCK_RAW, IPPROTO_ICMP);
    if (fd < 0) return std::nullopt;

    uint16_t ident = static_cast<uint16_t>(::getpid() & 0xffff);
    std::optional<double> best;
    for (int i = 0; i < count; ++i) {
        auto rtt = ping_once(fd, dgram, *addr, ident, static_cast<uint16_t>(i),
                             kTimeoutPerPing);
        if (rtt && (!best || *rtt < *best)) best = rtt;
    }
    ::close(fd);
    return best;
}

std::optional<DelaySample> IcmpBackend::measure(const Landmark& landmark) {
    if (!landmark.ip) return std::nullopt;
    auto rtt = ping_min_ms(*landmark.ip, kPingsPerLandmark);
    if (!rtt) return std::nullopt;
    DelaySample sample;
    sample.landmark_id = landmark.id;
    sample.rtt_ms = *rtt;
    sample.attempts = kPingsPerLandmark;
    sample.taken_at = std::chrono::steady_clock::now();
    return sample;
}

InCloudReading IcmpBackend::measure_in_cloud(const std::optional<std::string>& proxy_address) {
    InCloudReading reading;
    reading.loopback_rtt_ms = ping_min_ms("127.0.0.1", kPingsPerLandmark).value_or(0.0);
    if (proxy_address) {
        reading.proxy_rtt_ms = ping_min_ms(*proxy_address, kPingsPerLandmark);
    }
    return reading;
}

ReplayBackend::ReplayBackend(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open replay file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("bad replay file " + path.string() + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("delays") || !j["delays"].is_object()) {
        throw std::runtime_error("replay file " + path.string() +
                                 " needs a top-level \"delays\" object");
    }
    for (const auto& [id, value] : j["delays"].items()) {
        Track track;
        if (value.is_number()) {
            track.values.push_back(value.get<double>());
        } else if (value.is_array()) {
            for (const auto& v : value) {
                if (!v.is_number()) {
                    throw std::runtime_error("replay delays for " + id + " must be numbers");
                }
                track.values.push_back(v.get<double>());
            }
        } else {
            throw std::runtime_error("replay delays for " + id +
                                     " must be a number or an array of numbers");
        }
        if (track.values.empty()) continue;
        for (double v : track.values) {
            if (!(v > 0.0)) {
                throw std::runtime_error("replay delays for " + id + " must be positive");
            }
        }
        tracks_[id] = std::move(track);
    }
    in_cloud_.loopback_rtt_ms = 0.05;
    if (auto ic = j.find("in_cloud"); ic != j.end() && ic->is_object()) {
        if (auto lb = ic->find("loopback_rtt_ms"); lb != ic->end() && lb->is_number()) {
            in_cloud_.loopback_rtt_ms = lb->get<double>();
        }
        if (auto px = ic->find("proxy_rtt_ms"); px != ic->end() && px->is_number()) {
            in_cloud_.proxy_rtt_ms = px->get<double>();
        }
    }
}

std::optional<DelaySample> ReplayBackend::measure(const Landmark& landmark) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = tracks_.find(landmark.id);
    if (it == tracks_.end()) return std::nullopt;
    Track& track = it->second;
    std::size_t index = std::min(track.next, track.values.size() - 1);
    ++track.next;
    DelaySample sample;
    sample.landmark_id = landmark.id;
    sample.rtt_ms = track.values[index];
    sample.attempts = 1;
    sample.taken_at = std::chrono::steady_clock::now();
    return sample;
}

InCloudReading ReplayBackend::measure_in_cloud(const std::optional<std::string>& proxy_address) {
    InCloudReading reading;
    reading.loopback_rtt_ms = in_cloud_.loopback_rtt_ms;
    if (proxy_address) reading.proxy_rtt_ms = in_cloud_.proxy_rtt_ms;
    return reading;
}

} // namespace geofindr
