#include "geofindr/atlas.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <stdexcept>

namespace geofindr {

namespace {

using nlohmann::json;

/// Reduce an absolute "next" link to the path + query httplib expects.
std::string path_of(const std::string& url) {
    auto scheme = url.find("://");
    if (scheme == std::string::npos) return url;
    auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return "/";
    return url.substr(slash);
}

json get_json(httplib::Client& client, const std::string& path) {
    auto res = client.Get(path);
    if (!res) {
        throw std::runtime_error("atlas: request failed for " + path + " (" +
                                 httplib::to_string(res.error()) + ")");
    }
    if (res->status != 200) {
        throw std::runtime_error("atlas: HTTP " + std::to_string(res->status) + " for " + path);
    }
    json j = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
        throw std::runtime_error("atlas: malformed JSON from " + path);
    }
    return j;
}

/// Walk one paginated listing, feeding each result row to sink. Sink
/// returns false to stop early.
template <typename Sink>
void paginate(httplib::Client& client, std::string path, Sink&& sink) {
    while (!path.empty()) {
        json page = get_json(client, path);
        auto results = page.find("results");
        if (results == page.end() || !results->is_array()) {
            throw std::runtime_error("atlas: page without results array at " + path);
        }
        for (const json& row : *results) {
            if (!sink(row)) return;
        }
        auto next = page.find("next");
        if (next == page.end() || next->is_null()) break;
        if (!next->is_string()) throw std::runtime_error("atlas: bad next link at " + path);
        path = path_of(next->get<std::string>());
    }
}

httplib::Client make_client(const std::string& base_url) {
    httplib::Client client(base_url);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(30, 0);
    client.set_follow_location(true);
    return client;
}

} // namespace

std::string atlas_base_url() {
    if (const char* env = std::getenv("GEOFINDR_ATLAS_URL"); env && *env) return env;
    return "https://atlas.ripe.net";
}

Catalog fetch_anchors(const AtlasOptions& options) {
    httplib::Client client = make_client(options.base_url);
    std::vector<Landmark> landmarks;
    std::string path = "/api/v2/anchors/?page_size=" + std::to_string(options.page_size);
    paginate(client, path, [&](const json& row) {
        if (options.max_anchors && landmarks.size() >= static_cast<std::size_t>(*options.max_anchors)) {
            return false;
        }
        if (!row.is_object()) return true;
        if (row.value("is_disabled", false)) return true;
        auto id = row.find("id");
        auto ip = row.find("ip_v4");
        auto geometry = row.find("geometry");
        if (id == row.end() || !id->is_number_integer()) return true;
        if (ip == row.end() || !ip->is_string() || ip->get<std::string>().empty()) return true;
        if (geometry == row.end() || !geometry->is_object()) return true;
        auto coords = geometry->find("coordinates");
        if (coords == geometry->end() || !coords->is_array() || coords->size() < 2) return true;
        if (!(*coords)[0].is_number() || !(*coords)[1].is_number()) return true;
        double lon = (*coords)[0].get<double>();
        double lat = (*coords)[1].get<double>();
        if (lat < -90.0 || lat > 90.0) return true;

        Landmark lm;
        lm.id = "anchor-" + std::to_string(id->get<long long>());
        lm.position = GeoPoint(lat, lon);
        lm.ip = ip->get<std::string>();
        landmarks.push_back(std::move(lm));
        return true;
    });
    if (landmarks.empty()) throw std::runtime_error("atlas: no usable anchors returned");
    return Catalog(std::move(landmarks), CatalogSource::ripe_atlas);
}

MeshMatrix fetch_anchor_mesh(const AtlasOptions& options, const Catalog& catalog) {
    httplib::Client client = make_client(options.base_url);
    std::vector<MeshEntry> entries;
    std::string path = "/api/v2/anchor-mesh/?page_size=" + std::to_string(options.page_size);
    paginate(client, path, [&](const json& row) {
        if (!row.is_object()) return true;
        auto src = row.find("src_id");
        auto dst = row.find("dst_id");
        auto rtts = row.find("rtt_ms");
        if (src == row.end() || !src->is_number_integer()) return true;
        if (dst == row.end() || !dst->is_number_integer()) return true;
        if (rtts == row.end() || !rtts->is_array() || rtts->empty()) return true;

        double min_rtt = 0.0;
        bool have = false;
        for (const json& v : *rtts) {
            if (!v.is_number()) continue;
            double rtt = v.get<double>();
            if (!(rtt > 0.0)) continue;
            if (!have || rtt < min_rtt) min_rtt = rtt;
            have = true;
        }
        if (!have) return true;

        MeshEntry e;
        e.src = "anchor-" + std::to_string(src->get<long long>());
        e.dst = "anchor-" + std::to_string(dst->get<long long>());
        e.rtt_ms = min_rtt;
        if (!catalog.find(e.src) || !catalog.find(e.dst)) return true;
        entries.push_back(std::move(e));
        return true;
    });
    if (entries.empty()) throw std::runtime_error("atlas: no usable mesh rows returned");
    return MeshMatrix(std::move(entries));
}

} // namespace geofindr
