#include "geofindr/catalog_io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace geofindr {

namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

bool parse_catalog_line(const std::string& line, Landmark& out) {
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (!j.is_object()) return false;
    auto id = j.find("id");
    auto lat = j.find("lat");
    auto lon = j.find("lon");
    if (id == j.end() || !id->is_string()) return false;
    if (lat == j.end() || !lat->is_number()) return false;
    if (lon == j.end() || !lon->is_number()) return false;
    if (id->get<std::string>().empty()) return false;
    double lat_v = lat->get<double>();
    double lon_v = lon->get<double>();
    if (lat_v < -90.0 || lat_v > 90.0) return false;
    if (lon_v < -360.0 || lon_v > 360.0) return false;
    out.id = id->get<std::string>();
    out.position = GeoPoint(lat_v, lon_v);
    out.ip.reset();
    if (auto ip = j.find("ip"); ip != j.end() && ip->is_string()) {
        out.ip = ip->get<std::string>();
    }
    return true;
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

} // namespace

CatalogLoad load_catalog(const std::filesystem::path& path, CatalogSource source) {
    std::ifstream in = open_input(path);
    std::vector<Landmark> landmarks;
    std::size_t malformed = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (blank(line)) continue;
        Landmark lm;
        if (parse_catalog_line(line, lm)) {
            landmarks.push_back(std::move(lm));
        } else {
            ++malformed;
        }
    }
    if (landmarks.empty()) {
        throw std::runtime_error("no valid landmark records in " + path.string());
    }
    return CatalogLoad{Catalog(std::move(landmarks), source), malformed};
}

void save_catalog(const Catalog& catalog, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    for (const Landmark& lm : catalog) {
        nlohmann::ordered_json j;
        j["id"] = lm.id;
        j["lat"] = lm.position.lat();
        j["lon"] = lm.position.lon();
        if (lm.ip) j["ip"] = *lm.ip;
        out << j.dump() << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

MeshLoad load_mesh(const std::filesystem::path& path, const Catalog& catalog) {
    std::ifstream in = open_input(path);
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("empty mesh file " + path.string());
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "src_id,dst_id,rtt_ms") {
        throw std::runtime_error("bad mesh header in " + path.string() +
                                 ": expected src_id,dst_id,rtt_ms");
    }
    std::vector<MeshEntry> entries;
    std::size_t dropped = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (blank(line)) continue;
        auto c1 = line.find(',');
        auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos) {
            ++dropped;
            continue;
        }
        MeshEntry e;
        e.src = line.substr(0, c1);
        e.dst = line.substr(c1 + 1, c2 - c1 - 1);
        std::string rtt_text = line.substr(c2 + 1);
        const char* first = rtt_text.data();
        const char* last = first + rtt_text.size();
        auto [ptr, ec] = std::from_chars(first, last, e.rtt_ms);
        if (ec != std::errc() || ptr != last || !(e.rtt_ms > 0.0)) {
            ++dropped;
            continue;
        }
        if (!catalog.find(e.src) || !catalog.find(e.dst)) {
            ++dropped;
            continue;
        }
        entries.push_back(std::move(e));
    }
    if (entries.empty()) {
        throw std::runtime_error("no usable mesh rows in " + path.string());
    }
    std::size_t kept = entries.size();
    return MeshLoad{MeshMatrix(std::move(entries)), kept, dropped};
}

void save_mesh(const MeshMatrix& mesh, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << "src_id,dst_id,rtt_ms\n";
    out << std::setprecision(17);
    for (const MeshEntry& e : mesh.sorted_entries()) {
        out << e.src << ',' << e.dst << ',' << e.rtt_ms << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

} // namespace geofindr
