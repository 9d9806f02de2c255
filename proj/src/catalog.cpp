#include "geofindr/catalog.hpp"

#include <algorithm>
#include <stdexcept>

namespace geofindr {

const char* to_string(CatalogSource source) {
    switch (source) {
    case CatalogSource::ripe_atlas: return "ripe_atlas";
    case CatalogSource::file: return "file";
    case CatalogSource::synthetic: return "synthetic";
    }
    return "unknown";
}

Catalog::Catalog(std::vector<Landmark> landmarks, CatalogSource source)
    : landmarks_(std::move(landmarks)), source_(source) {
    std::sort(landmarks_.begin(), landmarks_.end(),
              [](const Landmark& a, const Landmark& b) { return a.id < b.id; });
    auto dup = std::adjacent_find(
        landmarks_.begin(), landmarks_.end(),
        [](const Landmark& a, const Landmark& b) { return a.id == b.id; });
    if (dup != landmarks_.end()) {
        throw std::invalid_argument("catalog: duplicate landmark id \"" + dup->id + "\"");
    }
}

const Landmark* Catalog::find(const std::string& id) const {
    auto it = std::lower_bound(
        landmarks_.begin(), landmarks_.end(), id,
        [](const Landmark& lm, const std::string& key) { return lm.id < key; });
    if (it == landmarks_.end() || it->id != id) return nullptr;
    return &*it;
}

Catalog near(const Catalog& catalog, const GeoPoint& center, double radius_km) {
    std::vector<Landmark> kept;
    for (const Landmark& lm : catalog) {
        if (great_circle_km(center, lm.position) < radius_km) kept.push_back(lm);
    }
    return Catalog(std::move(kept), catalog.source());
}

Catalog exclude_zone(const Catalog& catalog, const GeoPoint& center, double radius_km) {
    std::vector<Landmark> kept;
    for (const Landmark& lm : catalog) {
        if (great_circle_km(center, lm.position) >= radius_km) kept.push_back(lm);
    }
    return Catalog(std::move(kept), catalog.source());
}

MeshMatrix::MeshMatrix(std::vector<MeshEntry> entries) {
    for (const MeshEntry& e : entries) {
        if (!(e.rtt_ms > 0.0)) {
            throw std::invalid_argument("mesh: non-positive rtt for " + e.src + " -> " + e.dst);
        }
    }
    // Collapse duplicate directed pairs to their minimum before building
    // the two lookup orientations.
    std::sort(entries.begin(), entries.end(), [](const MeshEntry& a, const MeshEntry& b) {
        if (a.src != b.src) return a.src < b.src;
        if (a.dst != b.dst) return a.dst < b.dst;
        return a.rtt_ms < b.rtt_ms;
    });
    entries.erase(std::unique(entries.begin(), entries.end(),
                              [](const MeshEntry& a, const MeshEntry& b) {
                                  return a.src == b.src && a.dst == b.dst;
                              }),
                  entries.end());
    for (const MeshEntry& e : entries) {
        rows_[e.src].emplace_back(e.dst, e.rtt_ms);
        cols_[e.dst].emplace_back(e.src, e.rtt_ms);
    }
    for (auto& [src, row] : rows_) std::sort(row.begin(), row.end());
    for (auto& [dst, col] : cols_) std::sort(col.begin(), col.end());
    entry_count_ = entries.size();
}

namespace {

std::optional<double> lookup(
    const std::map<std::string, std::vector<std::pair<std::string, double>>>& table,
    const std::string& outer, const std::string& inner) {
    auto it = table.find(outer);
    if (it == table.end()) return std::nullopt;
    const auto& vec = it->second;
    auto pos = std::lower_bound(vec.begin(), vec.end(), inner,
                                [](const std::pair<std::string, double>& p,
                                   const std::string& key) { return p.first < key; });
    if (pos == vec.end() || pos->first != inner) return std::nullopt;
    return pos->second;
}

} // namespace

std::optional<double> MeshMatrix::rtt(const std::string& a, const std::string& b) const {
    if (auto fwd = lookup(rows_, a, b)) return fwd;
    return lookup(rows_, b, a);
}

const std::vector<std::pair<std::string, double>>* MeshMatrix::row(const std::string& src) const {
    auto it = rows_.find(src);
    return it == rows_.end() ? nullptr : &it->second;
}

const std::vector<std::pair<std::string, double>>* MeshMatrix::column(const std::string& dst) const {
    auto it = cols_.find(dst);
    return it == cols_.end() ? nullptr : &it->second;
}

std::vector<MeshEntry> MeshMatrix::sorted_entries() const {
    std::vector<MeshEntry> out;
    out.reserve(entry_count_);
    for (const auto& [src, row] : rows_) {
        for (const auto& [dst, rtt] : row) out.push_back({src, dst, rtt});
    }
    return out;
}

} // namespace geofindr
