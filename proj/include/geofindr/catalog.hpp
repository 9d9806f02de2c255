#pragma once

#include "geofindr/geodesy.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace geofindr {

/// A measurement reference with a verified position (RIPE Atlas anchor,
/// or a synthetic equivalent in simulations).
struct Landmark {
    std::string id;
    GeoPoint position;
    std::optional<std::string> ip; // absent for synthetic landmarks

    bool operator==(const Landmark&) const = default;
};

enum class CatalogSource { ripe_atlas, file, synthetic };

const char* to_string(CatalogSource source);

/**
 * Immutable, deterministically ordered set of landmarks.
 *
 * Landmarks are kept sorted ascending by id regardless of ingestion order,
 * so two loads of the same source always iterate identically.
 */
class Catalog {
public:
    Catalog() = default;
    Catalog(std::vector<Landmark> landmarks, CatalogSource source);

    const std::vector<Landmark>& landmarks() const { return landmarks_; }
    CatalogSource source() const { return source_; }
    std::size_t size() const { return landmarks_.size(); }
    bool empty() const { return landmarks_.empty(); }

    /// Binary search by id; nullptr when absent.
    const Landmark* find(const std::string& id) const;

    auto begin() const { return landmarks_.begin(); }
    auto end() const { return landmarks_.end(); }

private:
    std::vector<Landmark> landmarks_;
    CatalogSource source_ = CatalogSource::file;
};

/// Landmarks strictly closer than radius_km to center, order preserved.
Catalog near(const Catalog& catalog, const GeoPoint& center, double radius_km);

/// Complement of near(): everything at distance >= radius_km.
Catalog exclude_zone(const Catalog& catalog, const GeoPoint& center, double radius_km);

/// One directed landmark-to-landmark RTT observation.
struct MeshEntry {
    std::string src;
    std::string dst;
    double rtt_ms = 0.0;
};

/**
 * Landmark-to-landmark RTT table.
 *
 * Entries are directed and need not be symmetric or complete; duplicate
 * directed pairs collapse to the minimum RTT (the best propagation-delay
 * proxy). RTTs are strictly positive. Immutable once constructed, safe to
 * share across threads.
 */
class MeshMatrix {
public:
    MeshMatrix() = default;
    explicit MeshMatrix(std::vector<MeshEntry> entries);

    /// Forward (a -> b) entry, falling back to the reverse (b -> a);
    /// RTT is symmetric to first order.
    std::optional<double> rtt(const std::string& a, const std::string& b) const;

    /// Sorted (dst, rtt) pairs of directed entries out of src. May be null.
    const std::vector<std::pair<std::string, double>>* row(const std::string& src) const;
    /// Sorted (src, rtt) pairs of directed entries into dst. May be null.
    const std::vector<std::pair<std::string, double>>* column(const std::string& dst) const;

    std::size_t entry_count() const { return entry_count_; }
    bool empty() const { return entry_count_ == 0; }

    /// All directed entries sorted by (src, dst), for serialization.
    std::vector<MeshEntry> sorted_entries() const;

private:
    std::map<std::string, std::vector<std::pair<std::string, double>>> rows_;
    std::map<std::string, std::vector<std::pair<std::string, double>>> cols_;
    std::size_t entry_count_ = 0;
};

} // namespace geofindr
