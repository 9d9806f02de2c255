#pragma once

#include "geofindr/catalog.hpp"

#include <cstddef>
#include <filesystem>

namespace geofindr {

struct CatalogLoad {
    Catalog catalog;
    std::size_t malformed = 0; // lines skipped during parsing
};

/**
 * Load a landmark catalog from a JSONL file: one object per line with
 * "id" (string), "lat", "lon" (numbers) and optional "ip" (string).
 * Malformed lines (bad JSON, missing fields, out-of-range coordinates)
 * are skipped and counted. Throws if the file is unreadable, if no line
 * parses, or if two lines share an id.
 */
CatalogLoad load_catalog(const std::filesystem::path& path,
                         CatalogSource source = CatalogSource::file);

/// Write a catalog as JSONL, one landmark per line, sorted by id.
void save_catalog(const Catalog& catalog, const std::filesystem::path& path);

struct MeshLoad {
    MeshMatrix mesh;
    std::size_t kept = 0;
    std::size_t dropped = 0; // rows referencing unknown ids or non-positive rtts
};

/**
 * Load a landmark mesh from CSV with header "src_id,dst_id,rtt_ms".
 * Rows whose endpoints are not both in the catalog, or whose rtt is not a
 * positive number, are dropped and counted. Duplicate directed pairs keep
 * the minimum rtt. Throws if the file is unreadable, the header is wrong,
 * or no row survives.
 */
MeshLoad load_mesh(const std::filesystem::path& path, const Catalog& catalog);

/// Write a mesh as CSV sorted by (src_id, dst_id); inverse of load_mesh.
void save_mesh(const MeshMatrix& mesh, const std::filesystem::path& path);

} // namespace geofindr
