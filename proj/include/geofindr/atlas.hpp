#pragma once

#include "geofindr/catalog.hpp"

#include <optional>
#include <string>

namespace geofindr {

struct AtlasOptions {
    std::string base_url;            // scheme://host[:port], no trailing slash
    int page_size = 500;
    std::optional<int> max_anchors;  // stop early; mainly for tests
};

/// Measurement-network base URL: GEOFINDR_ATLAS_URL when set, otherwise
/// the public RIPE Atlas API.
std::string atlas_base_url();

/**
 * Download the anchor list from GET {base_url}/api/v2/anchors/ and turn it
 * into a landmark catalog. Pagination follows the "next" links. Anchors
 * that are disabled or lack an IPv4 address or geometry are skipped.
 * Landmark ids are "anchor-<id>". Throws on transport errors, non-200
 * responses, or malformed payloads.
 */
Catalog fetch_anchors(const AtlasOptions& options);

/**
 * Download the anchor-to-anchor delay table from
 * GET {base_url}/api/v2/anchor-mesh/, paginated the same way. Each result
 * row carries src_id, dst_id and a list of rtt_ms values; the minimum
 * becomes the mesh entry. Rows whose endpoints are not in the catalog are
 * skipped. Throws on transport errors or malformed payloads.
 */
MeshMatrix fetch_anchor_mesh(const AtlasOptions& options, const Catalog& catalog);

} // namespace geofindr
