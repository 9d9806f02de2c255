#pragma once

#include "geofindr/catalog.hpp"
#include "geofindr/probe.hpp"

#include <map>
#include <string>
#include <vector>

namespace geofindr {

/**
 * Vote counts accumulated over the measured landmarks. A landmark's vote
 * count says how many measurements it sits "at a similar delay" to; the
 * landmarks with the maximum count form the sector the VM most plausibly
 * occupies.
 */
struct SimilarityTally {
    std::map<std::string, int> votes;
    int max_votes = 0;
    int contributing_audits = 0; // measured landmarks whose interval caught anyone
};

/// Interval of delays considered similar to a measured delay:
/// [measured * (1 - p/100), measured * (1 + p/100)], bounds inclusive,
/// lower bound clamped to zero when p exceeds 100.
struct SimilarityInterval {
    double low_ms = 0.0;
    double high_ms = 0.0;
    bool contains(double rtt_ms) const { return rtt_ms >= low_ms && rtt_ms <= high_ms; }
};

SimilarityInterval similarity_interval(double measured_rtt_ms, double interval_percent);

/**
 * Ids of the landmarks whose mesh delay to `anchor_id` is similar to the
 * delay measured from the VM to that anchor. Sorted, unique, and never
 * containing the anchor itself. Mesh entries are considered in both
 * directions.
 */
std::vector<std::string> similar_for_one(const MeshMatrix& mesh, const std::string& anchor_id,
                                         double measured_rtt_ms, double interval_percent);

/// Accumulate similarity votes over every measured landmark.
SimilarityTally tally_similars(const MeshMatrix& mesh, const std::vector<DelaySample>& samples,
                               double interval_percent);

/// All landmarks holding the maximum vote count, sorted by id. Empty when
/// no votes were cast.
std::vector<Landmark> select_lms(const SimilarityTally& tally, const Catalog& catalog);

} // namespace geofindr
