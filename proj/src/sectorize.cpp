#include "geofindr/sectorize.hpp"

#include <algorithm>

namespace geofindr {

SimilarityInterval similarity_interval(double measured_rtt_ms, double interval_percent) {
    double spread = measured_rtt_ms * interval_percent / 100.0;
    SimilarityInterval interval;
    interval.low_ms = std::max(0.0, measured_rtt_ms - spread);
    interval.high_ms = measured_rtt_ms + spread;
    return interval;
}

std::vector<std::string> similar_for_one(const MeshMatrix& mesh, const std::string& anchor_id,
                                         double measured_rtt_ms, double interval_percent) {
    SimilarityInterval interval = similarity_interval(measured_rtt_ms, interval_percent);

    // Candidates are every landmark with a mesh entry to or from the anchor.
    std::vector<std::string> candidates;
    if (const auto* row = mesh.row(anchor_id)) {
        for (const auto& [dst, rtt] : *row) candidates.push_back(dst);
    }
    if (const auto* col = mesh.column(anchor_id)) {
        for (const auto& [src, rtt] : *col) candidates.push_back(src);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<std::string> similar;
    for (const std::string& candidate : candidates) {
        if (candidate == anchor_id) continue;
        auto rtt = mesh.rtt(anchor_id, candidate);
        if (rtt && interval.contains(*rtt)) similar.push_back(candidate);
    }
    return similar;
}

SimilarityTally tally_similars(const MeshMatrix& mesh, const std::vector<DelaySample>& samples,
                               double interval_percent) {
    SimilarityTally tally;
    for (const DelaySample& sample : samples) {
        auto similar = similar_for_one(mesh, sample.landmark_id, sample.rtt_ms, interval_percent);
        if (!similar.empty()) ++tally.contributing_audits;
        for (const std::string& id : similar) {
            int count = ++tally.votes[id];
            tally.max_votes = std::max(tally.max_votes, count);
        }
    }
    return tally;
}

std::vector<Landmark> select_lms(const SimilarityTally& tally, const Catalog& catalog) {
    std::vector<Landmark> selected;
    if (tally.max_votes <= 0) return selected;
    for (const auto& [id, count] : tally.votes) {
        if (count != tally.max_votes) continue;
        if (const Landmark* lm = catalog.find(id)) selected.push_back(*lm);
    }
    return selected; // map iteration is already id sorted
}

} // namespace geofindr
