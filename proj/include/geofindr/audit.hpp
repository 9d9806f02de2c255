#pragma once

#include "geofindr/catalog.hpp"
#include "geofindr/estimate.hpp"
#include "geofindr/probe.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace geofindr {

/// Estimates within this distance of the true position count as
/// satisfactory when ground truth is available.
constexpr double kSatisfactoryKm = 50.0;

struct AuditConfig {
    GeoPoint declared_position{0.0, 0.0};
    double tolerance_km = 100.0;     // convergence + lie-detection threshold
    double zone_size_km = 1000.0;    // initial landmark search radius
    int nb_lm = 16;                  // audit landmarks per iteration
    double interval_percent = 35.0;  // similarity interval half-width
    int max_iterations = 20;
    std::optional<std::string> proxy_address;

    /// Throws std::invalid_argument when a bound is violated.
    void validate() const;
};

/// Everything observable about one pass of the audit loop.
struct IterationTrace {
    int index = 0;                        // 1-based
    GeoPoint initial_position{0.0, 0.0};  // sector at iteration start
    double effective_zone_km = 0.0;       // zone radius after growth
    double interval_percent_used = 0.0;   // after any widening retries
    std::vector<std::string> lm_a_ids;    // dispersed audit set, selection order
    std::vector<DelaySample> samples;     // successful LM_A measurements, id sorted
    std::vector<std::string> lm_s_ids;    // similar set, id sorted
    std::optional<PositionEstimate> estimate; // absent when the iteration aborted
    double step_km = 0.0; // distance from initial_position to the new estimate
};

/// Accuracy record filled in controlled runs where the true position is
/// known (simulation; never inferable in production).
struct TruthEvaluation {
    GeoPoint true_position{0.0, 0.0};
    double distance_real_estimated_km = 0.0; // accuracy
    double distance_real_declared_km = 0.0;  // lie extent
    bool satisfactory = false;               // accuracy < 50 km
    bool lie_detected = false;
};

struct AuditReport {
    AuditConfig config;
    std::string backend;
    GeoPoint estimated_position{0.0, 0.0};
    bool converged = false;
    int nb_iterations = 0;
    double audit_time_s = 0.0; // wall clock, first query to final estimate
    double distance_estimated_declared_km = 0.0; // lie estimation
    bool lie_detected = false; // lie estimation exceeds the tolerance
    double smre_km = 0.0;      // of the final estimate
    InCloudReading in_cloud;   // medians over the iterations
    std::vector<IterationTrace> traces;
    std::optional<std::string> error; // diagnostic when the audit aborted early
    std::optional<TruthEvaluation> truth;

    /// 0 converged and honest, 2 lie detected, 3 not converged.
    int exit_code() const;
};

/**
 * Run the full audit loop against a landmark catalog and mesh:
 *
 *   sector <- declared position
 *   do: pick a zone around the sector (doubling until nb_lm landmarks
 *       are inside), disperse nb_lm audit landmarks, measure them, select
 *       the similar set from the mesh, measure that set, fit a position,
 *       move the sector there
 *   while the sector moved at least tolerance_km and iterations remain
 *
 * Errors (landmark starvation, too few successful measurements,
 * sectorization failure after widening) end the audit early with a
 * diagnostic in the report rather than throwing.
 */
AuditReport run_audit(const AuditConfig& config, const Catalog& catalog,
                      const MeshMatrix& mesh, ProbeBackend& backend);

/// Fill the report's truth block from a known true position.
void evaluate_against_truth(AuditReport& report, const GeoPoint& true_position);

/// Stable JSON rendering; identical reports serialize identically.
nlohmann::ordered_json report_to_json(const AuditReport& report);

void write_report(const AuditReport& report, const std::filesystem::path& path);

} // namespace geofindr
