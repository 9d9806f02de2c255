#pragma once

#include "geofindr/audit.hpp"
#include "geofindr/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace geofindr {

enum class SweepParameter { tolerance, zone_size, nb_lm, interval_percent };

const char* to_string(SweepParameter parameter);
std::optional<SweepParameter> parse_sweep_parameter(const std::string& name);

struct DeclaredPosition {
    std::string name;
    GeoPoint position{0.0, 0.0};
};

/// Load "name,lat,lon" CSV rows (header required). Throws on malformed input.
std::vector<DeclaredPosition> load_declared_positions(const std::filesystem::path& path);

struct SweepSpec {
    SweepParameter parameter = SweepParameter::tolerance;
    std::vector<double> values;
    int repetitions = 1;
    std::vector<DeclaredPosition> declared;
    AuditConfig base; // declared_position is overridden per run
};

/// One audit run distilled to the swept table's columns.
struct SweepRow {
    double value = 0.0;
    std::string declared_name;
    GeoPoint declared_position{0.0, 0.0};
    int repetition = 0; // 1-based
    std::string status; // "ok" or the audit/config diagnostic
    bool converged = false;
    int nb_iterations = 0;
    double audit_time_s = 0.0;
    double distance_estimated_declared_km = 0.0;
    double distance_real_estimated_km = 0.0;
    double distance_real_declared_km = 0.0;
    double smre_km = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows; // value-major, then declared, then repetition
};

/// Builds the probe backend for one run; called with the run index.
using BackendFactory = std::function<std::unique_ptr<ProbeBackend>(std::size_t)>;

/**
 * Run one audit per (value, declared position, repetition). Runs are
 * indexed value-major and each gets its own backend from the factory, so
 * results do not depend on scheduling; `parallel` > 1 fans runs out over
 * that many threads. A failed run becomes a row with its diagnostic in
 * status; the sweep always completes. Without a true position the
 * distance_real columns are NaN. Throws only on an invalid spec.
 */
SweepResult run_sweep(const SweepSpec& spec, const Catalog& catalog, const MeshMatrix& mesh,
                      const BackendFactory& factory,
                      const std::optional<GeoPoint>& true_position, int parallel = 1);

/// Simulation sweep: run r probes with seed base_seed + 1 + r and the
/// world's VM position is the ground truth.
SweepResult run_sweep(const SweepSpec& spec, const SimWorld& world, const MeshMatrix& mesh,
                      uint64_t base_seed, int parallel = 1);

/**
 * Render the sweep as CSV: a fixed, documented column set, one row per
 * run, plus "mean" and "stddev" rows per value computed over the ok runs
 * (converged becomes the converged fraction; stddev is the population
 * form). Everything except audit_time_s is reproducible from the seed.
 */
void write_sweep_csv(const SweepResult& result, const SweepSpec& spec, std::ostream& out);
void write_sweep_csv(const SweepResult& result, const SweepSpec& spec,
                     const std::filesystem::path& path);

} // namespace geofindr
