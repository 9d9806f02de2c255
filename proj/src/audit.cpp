#include "geofindr/audit.hpp"

#include "geofindr/dispoints.hpp"
#include "geofindr/sectorize.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace geofindr {

namespace {

constexpr int kMaxWidenRetries = 3;
constexpr double kWidenStepPercent = 10.0;

double median_of(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

void sort_by_landmark(std::vector<DelaySample>& samples) {
    std::sort(samples.begin(), samples.end(), [](const DelaySample& a, const DelaySample& b) {
        return a.landmark_id < b.landmark_id;
    });
}

std::string percent_text(double percent) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", percent);
    return buf;
}

} // namespace

void AuditConfig::validate() const {
    if (!(tolerance_km > 0.0)) throw std::invalid_argument("tolerance_km must be positive");
    if (!(zone_size_km > 0.0)) throw std::invalid_argument("zone_size_km must be positive");
    if (nb_lm < 1) throw std::invalid_argument("nb_lm must be at least 1");
    if (!(interval_percent > 0.0)) {
        throw std::invalid_argument("interval_percent must be positive");
    }
    if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
}

int AuditReport::exit_code() const {
    if (!converged) return 3;
    return lie_detected ? 2 : 0;
}

AuditReport run_audit(const AuditConfig& config, const Catalog& catalog,
                      const MeshMatrix& mesh, ProbeBackend& backend) {
    using clock = std::chrono::steady_clock;

    config.validate();
    AuditReport report;
    report.config = config;
    report.backend = backend.name();
    report.estimated_position = config.declared_position;

    if (catalog.size() < static_cast<std::size_t>(config.nb_lm)) {
        report.error = "landmark starvation: catalog holds " + std::to_string(catalog.size()) +
                       " landmarks, audit needs " + std::to_string(config.nb_lm);
        return report;
    }
    if (mesh.empty()) {
        report.error = "mesh is empty: sectorization is impossible";
        return report;
    }

    GeoPoint sector = config.declared_position;
    std::vector<double> loopbacks;
    std::vector<double> proxies;
    std::optional<clock::time_point> started;
    clock::time_point finished{};
    double final_smre = 0.0;

    for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
        IterationTrace trace;
        trace.index = iteration;
        trace.initial_position = sector;

        // Grow the zone until it holds enough landmarks; the global
        // starvation check above guarantees termination.
        double zone = config.zone_size_km;
        Catalog near_lms = near(catalog, sector, zone);
        while (near_lms.size() < static_cast<std::size_t>(config.nb_lm) && zone <= kMaxArcKm) {
            zone *= 2.0;
            near_lms = near(catalog, sector, zone);
        }
        trace.effective_zone_km = zone;

        DispersionSelection selection = dispoints(near_lms.landmarks(), config.nb_lm);
        for (const Landmark& lm : selection.selected) trace.lm_a_ids.push_back(lm.id);

        if (!started) started = clock::now();
        std::vector<DelaySample> audit_samples;
        for (const Landmark& lm : selection.selected) {
            if (auto sample = backend.measure(lm)) audit_samples.push_back(std::move(*sample));
        }
        sort_by_landmark(audit_samples);
        trace.samples = audit_samples;

        if (audit_samples.size() < 3) {
            report.error = "iteration " + std::to_string(iteration) + ": only " +
                           std::to_string(audit_samples.size()) + " of " +
                           std::to_string(trace.lm_a_ids.size()) +
                           " audit landmarks answered; multilateration needs 3";
            report.traces.push_back(std::move(trace));
            finished = clock::now();
            break;
        }

        // Sectorize, widening the similarity interval when it catches nobody.
        double percent_used = config.interval_percent;
        std::vector<Landmark> lm_s;
        for (int retry = 0; retry <= kMaxWidenRetries; ++retry) {
            percent_used = config.interval_percent + kWidenStepPercent * retry;
            SimilarityTally tally = tally_similars(mesh, audit_samples, percent_used);
            lm_s = select_lms(tally, catalog);
            if (!lm_s.empty()) break;
        }
        trace.interval_percent_used = percent_used;
        if (lm_s.empty()) {
            report.error = "iteration " + std::to_string(iteration) +
                           ": no similar landmarks even with the interval widened to " +
                           percent_text(percent_used) + "%";
            report.traces.push_back(std::move(trace));
            finished = clock::now();
            break;
        }
        for (const Landmark& lm : lm_s) trace.lm_s_ids.push_back(lm.id);

        std::vector<DelaySample> sector_samples;
        for (const Landmark& lm : lm_s) {
            if (auto sample = backend.measure(lm)) sector_samples.push_back(std::move(*sample));
        }
        sort_by_landmark(sector_samples);
        if (sector_samples.empty()) {
            report.error = "iteration " + std::to_string(iteration) + ": none of the " +
                           std::to_string(lm_s.size()) + " similar landmarks answered";
            report.traces.push_back(std::move(trace));
            finished = clock::now();
            break;
        }

        PositionEstimate estimate = fit(normalize_delays(sector_samples, catalog), sector);
        finished = clock::now(); // the timed span ends at the latest estimate
        double step = great_circle_km(sector, estimate.position);
        trace.step_km = step;
        sector = estimate.position;
        final_smre = estimate.smre_km;
        trace.estimate = std::move(estimate);

        InCloudReading in_cloud = backend.measure_in_cloud(config.proxy_address);
        loopbacks.push_back(in_cloud.loopback_rtt_ms);
        if (in_cloud.proxy_rtt_ms) proxies.push_back(*in_cloud.proxy_rtt_ms);

        report.traces.push_back(std::move(trace));

        if (step < config.tolerance_km) {
            report.converged = true;
            break;
        }
    }

    report.nb_iterations = static_cast<int>(report.traces.size());
    report.estimated_position = sector;
    report.distance_estimated_declared_km =
        great_circle_km(sector, config.declared_position);
    report.lie_detected = report.distance_estimated_declared_km > config.tolerance_km;
    report.smre_km = final_smre;
    report.in_cloud.loopback_rtt_ms = median_of(loopbacks);
    if (!proxies.empty()) report.in_cloud.proxy_rtt_ms = median_of(proxies);
    if (started) {
        report.audit_time_s =
            std::chrono::duration<double>(finished - *started).count();
    }
    return report;
}

void evaluate_against_truth(AuditReport& report, const GeoPoint& true_position) {
    TruthEvaluation truth;
    truth.true_position = true_position;
    truth.distance_real_estimated_km =
        great_circle_km(true_position, report.estimated_position);
    truth.distance_real_declared_km =
        great_circle_km(true_position, report.config.declared_position);
    truth.satisfactory = truth.distance_real_estimated_km < kSatisfactoryKm;
    truth.lie_detected =
        report.distance_estimated_declared_km > report.config.tolerance_km;
    report.truth = truth;
}

namespace {

nlohmann::ordered_json point_json(const GeoPoint& p) {
    return {{"lat", p.lat()}, {"lon", p.lon()}};
}

} // namespace

nlohmann::ordered_json report_to_json(const AuditReport& report) {
    nlohmann::ordered_json j;

    nlohmann::ordered_json config;
    config["declared_position"] = point_json(report.config.declared_position);
    config["tolerance_km"] = report.config.tolerance_km;
    config["zone_size_km"] = report.config.zone_size_km;
    config["nb_lm"] = report.config.nb_lm;
    config["interval_percent"] = report.config.interval_percent;
    config["max_iterations"] = report.config.max_iterations;
    config["backend"] = report.backend;
    if (report.config.proxy_address) config["proxy_address"] = *report.config.proxy_address;
    j["config"] = std::move(config);

    j["estimated_position"] = point_json(report.estimated_position);
    j["converged"] = report.converged;
    j["nb_iterations"] = report.nb_iterations;
    j["audit_time_s"] = report.audit_time_s;
    j["distance_estimated_declared_km"] = report.distance_estimated_declared_km;
    j["lie_detected"] = report.lie_detected;
    j["smre_km"] = report.smre_km;

    nlohmann::ordered_json in_cloud;
    in_cloud["loopback_rtt_ms"] = report.in_cloud.loopback_rtt_ms;
    if (report.in_cloud.proxy_rtt_ms) in_cloud["proxy_rtt_ms"] = *report.in_cloud.proxy_rtt_ms;
    j["in_cloud"] = std::move(in_cloud);

    if (report.error) j["error"] = *report.error;
    if (report.truth) {
        nlohmann::ordered_json truth;
        truth["true_position"] = point_json(report.truth->true_position);
        truth["distance_real_estimated_km"] = report.truth->distance_real_estimated_km;
        truth["distance_real_declared_km"] = report.truth->distance_real_declared_km;
        truth["satisfactory"] = report.truth->satisfactory;
        truth["lie_detected"] = report.truth->lie_detected;
        j["truth"] = std::move(truth);
    }

    j["traces"] = nlohmann::ordered_json::array();
    for (const IterationTrace& trace : report.traces) {
        nlohmann::ordered_json t;
        t["iteration"] = trace.index;
        t["initial_position"] = point_json(trace.initial_position);
        t["effective_zone_km"] = trace.effective_zone_km;
        t["interval_percent_used"] = trace.interval_percent_used;
        t["lm_a_ids"] = trace.lm_a_ids;
        t["samples"] = nlohmann::ordered_json::array();
        for (const DelaySample& sample : trace.samples) {
            t["samples"].push_back({{"landmark_id", sample.landmark_id},
                                    {"rtt_ms", sample.rtt_ms},
                                    {"attempts", sample.attempts}});
        }
        t["lm_s_ids"] = trace.lm_s_ids;
        if (trace.estimate) {
            nlohmann::ordered_json e;
            e["position"] = point_json(trace.estimate->position);
            e["smre_km"] = trace.estimate->smre_km;
            e["scale_km_per_unit"] = trace.estimate->scale_km_per_unit;
            e["converged"] = trace.estimate->converged;
            e["low_confidence"] = trace.estimate->low_confidence;
            e["contributing"] = nlohmann::ordered_json::array();
            for (const auto& [id, weight] : trace.estimate->contributing) {
                e["contributing"].push_back({{"id", id}, {"weight", weight}});
            }
            t["estimate"] = std::move(e);
            t["step_km"] = trace.step_km;
        }
        j["traces"].push_back(std::move(t));
    }
    return j;
}

void write_report(const AuditReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << report_to_json(report).dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

} // namespace geofindr
