#include "geofindr/sweep.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

namespace geofindr {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

void apply_parameter(AuditConfig& config, SweepParameter parameter, double value) {
    switch (parameter) {
    case SweepParameter::tolerance:
        config.tolerance_km = value;
        return;
    case SweepParameter::zone_size:
        config.zone_size_km = value;
        return;
    case SweepParameter::nb_lm:
        if (value != std::floor(value)) {
            throw std::invalid_argument("nb_lm sweep value must be an integer");
        }
        config.nb_lm = static_cast<int>(value);
        return;
    case SweepParameter::interval_percent:
        config.interval_percent = value;
        return;
    }
    throw std::invalid_argument("unknown sweep parameter");
}

struct Aggregate {
    double converged_fraction = 0.0;
    double nb_iterations = 0.0;
    double audit_time_s = 0.0;
    double lie_estimation = 0.0;
    double accuracy = 0.0;
    double lie_extent = 0.0;
    double smre = 0.0;
};

/// Mean and population standard deviation over the ok rows of one group.
std::pair<Aggregate, Aggregate> aggregate_group(const SweepRow* rows, std::size_t count) {
    std::vector<const SweepRow*> ok;
    for (std::size_t i = 0; i < count; ++i) {
        if (rows[i].status == "ok") ok.push_back(&rows[i]);
    }
    Aggregate mean{}, stddev{};
    if (ok.empty()) return {mean, stddev};
    double n = static_cast<double>(ok.size());

    auto accumulate = [&](auto get, double Aggregate::*field) {
        double sum = 0.0;
        for (const SweepRow* r : ok) sum += get(*r);
        double mu = sum / n;
        double var = 0.0;
        for (const SweepRow* r : ok) {
            double d = get(*r) - mu;
            var += d * d;
        }
        mean.*field = mu;
        stddev.*field = std::sqrt(var / n);
    };
    accumulate([](const SweepRow& r) { return r.converged ? 1.0 : 0.0; },
               &Aggregate::converged_fraction);
    accumulate([](const SweepRow& r) { return static_cast<double>(r.nb_iterations); },
               &Aggregate::nb_iterations);
    accumulate([](const SweepRow& r) { return r.audit_time_s; }, &Aggregate::audit_time_s);
    accumulate([](const SweepRow& r) { return r.distance_estimated_declared_km; },
               &Aggregate::lie_estimation);
    accumulate([](const SweepRow& r) { return r.distance_real_estimated_km; },
               &Aggregate::accuracy);
    accumulate([](const SweepRow& r) { return r.distance_real_declared_km; },
               &Aggregate::lie_extent);
    accumulate([](const SweepRow& r) { return r.smre_km; }, &Aggregate::smre);
    return {mean, stddev};
}

void write_aggregate_row(std::ostream& out, const SweepSpec& spec, double value,
                         const char* label, const Aggregate& a) {
    out << to_string(spec.parameter) << ',' << fmt_double(value) << ',' << label << ",,,0,"
        << "aggregate," << fmt_double(a.converged_fraction) << ','
        << fmt_double(a.nb_iterations) << ',' << fmt_double(a.audit_time_s) << ','
        << fmt_double(a.lie_estimation) << ',' << fmt_double(a.accuracy) << ','
        << fmt_double(a.lie_extent) << ',' << fmt_double(a.smre) << '\n';
}

} // namespace

const char* to_string(SweepParameter parameter) {
    switch (parameter) {
    case SweepParameter::tolerance: return "tolerance";
    case SweepParameter::zone_size: return "zone_size";
    case SweepParameter::nb_lm: return "nb_lm";
    case SweepParameter::interval_percent: return "interval_percent";
    }
    return "unknown";
}

std::optional<SweepParameter> parse_sweep_parameter(const std::string& name) {
    if (name == "tolerance") return SweepParameter::tolerance;
    if (name == "zone_size") return SweepParameter::zone_size;
    if (name == "nb_lm") return SweepParameter::nb_lm;
    if (name == "interval_percent") return SweepParameter::interval_percent;
    return std::nullopt;
}

std::vector<DeclaredPosition> load_declared_positions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty positions file " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "name,lat,lon") {
        throw std::runtime_error("bad header in " + path.string() + ": expected name,lat,lon");
    }
    std::vector<DeclaredPosition> positions;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto c1 = line.find(',');
        auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected name,lat,lon");
        }
        DeclaredPosition p;
        p.name = line.substr(0, c1);
        try {
            double lat = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
            double lon = std::stod(line.substr(c2 + 1));
            p.position = GeoPoint(lat, lon);
        } catch (const std::exception&) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": bad coordinates");
        }
        positions.push_back(std::move(p));
    }
    if (positions.empty()) {
        throw std::runtime_error("no positions in " + path.string());
    }
    return positions;
}

SweepResult run_sweep(const SweepSpec& spec, const Catalog& catalog, const MeshMatrix& mesh,
                      const BackendFactory& factory,
                      const std::optional<GeoPoint>& true_position, int parallel) {
    if (spec.values.empty()) throw std::invalid_argument("sweep: no values");
    if (spec.declared.empty()) throw std::invalid_argument("sweep: no declared positions");
    if (spec.repetitions < 1) throw std::invalid_argument("sweep: repetitions must be >= 1");
    if (parallel < 1) throw std::invalid_argument("sweep: parallel must be >= 1");
    if (!factory) throw std::invalid_argument("sweep: no backend factory");

    const std::size_t per_value = spec.declared.size() * static_cast<std::size_t>(spec.repetitions);
    const std::size_t total = spec.values.size() * per_value;
    SweepResult result;
    result.rows.resize(total);

    auto execute = [&](std::size_t run_index) {
        std::size_t value_index = run_index / per_value;
        std::size_t in_value = run_index % per_value;
        std::size_t declared_index = in_value / static_cast<std::size_t>(spec.repetitions);
        int repetition = static_cast<int>(in_value % spec.repetitions) + 1;

        const DeclaredPosition& declared = spec.declared[declared_index];
        SweepRow row;
        row.value = spec.values[value_index];
        row.declared_name = declared.name;
        row.declared_position = declared.position;
        row.repetition = repetition;
        row.distance_real_estimated_km = std::numeric_limits<double>::quiet_NaN();
        row.distance_real_declared_km = std::numeric_limits<double>::quiet_NaN();
        try {
            AuditConfig config = spec.base;
            config.declared_position = declared.position;
            apply_parameter(config, spec.parameter, row.value);
            std::unique_ptr<ProbeBackend> backend = factory(run_index);
            AuditReport report = run_audit(config, catalog, mesh, *backend);
            if (true_position) {
                evaluate_against_truth(report, *true_position);
                row.distance_real_estimated_km = report.truth->distance_real_estimated_km;
                row.distance_real_declared_km = report.truth->distance_real_declared_km;
            }
            row.status = report.error ? "error: " + *report.error : "ok";
            row.converged = report.converged;
            row.nb_iterations = report.nb_iterations;
            row.audit_time_s = report.audit_time_s;
            row.distance_estimated_declared_km = report.distance_estimated_declared_km;
            row.smre_km = report.smre_km;
        } catch (const std::exception& e) {
            row.status = std::string("error: ") + e.what();
        }
        result.rows[run_index] = std::move(row);
    };

    if (parallel == 1) {
        for (std::size_t i = 0; i < total; ++i) execute(i);
    } else {
        // Pre-assigned striding keeps every run's seed independent of
        // scheduling, so parallel and sequential sweeps agree.
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(parallel));
        for (int t = 0; t < parallel; ++t) {
            workers.emplace_back([&, t] {
                for (std::size_t i = static_cast<std::size_t>(t); i < total;
                     i += static_cast<std::size_t>(parallel)) {
                    execute(i);
                }
            });
        }
        for (std::thread& w : workers) w.join();
    }
    return result;
}

SweepResult run_sweep(const SweepSpec& spec, const SimWorld& world, const MeshMatrix& mesh,
                      uint64_t base_seed, int parallel) {
    BackendFactory factory = [&world, base_seed](std::size_t run_index) {
        return std::make_unique<SimBackend>(world, base_seed + 1 + run_index);
    };
    return run_sweep(spec, world.catalog, mesh, factory, world.vm_position, parallel);
}

void write_sweep_csv(const SweepResult& result, const SweepSpec& spec, std::ostream& out) {
    out << "parameter,value,declared_name,declared_lat,declared_lon,repetition,status,"
           "converged,nb_iterations,audit_time_s,distance_estimated_declared_km,"
           "distance_real_estimated_km,distance_real_declared_km,smre_km\n";
    const std::size_t per_value = spec.declared.size() * static_cast<std::size_t>(spec.repetitions);
    for (std::size_t v = 0; v < spec.values.size(); ++v) {
        const SweepRow* group = result.rows.data() + v * per_value;
        for (std::size_t i = 0; i < per_value; ++i) {
            const SweepRow& row = group[i];
            out << to_string(spec.parameter) << ',' << fmt_double(row.value) << ','
                << csv_escape(row.declared_name) << ','
                << fmt_double(row.declared_position.lat()) << ','
                << fmt_double(row.declared_position.lon()) << ',' << row.repetition << ','
                << csv_escape(row.status) << ',' << (row.converged ? 1 : 0) << ','
                << row.nb_iterations << ',' << fmt_double(row.audit_time_s) << ','
                << fmt_double(row.distance_estimated_declared_km) << ','
                << fmt_double(row.distance_real_estimated_km) << ','
                << fmt_double(row.distance_real_declared_km) << ','
                << fmt_double(row.smre_km) << '\n';
        }
        auto [mean, stddev] = aggregate_group(group, per_value);
        write_aggregate_row(out, spec, spec.values[v], "mean", mean);
        write_aggregate_row(out, spec, spec.values[v], "stddev", stddev);
    }
}

void write_sweep_csv(const SweepResult& result, const SweepSpec& spec,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_sweep_csv(result, spec, out);
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

} // namespace geofindr
