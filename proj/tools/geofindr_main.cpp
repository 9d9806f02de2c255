#include "geofindr/atlas.hpp"
#include "geofindr/audit.hpp"
#include "geofindr/catalog_io.hpp"
#include "geofindr/sim.hpp"
#include "geofindr/sweep.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace geofindr;

constexpr int kExitUsage = 64;
constexpr int kExitFatal = 4;

GeoPoint parse_latlon(const std::string& text) {
    auto comma = text.find(',');
    if (comma == std::string::npos) {
        throw std::invalid_argument("expected \"lat,lon\", got \"" + text + "\"");
    }
    double lat = 0.0, lon = 0.0;
    try {
        std::size_t used = 0;
        lat = std::stod(text.substr(0, comma), &used);
        lon = std::stod(text.substr(comma + 1), &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse coordinates \"" + text + "\"");
    }
    return GeoPoint(lat, lon); // throws when lat is out of range
}

std::vector<double> parse_value_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        values.push_back(std::stod(item));
    }
    return values;
}

int usage_error(const std::string& message) {
    std::cerr << "error: " << message << " (see --help)\n";
    return kExitUsage;
}

struct AuditArgs {
    std::string declared;
    double tolerance_km = 100.0;
    double zone_size_km = 1000.0;
    int nb_lm = 16;
    double interval_percent = 35.0;
    int max_iterations = 20;
    std::string backend = "sim";
    std::string scenario;
    std::string catalog_path;
    std::string mesh_path;
    std::string replay_path;
    std::string proxy;
    std::string truth;
    std::string report_path = "audit_report.json";
    std::uint64_t seed = 1;
};

void print_km(const char* label, double km) {
    std::cout << label << std::fixed << std::setprecision(2) << km << " km\n";
}

void print_summary(const AuditReport& report) {
    std::cout << std::fixed << std::setprecision(4);
    std::cout << "backend:              " << report.backend << '\n';
    std::cout << "declared position:    " << report.config.declared_position.lat() << ", "
              << report.config.declared_position.lon() << '\n';
    std::cout << "estimated position:   " << report.estimated_position.lat() << ", "
              << report.estimated_position.lon() << '\n';
    print_km("lie estimation:       ", report.distance_estimated_declared_km);
    std::cout << "lie detected:         " << (report.lie_detected ? "YES" : "no")
              << " (tolerance " << std::setprecision(0) << report.config.tolerance_km
              << " km)\n";
    std::cout << "converged:            " << (report.converged ? "yes" : "NO") << " after "
              << report.nb_iterations << " iteration(s), " << std::setprecision(2)
              << report.audit_time_s << " s\n";
    print_km("final smre:           ", report.smre_km);
    std::cout << "in-cloud loopback:    " << std::setprecision(3)
              << report.in_cloud.loopback_rtt_ms << " ms (median)\n";
    if (report.in_cloud.proxy_rtt_ms) {
        std::cout << "in-cloud proxy:       " << std::setprecision(3)
                  << *report.in_cloud.proxy_rtt_ms << " ms (median)\n";
    }
    if (report.truth) {
        print_km("accuracy vs truth:    ", report.truth->distance_real_estimated_km);
        std::cout << "satisfactory:         " << (report.truth->satisfactory ? "yes" : "no")
                  << '\n';
        print_km("lie extent:           ", report.truth->distance_real_declared_km);
    }
    if (report.error) std::cout << "error:                " << *report.error << '\n';
}

int cmd_audit(const AuditArgs& args) {
    AuditConfig config;
    std::optional<GeoPoint> truth;
    try {
        config.declared_position = parse_latlon(args.declared);
        config.tolerance_km = args.tolerance_km;
        config.zone_size_km = args.zone_size_km;
        config.nb_lm = args.nb_lm;
        config.interval_percent = args.interval_percent;
        config.max_iterations = args.max_iterations;
        if (!args.proxy.empty()) config.proxy_address = args.proxy;
        config.validate();
        if (!args.truth.empty()) truth = parse_latlon(args.truth);

        if (args.backend == "sim") {
            if (args.scenario.empty()) return usage_error("--backend sim needs --scenario");
        } else if (args.backend == "icmp" || args.backend == "replay") {
            if (args.catalog_path.empty() || args.mesh_path.empty()) {
                return usage_error("--backend " + args.backend +
                                   " needs --catalog and --mesh");
            }
            if (args.backend == "replay" && args.replay_path.empty()) {
                return usage_error("--backend replay needs --replay-file");
            }
        } else {
            return usage_error("unknown backend \"" + args.backend +
                               "\" (sim, icmp or replay)");
        }
    } catch (const std::invalid_argument& e) {
        return usage_error(e.what());
    }

    try {
        Catalog catalog;
        MeshMatrix mesh;
        std::unique_ptr<ProbeBackend> backend;
        if (args.backend == "sim") {
            SimWorld world = load_scenario(args.scenario);
            catalog = world.catalog;
            mesh = simulate_mesh(world, args.seed);
            if (!truth) truth = world.vm_position;
            backend = std::make_unique<SimBackend>(std::move(world), args.seed);
        } else {
            CatalogLoad loaded = load_catalog(args.catalog_path);
            if (loaded.malformed > 0) {
                std::cerr << "note: skipped " << loaded.malformed
                          << " malformed catalog line(s)\n";
            }
            catalog = std::move(loaded.catalog);
            MeshLoad mesh_load = load_mesh(args.mesh_path, catalog);
            if (mesh_load.dropped > 0) {
                std::cerr << "note: dropped " << mesh_load.dropped << " mesh row(s)\n";
            }
            mesh = std::move(mesh_load.mesh);
            if (args.backend == "icmp") {
                backend = std::make_unique<IcmpBackend>();
            } else {
                backend = std::make_unique<ReplayBackend>(args.replay_path);
            }
        }

        AuditReport report = run_audit(config, catalog, mesh, *backend);
        if (truth) evaluate_against_truth(report, *truth);
        write_report(report, args.report_path);
        print_summary(report);
        std::cout << "report written:       " << args.report_path << '\n';
        return report.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << '\n';
        return kExitFatal;
    }
}

struct SweepArgs {
    std::string parameter;
    std::string values;
    int repetitions = 1;
    std::string declared_file;
    std::string scenario;
    std::uint64_t seed = 1;
    int parallel = 1;
    std::string out = "-";
    double tolerance_km = 100.0;
    double zone_size_km = 1000.0;
    int nb_lm = 16;
    double interval_percent = 35.0;
    int max_iterations = 20;
};

int cmd_sweep(const SweepArgs& args) {
    SweepSpec spec;
    try {
        auto parameter = parse_sweep_parameter(args.parameter);
        if (!parameter) {
            return usage_error("unknown sweep parameter \"" + args.parameter +
                               "\" (tolerance, zone_size, nb_lm or interval_percent)");
        }
        spec.parameter = *parameter;
        spec.values = parse_value_list(args.values);
        if (spec.values.empty()) return usage_error("--values is empty");
        spec.repetitions = args.repetitions;
        if (spec.repetitions < 1) return usage_error("--repetitions must be >= 1");
        if (args.parallel < 1) return usage_error("--parallel must be >= 1");
        spec.base.tolerance_km = args.tolerance_km;
        spec.base.zone_size_km = args.zone_size_km;
        spec.base.nb_lm = args.nb_lm;
        spec.base.interval_percent = args.interval_percent;
        spec.base.max_iterations = args.max_iterations;
        spec.base.validate();
    } catch (const std::exception& e) {
        return usage_error(e.what());
    }

    try {
        spec.declared = load_declared_positions(args.declared_file);
        SimWorld world = load_scenario(args.scenario);
        MeshMatrix mesh = simulate_mesh(world, args.seed);
        SweepResult result = run_sweep(spec, world, mesh, args.seed, args.parallel);

        std::size_t ok = 0;
        for (const SweepRow& row : result.rows) {
            if (row.status == "ok") ++ok;
        }
        if (args.out == "-") {
            write_sweep_csv(result, spec, std::cout);
        } else {
            write_sweep_csv(result, spec, std::filesystem::path(args.out));
        }
        std::cerr << "sweep complete: " << result.rows.size() << " run(s), " << ok
                  << " ok, csv -> " << args.out << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << '\n';
        return kExitFatal;
    }
}

struct WorldArgs {
    int count = 300;
    std::string center = "48.8566,2.3522";
    double half_width_km = 1000.0;
    double half_height_km = 1000.0;
    double offset_min_ms = 0.0;
    double offset_max_ms = 0.0;
    double jitter = 0.1;
    double speed_km_per_ms = 100.0;
    std::string vm;
    double vm_offset_ms = 0.0;
    std::uint64_t seed = 1;
    std::string out = "world.json";
    std::string mesh_out;
};

int cmd_simulate_world(const WorldArgs& args) {
    WorldSpec spec;
    try {
        spec.count = args.count;
        spec.center = parse_latlon(args.center);
        spec.half_width_km = args.half_width_km;
        spec.half_height_km = args.half_height_km;
        spec.offset_min_ms = args.offset_min_ms;
        spec.offset_max_ms = args.offset_max_ms;
        spec.jitter = args.jitter;
        spec.speed_km_per_ms = args.speed_km_per_ms;
        spec.vm_position = args.vm.empty() ? spec.center : parse_latlon(args.vm);
        spec.vm_offset_ms = args.vm_offset_ms;
    } catch (const std::invalid_argument& e) {
        return usage_error(e.what());
    }

    try {
        SimWorld world = generate_world(spec, args.seed);
        save_scenario(world, args.out);
        std::cout << "world written: " << world.catalog.size() << " landmarks, vm at "
                  << std::fixed << std::setprecision(4) << world.vm_position.lat() << ", "
                  << world.vm_position.lon() << " -> " << args.out << '\n';
        if (!args.mesh_out.empty()) {
            MeshMatrix mesh = simulate_mesh(world, args.seed);
            save_mesh(mesh, args.mesh_out);
            std::cout << "mesh written: " << mesh.entry_count() << " entries -> "
                      << args.mesh_out << '\n';
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        return usage_error(e.what());
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << '\n';
        return kExitFatal;
    }
}

struct DeadzoneArgs {
    std::string scenario;
    std::string catalog_path;
    std::string mesh_path;
    std::string center;
    double radius_km = -1.0;
    std::string out_scenario;
    std::string out_catalog;
    std::string out_mesh;
};

int cmd_make_deadzone(const DeadzoneArgs& args) {
    GeoPoint center{0.0, 0.0};
    try {
        center = parse_latlon(args.center);
    } catch (const std::invalid_argument& e) {
        return usage_error(e.what());
    }
    if (args.radius_km < 0.0) return usage_error("--radius-km must be >= 0");
    bool scenario_mode = !args.scenario.empty();
    if (scenario_mode) {
        if (args.out_scenario.empty()) {
            return usage_error("--scenario input needs --out-scenario");
        }
    } else {
        if (args.catalog_path.empty() || args.mesh_path.empty() ||
            args.out_catalog.empty() || args.out_mesh.empty()) {
            return usage_error(
                "file mode needs --catalog, --mesh, --out-catalog and --out-mesh");
        }
    }

    try {
        if (scenario_mode) {
            SimWorld world = load_scenario(args.scenario);
            std::size_t before = world.catalog.size();
            world.catalog = exclude_zone(world.catalog, center, args.radius_km);
            save_scenario(world, args.out_scenario);
            double nearest = std::numeric_limits<double>::infinity();
            for (const Landmark& lm : world.catalog) {
                nearest = std::min(nearest, great_circle_km(center, lm.position));
            }
            std::cout << "removed " << (before - world.catalog.size()) << " of " << before
                      << " landmarks within " << args.radius_km << " km";
            if (world.catalog.empty()) {
                std::cout << "; no landmarks survive\n";
            } else {
                std::cout << "; nearest surviving landmark " << std::fixed
                          << std::setprecision(1) << nearest << " km away\n";
            }
        } else {
            CatalogLoad loaded = load_catalog(args.catalog_path);
            std::size_t before = loaded.catalog.size();
            Catalog filtered = exclude_zone(loaded.catalog, center, args.radius_km);
            save_catalog(filtered, args.out_catalog);
            MeshLoad mesh_load = load_mesh(args.mesh_path, filtered);
            save_mesh(mesh_load.mesh, args.out_mesh);
            std::cout << "removed " << (before - filtered.size()) << " of " << before
                      << " landmarks; kept " << mesh_load.kept << " mesh rows, dropped "
                      << mesh_load.dropped << '\n';
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << '\n';
        return kExitFatal;
    }
}

struct FetchArgs {
    std::string url;
    int page_size = 500;
    int max_anchors = 0;
    std::string out_catalog = "anchors.jsonl";
    std::string out_mesh = "anchor_mesh.csv";
    bool skip_mesh = false;
};

int cmd_fetch_atlas(const FetchArgs& args) {
    if (args.page_size < 1) return usage_error("--page-size must be >= 1");
    if (args.max_anchors < 0) return usage_error("--max-anchors must be >= 0");
    AtlasOptions options;
    options.base_url = args.url.empty() ? atlas_base_url() : args.url;
    options.page_size = args.page_size;
    if (args.max_anchors > 0) options.max_anchors = args.max_anchors;

    try {
        Catalog catalog = fetch_anchors(options);
        save_catalog(catalog, args.out_catalog);
        std::cout << "anchors: " << catalog.size() << " -> " << args.out_catalog << '\n';
        if (!args.skip_mesh) {
            MeshMatrix mesh = fetch_anchor_mesh(options, catalog);
            save_mesh(mesh, args.out_mesh);
            std::cout << "mesh entries: " << mesh.entry_count() << " -> " << args.out_mesh
                      << '\n';
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << '\n';
        return kExitFatal;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"geofindr: locate a VM from network delays and audit its declared position"};
    app.set_config("--config", "", "read options from a config file");
    app.require_subcommand(1);

    AuditArgs audit_args;
    CLI::App* audit = app.add_subcommand("audit", "run one audit against a declared position");
    audit->add_option("--declared", audit_args.declared, "declared position as lat,lon")
        ->required();
    audit->add_option("--tolerance", audit_args.tolerance_km,
                      "convergence / lie threshold in km");
    audit->add_option("--zone-size", audit_args.zone_size_km,
                      "initial landmark zone radius in km");
    audit->add_option("--nb-lm", audit_args.nb_lm, "audit landmarks per iteration");
    audit->add_option("--interval-percent", audit_args.interval_percent,
                      "similarity interval half-width in percent");
    audit->add_option("--max-iterations", audit_args.max_iterations, "iteration cap");
    audit->add_option("--backend", audit_args.backend, "sim, icmp or replay");
    audit->add_option("--scenario", audit_args.scenario, "sim world JSON (sim backend)");
    audit->add_option("--catalog", audit_args.catalog_path,
                      "landmark catalog JSONL (icmp/replay)");
    audit->add_option("--mesh", audit_args.mesh_path, "landmark mesh CSV (icmp/replay)");
    audit->add_option("--replay-file", audit_args.replay_path,
                      "recorded delays JSON (replay backend)");
    audit->add_option("--proxy", audit_args.proxy, "proxy address for in-cloud delay");
    audit->add_option("--truth", audit_args.truth,
                      "known true position lat,lon (testing only)");
    audit->add_option("--report", audit_args.report_path, "JSON report output path");
    audit->add_option("--seed", audit_args.seed, "simulation seed")
        ->envname("GEOFINDR_SEED");

    SweepArgs sweep_args;
    CLI::App* sweep = app.add_subcommand("sweep", "audit across a parameter range, emit CSV");
    sweep->add_option("--parameter", sweep_args.parameter,
                      "tolerance, zone_size, nb_lm or interval_percent")
        ->required();
    sweep->add_option("--values", sweep_args.values, "comma-separated value list")->required();
    sweep->add_option("--repetitions", sweep_args.repetitions, "runs per (value, position)");
    sweep->add_option("--declared-file", sweep_args.declared_file,
                      "CSV of declared positions (name,lat,lon)")
        ->required();
    sweep->add_option("--scenario", sweep_args.scenario, "sim world JSON")->required();
    sweep->add_option("--seed", sweep_args.seed, "base seed; run r uses seed+1+r")
        ->envname("GEOFINDR_SEED");
    sweep->add_option("--parallel", sweep_args.parallel, "concurrent audit runs");
    sweep->add_option("--out", sweep_args.out, "CSV output path, - for stdout");
    sweep->add_option("--tolerance", sweep_args.tolerance_km, "base tolerance in km");
    sweep->add_option("--zone-size", sweep_args.zone_size_km, "base zone radius in km");
    sweep->add_option("--nb-lm", sweep_args.nb_lm, "base audit landmark count");
    sweep->add_option("--interval-percent", sweep_args.interval_percent,
                      "base similarity interval");
    sweep->add_option("--max-iterations", sweep_args.max_iterations, "base iteration cap");

    WorldArgs world_args;
    CLI::App* world = app.add_subcommand("simulate-world", "generate a synthetic world");
    world->add_option("--count", world_args.count, "number of landmarks");
    world->add_option("--center", world_args.center, "box center lat,lon");
    world->add_option("--half-width-km", world_args.half_width_km, "east-west half extent");
    world->add_option("--half-height-km", world_args.half_height_km,
                      "north-south half extent");
    world->add_option("--offset-min-ms", world_args.offset_min_ms,
                      "minimum per-landmark processing delay");
    world->add_option("--offset-max-ms", world_args.offset_max_ms,
                      "maximum per-landmark processing delay");
    world->add_option("--jitter", world_args.jitter, "multiplicative delay jitter in [0,1)");
    world->add_option("--speed", world_args.speed_km_per_ms, "propagation speed km per ms");
    world->add_option("--vm", world_args.vm, "true VM position lat,lon (default: center)");
    world->add_option("--vm-offset-ms", world_args.vm_offset_ms, "VM processing delay");
    world->add_option("--seed", world_args.seed, "generation seed")->envname("GEOFINDR_SEED");
    world->add_option("--out", world_args.out, "scenario JSON output path");
    world->add_option("--mesh-out", world_args.mesh_out,
                      "also write the simulated mesh CSV here");

    DeadzoneArgs deadzone_args;
    CLI::App* deadzone =
        app.add_subcommand("make-deadzone", "strip landmarks around a point");
    deadzone->add_option("--scenario", deadzone_args.scenario, "sim world JSON input");
    deadzone->add_option("--catalog", deadzone_args.catalog_path, "catalog JSONL input");
    deadzone->add_option("--mesh", deadzone_args.mesh_path, "mesh CSV input");
    deadzone->add_option("--center", deadzone_args.center, "dead zone center lat,lon")
        ->required();
    deadzone->add_option("--radius-km", deadzone_args.radius_km, "dead zone radius")
        ->required();
    deadzone->add_option("--out-scenario", deadzone_args.out_scenario,
                         "filtered scenario output");
    deadzone->add_option("--out-catalog", deadzone_args.out_catalog,
                         "filtered catalog output");
    deadzone->add_option("--out-mesh", deadzone_args.out_mesh, "filtered mesh output");

    FetchArgs fetch_args;
    CLI::App* fetch =
        app.add_subcommand("fetch-atlas", "snapshot the anchor catalog and mesh");
    fetch->add_option("--atlas-url", fetch_args.url, "API base URL")
        ->envname("GEOFINDR_ATLAS_URL");
    fetch->add_option("--page-size", fetch_args.page_size, "listing page size");
    fetch->add_option("--max-anchors", fetch_args.max_anchors, "stop after this many (0: all)");
    fetch->add_option("--out-catalog", fetch_args.out_catalog, "catalog JSONL output");
    fetch->add_option("--out-mesh", fetch_args.out_mesh, "mesh CSV output");
    fetch->add_flag("--skip-mesh", fetch_args.skip_mesh, "fetch only the anchor list");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (audit->parsed()) return cmd_audit(audit_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args);
    if (world->parsed()) return cmd_simulate_world(world_args);
    if (deadzone->parsed()) return cmd_make_deadzone(deadzone_args);
    if (fetch->parsed()) return cmd_fetch_atlas(fetch_args);
    return kExitUsage;
}
