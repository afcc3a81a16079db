#include "flowforge/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "flowforge/csv.hpp"
#include "flowforge/dataset.hpp"
#include "flowforge/error.hpp"
#include "flowforge/fileio.hpp"
#include "flowforge/flow.hpp"
#include "flowforge/labeller.hpp"
#include "flowforge/manifest.hpp"
#include "flowforge/ml/benchmark.hpp"
#include "flowforge/pcap.hpp"
#include "flowforge/reliability.hpp"
#include "flowforge/testbed.hpp"
#include "flowforge/version.hpp"

namespace flowforge {

namespace fs = std::filesystem;

namespace {

struct Context {
    std::ostream& out;
    std::vector<std::string> argv;
    std::string started_at;
};

RunManifest start_manifest(const Context& ctx, const std::string& command)
{
    RunManifest m;
    m.command = command;
    m.argv = ctx.argv;
    m.tool_version = kVersion;
    m.started_at = ctx.started_at;
    return m;
}

void finish_manifest(RunManifest m, const fs::path& path)
{
    m.finished_at = utc_timestamp_now();
    write_manifest(m, path);
}

fs::path sidecar_manifest(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void ensure_parent(const fs::path& file)
{
    if (file.has_parent_path()) ensure_dir(file.parent_path());
}

testbed::ScenarioConfig resolve_config(const std::string& source, std::uint64_t seed, std::optional<double> duration)
{
    auto config = source == "default" ? testbed::default_scenario() : testbed::from_json_text(read_text_file(source));
    config.seed = seed;
    if (duration) config.duration_s = *duration;
    testbed::validate(config);
    return config;
}

pcap::Capture load_capture(const fs::path& path)
{
    auto cap = pcap::read_capture(path);
    if (cap.meta.skipped() > 0) {
        spdlog::warn("{}: skipped {} non-IPv4 and {} malformed frames", path.string(), cap.meta.skipped_non_ipv4,
                     cap.meta.skipped_malformed);
    }
    return cap;
}

struct SimulationFiles {
    std::vector<std::string> outputs;
};

SimulationFiles write_simulation(const testbed::ScenarioConfig& config, const testbed::ScenarioOutput& sim,
                                 const fs::path& dir)
{
    ensure_dir(dir);
    SimulationFiles files;
    auto add = [&](const char* name) {
        files.outputs.push_back((dir / name).string());
        return dir / name;
    };
    pcap::write_capture(sim.packets, add("capture.pcap"));
    write_socket_events(sim.socket_events, add("socket_events.jsonl"));
    write_run_log(sim.run_log, add("run_log.jsonl"));
    write_truth(sim.truth, add("truth.csv"));
    write_uid_map(testbed::build_uid_map(config), add("uid_map.csv"));
    write_device_map(testbed::build_device_map(config), add("device_map.csv"));
    write_text_file(add("scenario.json"), testbed::to_json_text(config));
    return files;
}

std::string format_flow_dump(std::span<const Flow> flows)
{
    std::string out = csv::format_row({"ip_a", "port_a", "ip_b", "port_b", "protocol", "epoch", "first_ts_us",
                                       "last_ts_us", "local_ip", "scope", "local_packets", "remote_packets"}) +
                      "\n";
    for (const auto& f : flows) {
        const char* scope = f.scope == FlowScope::normal ? "normal" : f.scope == FlowScope::internal ? "internal" : "foreign";
        out += csv::format_row({f.key.ip_a.to_string(), std::to_string(f.key.port_a), f.key.ip_b.to_string(),
                                std::to_string(f.key.port_b), std::to_string(f.key.protocol), std::to_string(f.epoch),
                                std::to_string(f.first_ts_us), std::to_string(f.last_ts_us), f.local_ip.to_string(),
                                scope, std::to_string(f.local_packets.size()), std::to_string(f.remote_packets.size())}) +
               "\n";
    }
    return out;
}

std::string accuracy_line(const LabelAccuracy& acc)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "label accuracy: %.3f (%zu/%zu flows)\n", acc.fraction, acc.correct, acc.total);
    return buf;
}

void log_mismatches(const LabelAccuracy& acc)
{
    for (const auto& m : acc.mismatches) {
        spdlog::warn("mislabelled flow {} epoch {}: expected '{}', got '{}'", m.key.to_string(), m.epoch, m.expected,
                     m.actual);
    }
}

// ---- subcommands --------------------------------------------------------

struct SimulateOpts {
    std::string config = "default";
    std::uint64_t seed = 0;
    std::string out_dir;
    std::optional<double> duration;
    bool dump_config = false;
};

int cmd_simulate(const SimulateOpts& o, Context& ctx)
{
    const auto config = resolve_config(o.config, o.seed, o.duration);
    if (o.dump_config) {
        ctx.out << testbed::to_json_text(config);
        return kExitOk;
    }
    if (o.out_dir.empty()) throw UsageError("simulate: --out is required");
    spdlog::info("simulating {} devices for {} s with seed {}", config.devices.size(), config.duration_s, config.seed);
    const auto sim = testbed::run_scenario(config);
    auto m = start_manifest(ctx, "simulate");
    m.seed = o.seed;
    m.config_hash = hex64(testbed::config_hash(config));
    if (o.config != "default") m.inputs.push_back(o.config);
    m.outputs = write_simulation(config, sim, o.out_dir).outputs;
    finish_manifest(m, fs::path(o.out_dir) / "manifest.json");
    ctx.out << "wrote " << sim.packets.size() << " packets, " << sim.socket_events.size() << " socket events, "
            << sim.run_log.size() << " actions to " << o.out_dir << "\n";
    return kExitOk;
}

struct FlowsOpts {
    std::string pcap;
    std::string subnet;
    double idle_timeout_s = kDefaultIdleTimeoutS;
    std::string out;
};

int cmd_flows(const FlowsOpts& o, Context& ctx)
{
    const auto cap = load_capture(o.pcap);
    const auto flows = assemble_flows(cap.packets, Cidr::parse(o.subnet), o.idle_timeout_s);
    const auto text = format_flow_dump(flows);
    if (o.out.empty()) {
        ctx.out << text;
        return kExitOk;
    }
    ensure_parent(o.out);
    write_text_file(o.out, text);
    auto m = start_manifest(ctx, "flows");
    m.inputs = {o.pcap};
    m.outputs = {o.out};
    finish_manifest(m, sidecar_manifest(o.out));
    ctx.out << "wrote " << flows.size() << " flows to " << o.out << "\n";
    return kExitOk;
}

struct LabelOpts {
    std::string pcap, events, uid_map, device_map, subnet, out, truth;
    double idle_timeout_s = kDefaultIdleTimeoutS;
    double grace_s = 2.0;
};

int cmd_label(const LabelOpts& o, Context& ctx)
{
    const auto cap = load_capture(o.pcap);
    const auto flows = assemble_flows(cap.packets, Cidr::parse(o.subnet), o.idle_timeout_s);
    LabelOptions lo;
    lo.grace_s = o.grace_s;
    const auto labelled =
        label_flows(flows, read_socket_events(o.events), read_uid_map(o.uid_map), read_device_map(o.device_map), lo);
    ensure_parent(o.out);
    export_csv(to_dataset(labelled), o.out);
    auto m = start_manifest(ctx, "label");
    m.inputs = {o.pcap, o.events, o.uid_map, o.device_map};
    m.outputs = {o.out};
    ctx.out << "wrote " << labelled.size() << " labelled flows to " << o.out << "\n";
    if (!o.truth.empty()) {
        m.inputs.push_back(o.truth);
        const auto acc = label_accuracy(labelled, read_truth(o.truth));
        log_mismatches(acc);
        ctx.out << accuracy_line(acc);
    }
    finish_manifest(m, sidecar_manifest(o.out));
    return kExitOk;
}

struct ReliabilityOpts {
    std::string log;
    std::string format = "table";
    std::string ef_denominator = "all";
    std::string out;
};

int cmd_reliability(const ReliabilityOpts& o, Context& ctx)
{
    const auto format = parse_report_format(o.format);
    const auto denom = parse_ef_denominator(o.ef_denominator);
    const auto report = compute_reliability(read_run_log(o.log), denom);
    const auto text = render_reliability(report, format);
    if (o.out.empty()) {
        ctx.out << text;
        return kExitOk;
    }
    ensure_parent(o.out);
    write_text_file(o.out, text);
    auto m = start_manifest(ctx, "reliability");
    m.inputs = {o.log};
    m.outputs = {o.out};
    finish_manifest(m, sidecar_manifest(o.out));
    return kExitOk;
}

struct BenchOpts {
    std::string train, test, alias, out_dir;
    std::string target = "app";
    std::uint64_t seed = 0;
    int trees = 100;
    int max_depth = 0;
    int min_leaf = 1;
    int knn_k = 1;
};

int cmd_bench(const BenchOpts& o, Context& ctx)
{
    ml::BenchConfig cfg;
    cfg.target = ml::parse_target(o.target);
    if (o.trees < 1) throw UsageError("--trees must be at least 1");
    if (o.min_leaf < 1) throw UsageError("--min-leaf must be at least 1");
    if (o.max_depth < 0) throw UsageError("--max-depth must be nonnegative");
    cfg.forest.n_trees = o.trees;
    cfg.forest.max_depth = o.max_depth;
    cfg.forest.min_leaf = o.min_leaf;
    cfg.forest.seed = o.seed;
    cfg.knn_k = o.knn_k;

    const AliasTable aliases = o.alias.empty() ? AliasTable{} : load_alias_table(o.alias);
    auto load = [&](const std::string& path) {
        auto r = import_csv(path, aliases);
        for (const auto& w : r.warnings) spdlog::warn("{}: {}", path, w);
        return std::move(r.dataset);
    };
    const auto train = load(o.train);
    const auto test = load(o.test);
    const auto result = ml::benchmark(train, test, cfg);

    std::string report = ml::render_summary(result) + "\n";
    for (std::size_t i = 0; i < result.models.size(); ++i) report += ml::render_per_class(result, i) + "\n";
    report += ml::render_importance(result);
    ctx.out << report;

    if (!o.out_dir.empty()) {
        const fs::path dir(o.out_dir);
        ensure_dir(dir);
        write_text_file(dir / "report.txt", report);
        write_text_file(dir / "metrics.csv", ml::metrics_csv(result));
        write_text_file(dir / "importance.csv", ml::importance_csv(result));
        auto m = start_manifest(ctx, "bench");
        m.seed = o.seed;
        m.inputs = {o.train, o.test};
        if (!o.alias.empty()) m.inputs.push_back(o.alias);
        m.outputs = {(dir / "report.txt").string(), (dir / "metrics.csv").string(), (dir / "importance.csv").string()};
        finish_manifest(m, dir / "manifest.json");
    }
    return kExitOk;
}

struct PipelineOpts {
    std::string config = "default";
    std::uint64_t seed = 0;
    std::optional<double> duration;
    std::string out_dir;
};

int cmd_pipeline(const PipelineOpts& o, Context& ctx)
{
    const auto config = resolve_config(o.config, o.seed, o.duration);
    const auto sim = testbed::run_scenario(config);
    const auto flows = assemble_flows(sim.packets, config.subnet);
    const auto labelled = label_flows(flows, sim.socket_events, testbed::build_uid_map(config),
                                      testbed::build_device_map(config));
    const auto acc = label_accuracy(labelled, sim.truth);
    log_mismatches(acc);

    if (!o.out_dir.empty()) {
        auto m = start_manifest(ctx, "pipeline");
        m.seed = o.seed;
        m.config_hash = hex64(testbed::config_hash(config));
        if (o.config != "default") m.inputs.push_back(o.config);
        m.outputs = write_simulation(config, sim, o.out_dir).outputs;
        const auto ds_path = fs::path(o.out_dir) / "dataset.csv";
        export_csv(to_dataset(labelled), ds_path);
        m.outputs.push_back(ds_path.string());
        finish_manifest(m, fs::path(o.out_dir) / "manifest.json");
    }
    ctx.out << "flows: " << flows.size() << ", labelled: " << labelled.size() << "\n" << accuracy_line(acc);
    return kExitOk;
}

void configure_logging(std::ostream& err)
{
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto logger = std::make_shared<spdlog::logger>("flowforge", sink);
    logger->set_pattern("[%l] %v");
    auto level = spdlog::level::warn;
    if (const char* env = std::getenv("FLOWFORGE_LOG"); env && *env) level = spdlog::level::from_str(env);
    logger->set_level(level);
    spdlog::set_default_logger(logger);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    configure_logging(err);
    Context ctx{out, {}, utc_timestamp_now()};
    ctx.argv.push_back("flowforge");
    ctx.argv.insert(ctx.argv.end(), args.begin(), args.end());

    CLI::App app{"flowforge: testbed simulation, flow labelling and traffic classification benchmarks", "flowforge"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    SimulateOpts sim;
    auto* simulate = app.add_subcommand("simulate", "Run the testbed simulator and write capture, logs and truth");
    simulate->add_option("--config", sim.config, "Scenario JSON file, or 'default'")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Random seed")->required();
    simulate->add_option("--out", sim.out_dir, "Output directory");
    simulate->add_option("--duration", sim.duration, "Override scenario duration in seconds")->check(CLI::NonNegativeNumber);
    simulate->add_flag("--dump-config", sim.dump_config, "Print the resolved scenario JSON and exit");

    FlowsOpts fl;
    auto* flows = app.add_subcommand("flows", "Assemble bidirectional flows from a capture");
    flows->add_option("--pcap", fl.pcap, "Capture file")->required()->check(CLI::ExistingFile);
    flows->add_option("--subnet", fl.subnet, "Testbed subnet, e.g. 192.168.1.0/24")->required();
    flows->add_option("--idle-timeout", fl.idle_timeout_s, "Idle timeout in seconds")->capture_default_str()->check(CLI::PositiveNumber);
    flows->add_option("--out", fl.out, "Flow dump CSV (stdout if omitted)");

    LabelOpts lb;
    auto* label = app.add_subcommand("label", "Label flows from socket events and write a dataset CSV");
    label->add_option("--pcap", lb.pcap, "Capture file")->required()->check(CLI::ExistingFile);
    label->add_option("--events", lb.events, "Socket events JSONL")->required()->check(CLI::ExistingFile);
    label->add_option("--uid-map", lb.uid_map, "Owner to app map CSV")->required()->check(CLI::ExistingFile);
    label->add_option("--device-map", lb.device_map, "IP to device map CSV")->required()->check(CLI::ExistingFile);
    label->add_option("--subnet", lb.subnet, "Testbed subnet")->required();
    label->add_option("--out", lb.out, "Dataset CSV")->required();
    label->add_option("--truth", lb.truth, "Simulator truth CSV; prints label accuracy")->check(CLI::ExistingFile);
    label->add_option("--idle-timeout", lb.idle_timeout_s, "Idle timeout in seconds")->capture_default_str()->check(CLI::PositiveNumber);
    label->add_option("--grace", lb.grace_s, "Socket interval grace in seconds")->capture_default_str()->check(CLI::NonNegativeNumber);

    ReliabilityOpts rl;
    auto* reliability = app.add_subcommand("reliability", "Launch and execution failure report from a run log");
    reliability->add_option("--log", rl.log, "Run log JSONL")->required()->check(CLI::ExistingFile);
    reliability->add_option("--format", rl.format, "table or csv")->capture_default_str();
    reliability->add_option("--ef-denominator", rl.ef_denominator, "all or launched")->capture_default_str();
    reliability->add_option("--out", rl.out, "Report file (stdout if omitted)");

    BenchOpts bo;
    auto* bench = app.add_subcommand("bench", "Train on one dataset, test on another");
    bench->add_option("--train", bo.train, "Training dataset CSV")->required()->check(CLI::ExistingFile);
    bench->add_option("--test", bo.test, "Test dataset CSV")->required()->check(CLI::ExistingFile);
    bench->add_option("--seed", bo.seed, "Random seed")->required();
    bench->add_option("--target", bo.target, "app or os")->capture_default_str();
    bench->add_option("--trees", bo.trees, "Random forest size")->capture_default_str();
    bench->add_option("--max-depth", bo.max_depth, "Tree depth limit, 0 for none")->capture_default_str();
    bench->add_option("--min-leaf", bo.min_leaf, "Minimum samples per leaf")->capture_default_str();
    bench->add_option("--knn-k", bo.knn_k, "Neighbours for KNN")->capture_default_str();
    bench->add_option("--alias", bo.alias, "Column alias table CSV")->check(CLI::ExistingFile);
    bench->add_option("--out", bo.out_dir, "Directory for report and CSV exports");

    PipelineOpts po;
    auto* pipeline = app.add_subcommand("pipeline", "Simulate, assemble, label and score against truth");
    pipeline->add_option("--config", po.config, "Scenario JSON file, or 'default'")->capture_default_str();
    pipeline->add_option("--seed", po.seed, "Random seed")->required();
    pipeline->add_option("--duration", po.duration, "Override scenario duration in seconds")->check(CLI::NonNegativeNumber);
    pipeline->add_option("--out", po.out_dir, "Optional output directory");

    std::vector<const char*> cargv;
    for (const auto& a : ctx.argv) cargv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        if (code == 0) return kExitOk;
        err << app.help();
        return kExitUsage;
    }

    try {
        if (*simulate) return cmd_simulate(sim, ctx);
        if (*flows) return cmd_flows(fl, ctx);
        if (*label) return cmd_label(lb, ctx);
        if (*reliability) return cmd_reliability(rl, ctx);
        if (*bench) return cmd_bench(bo, ctx);
        if (*pipeline) return cmd_pipeline(po, ctx);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    err << app.help();
    return kExitUsage;
}

int cli_main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace flowforge
