// Acceptance harness: one line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <regex>
#include <sstream>
#include <string>

#include "flowforge/cli.hpp"
#include "flowforge/dataset.hpp"
#include "flowforge/fileio.hpp"
#include "flowforge/ml/benchmark.hpp"
#include "flowforge/reliability.hpp"
#include "flowforge/testbed.hpp"
#include "support/generators.hpp"
#include "support/metric_cases.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace flowforge;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr int kLabelSeeds = 20;
constexpr double kLabelDurationS = 1800.0;
constexpr double kLabelBudgetPerSeedS = 60.0;
constexpr int kFlowSets = 200;
constexpr double kFlowBudgetS = 30.0;
constexpr std::size_t kFeatureFlows = 1000;
constexpr double kFeatureRelTol = 1e-9;
constexpr std::size_t kMinMetricCases = 10;
constexpr double kMetricTol = 1e-12;
constexpr std::size_t kKnnRows = 200;
constexpr double kForestMinF1 = 0.90;
constexpr double kForestDurationS = 14400.0;
constexpr std::uint64_t kSeedA = 1;
constexpr std::uint64_t kSeedB = 2;
constexpr double kClassifierBudgetS = 120.0;
constexpr std::size_t kTtlMaxRank = 10;
constexpr double kPublishedF1 = 0.936;
constexpr double kPublishedTol = 0.05;

enum class Verdict { pass, fail, skipped };

struct Result {
    Verdict verdict;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

struct CliRun {
    int code;
    std::string out;
};

CliRun cli(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str()};
}

testbed::ScenarioConfig scenario(std::uint64_t seed, double duration_s)
{
    auto cfg = testbed::default_scenario();
    cfg.seed = seed;
    cfg.duration_s = duration_s;
    return cfg;
}

std::vector<LabelledFlow> labelled_run(const testbed::ScenarioConfig& cfg)
{
    const auto sim = testbed::run_scenario(cfg);
    const auto flows = assemble_flows(sim.packets, cfg.subnet);
    return label_flows(flows, sim.socket_events, testbed::build_uid_map(cfg), testbed::build_device_map(cfg));
}

Result ground_truth_recovery()
{
    const std::regex line(R"(label accuracy: ([0-9.]+) \((\d+)/(\d+) flows\))");
    double slowest = 0.0;
    std::size_t flows = 0;
    for (int seed = 1; seed <= kLabelSeeds; ++seed) {
        const auto t0 = Clock::now();
        const auto r = cli({"pipeline", "--seed", std::to_string(seed), "--duration", fmt("%.0f", kLabelDurationS)});
        const double took = seconds_since(t0);
        slowest = std::max(slowest, took);
        std::smatch m;
        if (r.code != 0 || !std::regex_search(r.out, m, line)) {
            return {Verdict::fail, "seed " + std::to_string(seed) + ": pipeline failed"};
        }
        if (m[2] != m[3]) {
            return {Verdict::fail, "seed " + std::to_string(seed) + ": " + m[2].str() + "/" + m[3].str() + " correct"};
        }
        if (took >= kLabelBudgetPerSeedS) {
            return {Verdict::fail, "seed " + std::to_string(seed) + " took " + fmt("%.1f s", took)};
        }
        flows += std::stoul(m[3].str());
    }
    return {Verdict::pass, std::to_string(kLabelSeeds) + " seeds, " + std::to_string(flows) +
                               " flows all correct, slowest " + fmt("%.2f s", slowest)};
}

Result flow_oracle()
{
    const Cidr subnet = Cidr::parse("10.0.0.0/24");
    Rng rng(derive_seed(2, 0));
    const auto t0 = Clock::now();
    std::size_t packets = 0;
    for (int set = 0; set < kFlowSets; ++set) {
        const auto pk = testgen::random_packet_set(rng, {5000, 50, kDefaultIdleTimeoutS});
        packets += pk.size();
        const auto got = assemble_flows(pk, subnet);
        const auto want = oracle::partition_flows(pk, subnet, kDefaultIdleTimeoutS);
        bool same = got.size() == want.size();
        for (std::size_t i = 0; same && i < got.size(); ++i) same = oracle::same_flow(got[i], want[i]);
        if (!same) return {Verdict::fail, "packet set " + std::to_string(set) + " differs from the oracle"};
    }
    const double took = seconds_since(t0);
    if (took >= kFlowBudgetS) return {Verdict::fail, "took " + fmt("%.1f s", took)};
    return {Verdict::pass, std::to_string(kFlowSets) + " sets, " + std::to_string(packets) + " packets, " +
                               fmt("%.2f s", took)};
}

Result feature_recomputation()
{
    if (numerical_feature_names().size() != 20 || categorical_feature_names().size() != 16 ||
        FeatureVector{}.numerical.size() + FeatureVector{}.categorical.size() != 36) {
        return {Verdict::fail, "feature vector is not 20 numerical + 16 categorical"};
    }
    std::size_t checked = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 100; checked < kFeatureFlows; ++seed) {
        const auto cfg = scenario(seed, 1800.0);
        const auto sim = testbed::run_scenario(cfg);
        for (const auto& f : assemble_flows(sim.packets, cfg.subnet)) {
            if (checked == kFeatureFlows) break;
            const auto got = extract_features(f).numerical;
            const auto want = oracle::recompute_numerical(f);
            for (std::size_t j = 0; j < kNumericalCount; ++j) {
                if (!oracle::close_rel(got[j], want[j], kFeatureRelTol)) {
                    return {Verdict::fail, std::string(numerical_feature_names()[j]) + " differs on flow " +
                                               f.key.to_string()};
                }
                if (want[j] != 0.0) worst = std::max(worst, std::fabs(got[j] - want[j]) / std::fabs(want[j]));
            }
            ++checked;
        }
    }
    return {Verdict::pass, std::to_string(checked) + " flows, 20+16 columns, worst relative error " +
                               fmt("%.1e", worst)};
}

std::vector<ActionRecord> constant_log(int successes, int lf)
{
    std::vector<ActionRecord> log;
    for (int i = 0; i < successes + lf; ++i) {
        ActionRecord r;
        r.device_id = "iphone-6";
        r.app_name = "App" + std::to_string(i % 3);
        r.outcome = i < lf ? Outcome::launch_failure : Outcome::success;
        log.push_back(r);
    }
    return log;
}

Result reliability_arithmetic()
{
    const auto two_of_196 = compute_reliability(constant_log(194, 2));
    const auto shown = format_pct_device(two_of_196.by_device.at(0).lf_pct);
    if (shown != "1.020") return {Verdict::fail, "2/196 shows as " + shown};

    const auto clean = compute_reliability(constant_log(150, 0));
    for (const auto* rows : {&clean.by_device, &clean.by_app, &clean.by_device_app}) {
        for (const auto& r : *rows) {
            if (format_pct_device(r.lf_pct) != "0.000" || format_pct_device(r.ef_pct) != "0.000" ||
                format_pct_app(r.lf_pct) != "0" || format_pct_app(r.ef_pct) != "0") {
                return {Verdict::fail, "all-success log shows a nonzero rate"};
            }
        }
    }

    Rng rng(derive_seed(4, 0));
    for (int round = 0; round < 200; ++round) {
        const auto log = testgen::random_run_log(rng, static_cast<std::size_t>(rng.uniform_int(1, 500)));
        const auto rep = compute_reliability(log);
        for (const auto* level : {&rep.by_device, &rep.by_app}) {
            for (const auto& agg : *level) {
                std::int64_t a = 0, lf = 0, ef = 0;
                for (const auto& c : rep.by_device_app) {
                    const bool mine = agg.app_name.empty() ? c.device_id == agg.device_id : c.app_name == agg.app_name;
                    if (!mine) continue;
                    a += c.attempts;
                    lf += c.lf_count;
                    ef += c.ef_count;
                }
                const double want_lf = a ? 100.0 * static_cast<double>(lf) / static_cast<double>(a) : 0.0;
                const double want_ef = a ? 100.0 * static_cast<double>(ef) / static_cast<double>(a) : 0.0;
                if (agg.attempts != a || agg.lf_count != lf || agg.ef_count != ef ||
                    !oracle::close_rel(agg.lf_pct, want_lf, 1e-12) || !oracle::close_rel(agg.ef_pct, want_ef, 1e-12)) {
                    return {Verdict::fail, "aggregate row disagrees with its cells in round " + std::to_string(round)};
                }
            }
        }
    }
    return {Verdict::pass, "2/196 -> 1.020, all-success -> 0.000 / 0, 200 random logs aggregate consistently"};
}

Result metric_arithmetic()
{
    const auto& cases = testcases::metric_cases();
    if (cases.size() < kMinMetricCases) return {Verdict::fail, "too few cases"};
    for (const auto& c : cases) {
        std::vector<std::string> names;
        for (int k = 0; k < c.classes; ++k) names.push_back(std::to_string(k));
        const auto rep = ml::evaluate(c.pred, c.truth, names);
        std::vector<std::vector<std::int64_t>> confusion(c.classes, std::vector<std::int64_t>(c.classes, 0));
        for (std::size_t i = 0; i < c.truth.size(); ++i) ++confusion[c.truth[i]][c.pred[i]];
        if (rep.confusion != confusion || std::fabs(rep.macro_recall - c.macro_recall) > kMetricTol ||
            std::fabs(rep.macro_precision - c.macro_precision) > kMetricTol ||
            std::fabs(rep.macro_f1 - c.macro_f1) > kMetricTol) {
            return {Verdict::fail, "case '" + c.name + "'"};
        }
        const auto perfect = ml::evaluate(c.truth, c.truth, names);
        if (perfect.macro_recall != 1.0 || perfect.macro_precision != 1.0 || perfect.macro_f1 != 1.0) {
            return {Verdict::fail, "perfect predictions on '" + c.name + "' score below 1"};
        }
    }
    return {Verdict::pass, std::to_string(cases.size()) + " hand-computed cases, perfect predictions score 1.0"};
}

Result classifier_sanity()
{
    const auto t0 = Clock::now();
    Rng rng(derive_seed(6, 0));
    ml::LabelledMatrix train;
    train.class_names = {"a", "b", "c", "d", "e"};
    Matrix queries(kKnnRows, 8);
    for (std::size_t i = 0; i < kKnnRows; ++i) {
        std::vector<double> row(8);
        for (std::size_t j = 0; j < 8; ++j) {
            row[j] = rng.uniform(-1.0, 1.0) * static_cast<double>(j + 1) * 37.0;
            queries(i, j) = rng.uniform(-1.0, 1.0) * static_cast<double>(j + 1) * 37.0;
        }
        train.rows.append_row(row);
        train.labels.push_back(static_cast<int>(rng.index(5)));
    }
    if (ml::KnnModel::fit(train, 1).predict(queries) != oracle::nearest_neighbour(train.rows, train.labels, queries)) {
        return {Verdict::fail, "KNN(k=1) disagrees with the nearest-neighbour oracle"};
    }

    const Dataset a = to_dataset(labelled_run(scenario(kSeedA, kForestDurationS)));
    const Dataset b = to_dataset(labelled_run(scenario(kSeedB, kForestDurationS)));
    ml::BenchConfig cfg;
    cfg.forest.seed = 1;
    const auto res = ml::benchmark(a, b, cfg);
    const double f1 = res.models.at(0).metrics.macro_f1;
    const double knn_f1 = res.models.at(1).metrics.macro_f1;
    const double took = seconds_since(t0);
    const std::string detail = "KNN oracle agrees on " + std::to_string(kKnnRows) + " rows; RF macro-F1 " +
                               fmt("%.3f", f1) + " (KNN " + fmt("%.3f", knn_f1) + "), " +
                               std::to_string(res.train_rows) + " train / " + std::to_string(res.test_rows) +
                               " test rows, " + fmt("%.1f s", took);
    if (f1 < kForestMinF1) return {Verdict::fail, detail};
    if (took >= kClassifierBudgetS) return {Verdict::fail, detail + " over budget"};
    return {Verdict::pass, detail};
}

Result importance_check()
{
    const Dataset ds = to_dataset(labelled_run(scenario(42, 1800.0)));
    ml::BenchConfig cfg;
    cfg.forest.seed = 1;
    const auto res = ml::benchmark(ds, ds, cfg);
    std::string ranks;
    for (std::size_t r = 0; r < res.importance.size(); ++r) {
        const auto& name = res.importance[r].feature;
        if (name.find("ttl_mode") == std::string::npos) continue;
        ranks += (ranks.empty() ? "" : ", ") + name + " #" + std::to_string(r + 1);
        if (r < kTtlMaxRank) return {Verdict::fail, name + " ranks #" + std::to_string(r + 1)};
    }
    const std::string top = res.importance.front().feature;

    Rng rng(derive_seed(7, 0));
    const auto synth = testgen::informative_matrix(rng, 600, 20, 13, 4);
    ml::ForestParams p;
    p.seed = 1;
    const auto imp = ml::ForestModel::fit(synth, p).importance();
    if (imp.front().index != 13) return {Verdict::fail, "synthetic informative feature ranks below " + imp.front().feature};
    return {Verdict::pass, ranks + "; top feature " + top + "; synthetic informative feature ranks #1"};
}

Result published_numbers()
{
    const char* env = std::getenv("FLOWFORGE_PUBLISHED_DATA");
    const fs::path dir = env && *env ? fs::path(env) : fs::path(FLOWFORGE_SOURCE_DIR) / "data" / "published";
    const fs::path train = dir / "capture1.csv", test = dir / "capture2.csv";
    if (!fs::exists(train) || !fs::exists(test)) {
        return {Verdict::skipped, "published captures not found (" + train.string() + ", " + test.string() +
                                      "); download needs network access"};
    }
    const auto aliases = load_alias_table(fs::path(FLOWFORGE_SOURCE_DIR) / "config" / "tranalyzer_aliases.csv");
    ml::BenchConfig cfg;
    cfg.forest.seed = 1;
    const auto res = ml::benchmark(import_csv(train, aliases).dataset, import_csv(test, aliases).dataset, cfg);
    const double f1 = res.models.at(0).metrics.macro_f1;
    const std::string detail = "RF macro-F1 " + fmt("%.3f", f1) + " against " + fmt("%.3f", kPublishedF1);
    return {std::fabs(f1 - kPublishedF1) <= kPublishedTol ? Verdict::pass : Verdict::fail, detail};
}

/// Every non-manifest file under root, keyed by relative path.
std::map<std::string, std::string> data_files(const fs::path& root)
{
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        const auto name = e.path().filename().string();
        if (name.size() >= 13 && name.compare(name.size() - 13, 13, "manifest.json") == 0) continue;
        out[fs::relative(e.path(), root).string()] = read_text_file(e.path());
    }
    return out;
}

Result determinism()
{
    std::vector<std::map<std::string, std::string>> files;
    std::vector<std::string> stdout_text;
    for (int run = 0; run < 2; ++run) {
        testutil::TempDir dir("acceptance_det" + std::to_string(run));
        const std::string root = dir.path().string();
        const std::string sim = root + "/sim";
        const std::vector<std::vector<std::string>> commands = {
            {"simulate", "--seed", "9", "--duration", "1200", "--out", sim},
            {"flows", "--pcap", sim + "/capture.pcap", "--subnet", "192.168.1.0/24", "--out", root + "/flows.csv"},
            {"label", "--pcap", sim + "/capture.pcap", "--events", sim + "/socket_events.jsonl", "--uid-map",
             sim + "/uid_map.csv", "--device-map", sim + "/device_map.csv", "--subnet", "192.168.1.0/24", "--truth",
             sim + "/truth.csv", "--out", root + "/dataset.csv"},
            {"reliability", "--log", sim + "/run_log.jsonl", "--out", root + "/reliability.txt"},
            {"reliability", "--log", sim + "/run_log.jsonl", "--format", "csv"},
            {"bench", "--train", root + "/dataset.csv", "--test", root + "/dataset.csv", "--seed", "5", "--trees",
             "30", "--out", root + "/bench"},
            {"pipeline", "--seed", "9", "--duration", "1200", "--out", root + "/pipeline"},
        };
        std::string text;
        for (const auto& c : commands) {
            const auto r = cli(c);
            if (r.code != 0) return {Verdict::fail, c.front() + " exited " + std::to_string(r.code)};
            // Commands echo output paths; only the run directory differs.
            std::string out = r.out;
            for (auto at = out.find(root); at != std::string::npos; at = out.find(root, at)) out.replace(at, root.size(), "<run>");
            text += out;
        }
        files.push_back(data_files(dir.path()));
        stdout_text.push_back(text);
    }
    if (files[0].size() != files[1].size()) return {Verdict::fail, "runs produced different file sets"};
    for (const auto& [name, bytes] : files[0]) {
        auto it = files[1].find(name);
        if (it == files[1].end() || it->second != bytes) return {Verdict::fail, name + " differs between runs"};
    }
    if (stdout_text[0] != stdout_text[1]) return {Verdict::fail, "standard output differs between runs"};
    return {Verdict::pass, "7 commands run twice, " + std::to_string(files[0].size()) +
                               " data files and stdout byte-identical"};
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Result()>>> criteria = {
        {"ground-truth recovery", ground_truth_recovery},
        {"flow assembly oracle", flow_oracle},
        {"feature recomputation", feature_recomputation},
        {"reliability arithmetic", reliability_arithmetic},
        {"metric arithmetic", metric_arithmetic},
        {"classifier sanity", classifier_sanity},
        {"feature importance", importance_check},
        {"published-number reproduction (optional)", published_numbers},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Result r;
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r = {Verdict::fail, std::string("exception: ") + e.what()};
        }
        // The optional criterion never fails the build.
        const bool optional = i + 1 == 8;
        if (r.verdict == Verdict::fail && !optional) ++failures;
        const char* tag = r.verdict == Verdict::pass ? "PASS" : r.verdict == Verdict::fail ? "FAIL" : "SKIPPED";
        std::cout << tag << " criterion " << i + 1 << ": " << criteria[i].first << " - " << r.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
