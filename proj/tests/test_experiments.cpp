#include "fbmclt/experiments.hpp"

#include "fbmclt/csv.hpp"
#include "fbmclt/errors.hpp"
#include "fbmclt/sha256.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

using namespace fbmclt;
using nlohmann::json;

namespace {

std::string base_config(const std::string& extra = "") {
    std::string s = R"({
        "hurst": 0.4, "dim": 1,
        "f": {"sigma1": 1.0, "sigma2": 2.0, "amplitude": 1.0},
        "n_schedule": [16, 32],
        "replicas": 120,
        "t_points": [1.0],
        "intervals": [[0.0, 1.0]],
        "multi_index": [2],
        "seed": 99,
        "oracle_samples": 20000)";
    if (!extra.empty()) s += ",\n" + extra;
    return s + "\n}";
}

std::filesystem::path fresh_dir(const char* leaf) {
    const auto p = std::filesystem::temp_directory_path() / "fbmclt_test" / leaf;
    std::filesystem::remove_all(p);
    return p;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t eol = text.find('\n', pos);
        const std::string line = text.substr(pos, eol - pos);
        pos = (eol == std::string::npos) ? text.size() : eol + 1;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t c = 0;
        while (true) {
            const std::size_t comma = line.find(',', c);
            cells.push_back(line.substr(c, comma - c));
            if (comma == std::string::npos) break;
            c = comma + 1;
        }
        if (t.header.empty())
            t.header = std::move(cells);
        else
            t.rows.push_back(std::move(cells));
    }
    return t;
}

} // namespace

TEST_CASE("config parse and canonical echo round-trip") {
    const ExperimentConfig cfg = parse_experiment_config(base_config());
    CHECK(cfg.model.h == 0.4);
    CHECK(cfg.model.d == 1);
    CHECK(cfg.replicas == 120);
    CHECK(cfg.n_schedule == std::vector<double>{16.0, 32.0});
    CHECK(cfg.moments.size() == 1);
    CHECK(cfg.moments[0].multi_index == std::vector<int>{2});
    CHECK(cfg.seed == 99);
    CHECK(cfg.rule == RiemannRule::left);

    const ExperimentConfig again = parse_experiment_config(config_to_json(cfg));
    CHECK(config_to_json(again) == config_to_json(cfg)); // canonical fixed point
    CHECK(again.oracle_samples == cfg.oracle_samples);
    CHECK(again.model.h == cfg.model.h);
}

TEST_CASE("config rejection: unknown / missing / malformed keys") {
    CHECK_THROWS_AS(parse_experiment_config(base_config(R"("typo_key": 1)")), config_error);
    CHECK_THROWS_AS(parse_experiment_config(R"({"dim": 1})"), config_error); // no hurst
    CHECK_THROWS_AS(parse_experiment_config("not json at all"), config_error);
    CHECK_THROWS_AS(parse_experiment_config(base_config(R"("rule": "simpson")")), config_error);
    CHECK_THROWS_AS(parse_experiment_config(base_config(R"("threads": 0)")), config_error);
    CHECK_THROWS_AS(parse_experiment_config(base_config(R"("limit_grid_steps": 4)")),
                    config_error);
    // decreasing schedule is rejected by the drivers, not the parser
    std::string bad = base_config();
    bad.replace(bad.find("[16, 32]"), 8, "[32, 16]");
    CHECK_THROWS_AS(run_clt_moments(parse_experiment_config(bad)), config_error);
}

TEST_CASE("moment spec labels") {
    CHECK(moment_spec_label({{{0.0, 1.0}}, {2}}) == "0..1^2");
    CHECK(moment_spec_label({{{0.0, 0.5}, {0.5, 1.0}}, {2, 2}}) == "0..0.5^2+0.5..1^2");
}

TEST_CASE("clt-moments run: structure, determinism, manifest round-trip") {
    ExperimentConfig cfg = parse_experiment_config(base_config());
    cfg.threads = 1;
    const Report rep = run_clt_moments(cfg);

    REQUIRE(rep.tables.size() == 1);
    CHECK(rep.tables[0].first == "moments.csv");
    const std::string& csv = rep.tables[0].second;
    CHECK(csv.rfind("n,m_spec,empirical,stderr,target,target_stderr,z", 0) == 0);

    const json res = json::parse(rep.results_json);
    CHECK(res["final"].size() == 1); // one row per moment spec
    CHECK(parse_csv(csv).rows.size() == 2); // 2 n-values x 1 spec

    // byte-identical rerun, and thread count cannot matter
    CHECK(run_clt_moments(cfg).tables[0].second == csv);
    ExperimentConfig threaded = cfg;
    threaded.threads = 2;
    CHECK(run_clt_moments(threaded).tables[0].second == csv);

    // a different seed must actually change the draws
    ExperimentConfig reseeded = cfg;
    reseeded.seed = 100;
    CHECK(run_clt_moments(reseeded).tables[0].second != csv);

    // emit, then rerun purely from the manifest on disk
    const auto dir = fresh_dir("clt");
    emit_report(rep, dir.string());
    const json man = json::parse(read_text_file((dir / "manifest.json").string()));
    CHECK(man["version"] == kToolkitVersion);
    for (const auto& [name, sha] : man["files"].items())
        CHECK(sha.get<std::string>() == sha256_file_hex((dir / name).string()));

    const ExperimentConfig from_manifest =
        parse_experiment_config(read_text_file((dir / "manifest.json").string()));
    CHECK(run_clt_moments(from_manifest).tables[0].second == csv);
}

TEST_CASE("clt-moments validation") {
    ExperimentConfig cfg = parse_experiment_config(base_config());
    cfg.replicas = 99; // below the floor
    CHECK_THROWS_AS(run_clt_moments(cfg), config_error);

    ExperimentConfig huge = parse_experiment_config(base_config());
    huge.n_schedule = {1e12}; // grid over budget, caught before any sampling
    CHECK_THROWS_AS(run_clt_moments(huge), config_error);

    ExperimentConfig wrong = parse_experiment_config(base_config());
    wrong.model = HurstModel(0.3, 1); // outside the CLT regime
    CHECK_THROWS_AS(run_clt_moments(wrong), regime_error);
}

TEST_CASE("lln run: targets, t=0 row, weight linearity") {
    std::string s = R"({
        "hurst": 0.4, "dim": 1,
        "g": {"sigma": 1.0, "weight": 1.0},
        "n_schedule": [16, 32],
        "replicas": 150,
        "t_points": [0.0, 1.0],
        "seed": 7
    })";
    const ExperimentConfig cfg = parse_experiment_config(s);
    const Report rep = run_lln(cfg);
    REQUIRE(rep.tables.size() == 1);
    CHECK(rep.tables[0].first == "lln.csv");

    // t = 0 rows are exactly zero with a zero target
    CsvTable t = parse_csv(rep.tables[0].second);
    REQUIRE(t.header == std::vector<std::string>{"n", "t", "empirical", "stderr", "target", "z"});
    bool saw_zero = false;
    for (const auto& row : t.rows)
        if (row[1] == "0") {
            saw_zero = true;
            CHECK(row[2] == "0");
            CHECK(row[4] == "0");
        }
    CHECK(saw_zero);

    // doubling the bump weight doubles every empirical column bit-for-bit
    ExperimentConfig doubled = cfg;
    doubled.g.weight = 2.0;
    CsvTable t2 = parse_csv(run_lln(doubled).tables[0].second);
    REQUIRE(t2.rows.size() == t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        CHECK(std::stod(t2.rows[i][2]) == 2.0 * std::stod(t.rows[i][2]));
}

TEST_CASE("tightness scan: slope, amplitude shift moves only the intercept") {
    std::string s = R"({
        "hurst": 0.4, "dim": 1,
        "f": {"sigma1": 1.0, "sigma2": 2.0, "amplitude": 1.0},
        "n_schedule": [64],
        "replicas": 400,
        "lengths": [0.125, 0.25, 0.5, 1.0],
        "seed": 21
    })";
    const ExperimentConfig cfg = parse_experiment_config(s);
    const Report rep = run_tightness_scan(cfg);
    REQUIRE(rep.tables.size() == 1);
    CHECK(rep.tables[0].first == "tightness.csv");
    const json res = json::parse(rep.results_json);
    const double slope = res["slope"].get<double>();
    CHECK(std::isfinite(slope));
    CHECK(slope > 0.0);

    ExperimentConfig amp = cfg;
    amp.f.amplitude = 2.0;
    const json res2 = json::parse(run_tightness_scan(amp).results_json);
    // E (2f...)^2 = 4 E (f...)^2: log-log slope fixed, intercept shifts log 4
    CHECK(res2["slope"].get<double>() == doctest::Approx(slope).epsilon(1e-12));
    CHECK(res2["intercept"].get<double>() - res["intercept"].get<double>() ==
          doctest::Approx(std::log(4.0)).epsilon(1e-12));

    ExperimentConfig few = cfg;
    few.lengths = {0.5, 1.0};
    CHECK_THROWS_AS(run_tightness_scan(few), config_error);
}

TEST_CASE("distribution test: degenerate amplitude-zero law") {
    std::string s = R"({
        "hurst": 0.4, "dim": 1,
        "f": {"sigma1": 1.0, "sigma2": 1.0, "amplitude": 1.0},
        "n_schedule": [32],
        "replicas": 2000,
        "t_points": [1.0],
        "limit_grid_steps": 64,
        "seed": 3
    })";
    // sigma1 == sigma2 makes f vanish identically, so both samples are the
    // point mass at zero and the KS distance is exactly 0
    const ExperimentConfig cfg = parse_experiment_config(s);
    const Report rep = run_distribution_test(cfg);
    const json res = json::parse(rep.results_json);
    CHECK(res["d_stat"].get<double>() == 0.0);
    CHECK(res["p_value"].get<double>() == 1.0);
    CHECK(rep.passed);

    ExperimentConfig bad = cfg;
    bad.t_points = {0.0};
    CHECK_THROWS_AS(run_distribution_test(bad), config_error);
    ExperimentConfig small = cfg;
    small.replicas = 500;
    CHECK_THROWS_AS(run_distribution_test(small), config_error);
}

TEST_CASE("emit_report writes hashed tables") {
    Report rep;
    rep.tables = {{"alpha.csv", "x,y\n1,2\n"}};
    rep.results_json = "{\"ok\": true}";
    rep.config_json = "{}";
    rep.stages = {{"paths", kStageMomentPaths}};
    rep.check_summary = "demo";

    const auto dir = fresh_dir("emit");
    const std::string manifest = emit_report(rep, dir.string());
    CHECK(read_text_file((dir / "manifest.json").string()) == manifest);
    CHECK(read_text_file((dir / "alpha.csv").string()) == "x,y\n1,2\n");

    const json man = json::parse(manifest);
    CHECK(man["files"]["alpha.csv"] == sha256_hex("x,y\n1,2\n"));
    CHECK(man["results"]["ok"] == true);
    CHECK(man["stage_seeds"]["paths"]["stage"] == 0);
}
