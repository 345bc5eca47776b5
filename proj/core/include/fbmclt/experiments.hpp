#pragma once

#include "fbmclt/fbm.hpp"
#include "fbmclt/functionals.hpp"
#include "fbmclt/hurst.hpp"
#include "fbmclt/moments.hpp"
#include "fbmclt/test_function.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fbmclt {

inline constexpr const char* kToolkitVersion = "0.1.0";

// substream stage tags; every experiment stage lives on its own slice of the
// master seed so runs compose without draw collisions
enum Stage : std::uint32_t {
    kStageMomentPaths = 0,
    kStageLlnPaths = 1,
    kStageTightnessPaths = 2,
    kStageKsPaths = 3,
    kStageKsPilot = 4,
    kStageKsLimit = 5,
    kStageLnd = 6,
    kStageSimulate = 7,
    kStageOracleBase = 8, // + moment-spec index
};

struct GaussianPairSpec { // descriptor for the zero-integral test function f
    double sigma1 = 1.0;
    double sigma2 = 2.0;
    double amplitude = 1.0;
};

struct BumpSpec { // descriptor for the LLN bump g
    double sigma = 1.0;
    double weight = 1.0;
};

struct ExperimentConfig {
    HurstModel model = HurstModel(0.4, 1);
    GaussianPairSpec f;
    BumpSpec g;
    std::vector<double> n_schedule;
    std::int64_t replicas = 0;
    std::vector<double> t_points;
    std::vector<MomentSpec> moments;
    std::vector<double> lengths; // tightness grid of interval lengths
    std::uint64_t seed = 0;
    int threads = 1;
    BandwidthPolicy bandwidth;
    std::int64_t oracle_samples = 2000000;
    std::int64_t limit_grid_steps = 8192; // local-time grid for limit draws
    RiemannRule rule = RiemannRule::left;
    std::string out_dir = "out";

    TestFunction test_function() const {
        return TestFunction(f.sigma1, f.sigma2, f.amplitude, model.d);
    }
    SingleGaussian bump() const { return SingleGaussian(g.sigma, g.weight, model.d); }
};

// strict parse of the config JSON schema (unknown keys rejected); a manifest
// written by emit_report is accepted too — its embedded config echo is used,
// which is what makes "rerun from the manifest" reproduce the run
ExperimentConfig parse_experiment_config(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& cfg); // canonical echo

struct Report {
    std::vector<std::pair<std::string, std::string>> tables; // filename -> bytes
    std::string results_json; // experiment summary (serialized JSON object)
    std::string config_json;  // canonical config echo
    std::vector<std::pair<std::string, std::uint32_t>> stages; // name -> stage tag
    bool passed = true;       // seed-pinned check verdict (--check gate)
    std::string check_summary;
};

Report run_clt_moments(const ExperimentConfig& cfg);
Report run_lln(const ExperimentConfig& cfg);
Report run_tightness_scan(const ExperimentConfig& cfg);
Report run_distribution_test(const ExperimentConfig& cfg);

// writes every table plus manifest.json into out_dir (created if needed);
// returns the manifest text. CSV bytes are a pure function of (config, seed).
std::string emit_report(const Report& report, const std::string& out_dir);

// label like "0..1^2+1..2^2" identifying a MomentSpec in the moments table
std::string moment_spec_label(const MomentSpec& spec);

} // namespace fbmclt
