#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pdn/baseline/optimize.hpp"
#include "pdn/floorplan.hpp"
#include "pdn/freq/target.hpp"
#include "pdn/params.hpp"
#include "pdn/rl/ppo.hpp"
#include "pdn/timing/currents.hpp"
#include "pdn/timing/vvi.hpp"

namespace pdn::io {

struct SweepConfig {
    double start = 1e8;
    double stop = 20e9;
    int per_decade = 100;

    [[nodiscard]] std::vector<double> frequencies() const;
};

struct TimeConfig {
    double band = 0.0;        // VVI band as a fraction of vdd; 0 = use target ripple
    double window = 2e-9;     // s
    double dt = 1e-12;        // s
    int profiles = 5;         // profiles frozen for the time phase
    std::vector<double> rho{0.0, 0.5, 1.0};
    double train_rho = 0.9;   // correlation of the time-phase profiles
    std::uint64_t seed = 1;   // first profile seed; profile k uses seed + k
    int io_sources_per_chiplet = 0;  // 0 = one per io site
    timing::PulseOptions pulses;
};

struct OptConfig {
    freq::RewardWeights weights;
    double gamma = 0.1;
    long budget = 2000;       // frequency phase and baselines, reward evaluations
    long time_budget = 500;   // time phase
    rl::PpoConfig ppo;
    baseline::BaselineConfig baseline;
};

/// Resolved case: every field populated, validated against the floorplan.
struct Case {
    std::string name;
    std::string preset;  // empty when every electrical parameter is explicit
    PdnParams params;
    Floorplan floorplan;
    freq::TargetImpedanceSpec target;
    SweepConfig sweep;
    TimeConfig time;
    OptConfig opt;

    [[nodiscard]] timing::VviSpec vvi_spec() const;
};

/// Parses YAML (JSON is accepted as a subset). `origin` prefixes messages,
/// which take the form "<origin>:<line>:<col>: <what>". Throws CaseFileError.
Case parse_case(const std::string& text, const std::string& origin);
Case load_case(const std::filesystem::path& path);

}  // namespace pdn::io
