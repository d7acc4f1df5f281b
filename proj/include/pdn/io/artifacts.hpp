#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdn/baseline/optimize.hpp"
#include "pdn/circuit/ac.hpp"
#include "pdn/circuit/transient.hpp"
#include "pdn/floorplan.hpp"
#include "pdn/freq/target.hpp"
#include "pdn/io/case.hpp"
#include "pdn/layout.hpp"
#include "pdn/rl/train.hpp"
#include "pdn/timing/vvi.hpp"

namespace pdn::io {

using Json = nlohmann::ordered_json;

/// Shortest decimal form that round-trips.
std::string num(double v);

Json layout_to_json(const Floorplan& fp, const DecapLayout& layout);
/// Strict: exactly the keys "mim" and "mos", one mos grid per chiplet, and
/// the result must validate against the floorplan. Throws LayoutViolation.
DecapLayout layout_from_json(const Floorplan& fp, const Json& j, const std::string& origin);
/// Throws IoError when the file cannot be read or is not JSON.
DecapLayout load_layout(const Floorplan& fp, const std::filesystem::path& path);

Json case_to_json(const Case& c);

std::string impedance_csv(const circuit::AcSolution& ac, const freq::TargetImpedanceSpec& target);
std::string waveform_csv(const circuit::TransientSolution& sol);
std::string vvi_csv(const timing::VviReport& report);
Json vvi_grid_json(const Floorplan& fp, const std::vector<Grid<double>>& grids);
std::string curve_csv(const std::vector<rl::EpisodeRecord>& curve);
std::string timing_csv(const std::vector<rl::EpisodeRecord>& curve);
std::string history_csv(const baseline::BaselineResult& r);

/// Indented JSON with scalar arrays kept on one line.
std::string pretty_json(const Json& j, int indent = 0);

std::string sha256_hex(const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

/// Output directory of one command invocation. Artifacts written through
/// it are digested into manifest.json; diagnostics (wall-clock data) are
/// listed without a digest because they are not reproducible.
class RunDir {
public:
    RunDir(const std::filesystem::path& out_dir, const std::string& name);

    void write(const std::string& file, const std::string& content);
    void write_json(const std::string& file, const Json& j);
    void write_diagnostic(const std::string& file, const std::string& content);
    void add_input(const std::string& role, const std::filesystem::path& path);
    /// Writes manifest.json; call once, last.
    void finish(const std::string& command, const Json& args, const Json& config);

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::map<std::string, std::string> artifacts_;
    std::vector<std::string> diagnostics_;
    Json inputs_ = Json::object();
};

}  // namespace pdn::io
