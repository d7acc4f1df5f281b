#include "pdn/io/artifacts.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <openssl/sha.h>

#include "pdn/error.hpp"

namespace pdn::io {

std::string num(double v) { return fmt::format("{}", v); }

namespace {

Json grid_json(const Grid<int>& g) {
    Json rows = Json::array();
    for (int r = 0; r < g.rows(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < g.cols(); ++c) row.push_back(g(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

LevelGrid grid_from(const Json& j, GridDims d, const std::string& what) {
    if (!j.is_array() || static_cast<int>(j.size()) != d.rows) {
        throw LayoutViolation(fmt::format("{}: expected {} rows", what, d.rows));
    }
    LevelGrid g(d, 0);
    for (int r = 0; r < d.rows; ++r) {
        const Json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != d.cols) {
            throw LayoutViolation(fmt::format("{}: row {} must have {} entries", what, r, d.cols));
        }
        for (int c = 0; c < d.cols; ++c) {
            const Json& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number_integer()) {
                throw LayoutViolation(fmt::format("{}[{}][{}]: expected an integer level", what, r, c));
            }
            g(r, c) = v.get<int>();
        }
    }
    return g;
}

Json coord_json(GridCoord c) { return Json::array({c.row, c.col}); }

}  // namespace

Json layout_to_json(const Floorplan& fp, const DecapLayout& layout) {
    layout.validate(fp);
    Json j;
    j["mim"] = grid_json(layout.mim);
    Json mos = Json::object();
    for (std::size_t k = 0; k < fp.chiplets.size(); ++k) mos[fp.chiplets[k].name] = grid_json(layout.mos[k]);
    j["mos"] = std::move(mos);
    return j;
}

DecapLayout layout_from_json(const Floorplan& fp, const Json& j, const std::string& origin) {
    if (!j.is_object()) throw LayoutViolation(fmt::format("{}: layout must be an object", origin));
    for (const auto& [key, _] : j.items()) {
        if (key != "mim" && key != "mos") {
            throw LayoutViolation(fmt::format("{}: unknown key '{}'", origin, key));
        }
    }
    if (!j.contains("mim") || !j.contains("mos")) {
        throw LayoutViolation(fmt::format("{}: layout needs both 'mim' and 'mos'", origin));
    }
    DecapLayout layout = DecapLayout::empty_for(fp);
    layout.mim = grid_from(j["mim"], fp.interposer, origin + ": mim");
    const Json& mos = j["mos"];
    if (!mos.is_object()) throw LayoutViolation(fmt::format("{}: 'mos' must map chiplet names to grids", origin));
    for (const auto& [key, _] : mos.items()) {
        if (!fp.chiplet_index(key)) {
            throw LayoutViolation(fmt::format("{}: mos names unknown chiplet '{}'", origin, key));
        }
    }
    for (std::size_t k = 0; k < fp.chiplets.size(); ++k) {
        const Chiplet& chip = fp.chiplets[k];
        if (!mos.contains(chip.name)) {
            throw LayoutViolation(fmt::format("{}: mos is missing chiplet '{}'", origin, chip.name));
        }
        layout.mos[k] = grid_from(mos[chip.name], chip.dims, fmt::format("{}: mos.{}", origin, chip.name));
    }
    try {
        layout.validate(fp);
    } catch (const LayoutViolation& e) {
        throw LayoutViolation(fmt::format("{}: {}", origin, e.what()));
    }
    return layout;
}

DecapLayout load_layout(const Floorplan& fp, const std::filesystem::path& path) {
    const std::string text = read_file(path);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw IoError(fmt::format("{}: not valid JSON: {}", path.string(), e.what()));
    }
    return layout_from_json(fp, j, path.string());
}

Json case_to_json(const Case& c) {
    const PdnParams& p = c.params;
    Json params = {
        {"r_chip", p.r_chip}, {"l_chip", p.l_chip}, {"c_chip", p.c_chip},
        {"r_intp", p.r_intp}, {"l_intp", p.l_intp}, {"c_intp", p.c_intp},
        {"loss_tangent", p.loss_tangent}, {"r_tsv", p.r_tsv}, {"l_tsv", p.l_tsv},
        {"c_tsv", p.c_tsv}, {"r_bump", p.r_bump}, {"l_bump", p.l_bump},
        {"r_ubump", p.r_ubump}, {"l_ubump", p.l_ubump}, {"c_mos_density", p.c_mos_density},
        {"mos_esr_coeff", p.mos_esr_coeff}, {"c_mim_density", p.c_mim_density},
        {"mim_esr_coeff", p.mim_esr_coeff}, {"ubumps_per_udc", p.ubumps_per_udc},
        {"tsvs_per_site", p.tsvs_per_site}, {"vdd", p.vdd},
    };
    const Floorplan& fp = c.floorplan;
    Json fpj;
    fpj["interposer"] = Json::array({fp.interposer.rows, fp.interposer.cols});
    fpj["interposer_space"] = grid_json(fp.interposer_space);
    fpj["tsv_sites"] = Json::array();
    for (GridCoord t : fp.tsv_sites) fpj["tsv_sites"].push_back(coord_json(t));
    fpj["chiplets"] = Json::array();
    for (const Chiplet& ch : fp.chiplets) {
        Json cj;
        cj["name"] = ch.name;
        cj["origin"] = coord_json(ch.origin);
        cj["dims"] = Json::array({ch.dims.rows, ch.dims.cols});
        cj["space"] = grid_json(ch.space);
        cj["io_sites"] = Json::array();
        for (GridCoord s : ch.io_sites) cj["io_sites"].push_back(coord_json(s));
        fpj["chiplets"].push_back(std::move(cj));
    }
    fpj["probes"] = Json::array();
    for (const ProbePort& pr : fp.probes) fpj["probes"].push_back({{"chiplet", pr.chiplet}, {"at", coord_json(pr.at)}});

    const rl::PpoConfig& ppo = c.opt.ppo;
    const baseline::BaselineConfig& b = c.opt.baseline;
    Json j;
    j["name"] = c.name;
    j["preset"] = c.preset;
    j["params"] = std::move(params);
    j["floorplan"] = std::move(fpj);
    j["target"] = {{"vdd", c.target.vdd}, {"ripple", c.target.ripple}, {"p_max", c.target.p_max},
                   {"t_r", c.target.t_r},
                   {"sweep", {{"start", c.sweep.start}, {"stop", c.sweep.stop}, {"per_decade", c.sweep.per_decade}}}};
    j["time"] = {{"band", c.time.band}, {"window", c.time.window}, {"dt", c.time.dt},
                 {"profiles", c.time.profiles}, {"rho", c.time.rho}, {"train_rho", c.time.train_rho},
                 {"seed", c.time.seed}, {"io_sources_per_chiplet", c.time.io_sources_per_chiplet},
                 {"pulses", {{"min_width", c.time.pulses.min_width}, {"max_width", c.time.pulses.max_width},
                             {"internal", c.time.pulses.internal_pulses}, {"io_pairs", c.time.pulses.io_pulse_pairs},
                             {"io_fraction", c.time.pulses.io_fraction}}}};
    j["opt"] = {
        {"weights", {{"alpha", c.opt.weights.alpha}, {"beta", c.opt.weights.beta}}},
        {"gamma", c.opt.gamma},
        {"budget", c.opt.budget},
        {"time_budget", c.opt.time_budget},
        {"ppo", {{"clip", ppo.clip}, {"discount", ppo.discount}, {"learning_rate", ppo.learning_rate},
                 {"epochs", ppo.epochs}, {"rollout", ppo.rollout}, {"minibatch", ppo.minibatch},
                 {"entropy_weight", ppo.entropy_weight}, {"value_coef", ppo.value_coef},
                 {"max_grad_norm", ppo.max_grad_norm}, {"episode_steps", ppo.episode_steps},
                 {"normalize_advantages", ppo.normalize_advantages},
                 {"conv", ppo.network.conv_channels}, {"kernel", ppo.network.kernel},
                 {"hidden", ppo.network.hidden}}},
        {"baseline", {{"population", b.ga.population}, {"crossover", b.ga.crossover},
                      {"mutation", b.ga.mutation}, {"tournament", b.ga.tournament}, {"elite", b.ga.elite},
                      {"initial_temp", b.da.initial_temp}, {"visit", b.da.visit}, {"accept", b.da.accept},
                      {"restart_temp_ratio", b.da.restart_temp_ratio}, {"local_search", b.da.local_search}}},
    };
    // JSON has no infinity; an unclipped objective is recorded as null.
    if (!std::isfinite(ppo.clip)) j["opt"]["ppo"]["clip"] = nullptr;
    return j;
}

std::string impedance_csv(const circuit::AcSolution& ac, const freq::TargetImpedanceSpec& target) {
    std::string out = "freq_hz";
    for (const std::string& p : ac.ports) out += ",z_mag_" + p;
    out += ",z_target\n";
    for (std::size_t f = 0; f < ac.frequencies.size(); ++f) {
        out += num(ac.frequencies[f]);
        for (std::size_t p = 0; p < ac.ports.size(); ++p) out += "," + num(std::abs(ac.z[p][f]));
        out += "," + num(freq::target_impedance(target, ac.frequencies[f])) + "\n";
    }
    return out;
}

std::string waveform_csv(const circuit::TransientSolution& sol) {
    std::string out = "time_s";
    for (const std::string& l : sol.labels) out += ",v_" + l;
    out += "\n";
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        out += num(sol.times[k]);
        for (const auto& v : sol.voltages) out += "," + num(v[k]);
        out += "\n";
    }
    return out;
}

std::string vvi_csv(const timing::VviReport& report) {
    std::string out = "node,vvi_vs\n";
    for (std::size_t i = 0; i < report.per_node.size(); ++i) {
        out += report.labels[i] + "," + num(report.per_node[i]) + "\n";
    }
    return out;
}

Json vvi_grid_json(const Floorplan& fp, const std::vector<Grid<double>>& grids) {
    Json j = Json::object();
    for (std::size_t k = 0; k < grids.size(); ++k) {
        Json rows = Json::array();
        for (int r = 0; r < grids[k].rows(); ++r) {
            Json row = Json::array();
            for (int c = 0; c < grids[k].cols(); ++c) row.push_back(grids[k](r, c));
            rows.push_back(std::move(row));
        }
        j[fp.chiplets[k].name] = std::move(rows);
    }
    return j;
}

std::string curve_csv(const std::vector<rl::EpisodeRecord>& curve) {
    std::string out = "episode,reward,mos_f,mim_f,best,evaluations,success\n";
    for (const auto& e : curve) {
        out += fmt::format("{},{},{},{},{},{},{}\n", e.episode, num(e.reward), num(e.mos), num(e.mim),
                           num(e.best), e.evaluations, e.success ? 1 : 0);
    }
    return out;
}

std::string timing_csv(const std::vector<rl::EpisodeRecord>& curve) {
    std::string out = "episode,wall_seconds\n";
    for (const auto& e : curve) out += fmt::format("{},{:.3f}\n", e.episode, e.wall_seconds);
    return out;
}

std::string history_csv(const baseline::BaselineResult& r) {
    const bool with_current = !r.current.empty();
    std::string out = with_current ? "evaluation,best_cost,current_cost\n" : "evaluation,best_cost\n";
    for (std::size_t i = 0; i < r.history.size(); ++i) {
        out += fmt::format("{},{}", i + 1, num(r.history[i]));
        if (with_current) out += "," + num(r.current[i]);
        out += "\n";
    }
    return out;
}

std::string sha256_hex(const std::string& bytes) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> md{};
    SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), md.data());
    std::string hex;
    hex.reserve(2 * md.size());
    for (unsigned char b : md) hex += fmt::format("{:02x}", b);
    return hex;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunDir::RunDir(const std::filesystem::path& out_dir, const std::string& name) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError(fmt::format("cannot create '{}': {}", out_dir.string(), ec.message()));
    for (int k = 1;; ++k) {
        fs::path p = out_dir / (k == 1 ? name : fmt::format("{}-{}", name, k));
        if (fs::create_directory(p, ec)) {
            path_ = p;
            break;
        }
        if (ec) throw IoError(fmt::format("cannot create '{}': {}", p.string(), ec.message()));
    }
}

void RunDir::write(const std::string& file, const std::string& content) {
    std::ofstream out(path_ / file, std::ios::binary);
    out << content;
    if (!out) throw IoError(fmt::format("cannot write '{}'", (path_ / file).string()));
    artifacts_[file] = sha256_hex(content);
}

std::string pretty_json(const Json& j, int indent) {
    // Arrays of scalars stay on one line so grids read as matrices.
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    const std::string inner(static_cast<std::size_t>(indent + 2), ' ');
    if (j.is_array()) {
        const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
        if (flat || j.empty()) return j.dump();
        std::string out = "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            out += inner + pretty_json(j[i], indent + 2) + (i + 1 < j.size() ? ",\n" : "\n");
        }
        return out + pad + "]";
    }
    if (j.is_object()) {
        if (j.empty()) return "{}";
        std::string out = "{\n";
        std::size_t i = 0;
        for (const auto& [key, value] : j.items()) {
            out += inner + Json(key).dump() + ": " + pretty_json(value, indent + 2) +
                   (++i < j.size() ? ",\n" : "\n");
        }
        return out + pad + "}";
    }
    return j.dump();
}

void RunDir::write_json(const std::string& file, const Json& j) { write(file, pretty_json(j) + "\n"); }

void RunDir::write_diagnostic(const std::string& file, const std::string& content) {
    std::ofstream out(path_ / file, std::ios::binary);
    out << content;
    if (!out) throw IoError(fmt::format("cannot write '{}'", (path_ / file).string()));
    diagnostics_.push_back(file);
}

void RunDir::add_input(const std::string& role, const std::filesystem::path& path) {
    inputs_[role] = {{"path", path.string()}, {"sha256", sha256_hex(read_file(path))}};
}

void RunDir::finish(const std::string& command, const Json& args, const Json& config) {
    Json m;
    m["tool"] = "pdnopt";
    m["version"] = PDN_VERSION;
    m["command"] = command;
    m["args"] = args;
    m["inputs"] = inputs_;
    m["config"] = config;
    Json arts = Json::object();
    for (const auto& [file, digest] : artifacts_) arts[file] = digest;
    m["artifacts"] = std::move(arts);
    m["diagnostics"] = diagnostics_;
    std::ofstream out(path_ / "manifest.json", std::ios::binary);
    out << pretty_json(m) << "\n";
    if (!out) throw IoError(fmt::format("cannot write '{}'", (path_ / "manifest.json").string()));
}

}  // namespace pdn::io
