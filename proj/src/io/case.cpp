#include "pdn/io/case.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "pdn/error.hpp"

namespace pdn::io {

namespace {

std::string where(const std::string& origin, const YAML::Mark& m) {
    if (m.is_null()) return origin;
    return fmt::format("{}:{}:{}", origin, m.line + 1, m.column + 1);
}

[[noreturn]] void fail(const std::string& origin, const YAML::Node& at, const std::string& what) {
    throw CaseFileError(fmt::format("{}: {}", where(origin, at.Mark()), what));
}

// A mapping node whose keys are checked off as they are read; finish()
// rejects anything left over.
class Section {
public:
    Section(const YAML::Node& node, std::string path, const std::string& origin)
        : node_(node), path_(std::move(path)), origin_(&origin) {
        if (!node_.IsMap()) fail(origin, node_, fmt::format("'{}' must be a mapping", path_));
    }

    [[nodiscard]] bool has(const std::string& key) const { return static_cast<bool>(node_[key]); }

    YAML::Node get(const std::string& key) {
        seen_.insert(key);
        return node_[key];
    }

    YAML::Node require(const std::string& key) {
        YAML::Node n = get(key);
        if (!n) fail(*origin_, node_, fmt::format("'{}' is missing required key '{}'", path_, key));
        return n;
    }

    [[nodiscard]] std::string field(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    double number(const YAML::Node& n, const std::string& key) const {
        try {
            if (!n.IsScalar()) throw YAML::BadConversion(n.Mark());
            const double v = n.as<double>();
            if (!std::isfinite(v)) throw YAML::BadConversion(n.Mark());
            return v;
        } catch (const YAML::BadConversion&) {
            fail(*origin_, n, fmt::format("'{}' must be a finite number", field(key)));
        }
    }

    long integer(const YAML::Node& n, const std::string& key) const {
        const double v = number(n, key);
        if (v != std::floor(v) || std::abs(v) > 9e15) {
            fail(*origin_, n, fmt::format("'{}' must be an integer", field(key)));
        }
        return static_cast<long>(v);
    }

    void read(const std::string& key, double& out) {
        if (YAML::Node n = get(key)) out = number(n, key);
    }
    void read(const std::string& key, int& out) {
        if (YAML::Node n = get(key)) out = static_cast<int>(integer(n, key));
    }
    void read(const std::string& key, long& out) {
        if (YAML::Node n = get(key)) out = integer(n, key);
    }
    void read(const std::string& key, std::uint64_t& out) {
        if (YAML::Node n = get(key)) {
            const long v = integer(n, key);
            if (v < 0) fail(*origin_, n, fmt::format("'{}' must be non-negative", field(key)));
            out = static_cast<std::uint64_t>(v);
        }
    }
    void read(const std::string& key, bool& out) {
        if (YAML::Node n = get(key)) {
            try {
                if (!n.IsScalar()) throw YAML::BadConversion(n.Mark());
                out = n.as<bool>();
            } catch (const YAML::BadConversion&) {
                fail(*origin_, n, fmt::format("'{}' must be true or false", field(key)));
            }
        }
    }
    void read(const std::string& key, std::string& out) {
        if (YAML::Node n = get(key)) {
            if (!n.IsScalar()) fail(*origin_, n, fmt::format("'{}' must be a string", field(key)));
            out = n.as<std::string>();
        }
    }
    void read(const std::string& key, std::vector<int>& out) {
        if (YAML::Node n = get(key)) {
            if (!n.IsSequence()) fail(*origin_, n, fmt::format("'{}' must be a list of integers", field(key)));
            out.clear();
            for (const auto& e : n) out.push_back(static_cast<int>(integer(e, key)));
        }
    }
    void read(const std::string& key, std::vector<double>& out) {
        if (YAML::Node n = get(key)) {
            if (!n.IsSequence()) fail(*origin_, n, fmt::format("'{}' must be a list of numbers", field(key)));
            out.clear();
            for (const auto& e : n) out.push_back(number(e, key));
        }
    }

    void finish() const {
        for (const auto& kv : node_) {
            const auto key = kv.first.as<std::string>();
            if (!seen_.contains(key)) {
                fail(*origin_, kv.first,
                     fmt::format("unknown key '{}' in '{}'", key, path_.empty() ? "<root>" : path_));
            }
        }
    }

    [[nodiscard]] const YAML::Node& node() const { return node_; }
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    YAML::Node node_;
    std::string path_;
    const std::string* origin_;
    std::set<std::string> seen_;
};

GridCoord coord(const YAML::Node& n, const std::string& field, const std::string& origin) {
    if (!n.IsSequence() || n.size() != 2) fail(origin, n, fmt::format("'{}' must be [row, col]", field));
    GridCoord c;
    for (int k = 0; k < 2; ++k) {
        const YAML::Node e = n[k];
        try {
            const double v = e.as<double>();
            if (v != std::floor(v)) throw YAML::BadConversion(e.Mark());
            (k == 0 ? c.row : c.col) = static_cast<int>(v);
        } catch (const YAML::BadConversion&) {
            fail(origin, e, fmt::format("'{}' must be [row, col] with integer entries", field));
        }
    }
    return c;
}

GridDims dims(const YAML::Node& n, const std::string& field, const std::string& origin) {
    const GridCoord c = coord(n, field, origin);
    if (c.row <= 0 || c.col <= 0) fail(origin, n, fmt::format("'{}' must be positive [rows, cols]", field));
    return {c.row, c.col};
}

BinaryGrid binary_matrix(const YAML::Node& n, GridDims d, const std::string& field,
                         const std::string& origin) {
    if (!n.IsSequence() || static_cast<int>(n.size()) != d.rows) {
        fail(origin, n, fmt::format("'{}' must have {} rows", field, d.rows));
    }
    BinaryGrid g(d, 0);
    for (int r = 0; r < d.rows; ++r) {
        const YAML::Node row = n[r];
        if (!row.IsSequence() || static_cast<int>(row.size()) != d.cols) {
            fail(origin, row, fmt::format("'{}' row {} must have {} entries", field, r, d.cols));
        }
        for (int c = 0; c < d.cols; ++c) {
            const YAML::Node e = row[c];
            int v = -1;
            try {
                v = e.as<int>();
            } catch (const YAML::BadConversion&) {
            }
            if (v != 0 && v != 1) fail(origin, e, fmt::format("'{}' entries must be 0 or 1", field));
            g(r, c) = v;
        }
    }
    return g;
}

void check_inside(const GridCoord& c, GridDims d, const YAML::Node& n, const std::string& field,
                   const std::string& origin) {
    if (c.row < 0 || c.col < 0 || c.row >= d.rows || c.col >= d.cols) {
        fail(origin, n, fmt::format("'{}' = [{}, {}] lies outside the {}x{} grid", field, c.row, c.col,
                                    d.rows, d.cols));
    }
}

PdnParams read_params(Section* s, const std::string& preset, const std::string& origin,
                      const YAML::Node& root) {
    PdnParams p;
    if (!preset.empty()) {
        try {
            p = preset_params(preset);
        } catch (const InvalidArgument& e) {
            fail(origin, root["preset"], e.what());
        }
    }
    struct Entry {
        const char* key;
        double* dv;
        int* iv;
    };
    const std::vector<Entry> entries{
        {"r_chip", &p.r_chip, nullptr},          {"l_chip", &p.l_chip, nullptr},
        {"c_chip", &p.c_chip, nullptr},          {"r_intp", &p.r_intp, nullptr},
        {"l_intp", &p.l_intp, nullptr},          {"c_intp", &p.c_intp, nullptr},
        {"loss_tangent", &p.loss_tangent, nullptr}, {"r_tsv", &p.r_tsv, nullptr},
        {"l_tsv", &p.l_tsv, nullptr},            {"c_tsv", &p.c_tsv, nullptr},
        {"r_bump", &p.r_bump, nullptr},          {"l_bump", &p.l_bump, nullptr},
        {"r_ubump", &p.r_ubump, nullptr},        {"l_ubump", &p.l_ubump, nullptr},
        {"c_mos_density", &p.c_mos_density, nullptr}, {"mos_esr_coeff", &p.mos_esr_coeff, nullptr},
        {"c_mim_density", &p.c_mim_density, nullptr}, {"mim_esr_coeff", &p.mim_esr_coeff, nullptr},
        {"ubumps_per_udc", nullptr, &p.ubumps_per_udc}, {"tsvs_per_site", nullptr, &p.tsvs_per_site},
    };
    for (const Entry& e : entries) {
        const bool present = s && s->has(e.key);
        if (!present && preset.empty()) {
            const YAML::Node anchor = s ? s->node() : root;
            fail(origin, anchor,
                 fmt::format("'params.{}' is required when no preset is selected", e.key));
        }
        if (!present) continue;
        if (e.dv) s->read(e.key, *e.dv);
        else s->read(e.key, *e.iv);
    }
    if (s) s->finish();
    return p;
}

Floorplan read_floorplan(Section& s, const std::string& origin) {
    Floorplan fp;
    fp.interposer = dims(s.require("interposer"), "floorplan.interposer", origin);
    if (YAML::Node n = s.get("interposer_space")) {
        fp.interposer_space = binary_matrix(n, fp.interposer, "floorplan.interposer_space", origin);
    } else {
        fp.interposer_space = BinaryGrid(fp.interposer, 1);
    }

    const YAML::Node tsv = s.require("tsv_sites");
    if (!tsv.IsSequence() || tsv.size() == 0) fail(origin, tsv, "'floorplan.tsv_sites' must be a non-empty list");
    for (std::size_t i = 0; i < tsv.size(); ++i) {
        const std::string f = fmt::format("floorplan.tsv_sites[{}]", i);
        const GridCoord c = coord(tsv[i], f, origin);
        check_inside(c, fp.interposer, tsv[i], f, origin);
        fp.tsv_sites.push_back(c);
    }

    const YAML::Node chips = s.require("chiplets");
    if (!chips.IsSequence()) fail(origin, chips, "'floorplan.chiplets' must be a list");
    for (std::size_t i = 0; i < chips.size(); ++i) {
        const std::string base = fmt::format("floorplan.chiplets[{}]", i);
        Section cs(chips[i], base, origin);
        Chiplet c;
        cs.read("name", c.name);
        if (c.name.empty()) fail(origin, chips[i], fmt::format("'{}.name' is required", base));
        c.origin = coord(cs.require("origin"), base + ".origin", origin);
        check_inside(c.origin, fp.interposer, cs.get("origin"), base + ".origin", origin);
        c.dims = dims(cs.require("dims"), base + ".dims", origin);
        if (c.origin.row + c.dims.rows > fp.interposer.rows || c.origin.col + c.dims.cols > fp.interposer.cols) {
            fail(origin, cs.get("dims"), fmt::format("'{}' extends past the interposer", base));
        }
        if (YAML::Node sp = cs.get("space")) {
            c.space = binary_matrix(sp, c.dims, base + ".space", origin);
        } else {
            c.space = BinaryGrid(c.dims, 1);
        }
        if (YAML::Node io = cs.get("io_sites")) {
            if (!io.IsSequence()) fail(origin, io, fmt::format("'{}.io_sites' must be a list", base));
            for (std::size_t k = 0; k < io.size(); ++k) {
                const std::string f = fmt::format("{}.io_sites[{}]", base, k);
                const GridCoord at = coord(io[k], f, origin);
                check_inside(at, c.dims, io[k], f, origin);
                c.io_sites.push_back(at);
            }
        }
        cs.finish();
        fp.chiplets.push_back(std::move(c));
    }

    if (YAML::Node probes = s.get("probes")) {
        if (!probes.IsSequence()) fail(origin, probes, "'floorplan.probes' must be a list");
        for (std::size_t i = 0; i < probes.size(); ++i) {
            const std::string base = fmt::format("floorplan.probes[{}]", i);
            Section ps(probes[i], base, origin);
            ProbePort p;
            ps.read("chiplet", p.chiplet);
            p.at = coord(ps.require("at"), base + ".at", origin);
            GridDims bound = fp.interposer;
            if (!p.chiplet.empty()) {
                const auto k = fp.chiplet_index(p.chiplet);
                if (!k) fail(origin, ps.get("chiplet"), fmt::format("'{}.chiplet' names unknown chiplet '{}'", base, p.chiplet));
                bound = fp.chiplets[*k].dims;
            }
            check_inside(p.at, bound, ps.get("at"), base + ".at", origin);
            ps.finish();
            fp.probes.push_back(std::move(p));
        }
    }
    s.finish();
    try {
        fp.validate();
    } catch (const Error& e) {
        fail(origin, s.node(), fmt::format("floorplan: {}", e.what()));
    }
    return fp;
}

void read_ppo(Section& s, rl::PpoConfig& c) {
    // `clip: null` turns clipping off.
    if (s.has("clip") && s.get("clip").IsNull()) c.clip = std::numeric_limits<double>::infinity();
    else s.read("clip", c.clip);
    s.read("discount", c.discount);
    s.read("learning_rate", c.learning_rate);
    s.read("epochs", c.epochs);
    s.read("rollout", c.rollout);
    s.read("minibatch", c.minibatch);
    s.read("entropy_weight", c.entropy_weight);
    s.read("value_coef", c.value_coef);
    s.read("max_grad_norm", c.max_grad_norm);
    s.read("episode_steps", c.episode_steps);
    s.read("normalize_advantages", c.normalize_advantages);
    s.read("conv", c.network.conv_channels);
    s.read("kernel", c.network.kernel);
    s.read("hidden", c.network.hidden);
    s.finish();
}

void read_baseline(Section& s, baseline::BaselineConfig& c) {
    s.read("population", c.ga.population);
    s.read("crossover", c.ga.crossover);
    s.read("mutation", c.ga.mutation);
    s.read("tournament", c.ga.tournament);
    s.read("elite", c.ga.elite);
    s.read("initial_temp", c.da.initial_temp);
    s.read("visit", c.da.visit);
    s.read("accept", c.da.accept);
    s.read("restart_temp_ratio", c.da.restart_temp_ratio);
    s.read("local_search", c.da.local_search);
    s.finish();
}

// Runs a validate() and re-anchors its message at the section.
template <typename F>
void checked(const std::string& origin, const YAML::Node& at, const std::string& what, F&& f) {
    try {
        f();
    } catch (const CaseFileError&) {
        throw;
    } catch (const Error& e) {
        fail(origin, at, fmt::format("{}: {}", what, e.what()));
    }
}

}  // namespace

std::vector<double> SweepConfig::frequencies() const {
    return freq::log_frequency_grid(start, stop, per_decade);
}

timing::VviSpec Case::vvi_spec() const {
    const double band = time.band > 0.0 ? time.band : target.ripple;
    return timing::VviSpec::from_vdd(target.vdd, band, time.window);
}

Case parse_case(const std::string& text, const std::string& origin) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw CaseFileError(fmt::format("{}: {}", where(origin, e.mark), e.msg));
    }
    if (!root || root.IsNull()) throw CaseFileError(fmt::format("{}: case file is empty", origin));
    Section top(root, "", origin);
    // Unknown sections are reported before anything they might have shadowed.
    for (const auto& kv : root) {
        static const std::set<std::string> kSections{"name", "preset", "params", "target",
                                                     "floorplan", "time", "opt"};
        const auto key = kv.first.as<std::string>();
        if (!kSections.contains(key)) fail(origin, kv.first, fmt::format("unknown key '{}' in '<root>'", key));
    }
    Case c;

    top.read("name", c.name);
    if (c.name.empty()) fail(origin, root, "'name' is required");
    for (char ch : c.name) {
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_')) {
            fail(origin, top.get("name"), "'name' may only contain letters, digits, '-' and '_'");
        }
    }
    top.read("preset", c.preset);

    {
        YAML::Node pn = top.get("params");
        std::optional<Section> ps;
        if (pn) ps.emplace(pn, "params", origin);
        c.params = read_params(ps ? &*ps : nullptr, c.preset, origin, root);
    }

    {
        Section ts(top.require("target"), "target", origin);
        c.target.vdd = ts.number(ts.require("vdd"), "vdd");
        c.target.ripple = ts.number(ts.require("ripple"), "ripple");
        c.target.p_max = ts.number(ts.require("p_max"), "p_max");
        const bool has_tr = ts.has("t_r"), has_fk = ts.has("f_knee");
        if (has_tr == has_fk) fail(origin, ts.node(), "'target' needs exactly one of 't_r' or 'f_knee'");
        if (has_tr) {
            c.target.t_r = ts.number(ts.get("t_r"), "t_r");
        } else {
            c.target.t_r = 0.35 / ts.number(ts.get("f_knee"), "f_knee");
        }
        if (YAML::Node sw = ts.get("sweep")) {
            Section ss(sw, "target.sweep", origin);
            ss.read("start", c.sweep.start);
            ss.read("stop", c.sweep.stop);
            ss.read("per_decade", c.sweep.per_decade);
            ss.finish();
            checked(origin, sw, "target.sweep", [&] { (void)c.sweep.frequencies(); });
        }
        ts.finish();
        c.params.vdd = c.target.vdd;
        checked(origin, ts.node(), "target", [&] { c.target.validate(); });
    }
    checked(origin, root, "params", [&] { c.params.validate(); });

    {
        Section fs(top.require("floorplan"), "floorplan", origin);
        c.floorplan = read_floorplan(fs, origin);
    }

    if (YAML::Node tn = top.get("time")) {
        Section ts(tn, "time", origin);
        ts.read("band", c.time.band);
        ts.read("window", c.time.window);
        ts.read("dt", c.time.dt);
        ts.read("profiles", c.time.profiles);
        ts.read("rho", c.time.rho);
        ts.read("train_rho", c.time.train_rho);
        ts.read("seed", c.time.seed);
        ts.read("io_sources_per_chiplet", c.time.io_sources_per_chiplet);
        if (YAML::Node pn = ts.get("pulses")) {
            Section ps(pn, "time.pulses", origin);
            ps.read("min_width", c.time.pulses.min_width);
            ps.read("max_width", c.time.pulses.max_width);
            ps.read("internal", c.time.pulses.internal_pulses);
            ps.read("io_pairs", c.time.pulses.io_pulse_pairs);
            ps.read("io_fraction", c.time.pulses.io_fraction);
            ps.finish();
        }
        ts.finish();
        c.time.pulses.window = c.time.window;
        checked(origin, tn, "time", [&] {
            if (!(c.time.band >= 0.0 && c.time.band < 1.0)) throw InvalidArgument("band must lie in [0, 1)");
            if (!(c.time.dt > 0.0 && c.time.window >= c.time.dt)) throw InvalidArgument("need 0 < dt <= window");
            if (c.time.profiles <= 0) throw InvalidArgument("profiles must be positive");
            if (c.time.io_sources_per_chiplet < 0) throw InvalidArgument("io_sources_per_chiplet must be non-negative");
            for (double r : c.time.rho) {
                if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument(fmt::format("rho {} outside [0, 1]", r));
            }
            if (!(c.time.train_rho >= 0.0 && c.time.train_rho <= 1.0)) throw InvalidArgument("train_rho outside [0, 1]");
            c.vvi_spec().validate(c.target.vdd);
        });
    }

    if (YAML::Node on = top.get("opt")) {
        Section os(on, "opt", origin);
        if (YAML::Node wn = os.get("weights")) {
            Section ws(wn, "opt.weights", origin);
            ws.read("alpha", c.opt.weights.alpha);
            ws.read("beta", c.opt.weights.beta);
            ws.finish();
            checked(origin, wn, "opt.weights", [&] { c.opt.weights.validate(); });
        }
        os.read("gamma", c.opt.gamma);
        os.read("budget", c.opt.budget);
        os.read("time_budget", c.opt.time_budget);
        if (YAML::Node pn = os.get("ppo")) {
            Section ps(pn, "opt.ppo", origin);
            read_ppo(ps, c.opt.ppo);
            checked(origin, pn, "opt.ppo", [&] { c.opt.ppo.validate(); });
        }
        if (YAML::Node bn = os.get("baseline")) {
            Section bs(bn, "opt.baseline", origin);
            read_baseline(bs, c.opt.baseline);
        }
        os.finish();
        checked(origin, on, "opt", [&] {
            if (!(c.opt.gamma >= 0.0 && c.opt.gamma <= 1.0)) throw InvalidArgument("gamma must lie in [0, 1]");
            if (c.opt.budget <= 0 || c.opt.time_budget <= 0) throw InvalidArgument("budgets must be positive");
            c.opt.baseline.budget = c.opt.budget;
            c.opt.baseline.validate();
        });
    }
    c.opt.baseline.budget = c.opt.budget;
    top.finish();
    return c;
}

Case load_case(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open case file '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_case(ss.str(), path.string());
}

}  // namespace pdn::io
