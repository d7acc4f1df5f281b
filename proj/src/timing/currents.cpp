#include "pdn/timing/currents.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pdn/error.hpp"

namespace pdn::timing {

using circuit::PwlPoint;
using circuit::PwlSource;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(id)));
}

void push_point(std::vector<PwlPoint>& pts, double t, double i) {
    if (!pts.empty() && pts.back().t >= t) {
        // abutting pulses share the boundary sample
        pts.back().i += i;
        return;
    }
    pts.push_back({t, i});
}

// One triangle per slot, each slot 1/count of the window.
std::vector<PwlPoint> triangle_train(std::mt19937_64& rng, int count, double peak_lo,
                                     double peak_hi, const PulseOptions& opt) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<PwlPoint> pts{{0.0, 0.0}};
    const double slot = opt.window / count;
    for (int j = 0; j < count; ++j) {
        const double wmax = std::min(opt.max_width, slot);
        const double wmin = std::min(opt.min_width, wmax);
        const double w = wmin + (wmax - wmin) * u01(rng);
        const double start = j * slot + (slot - w) * u01(rng);
        const double peak = peak_lo + (peak_hi - peak_lo) * u01(rng);
        push_point(pts, start, 0.0);
        push_point(pts, start + 0.5 * w, peak);
        push_point(pts, start + w, 0.0);
    }
    return pts;
}

// Mirrored positive/negative triangle pairs; each pair integrates to zero.
std::vector<PwlPoint> bipolar_train(std::mt19937_64& rng, int pairs, double amplitude,
                                    const PulseOptions& opt) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<PwlPoint> pts{{0.0, 0.0}};
    const double slot = opt.window / pairs;
    for (int j = 0; j < pairs; ++j) {
        const double wmax = std::min(opt.max_width, 0.5 * slot);
        const double wmin = std::min(opt.min_width, wmax);
        const double w = wmin + (wmax - wmin) * u01(rng);
        const double start = j * slot + (slot - 2.0 * w) * u01(rng);
        const double peak = amplitude * (0.5 + 0.5 * u01(rng));
        const double sign = u01(rng) < 0.5 ? 1.0 : -1.0;
        const double half = 0.5 * w;
        push_point(pts, start, 0.0);
        push_point(pts, start + half, sign * peak);
        push_point(pts, start + w, 0.0);
        push_point(pts, start + w + half, -sign * peak);
        push_point(pts, start + 2.0 * w, 0.0);
    }
    return pts;
}

std::vector<PwlPoint> scaled_sum(const std::vector<PwlPoint>& a, double wa,
                                 const std::vector<PwlPoint>& b, double wb) {
    PwlSource sa{kGround, a};
    PwlSource sb{kGround, b};
    std::vector<double> t;
    for (const auto& p : a) t.push_back(p.t);
    for (const auto& p : b) t.push_back(p.t);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    std::vector<PwlPoint> out;
    out.reserve(t.size());
    for (double x : t) out.push_back({x, wa * sa.eval(x) + wb * sb.eval(x)});
    return out;
}

void scale(std::vector<PwlSource>& sources, double factor) {
    for (auto& s : sources) {
        for (auto& p : s.points) p.i *= factor;
    }
}

// Keeps the rescaled maximum strictly inside the bound despite rounding.
constexpr double kScaleMargin = 1.0 - 1e-12;

}  // namespace

std::vector<PwlSource> CurrentProfile::all() const {
    std::vector<PwlSource> out = internal;
    out.insert(out.end(), io.begin(), io.end());
    return out;
}

double max_sum(std::span<const PwlSource> sources) {
    double best = 0.0;
    for (double t : circuit::breakpoint_union(sources)) {
        double s = 0.0;
        for (const auto& src : sources) s += src.eval(t);
        best = std::max(best, s);
    }
    return best;
}

double max_abs_sum(std::span<const PwlSource> sources) {
    double best = 0.0;
    for (double t : circuit::breakpoint_union(sources)) {
        double s = 0.0;
        for (const auto& src : sources) s += src.eval(t);
        best = std::max(best, std::abs(s));
    }
    return best;
}

std::vector<PwlSource> gen_internal_currents(std::span<const NodeId> nodes, double i_ref,
                                             std::uint64_t seed, const PulseOptions& options) {
    if (nodes.empty()) throw InvalidArgument("internal current generation needs at least one node");
    if (!(i_ref > 0.0)) throw InvalidArgument("i_ref must be positive");
    auto rng = stream(seed, 1);
    std::vector<PwlSource> out;
    out.reserve(nodes.size());
    for (NodeId n : nodes) {
        out.push_back({n, triangle_train(rng, options.internal_pulses, 0.0, i_ref, options)});
    }
    const double peak = max_sum(out);
    if (peak > i_ref) scale(out, i_ref / peak * kScaleMargin);
    return out;
}

std::vector<PwlSource> gen_io_currents(std::span<const NodeId> sites, double rho, double i_ref,
                                       std::uint64_t seed, const PulseOptions& options) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidArgument("correlation must lie in [0, 1]");
    if (!(i_ref > 0.0)) throw InvalidArgument("i_ref must be positive");
    if (sites.empty()) return {};
    const double bound = options.io_fraction * i_ref;
    auto shared_rng = stream(seed, 2);
    auto own_rng = stream(seed, 3);
    const auto shared = bipolar_train(shared_rng, options.io_pulse_pairs, bound, options);
    const double ws = std::sqrt(rho);
    const double wi = std::sqrt(1.0 - rho);

    std::vector<PwlSource> out;
    out.reserve(sites.size());
    for (NodeId n : sites) {
        // drawn unconditionally so every rho consumes the same random stream
        auto own = bipolar_train(own_rng, options.io_pulse_pairs, bound, options);
        std::vector<PwlPoint> pts;
        if (rho >= 1.0) {
            pts = shared;
        } else if (rho <= 0.0) {
            pts = std::move(own);
        } else {
            pts = scaled_sum(shared, ws, own, wi);
        }
        out.push_back({n, std::move(pts)});
    }

    double peak = 0.0;
    for (const auto& s : out) {
        for (const auto& p : s.points) peak = std::max(peak, std::abs(p.i));
    }
    if (peak > bound) scale(out, bound / peak * kScaleMargin);
    const double agg = max_abs_sum(out);
    if (agg > i_ref) scale(out, i_ref / agg * kScaleMargin);
    return out;
}

CurrentProfile generate_profile(std::span<const NodeId> internal_nodes,
                                std::span<const NodeId> io_sites, double rho, double i_ref,
                                std::uint64_t seed, const PulseOptions& options) {
    CurrentProfile p;
    p.internal = gen_internal_currents(internal_nodes, i_ref, seed, options);
    p.io = gen_io_currents(io_sites, rho, i_ref, seed, options);
    p.correlation = rho;
    p.seed = seed;
    p.i_ref = i_ref;
    p.i_max = 2.0 * i_ref;
    return p;
}

SourceNodes source_nodes(const Netlist& net, const Floorplan& fp, int io_per_chiplet) {
    if (io_per_chiplet < 0) throw InvalidArgument("I/O source count must be non-negative");
    SourceNodes s;
    s.internal = net.on_chip_nodes();
    for (std::size_t k = 0; k < fp.chiplets.size(); ++k) {
        const auto& sites = fp.chiplets[k].io_sites;
        if (sites.empty()) continue;
        const int n = io_per_chiplet == 0 ? static_cast<int>(sites.size()) : io_per_chiplet;
        for (int i = 0; i < n; ++i) {
            s.io.push_back(net.chip_node(static_cast<int>(k), sites[static_cast<std::size_t>(i) % sites.size()]));
        }
    }
    return s;
}

}  // namespace pdn::timing
