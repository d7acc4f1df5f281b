#include "pdn/layout.hpp"

#include <fmt/format.h>

#include "pdn/error.hpp"

namespace pdn {

namespace {

void check_levels(const LevelGrid& levels, const BinaryGrid& space, const std::string& what) {
    if (levels.dims() != space.dims()) {
        throw LayoutViolation(fmt::format("{} levels are {}x{}, expected {}x{}", what, levels.rows(),
                                          levels.cols(), space.rows(), space.cols()));
    }
    for (int r = 0; r < levels.rows(); ++r) {
        for (int c = 0; c < levels.cols(); ++c) {
            int v = levels(r, c);
            if (v < 0 || v > kMaxLevel) {
                throw LayoutViolation(
                    fmt::format("{} level {} at ({}, {}) outside 0..{}", what, v, r, c, kMaxLevel));
            }
            if (v > 0 && space(r, c) == 0) {
                throw LayoutViolation(
                    fmt::format("{} decap at ({}, {}) sits in a non-capacitor zone", what, r, c));
            }
        }
    }
}

long level_sum(const LevelGrid& g) {
    long s = 0;
    for (int v : g) s += v;
    return s;
}

}  // namespace

DecapLayout DecapLayout::empty_for(const Floorplan& fp) {
    DecapLayout l;
    l.mim = LevelGrid(fp.interposer, 0);
    for (const Chiplet& c : fp.chiplets) l.mos.emplace_back(c.dims, 0);
    return l;
}

DecapLayout DecapLayout::uniform_for(const Floorplan& fp, int level) {
    DecapLayout l = empty_for(fp);
    for (const UdcSite& s : feasible_sites(fp)) level_at(l, s) = level;
    return l;
}

void DecapLayout::validate(const Floorplan& fp) const {
    check_levels(mim, fp.interposer_space, "interposer");
    if (mos.size() != fp.chiplets.size()) {
        throw LayoutViolation(fmt::format("layout has {} chiplet grids, floorplan has {}", mos.size(),
                                          fp.chiplets.size()));
    }
    for (std::size_t k = 0; k < mos.size(); ++k) {
        check_levels(mos[k], fp.chiplets[k].space, fmt::format("chiplet '{}'", fp.chiplets[k].name));
    }
}

double DecapLayout::total_mim() const { return static_cast<double>(level_sum(mim)) * kMimStep; }

double DecapLayout::total_mos() const {
    long s = 0;
    for (const LevelGrid& g : mos) s += level_sum(g);
    return static_cast<double>(s) * kMosStep;
}

double max_mim_capacitance(const Floorplan& fp) {
    return fp.feasible_interposer_count() * kMaxLevel * kMimStep;
}

double max_mos_capacitance(const Floorplan& fp) {
    return fp.feasible_chip_count() * kMaxLevel * kMosStep;
}

std::vector<UdcSite> feasible_sites(const Floorplan& fp, bool include_interposer,
                                    bool include_chips) {
    std::vector<UdcSite> sites;
    if (include_interposer) {
        for (int r = 0; r < fp.interposer.rows; ++r) {
            for (int c = 0; c < fp.interposer.cols; ++c) {
                if (fp.interposer_space(r, c) == 1) sites.push_back({-1, {r, c}});
            }
        }
    }
    if (include_chips) {
        for (std::size_t k = 0; k < fp.chiplets.size(); ++k) {
            const Chiplet& chip = fp.chiplets[k];
            for (int r = 0; r < chip.dims.rows; ++r) {
                for (int c = 0; c < chip.dims.cols; ++c) {
                    if (chip.space(r, c) == 1) sites.push_back({static_cast<int>(k), {r, c}});
                }
            }
        }
    }
    return sites;
}

std::vector<UdcSite> all_sites(const Floorplan& fp) {
    std::vector<UdcSite> sites;
    for (int r = 0; r < fp.interposer.rows; ++r) {
        for (int c = 0; c < fp.interposer.cols; ++c) sites.push_back({-1, {r, c}});
    }
    for (std::size_t k = 0; k < fp.chiplets.size(); ++k) {
        for (int r = 0; r < fp.chiplets[k].dims.rows; ++r) {
            for (int c = 0; c < fp.chiplets[k].dims.cols; ++c) {
                sites.push_back({static_cast<int>(k), {r, c}});
            }
        }
    }
    return sites;
}

int& level_at(DecapLayout& layout, const UdcSite& site) {
    return site.chiplet < 0 ? layout.mim.at(site.at) : layout.mos.at(site.chiplet).at(site.at);
}

int level_at(const DecapLayout& layout, const UdcSite& site) {
    return site.chiplet < 0 ? layout.mim.at(site.at) : layout.mos.at(site.chiplet).at(site.at);
}

}  // namespace pdn
