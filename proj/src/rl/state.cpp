#include "pdn/rl/state.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "pdn/error.hpp"

namespace pdn::rl {

namespace {

void fill_common(StateTensor& s, const Floorplan& fp, const DecapLayout& layout) {
    layout.validate(fp);
    const double top = kMaxLevel;
    for (int r = 0; r < fp.interposer.rows; ++r) {
        for (int c = 0; c < fp.interposer.cols; ++c) {
            s.at(kIntpSpace, r, c) = fp.interposer_space(r, c);
            s.at(kMimDist, r, c) = layout.mim(r, c) / top;
        }
    }
    for (std::size_t k = 0; k < fp.chiplets.size(); ++k) {
        const Chiplet& chip = fp.chiplets[k];
        for (int r = 0; r < chip.dims.rows; ++r) {
            for (int c = 0; c < chip.dims.cols; ++c) {
                const int R = chip.origin.row + r;
                const int C = chip.origin.col + c;
                s.at(kChipSpace, R, C) = chip.space(r, c);
                s.at(kMosDist, R, C) = layout.mos[k](r, c) / top;
            }
        }
    }
}

}  // namespace

StateTensor encode_freq_state(const Floorplan& fp, const DecapLayout& layout) {
    StateTensor s(kFreqChannels, fp.interposer);
    fill_common(s, fp, layout);
    return s;
}

StateTensor encode_time_state(const Floorplan& fp, const DecapLayout& layout,
                              std::span<const Grid<double>> chip_vvi, double scale) {
    if (chip_vvi.size() != fp.chiplets.size()) {
        throw InvalidArgument("one VVI grid per chiplet required");
    }
    StateTensor s(kTimeChannels, fp.interposer);
    fill_common(s, fp, layout);
    if (scale <= 0.0) return s;
    for (std::size_t k = 0; k < fp.chiplets.size(); ++k) {
        const Chiplet& chip = fp.chiplets[k];
        if (chip_vvi[k].dims() != chip.dims) {
            throw InvalidArgument(fmt::format("VVI grid shape mismatch for chiplet '{}'", chip.name));
        }
        for (int r = 0; r < chip.dims.rows; ++r) {
            for (int c = 0; c < chip.dims.cols; ++c) {
                s.at(kVvi, chip.origin.row + r, chip.origin.col + c) = chip_vvi[k](r, c) / scale;
            }
        }
    }
    return s;
}

DecapLayout apply_action(const DecapLayout& layout, std::span<const UdcSite> sites,
                         std::span<const int> action) {
    if (action.size() != sites.size()) {
        throw InvalidArgument(
            fmt::format("action length {} does not match {} sites", action.size(), sites.size()));
    }
    DecapLayout out = layout;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const int step = action[i];
        if (step < -1 || step > 1) {
            throw InvalidArgument(fmt::format("action entry {} is {}, expected -1, 0 or +1", i, step));
        }
        int& level = level_at(out, sites[i]);
        level = std::clamp(level + step, 0, kMaxLevel);
    }
    return out;
}

}  // namespace pdn::rl
