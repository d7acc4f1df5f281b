#pragma once

#include <span>
#include <vector>

#include "pdn/floorplan.hpp"
#include "pdn/layout.hpp"
#include "pdn/netlist.hpp"

namespace pdn::rl {

/// Stacked channel matrices over the interposer canvas, channel-major then
/// row-major.
struct StateTensor {
    int channels = 0;
    GridDims dims;
    std::vector<double> data;

    StateTensor() = default;
    StateTensor(int c, GridDims d)
        : channels(c), dims(d), data(static_cast<std::size_t>(c * d.count()), 0.0) {}

    double& at(int c, int r, int col) { return data[index(c, r, col)]; }
    [[nodiscard]] double at(int c, int r, int col) const { return data[index(c, r, col)]; }

private:
    [[nodiscard]] std::size_t index(int c, int r, int col) const {
        return static_cast<std::size_t>((c * dims.rows + r) * dims.cols + col);
    }
};

enum StateChannel : int {
    kIntpSpace = 0,
    kChipSpace = 1,
    kMimDist = 2,
    kMosDist = 3,
    kVvi = 4,
};

inline constexpr int kFreqChannels = 4;
inline constexpr int kTimeChannels = 5;

/// Space matrices plus MIM/MOS level / kMaxLevel, chiplets placed at their
/// interposer offsets.
StateTensor encode_freq_state(const Floorplan& fp, const DecapLayout& layout);

/// Per-chip-node VVI grids (floorplan chiplet order) normalized by `scale`,
/// appended as a fifth channel. scale <= 0 leaves the channel at zero.
StateTensor encode_time_state(const Floorplan& fp, const DecapLayout& layout,
                              std::span<const Grid<double>> chip_vvi, double scale);

/// Ternary step per action site: -1, 0, +1.
using ActionVector = std::vector<int>;

/// Adds each step to the matching site level, clamped to [0, kMaxLevel].
DecapLayout apply_action(const DecapLayout& layout, std::span<const UdcSite> sites,
                         std::span<const int> action);

}  // namespace pdn::rl
