#pragma once

#include <vector>

#include "pdn/circuit/ac.hpp"
#include "pdn/floorplan.hpp"
#include "pdn/layout.hpp"

namespace pdn::freq {

/// Target-impedance mask inputs. i_ref and f_knee are derived, never stored,
/// so they always satisfy i_ref = p_max / (2 vdd) and f_knee = 0.35 / t_r.
struct TargetImpedanceSpec {
    double vdd = 1.0;
    double ripple = 0.05;
    double p_max = 1.0;  // W
    double t_r = 0.35 / 3.4e9;

    [[nodiscard]] double i_ref() const { return p_max / (2.0 * vdd); }
    [[nodiscard]] double i_max() const { return 2.0 * i_ref(); }
    [[nodiscard]] double f_knee() const { return 0.35 / t_r; }
    [[nodiscard]] double flat_impedance() const { return vdd * ripple / i_ref(); }

    void validate() const;
};

struct RewardWeights {
    double alpha = 0.5;
    double beta = 0.5;

    void validate() const;
};

/// Flat below f_knee, rising 20 dB/dec above it.
double target_impedance(const TargetImpedanceSpec& spec, double f);

/// Per-frequency worst (over ports) |Z| - Z_target; negative values kept.
std::vector<double> mask_violation(const circuit::AcSolution& ac, const TargetImpedanceSpec& spec);

bool is_compliant(const std::vector<double>& excess);

/// Sum of positive excesses; zero when compliant.
double total_violation(const std::vector<double>& excess);

/// Capacitance-economy score alpha(1 - mos/mos_max) + beta(1 - mim/mim_max).
double economy_score(double mos, double mos_max, double mim, double mim_max,
                     const RewardWeights& weights);

/// Negative summed violation when the mask fails, the economy score otherwise.
double freq_reward(const circuit::AcSolution& ac, const TargetImpedanceSpec& spec,
                   const DecapLayout& layout, const Floorplan& fp, const RewardWeights& weights);

/// Same reward from a precomputed excess vector.
double freq_reward(const std::vector<double>& excess, const DecapLayout& layout,
                   const Floorplan& fp, const RewardWeights& weights);

/// Logarithmic grid from f_start with `per_decade` points per decade; the
/// last point is f_stop.
std::vector<double> log_frequency_grid(double f_start, double f_stop, int per_decade);

/// 0.1-20 GHz, 100 points per decade.
std::vector<double> default_frequency_grid();

}  // namespace pdn::freq
