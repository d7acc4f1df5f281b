#include "pdn/freq/target.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "pdn/error.hpp"

namespace pdn::freq {

void TargetImpedanceSpec::validate() const {
    if (!(vdd > 0.0)) throw InvalidArgument("target vdd must be positive");
    if (!(ripple > 0.0 && ripple < 1.0)) throw InvalidArgument("target ripple must lie in (0, 1)");
    if (!(p_max > 0.0)) throw InvalidArgument("target p_max must be positive");
    if (!(t_r > 0.0)) throw InvalidArgument("target t_r must be positive");
}

void RewardWeights::validate() const {
    if (alpha < 0.0 || beta < 0.0 || std::abs(alpha + beta - 1.0) > 1e-12) {
        throw InvalidArgument(
            fmt::format("reward weights must be non-negative and sum to 1, got {} + {}", alpha, beta));
    }
}

double target_impedance(const TargetImpedanceSpec& spec, double f) {
    const double flat = spec.flat_impedance();
    const double knee = spec.f_knee();
    return f <= knee ? flat : flat * (f / knee);
}

std::vector<double> mask_violation(const circuit::AcSolution& ac, const TargetImpedanceSpec& spec) {
    if (ac.z.empty()) throw InvalidArgument("mask check needs at least one probe port");
    std::vector<double> excess(ac.frequencies.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < ac.frequencies.size(); ++k) {
        const double zt = target_impedance(spec, ac.frequencies[k]);
        for (const auto& port : ac.z) excess[k] = std::max(excess[k], std::abs(port[k]) - zt);
    }
    return excess;
}

bool is_compliant(const std::vector<double>& excess) {
    return std::all_of(excess.begin(), excess.end(), [](double e) { return e <= 0.0; });
}

double total_violation(const std::vector<double>& excess) {
    double sum = 0.0;
    for (double e : excess) sum += std::max(e, 0.0);
    return sum;
}

double economy_score(double mos, double mos_max, double mim, double mim_max,
                     const RewardWeights& weights) {
    const double mos_frac = mos_max > 0.0 ? mos / mos_max : 0.0;
    const double mim_frac = mim_max > 0.0 ? mim / mim_max : 0.0;
    return weights.alpha * (1.0 - mos_frac) + weights.beta * (1.0 - mim_frac);
}

double freq_reward(const std::vector<double>& excess, const DecapLayout& layout,
                   const Floorplan& fp, const RewardWeights& weights) {
    if (!is_compliant(excess)) return -total_violation(excess);
    return economy_score(layout.total_mos(), max_mos_capacitance(fp), layout.total_mim(),
                         max_mim_capacitance(fp), weights);
}

double freq_reward(const circuit::AcSolution& ac, const TargetImpedanceSpec& spec,
                   const DecapLayout& layout, const Floorplan& fp, const RewardWeights& weights) {
    return freq_reward(mask_violation(ac, spec), layout, fp, weights);
}

std::vector<double> log_frequency_grid(double f_start, double f_stop, int per_decade) {
    if (!(f_start > 0.0) || !(f_stop > f_start) || per_decade < 1) {
        throw InvalidArgument("frequency grid needs 0 < f_start < f_stop and per_decade >= 1");
    }
    std::vector<double> f;
    const double decades = std::log10(f_stop / f_start);
    const auto n = static_cast<int>(std::floor(decades * per_decade + 1e-9));
    for (int k = 0; k <= n; ++k) {
        f.push_back(f_start * std::pow(10.0, static_cast<double>(k) / per_decade));
    }
    if (f.back() < f_stop * (1.0 - 1e-12)) {
        f.push_back(f_stop);
    } else {
        f.back() = f_stop;
    }
    return f;
}

std::vector<double> default_frequency_grid() { return log_frequency_grid(0.1e9, 20e9, 100); }

}  // namespace pdn::freq
