#include "pdn/params.hpp"

#include <cmath>

#include <fmt/format.h>

#include "pdn/error.hpp"

namespace pdn {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidArgument(fmt::format("parameter '{}' must be positive, got {}", name, v));
    }
}

void require_nonnegative(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw InvalidArgument(fmt::format("parameter '{}' must be non-negative, got {}", name, v));
    }
}

}  // namespace

void PdnParams::validate() const {
    require_positive(r_chip, "r_chip");
    require_positive(l_chip, "l_chip");
    require_positive(c_chip, "c_chip");
    require_positive(r_intp, "r_intp");
    require_positive(l_intp, "l_intp");
    require_positive(c_intp, "c_intp");
    require_nonnegative(loss_tangent, "loss_tangent");
    require_positive(r_tsv, "r_tsv");
    require_positive(l_tsv, "l_tsv");
    require_positive(c_tsv, "c_tsv");
    require_positive(r_bump, "r_bump");
    require_positive(l_bump, "l_bump");
    require_positive(r_ubump, "r_ubump");
    require_positive(l_ubump, "l_ubump");
    require_positive(c_mos_density, "c_mos_density");
    require_positive(mos_esr_coeff, "mos_esr_coeff");
    require_positive(c_mim_density, "c_mim_density");
    require_nonnegative(mim_esr_coeff, "mim_esr_coeff");
    require_positive(vdd, "vdd");
    if (ubumps_per_udc < 1) throw InvalidArgument("parameter 'ubumps_per_udc' must be >= 1");
    if (tsvs_per_site < 1) throw InvalidArgument("parameter 'tsvs_per_site' must be >= 1");
}

PdnParams preset_params(const std::string& name) {
    if (name == kRocketPreset) return PdnParams{};
    throw InvalidArgument(fmt::format("unknown parameter preset '{}'", name));
}

}  // namespace pdn
