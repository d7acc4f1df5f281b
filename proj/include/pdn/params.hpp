#pragma once

#include <string>

namespace pdn {

/// Electrical constants of the hierarchical PDN, per unit cell / per device.
///
/// Defaults are the 55 nm preset (`rocket64-55nm`). Decap ESR follows
/// ESR = coeff / C, so the MOS value of 24 Ω·pF gives 0.48 Ω at 50 pF.
struct PdnParams {
    // on-chip unit cell
    double r_chip = 19.11e-3;
    double l_chip = 8.8e-12;
    double c_chip = 17.7e-15;
    // interposer unit cell
    double r_intp = 34.2e-3;
    double l_intp = 0.63e-12;
    double c_intp = 2.79e-12;
    // dielectric loss, G = 2*pi*f*C*tan(delta)
    double loss_tangent = 0.02;
    // single P/G TSV and its package-side bump
    double r_tsv = 5.57e-3;
    double l_tsv = 30e-12;
    double c_tsv = 0.24e-12;
    double r_bump = 13.85e-3;
    double l_bump = 2.77e-12;
    // single micro-bump
    double r_ubump = 0.2e-3;
    double l_ubump = 5.69e-12;
    // decap technologies
    double c_mos_density = 14.4e-3;  // F/m^2
    double mos_esr_coeff = 24e-12;   // Ohm*F
    double c_mim_density = 5e-3;     // F/m^2
    double mim_esr_coeff = 0.0;      // Ohm*F
    // parallel devices lumped per 1 mm UDC at 200 um pitch
    int ubumps_per_udc = 25;
    int tsvs_per_site = 25;

    double vdd = 1.0;

    /// Throws InvalidArgument naming the first offending field.
    void validate() const;
};

/// Named parameter presets. Throws InvalidArgument for unknown names.
PdnParams preset_params(const std::string& name);

inline constexpr const char* kRocketPreset = "rocket64-55nm";

}  // namespace pdn
