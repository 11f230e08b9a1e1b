#pragma once

namespace aircal {

// Standard normal CDF.
double normal_cdf(double z);

// Upper tail P(Z > z).
double normal_sf(double z);

// Inverse standard normal CDF (Wichura's PPND16 rational approximations,
// accurate to ~1e-16 over (0, 1)). p outside (0, 1) returns +/-infinity.
double normal_ppf(double p);

}  // namespace aircal
