#pragma once

// Special functions shared by the quality-factor models and the bath spectra.

namespace cqe {

/// K0(x) * sinh(x) for x > 0, finite for large x where both factors
/// individually under/overflow.
double k0_sinh(double x);

/// sign(x) * (1 + coth(x)), the thermal factor of an ohmic bath spectrum.
/// Positive for every x != 0; equals 2 / (1 - exp(-2x)) for x > 0.
double thermal_factor(double x);

}  // namespace cqe
