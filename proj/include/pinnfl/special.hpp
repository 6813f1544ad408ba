#pragma once

namespace pinnfl {

// Logarithmic derivatives of the gamma function, valid for x > 0.
// Computed by upward recurrence into the asymptotic regime followed by
// the Stirling-series expansions.
double digamma(double x);
double trigamma(double x);
double polygamma2(double x);  // second derivative of digamma

}  // namespace pinnfl
