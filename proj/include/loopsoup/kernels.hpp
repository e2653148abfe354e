#pragma once

#include "loopsoup/conformal.hpp"

namespace loopsoup {

// Exit density of Brownian motion from z in H at the boundary point x.
double poisson_kernel_halfplane(Complex z, double x);
// Boundary-to-boundary normalization H(0, x) = 1 / (pi x^2).
double poisson_kernel_halfplane_boundary(double x);

// Exit density (per unit arc length) from z in D+ at e^{i phi}.
double poisson_kernel_halfdisk(Complex z, double phi);
// Same for the exterior H minus closure(D+).
double poisson_kernel_exterior_halfdisk(Complex z, double phi);

struct SeriesValue {
    double value;
    int terms;
};

// Exit density (per unit arc length) from z = e^{-s + i theta} in
// {z in D+ : |z| > r} at the inner point r e^{i phi}, by separation of
// variables on the logarithmic rectangle.
SeriesValue poisson_kernel_annular_halfdisk(double s, double theta, double r, double phi);
// Probability of leaving the annular half-disk through the inner arc with
// argument in [phi0, phi1].
SeriesValue annular_halfdisk_exit_probability(double s, double theta, double r, double phi0, double phi1);

// Green's function of the normalized excursion from 0 to infinity in H,
// 2 Im(z)^2 / |z|^2.
double green_excursion(Complex z);

} // namespace loopsoup
