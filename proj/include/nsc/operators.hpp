// operators.hpp
// Spectral differential operators, elliptic inverses and projections on the torus.
// All operators are pure. Outputs are spectral unless stated otherwise.
#pragma once

#include <vector>

#include "nsc/field.hpp"

namespace nsc {

// First-order operators multiply by i k with the Nyquist component of k zeroed so that
// real fields stay real. The Laplacian uses the full -|k|^2.
ScalarField derivative(const ScalarField& f, Axis axis);
VectorField gradient(const ScalarField& f);
VectorField perp_gradient(const ScalarField& f);  // (-d2 f, d1 f)
ScalarField divergence(const VectorField& v);
ScalarField curl(const VectorField& v);  // d1 v2 - d2 v1
ScalarField laplacian(const ScalarField& f);
VectorField laplacian(const VectorField& v);

// Returns g with Lap g = f and zero mean. Throws std::invalid_argument when the
// mean of f exceeds 1e-12 in magnitude.
ScalarField inverse_laplacian(const ScalarField& f);

// u = -(-Lap)^{-1} grad^perp omega: the zero-mean divergence-free field with curl u = omega.
VectorField biot_savart(const ScalarField& omega);

// Orthogonal projection onto divergence-free fields (constant coefficient).
// The mean (k = 0) component is kept.
VectorField leray_project(const VectorField& v);

// 2/3 rule: zero coefficients with max(|k1|,|k2|) > n/3. Requires spectral input.
ScalarField dealias(const ScalarField& f);
VectorField dealias(const VectorField& v);

// Pointwise product followed by the 2/3 truncation of the result.
ScalarField dealiased_product(const ScalarField& a, const ScalarField& b);

// Sobolev norm sqrt(area * sum (1+|k|^2)^s |f_hat|^2), any real s.
double sobolev_norm(const ScalarField& f, double s);
double sobolev_norm(const VectorField& v, double s);

// x1-average of a field as an x2-profile of length n (physical samples).
std::vector<double> zonal_mean(const ScalarField& f);

}  // namespace nsc
