#pragma once

#include "compca/common.hpp"

namespace compca {

// Proximal steps of the sparse V-update.
//
// Row mode solves, for each row b of B,
//     min_v  k/2 ||v||^2 + alpha ||v||^q + <v, b>      (q > 0)
//     min_v  k/2 ||v||^2 + alpha 1{v != 0} + <v, b>    (q = 0)
// with k = beta + rho. The minimiser points along -b, so everything reduces to
// the scalar magnitude problem
//     h(x) = k/2 x^2 + alpha x^q - ||b|| x,   x >= 0.
// Column mode is the same problem entrywise with ||b|| replaced by |b|.

// Value of h at x (x >= 0). For q = 0 the penalty is alpha * 1{x != 0}.
double prox_magnitude_objective(double x, double bnorm, Penalty q, double alpha, double k);

// argmin_{x >= 0} h(x). Ties are broken toward the smaller magnitude, so an
// exact tie with zero returns zero.
double prox_magnitude(double bnorm, Penalty q, double alpha, double k);

// Full objective k/2 ||v||^2 + alpha ||v||^q + <v, b>.
double prox_row_objective(const VectorXd& v, const VectorXd& b, Penalty q, double alpha, double k);

VectorXd prox_row(const VectorXd& b, Penalty q, double alpha, double beta, double rho);
double prox_scalar(double b, Penalty q, double alpha, double beta, double rho);

}  // namespace compca
