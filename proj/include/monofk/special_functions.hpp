#pragma once

#include <vector>

namespace monofk {

/// Nodes and weights of a quadrature rule on the interval [a, b].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    double a = 0.0;
    double b = 0.0;
};

/// Gamma function for positive real argument, relative error <= 1e-13.
double gamma_fn(double x);

/// Bessel function of the first kind J_mu(x), real order mu >= 0, x >= 0.
/// Power series for small x, continued-fraction (CF1/CF2 + Wronskian)
/// scheme with stabilizing downward recurrence beyond. Relative error
/// <= 1e-10 for x <= 1e3, mu <= 50.
double bessel_j(double mu, double x);

/// Scaled radial kernel y^{-1/2} J_mu(y) with the y -> 0 limit handled
/// analytically: 0 for mu > 1/2, sqrt(2/pi) for mu = 1/2.
double scaled_bessel(double mu, double y);

/// Jacobi polynomial P_k^{alpha,beta}(xi) by the standard three-term
/// recurrence (intended for alpha, beta > -1).
double jacobi_polynomial(int k, double alpha, double beta, double xi);

/// Gauss-Legendre rule with npts nodes on [a, b]; exact for polynomials of
/// degree <= 2*npts - 1.
QuadratureRule gauss_legendre(int npts, double a, double b);

/// Gauss-Hermite rule for the standard Gaussian weight: sum_i w_i f(u_i)
/// approximates E[f(U)] with U ~ N(0,1); weights sum to 1.
QuadratureRule gauss_hermite(int npts);

} // namespace monofk
