#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "monofk/geometry.hpp"
#include "monofk/special_functions.hpp"

namespace monofk {

/// Angular quantum numbers of a monopole harmonic: charge n, ell >= |n|,
/// |m| <= ell.
struct AngularMode {
    int n = 0;
    int ell = 0;
    int m = 0;
};

/// Spectral-side radial profile psi#(k): a smooth bump
///   amplitude * exp(-1/(1-u^2)),  u = (2k - k_lo - k_hi)/(k_hi - k_lo)
/// supported on [k_lo, k_hi] strictly inside (0, inf).
struct RadialProfile {
    enum class Kind { SmoothBump };
    Kind kind = Kind::SmoothBump;
    double k_lo = 1.0;
    double k_hi = 3.0;
    double amplitude = 1.0;
};

/// One term coeff * psi(|x|) * Y_{n,ell,m}(x/|x|) of a section in D.
/// Semigroup and Hamiltonian act diagonally on the spectrum, so their
/// action is carried exactly as multiplier state: the effective spectrum is
///   profile(k) * exp(-k^2 t_evolved / 2) * (k^2/2)^h_power.
struct SectionTerm {
    std::complex<double> coeff{1.0, 0.0};
    AngularMode mode;
    RadialProfile profile;
    double t_evolved = 0.0;
    int h_power = 0;
};

/// Finite sum of terms sharing one monopole charge n.
struct SectionInD {
    std::vector<SectionTerm> terms;

    int charge() const; // common n of the terms (0 for an empty section)
};

/// Precomputed chart representations of one normalized monopole harmonic.
/// In chart c the harmonic is
///   Y^c(u) = normalization * w(u)^{s_c} * G_c(xi),  xi = u3,
/// where w(u)^{s} means ((u1 + i u2))^s for s >= 0 and ((u1 - i u2))^{-s}
/// otherwise (so |w|^{|s|} = (sin theta)^{|s|} on the unit sphere), s_c =
/// m +/- n, and G_c is the polynomial-with-integer-powers expansion
///   G_c(xi) = sum_j coef_j (1-xi)^{p_j} (1+xi)^{q_j}
/// obtained from the Rodrigues derivative by the Leibniz rule. The factor
/// that vanishes at the chart's pole always carries a nonnegative exponent,
/// so evaluation is smooth through the axis. Both charts share one
/// normalization, making the transition relation exact by construction.
struct HarmonicTable {
    struct ChartExpansion {
        int s = 0;                  // azimuthal winding m +/- n
        std::vector<double> coef;
        std::vector<int> pow_minus; // exponents of (1 - xi)
        std::vector<int> pow_plus;  // exponents of (1 + xi)
    };
    AngularMode mode;
    double normalization = 1.0;     // > 0; sign convention folded into coef
    ChartExpansion plus, minus;
};

/// mu with mu^2 = ell(ell+1) - n^2 + 1/4 (positive root).
double mu_of(const AngularMode& mode);

/// Build the chart expansions and the numerically fixed normalization
/// (integral of |Y|^2 over the sphere equals 1).
HarmonicTable harmonic_table(const AngularMode& mode);

/// Value of the normalized harmonic in the requested chart at a unit vector.
std::complex<double> harmonic_eval(const HarmonicTable& table, ChartId chart, const Point3& u);

/// Residuals of the eigenvalue identities at a unit vector u off the poles:
///   r3 = |(L3 Y)(u) - m Y(u)|,   r2 = |(L^2 Y)(u) - ell(ell+1) Y(u)|
/// with the angular-momentum operators applied by central finite differences
/// of step h_fd in (theta, phi); both O(h_fd^2).
struct AngularResiduals {
    double r2 = 0.0;
    double r3 = 0.0;
};
AngularResiduals angular_momentum_check(const HarmonicTable& table, ChartId chart,
                                        const Point3& u, double h_fd);

/// Composite radial quadrature for the forward transform: logarithmic panels
/// on [r_min, r_max] whose node counts track the oscillation k_max * width.
struct RadialQuadrature {
    std::vector<QuadratureRule> panels;
};
RadialQuadrature make_radial_quadrature(double r_min, double r_max, double k_max,
                                        int panels_per_decade = 4, int base_nodes = 24);

/// Forward transform psi#(k) = int (kr)^{-1/2} J_mu(kr) psi(r) r^2 dr sampled
/// on the nodes of kGrid.
std::vector<std::complex<double>>
fourier_bessel_forward(const std::function<std::complex<double>(double)>& psi, double mu,
                       const QuadratureRule& kGrid, const RadialQuadrature& rQuad);

/// Inverse transform of a sampled spectrum on its k-grid.
std::complex<double> fourier_bessel_inverse(const std::vector<std::complex<double>>& spectrum,
                                            const QuadratureRule& kGrid, double mu, double r);

/// Inverse transform of a term's effective spectrum at radius r:
///   psi(r) = int (kr)^{-1/2} J_mu(kr) psi#(k) k^2 dk over [k_lo, k_hi]
/// by Gauss-Legendre with max(256, ceil(r (k_hi - k_lo)/2) + 64) nodes (the
/// base 256 keeps spectral accuracy until the oscillation parameter
/// approaches the node count; the count then grows with it).
double fourier_bessel_inverse(const RadialProfile& profile, double mu, double r,
                              double t_evolved = 0.0, int h_power = 0);

/// e^{-Ht}: multiplies every term's spectrum by exp(-k^2 t / 2), exactly.
SectionInD semigroup_apply(const SectionInD& section, double t);

/// H: multiplies every term's spectrum by k^2/2, exactly.
SectionInD hamiltonian_apply(const SectionInD& section);

/// Evaluate the section at x in the requested chart.
FiberValue section_eval(const SectionInD& section, const Point3& x, ChartId chart);

/// Covariant derivative (partial_k - i A_k) of the chart representation at x,
/// central differences of step h_fd in direction k (0, 1 or 2).
std::complex<double> covariant_derivative_fd(const SectionInD& section, const Point3& x,
                                             ChartId chart, int direction, double h_fd,
                                             const ChartAtlas& atlas);

/// Section (de)serialization:
///   {"n": int, "terms": [{"re","im","ell","m","k_lo","k_hi","amplitude"}]}
SectionInD section_from_json(const std::string& text);
std::string section_to_json(const SectionInD& section);

} // namespace monofk
