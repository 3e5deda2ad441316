#pragma once

#include <complex>
#include <vector>

namespace monofk {

enum class ChartId { Plus, Minus };

/// Point of M = R^3 - {0}.
struct Point3 {
    double x1 = 0.0, x2 = 0.0, x3 = 0.0;
};

/// Two-chart atlas of the charge-n line bundle over M. Chart U+ consists of
/// the nonzero x with x3/|x| > -delta, chart U- of those with x3/|x| < delta.
/// switch_margin is the fraction of delta at which the hysteresis rule of the
/// stochastic transport fires.
struct ChartAtlas {
    int n = 1;
    double delta = 0.5;
    double switch_margin = 0.5;
};

/// Value in the fiber over some point, expressed in a chart.
struct FiberValue {
    ChartId chart = ChartId::Plus;
    std::complex<double> value;
};

/// Components of a one-form at a point; pairs with displacements by the
/// standard dot product.
struct Covector3 {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
};

double norm(const Point3& x);

bool chart_contains(const ChartAtlas& atlas, ChartId chart, const Point3& x);

/// Azimuth phi in (-pi, pi] with cos(phi) = x1/rho, sin(phi) = x2/rho.
/// Throws std::domain_error on the axis (x1 = x2 = 0).
double azimuth(const Point3& x);

/// Transition function exp(2 i n phi(x)) relating the chart representations
/// on the overlap: v_plus = transition_phase(x) * v_minus.
std::complex<double> transition_phase(const ChartAtlas& atlas, const Point3& x);

/// Connection one-form of the given chart:
///   A+ = -n / (|x| (x3 + |x|)) * (x2, -x1, 0)
///   A- = +n / (|x| (|x| - x3)) * (x2, -x1, 0)
/// Smooth on its chart, including on the axis portion inside the chart.
Covector3 connection_form(const ChartAtlas& atlas, ChartId chart, const Point3& x);

/// exp(i * sum of midpoint-rule line-integral increments of the chart's
/// connection along the polyline). Every vertex must lie in the chart.
std::complex<double> parallel_transport_polyline(const ChartAtlas& atlas, ChartId chart,
                                                 const std::vector<Point3>& points);

/// Closed-loop transport around the circle of the given colatitude on the
/// unit sphere; approaches exp(i 2 pi n (1 - cos theta)) for chart Plus.
std::complex<double> loop_holonomy(const ChartAtlas& atlas, ChartId chart, double theta,
                                   int segments);

} // namespace monofk
