#include "monofk/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace monofk {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double norm(const Point3& x) {
    return std::sqrt(x.x1 * x.x1 + x.x2 * x.x2 + x.x3 * x.x3);
}

bool chart_contains(const ChartAtlas& atlas, ChartId chart, const Point3& x) {
    const double r = norm(x);
    if (!(r > 0.0)) return false;
    const double xi = x.x3 / r;
    return chart == ChartId::Plus ? xi > -atlas.delta : xi < atlas.delta;
}

double azimuth(const Point3& x) {
    if (x.x1 == 0.0 && x.x2 == 0.0) throw std::domain_error("azimuth: point on the x3 axis");
    return std::atan2(x.x2, x.x1);
}

std::complex<double> transition_phase(const ChartAtlas& atlas, const Point3& x) {
    const double phi = azimuth(x);
    return std::polar(1.0, 2.0 * atlas.n * phi);
}

Covector3 connection_form(const ChartAtlas& atlas, ChartId chart, const Point3& x) {
    const double r = norm(x);
    if (!(r > 0.0)) throw std::domain_error("connection_form: origin");
    if (!chart_contains(atlas, chart, x))
        throw std::domain_error("connection_form: point outside chart");
    const double denom = chart == ChartId::Plus ? r * (x.x3 + r) : r * (r - x.x3);
    const double scale = (chart == ChartId::Plus ? -atlas.n : atlas.n) / denom;
    return Covector3{scale * x.x2, -scale * x.x1, 0.0};
}

std::complex<double> parallel_transport_polyline(const ChartAtlas& atlas, ChartId chart,
                                                 const std::vector<Point3>& points) {
    if (points.size() < 2) return 1.0;
    double angle = 0.0;
    for (std::size_t j = 0; j + 1 < points.size(); ++j) {
        const Point3& a = points[j];
        const Point3& b = points[j + 1];
        if (!chart_contains(atlas, chart, a) || !chart_contains(atlas, chart, b))
            throw std::domain_error("parallel_transport_polyline: vertex outside chart");
        const Point3 mid{0.5 * (a.x1 + b.x1), 0.5 * (a.x2 + b.x2), 0.5 * (a.x3 + b.x3)};
        const Covector3 A = connection_form(atlas, chart, mid);
        angle += A.c1 * (b.x1 - a.x1) + A.c2 * (b.x2 - a.x2) + A.c3 * (b.x3 - a.x3);
    }
    return std::polar(1.0, angle);
}

std::complex<double> loop_holonomy(const ChartAtlas& atlas, ChartId chart, double theta,
                                   int segments) {
    if (segments < 1) throw std::invalid_argument("loop_holonomy: segments < 1");
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    std::vector<Point3> pts;
    pts.reserve(segments + 1);
    for (int j = 0; j <= segments; ++j) {
        const double phi = 2.0 * kPi * j / segments;
        pts.push_back(Point3{s * std::cos(phi), s * std::sin(phi), c});
    }
    pts.back() = pts.front();
    return parallel_transport_polyline(atlas, chart, pts);
}

} // namespace monofk
