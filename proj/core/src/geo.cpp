#include "groke/geo.hpp"

#include <numbers>

namespace groke {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

const char* to_string(RelativeDirection d) {
    switch (d) {
        case RelativeDirection::Forward: return "Forward";
        case RelativeDirection::Left: return "Left";
        case RelativeDirection::Right: return "Right";
        case RelativeDirection::Back: return "Back";
    }
    return "Forward";
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double dphi = (b.lat - a.lat) * kDegToRad;
    const double dlambda = (b.lng - a.lng) * kDegToRad;

    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusMeters * std::asin(std::min(1.0, std::sqrt(h)));
}

Heading bearing(const GeoPoint& from, const GeoPoint& to) {
    if (from == to) {
        throw GeoError("bearing undefined for coincident points (" + std::to_string(from.lat) +
                       ", " + std::to_string(from.lng) + ")");
    }
    const double phi1 = from.lat * kDegToRad;
    const double phi2 = to.lat * kDegToRad;
    const double dlambda = (to.lng - from.lng) * kDegToRad;

    const double y = std::sin(dlambda) * std::cos(phi2);
    const double x =
        std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
    return Heading(std::atan2(y, x) * kRadToDeg);
}

double angular_diff(const Heading& h1, const Heading& h2) {
    const double d = std::fabs(h1.degrees() - h2.degrees());
    return std::min(d, 360.0 - d);
}

RelativeBearing relative_direction(const Heading& target_bearing, const Heading& current_heading) {
    double delta = Heading::normalize(target_bearing.degrees() - current_heading.degrees() + 180.0) - 180.0;
    if (delta == -180.0) delta = 180.0;  // keep the range (-180, 180]

    RelativeDirection dir;
    if (delta >= -45.0 && delta <= 45.0) {
        dir = RelativeDirection::Forward;
    } else if (delta >= -135.0 && delta < -45.0) {
        dir = RelativeDirection::Left;
    } else if (delta > 45.0 && delta <= 135.0) {
        dir = RelativeDirection::Right;
    } else {
        dir = RelativeDirection::Back;
    }
    return {delta, dir};
}

GridOffset heading_to_grid_offset(const Heading& h) {
    const double v = h.degrees();
    if (v >= 315.0 || v < 45.0) return {-1, 0};  // North
    if (v < 135.0) return {0, 1};                // East
    if (v < 225.0) return {1, 0};                // South
    return {0, -1};                              // West
}

const char* compass_word(const Heading& h) {
    static const char* kWords[8] = {"North", "Northeast", "East",      "Southeast",
                                    "South", "Southwest", "West",      "Northwest"};
    const int sector = static_cast<int>(Heading::normalize(h.degrees() + 22.5) / 45.0) % 8;
    return kWords[sector];
}

}  // namespace groke
