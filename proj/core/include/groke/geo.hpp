#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace groke {

/// WGS-independent spherical geodesy on the mean-radius Earth model.
/// All angles are degrees unless a name says otherwise.
inline constexpr double kEarthRadiusMeters = 6'371'000.0;

struct GeoPoint {
    double lat = 0.0;  // [-90, 90]
    double lng = 0.0;  // (-180, 180]

    bool valid() const {
        return std::isfinite(lat) && std::isfinite(lng) && lat >= -90.0 && lat <= 90.0 &&
               lng > -180.0 && lng <= 180.0;
    }
    friend bool operator==(const GeoPoint& a, const GeoPoint& b) {
        return a.lat == b.lat && a.lng == b.lng;
    }
};

/// Compass heading normalized to [0, 360). Normalization happens on every
/// construction, so arithmetic never leaks out-of-range values.
class Heading {
public:
    Heading() = default;
    explicit Heading(double degrees) : value_(normalize(degrees)) {}

    double degrees() const { return value_; }

    Heading rotated(double delta_degrees) const { return Heading(value_ + delta_degrees); }

    static double normalize(double degrees) {
        double r = std::fmod(degrees, 360.0);
        if (r < 0.0) r += 360.0;
        // fmod can yield 360.0 - eps rounding back to 360.0 after the add
        if (r >= 360.0) r -= 360.0;
        return r;
    }

    friend bool operator==(const Heading& a, const Heading& b) { return a.value_ == b.value_; }

private:
    double value_ = 0.0;
};

enum class RelativeDirection { Forward, Left, Right, Back };

const char* to_string(RelativeDirection d);

/// Thrown for degenerate geodesic inputs (e.g. a bearing between coincident
/// points, which has no defined value).
class GeoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Great-circle distance in meters on the mean-radius sphere.
double haversine_distance(const GeoPoint& a, const GeoPoint& b);

/// Initial great-circle bearing from one point toward another.
/// Throws GeoError when the points coincide.
Heading bearing(const GeoPoint& from, const GeoPoint& to);

/// Smallest angle between two headings, in [0, 180].
double angular_diff(const Heading& h1, const Heading& h2);

/// Signed offset of a target bearing from the current heading, mapped into
/// (-180, 180], plus its classification into the four view sectors:
/// Forward for |delta| <= 45, Left for [-135, -45), Right for (45, 135],
/// Back otherwise.
struct RelativeBearing {
    double delta = 0.0;
    RelativeDirection direction = RelativeDirection::Forward;
};
RelativeBearing relative_direction(const Heading& target_bearing, const Heading& current_heading);

/// Quantizes a heading to one of the four cardinal grid offsets
/// (row, col): North (-1,0), East (0,1), South (1,0), West (0,-1).
/// North covers [315, 360) and [0, 45); the others follow in 90-degree arcs.
struct GridOffset {
    int dr = 0;
    int dc = 0;
    friend bool operator==(const GridOffset&, const GridOffset&) = default;
};
GridOffset heading_to_grid_offset(const Heading& h);

/// Eight-wind compass word ("North", "Northeast", ...) for a heading,
/// using 45-degree sectors centered on North = 0.
const char* compass_word(const Heading& h);

}  // namespace groke
