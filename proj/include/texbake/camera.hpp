#pragma once
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "texbake/vecmath.hpp"

namespace texbake {

// Orbit camera looking at the origin. azimuth 0 puts the eye on +Z (the
// "front" view); positive azimuth walks counter-clockwise when seen from +Y.
struct Camera {
    double azimuth = 0.0;
    double elevation = 0.0;
    double radius = 2.0;
    double fov_y = M_PI / 4.0;
    int width = 1024;
    int height = 1024;
    std::string descriptor;

    Vec3 eye() const {
        double ce = std::cos(elevation);
        return Vec3{ce * std::sin(azimuth), std::sin(elevation), ce * std::cos(azimuth)} * radius;
    }

    // Right-handed view basis; forward points from the eye to the origin. +Y is
    // up except at the poles, where up follows the limit of the equatorial
    // frame rotated to the pole.
    void basis(Vec3& right, Vec3& up, Vec3& forward) const {
        forward = normalized(-eye());
        Vec3 r = cross(forward, Vec3{0.0, 1.0, 0.0});
        double len = length(r);
        if (len < 1e-9)
            right = {std::cos(azimuth), 0.0, -std::sin(azimuth)};
        else
            right = r * (1.0 / len);
        up = cross(right, forward);
    }
};

struct ViewPlan {
    std::vector<Camera> cameras;
    std::vector<std::pair<int, int>> symmetric_pairs;  // opposite equatorial views
};

// Eight equatorial views every 45 degrees plus top and bottom.
ViewPlan make_view_plan(int image_size = 1024, double radius = 2.0, double fov_y = M_PI / 4.0);

}  // namespace texbake
