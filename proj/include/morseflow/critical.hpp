#pragma once

#include <vector>

#include "morseflow/geometry.hpp"

namespace morseflow {

// Nondegenerate critical point of f|Σ. Ids are assigned in ascending f_value
// (ties broken lexicographically by coords). unstable_frame lists the unit
// tangent eigenvectors with negative eigenvalue in ascending eigenvalue
// order; it fixes the orientation of W^u. stable_frame holds the rest.
struct CriticalPoint {
    int id = -1;
    SurfacePoint location;
    double f_value = 0.0;
    int index = 0;  // Morse index μ ∈ {0,1,2}
    Eigen::Vector2d eigenvalues = Eigen::Vector2d::Zero();
    std::vector<Eigen::Vector3d> unstable_frame;
    std::vector<Eigen::Vector3d> stable_frame;
};

struct SearchParams {
    int grid_density = 16;
    double newton_tol = 1e-12;
    double dedupe_radius = -1.0;   // <0: 1e-4 * diameter
    double crit_tol = 1e-8;        // restricted gradient norm
    double nondeg_rel_tol = 1e-6;  // vs max |eigenvalue| found
};

// Multistart Lagrange-Newton on the restricted gradient, seeded from a grid
// on the bounding box projected to the surface.
// Throws DegenerateCritical and EulerMismatch.
std::vector<CriticalPoint> find_critical_points(const Expression& f, const ImplicitSurface& S,
                                                const SearchParams& params = {});

struct EulerReport {
    long long signed_count = 0;
    int expected = 0;
    bool pass = false;
};

EulerReport euler_check(const std::vector<CriticalPoint>& points, const ImplicitSurface& S);

// Orientation of W^u(x) for μ(x)=2 against the surface orientation:
// sign of <u1 × u2, n>. Returns +1 for μ=0 (a positively oriented point)
// and is unused for μ=1.
int unstable_orientation(const CriticalPoint& x);

double min_pairwise_distance(const std::vector<CriticalPoint>& points);

}  // namespace morseflow
