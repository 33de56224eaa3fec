#pragma once

#include <utility>
#include <vector>

#include "morseflow/complex.hpp"
#include "morseflow/continuation.hpp"
#include "morseflow/flow.hpp"

namespace morseflow {

// Closed oriented polyline on Σ representing a degree-1 singular cycle.
struct PseudoCycleCurve {
    std::vector<Eigen::Vector3d> pts;  // pts.front() == pts.back()
    double margin_deg = 5.0;           // minimum accepted crossing angle
    double clearance = -1.0;           // <0: 2δ by default
};

// Projects, subdivides to the step bound, and closes a point loop.
PseudoCycleCurve make_curve(const ImplicitSurface& S, std::vector<Eigen::Vector3d> points,
                            double max_step);

// Named catalog curves on the vertical torus (ring radius 2, tube radius 1).
PseudoCycleCurve torus_meridian(const ImplicitSurface& S, double ring_angle, int samples);
PseudoCycleCurve torus_longitude(const ImplicitSurface& S, double tube_angle, int samples);

// Small contractible circle in the tangent plane around a point.
PseudoCycleCurve small_circle(const ImplicitSurface& S, const Eigen::Vector3d& center,
                              double radius, int samples);

// Curve invariants vs the critical set of f. Throws ClearanceViolation.
void validate_curve(const PseudoCycleCurve& curve, const MorseData& data);

struct CurveCrossing {
    Eigen::Vector3d point;
    int saddle_id = -1;
    int sign = 0;
    double angle = 0;        // crossing angle, radians
    double curve_param = 0;  // segment index + fraction along the curve
};

struct PsiResult {
    MorseCycle cycle;  // degree 1, coefficients over the saddle generators
    std::vector<CurveCrossing> crossings;
};

// Signed transversal intersections of the curve with every stable curve;
// sign of a crossing is the orientation of (curve tangent, stable tangent)
// against the surface orientation. Throws NonTransverse below the margin.
PsiResult psi_degree1(const PseudoCycleCurve& curve, const MorseData& data);

// Weighted points mapped to their basin minima.
MorseCycle psi_degree0(const std::vector<std::pair<Eigen::Vector3d, long long>>& points,
                       const MorseData& data);

struct RoundtripReport {
    bool pass = false;
    MorseCycle psi_of_glued;  // b = Ψ_{f1}(glue(a))
    IVec lhs_class, rhs_class;
    int curves = 0;
};

// [Ψ_{f1}(glue(a))] = [Φ10(a)] in H1(f1), exact integer class comparison.
RoundtripReport roundtrip_phi_psi(const MorseCycle& a, const MorseData& d0, const MorseData& d1,
                                  const Homotopy& h);

struct CobordanceReport {
    bool pass = false;
    MorseCycle psi_a, psi_b;
    IVec difference;
};

// Ψ(χ) − Ψ(χ′) must lie in im ∂₂.
CobordanceReport cobordance_invariance(const PseudoCycleCurve& a, const PseudoCycleCurve& b,
                                       const MorseData& data);

}  // namespace morseflow
