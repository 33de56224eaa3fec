#pragma once

#include <array>
#include <functional>
#include <limits>
#include <vector>

#include "morseflow/critical.hpp"
#include "morseflow/geometry.hpp"

namespace morseflow {

struct FlowConfig {
    double rk_tol = 1e-9;
    double max_time = 1e4;
    double capture_radius_factor = 1e-5;  // * diameter
    double shoot_radius_factor = 1e-3;    // δ, * diameter
    double bisection_tol = 1e-12;         // angle (rad) for separatrix refinement
    int circle_samples = 180;
    double max_step_factor = 0.05;        // * diameter
};

// FlowConfig bound to a surface and its critical set; resolves the absolute
// radii and enforces δ ≤ 0.1 · (min pairwise critical distance).
struct FlowContext {
    const ImplicitSurface* S = nullptr;
    const std::vector<CriticalPoint>* crit = nullptr;
    FlowConfig cfg;
    double capture_radius = 0;
    double delta = 0;
    double max_step = 0;
    double min_pair = 0;

    const CriticalPoint& cp(int id) const { return (*crit)[id]; }
};

FlowContext make_flow_context(const ImplicitSurface& S, const std::vector<CriticalPoint>& crit,
                              const FlowConfig& cfg);

enum class FlowStatus { ConvergedTo, TimedOut };

struct PathSample {
    double t;
    Eigen::Vector3d p;
};

struct FlowPath {
    std::vector<PathSample> samples;
    FlowStatus status = FlowStatus::TimedOut;
    int cp_id = -1;
    double final_speed = 0;
};

// Closest-approach record vs one critical point.
struct Passage {
    double dist = std::numeric_limits<double>::infinity();
    Eigen::Vector3d at = Eigen::Vector3d::Zero();
};

struct IntegrateOptions {
    double t0 = 0;
    double t_end = -1;  // <0: ctx.cfg.max_time
    bool capture = true;
    double capture_after = -1e300;
    std::vector<int> capture_ids;  // empty: all critical points
    bool record = true;
    std::vector<Passage>* passages = nullptr;  // resized to crit count when set
};

// Scalar field with gradient, possibly time-dependent (homotopies).
using ScalarJetFn = std::function<Jet1(const Eigen::Vector3d&, double)>;

ScalarJetFn autonomous_field(const Expression& f);

// Adaptive RK4(5) on the projected ±gradient descent field with post-step
// Newton reprojection to the surface. Throws StepFailure / LeftBoundingBox.
FlowPath integrate_field(const FlowContext& ctx, const ScalarJetFn& fjet, bool ascend,
                         Eigen::Vector3d p0, IntegrateOptions opt = {});

FlowPath descend(const FlowContext& ctx, const Expression& f, const Eigen::Vector3d& p0,
                 IntegrateOptions opt = {});
FlowPath ascend(const FlowContext& ctx, const Expression& f, const Eigen::Vector3d& p0,
                IntegrateOptions opt = {});

// Flows p down to a minimum. Throws Inconclusive on timeout or saddle capture.
int basin_of(const FlowContext& ctx, const Expression& f, const Eigen::Vector3d& p);

// Unparameterized connecting trajectory with orientation sign.
struct Trajectory {
    int source_id = -1;
    int target_id = -1;
    int tau = 0;
    int ray_sign = 0;  // saddle rays: launched from x + ray_sign * δ * u
    std::vector<PathSample> samples;
    Eigen::Vector3d anchor = Eigen::Vector3d::Zero();
    double anchor_f = 0;
};

struct ModuliSpace {
    int source_id = -1;
    int target_id = -1;
    std::vector<Trajectory> trajectories;
    long long n = 0;  // Σ τ

    static ModuliSpace collect(int source, int target, std::vector<Trajectory> trajs);
};

// The two unstable rays of a μ=1 point, grouped per target minimum.
// Every index-adjacent (saddle, minimum) pair gets a ModuliSpace (possibly
// with zero trajectories). Throws MorseSmaleFailure when a ray captures at a
// saddle (saddle-saddle connection).
std::vector<ModuliSpace> enumerate_saddle_rays(const FlowContext& ctx, const Expression& f,
                                               const CriticalPoint& x);

// W^s(y) for μ(y)=1 as an oriented polyline through y (oriented by the
// stable eigenvector), integrated in reversed time; branches end near μ=2
// points or at max_time.
struct StableCurve {
    int saddle_id = -1;
    std::vector<Eigen::Vector3d> pts;
    int saddle_pos = -1;           // index of y in pts
    std::array<int, 2> end_cp{-1, -1};  // branch terminal μ=2 ids (order: −s, +s), −1 if timed out
};

StableCurve stable_curve(const FlowContext& ctx, const Expression& f, const CriticalPoint& y);

// All connecting trajectories from a μ=2 point to saddles: fine launch
// circle, flow-signature change detection, bisection refinement, anchors
// deduplicated. Circle diagnostics are kept for the weak-compactness
// surrogate checks.
struct MaxCensus {
    int max_id = -1;
    std::vector<Trajectory> connections;
    std::vector<int> sample_basin;  // terminal minimum per launch sample (-1: direct hit)
};

MaxCensus enumerate_max_connections(const FlowContext& ctx, const Expression& f,
                                    const CriticalPoint& x,
                                    const std::vector<StableCurve>& stable_curves);

ModuliSpace enumerate_max_to_saddle(const MaxCensus& census, int max_id, int saddle_id);

// Orientation transport sign for a μ=2 → μ=1 trajectory: parallel-transports
// the W^u(y) orientation vector backwards along the trajectory and compares
// the frame (flow direction, transported vector) with the orientation of
// W^u(x). Throws IllConditioned if the frame degenerates.
int trajectory_sign_transport(const FlowContext& ctx, const Trajectory& traj,
                              const CriticalPoint& x, const CriticalPoint& y);

// Transport of a tangent vector along a polyline by projection+renormalize.
Eigen::Vector3d transport_along(const ImplicitSurface& S, const std::vector<Eigen::Vector3d>& pts,
                                int from_idx, int to_idx, Eigen::Vector3d v);

// Point on the trajectory where f equals the given level, refined on the
// surface to high accuracy.
Eigen::Vector3d refine_level_anchor(const FlowContext& ctx, const Expression& f,
                                    const std::vector<PathSample>& samples, double level);

// Full flow data for one Morse-Smale pair.
struct MorseData {
    ImplicitSurface S;
    Expression f;
    FlowConfig cfg;
    std::vector<CriticalPoint> crit;
    std::array<std::vector<int>, 3> ids_by_degree;
    std::vector<ModuliSpace> saddle_moduli;  // μ1 → μ0
    std::vector<ModuliSpace> max_moduli;     // μ2 → μ1
    std::vector<StableCurve> stable_curves;  // one per saddle
    std::vector<MaxCensus> max_census;

    FlowContext context() const { return make_flow_context(S, crit, cfg); }
    const ModuliSpace* moduli(int source_id, int target_id) const;
    const StableCurve* stable_curve_of(int saddle_id) const;
};

MorseData build_morse_data(const ImplicitSurface& S, const Expression& f, const FlowConfig& cfg,
                           const SearchParams& search = {});

}  // namespace morseflow
