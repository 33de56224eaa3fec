#include "morseflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "morseflow/errors.hpp"
#include "morseflow/util.hpp"

namespace morseflow {

using Eigen::Vector3d;

FlowContext make_flow_context(const ImplicitSurface& S, const std::vector<CriticalPoint>& crit,
                              const FlowConfig& cfg) {
    FlowContext ctx;
    ctx.S = &S;
    ctx.crit = &crit;
    ctx.cfg = cfg;
    const double diam = S.diameter();
    ctx.capture_radius = cfg.capture_radius_factor * diam;
    ctx.delta = cfg.shoot_radius_factor * diam;
    ctx.max_step = cfg.max_step_factor * diam;
    ctx.min_pair = crit.size() >= 2 ? min_pairwise_distance(crit) : diam;
    // δ must stay well below the critical spacing; capture below δ.
    ctx.delta = std::min(ctx.delta, 0.1 * ctx.min_pair);
    ctx.capture_radius = std::min(ctx.capture_radius, 0.05 * ctx.delta);
    return ctx;
}

ScalarJetFn autonomous_field(const Expression& f) {
    return [&f](const Vector3d& q, double) { return f.jet1(q); };
}

// ---------------------------------------------------------------------------
// Dormand-Prince 4(5) with post-step Newton reprojection onto Σ.

namespace {

struct Dopri {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                            e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;
};

class Velocity {
public:
    // Descent follows −P∇f; ascent (reversed time) follows +P∇f.
    Velocity(const FlowContext& ctx, const ScalarJetFn& fjet, bool ascend)
        : ctx_(ctx), fjet_(fjet), sign_(ascend ? 1.0 : -1.0) {}

    Vector3d operator()(const Vector3d& q, double t) const {
        Jet1 jf = fjet_(q, t);
        Jet1 jp = ctx_.S->phi().jet1(q);
        double gn = jp.g.norm();
        if (gn < ctx_.S->tols().reg_tol)
            raise(ErrorCode::Degenerate, "|grad Phi| below reg_tol along flow");
        Vector3d n = jp.g / gn;
        return sign_ * (jf.g - jf.g.dot(n) * n);
    }

private:
    const FlowContext& ctx_;
    const ScalarJetFn& fjet_;
    double sign_;
};

}  // namespace

FlowPath integrate_field(const FlowContext& ctx, const ScalarJetFn& fjet, bool ascend,
                         Vector3d p0, IntegrateOptions opt) {
    const double t_end = opt.t_end >= 0 ? opt.t_end : ctx.cfg.max_time;
    const auto& crit = *ctx.crit;
    Velocity vel(ctx, fjet, ascend);

    std::vector<int> capture_ids = opt.capture_ids;
    if (opt.capture && capture_ids.empty()) {
        capture_ids.resize(crit.size());
        for (std::size_t i = 0; i < crit.size(); ++i) capture_ids[i] = static_cast<int>(i);
    }
    if (opt.passages) {
        opt.passages->assign(crit.size(), Passage{});
    }

    FlowPath path;
    ctx.S->reproject(p0);
    double t = opt.t0;
    if (opt.record) path.samples.push_back({t, p0});

    auto track = [&](const Vector3d& p) {
        if (!opt.passages) return;
        for (std::size_t i = 0; i < crit.size(); ++i) {
            double d = (p - crit[i].location.coords).norm();
            auto& pass = (*opt.passages)[i];
            if (d < pass.dist) {
                pass.dist = d;
                pass.at = p;
            }
        }
    };
    track(p0);

    Vector3d v = vel(p0, t);
    double speed_prev = v.norm();
    path.final_speed = speed_prev;
    double h = std::clamp(0.01 * ctx.S->diameter() / (speed_prev + 1e-300), 1e-8, ctx.max_step);

    const double rtol = ctx.cfg.rk_tol;
    int consecutive_rejects = 0;

    while (t < t_end) {
        // Resolve the approach to critical points: never step across a
        // capture ball in one stride.
        double dmin = std::numeric_limits<double>::infinity();
        for (const auto& c : crit) dmin = std::min(dmin, (p0 - c.location.coords).norm());
        double speed = v.norm();
        if (speed > 0)
            h = std::min(h, 0.5 * (dmin + ctx.capture_radius) / speed);
        h = std::min({h, ctx.max_step, t_end - t});
        if (h < 1e-13 * std::max(1.0, std::abs(t)))
            raise(ErrorCode::StepFailure, "adaptive step size underflow");

        const Vector3d k1 = v;
        const Vector3d k2 = vel(p0 + h * (Dopri::a21 * k1), t + Dopri::c2 * h);
        const Vector3d k3 = vel(p0 + h * (Dopri::a31 * k1 + Dopri::a32 * k2), t + Dopri::c3 * h);
        const Vector3d k4 =
            vel(p0 + h * (Dopri::a41 * k1 + Dopri::a42 * k2 + Dopri::a43 * k3), t + Dopri::c4 * h);
        const Vector3d k5 = vel(
            p0 + h * (Dopri::a51 * k1 + Dopri::a52 * k2 + Dopri::a53 * k3 + Dopri::a54 * k4),
            t + Dopri::c5 * h);
        const Vector3d k6 =
            vel(p0 + h * (Dopri::a61 * k1 + Dopri::a62 * k2 + Dopri::a63 * k3 + Dopri::a64 * k4 +
                          Dopri::a65 * k5),
                t + h);
        Vector3d y5 = p0 + h * (Dopri::b1 * k1 + Dopri::b3 * k3 + Dopri::b4 * k4 + Dopri::b5 * k5 +
                                Dopri::b6 * k6);
        const Vector3d k7 = vel(y5, t + h);
        Vector3d y4 = p0 + h * (Dopri::e1 * k1 + Dopri::e3 * k3 + Dopri::e4 * k4 + Dopri::e5 * k5 +
                                Dopri::e6 * k6 + Dopri::e7 * k7);

        double err = 0;
        for (int i = 0; i < 3; ++i) {
            double scale = rtol * (1.0 + std::abs(y5[i]));
            err = std::max(err, std::abs(y5[i] - y4[i]) / scale);
        }
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            if (++consecutive_rejects > 60)
                raise(ErrorCode::StepFailure, "step control failed to find an acceptable step");
            continue;
        }
        consecutive_rejects = 0;

        ctx.S->reproject(y5);
        if (!ctx.S->inside_box(y5))
            raise(ErrorCode::LeftBoundingBox, "flow left the bounding box");
        t += h;
        p0 = y5;
        v = vel(p0, t);
        double speed_now = v.norm();
        if (opt.record) path.samples.push_back({t, p0});
        track(p0);

        if (opt.capture && t >= opt.capture_after) {
            for (int id : capture_ids) {
                double d = (p0 - crit[id].location.coords).norm();
                if (d < ctx.capture_radius && speed_now <= speed_prev) {
                    path.status = FlowStatus::ConvergedTo;
                    path.cp_id = id;
                    path.final_speed = speed_now;
                    if (!opt.record) path.samples.push_back({t, p0});
                    return path;
                }
            }
        }
        speed_prev = speed_now;
        path.final_speed = speed_now;
        h = std::min(h * std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 4.0),
                     ctx.max_step);
    }
    path.status = FlowStatus::TimedOut;
    if (!opt.record && path.samples.empty()) path.samples.push_back({t, p0});
    return path;
}

FlowPath descend(const FlowContext& ctx, const Expression& f, const Vector3d& p0,
                 IntegrateOptions opt) {
    return integrate_field(ctx, autonomous_field(f), false, p0, std::move(opt));
}

FlowPath ascend(const FlowContext& ctx, const Expression& f, const Vector3d& p0,
                IntegrateOptions opt) {
    return integrate_field(ctx, autonomous_field(f), true, p0, std::move(opt));
}

int basin_of(const FlowContext& ctx, const Expression& f, const Vector3d& p) {
    IntegrateOptions opt;
    opt.record = false;
    FlowPath path = descend(ctx, f, p, opt);
    if (path.status != FlowStatus::ConvergedTo)
        raise(ErrorCode::Inconclusive, "descent timed out before reaching a minimum");
    if (ctx.cp(path.cp_id).index != 0)
        raise(ErrorCode::Inconclusive,
              "descent captured at a non-minimum (point on separatrix at tolerance)");
    return path.cp_id;
}

// ---------------------------------------------------------------------------

Eigen::Vector3d refine_level_anchor(const FlowContext& ctx, const Expression& f,
                                    const std::vector<PathSample>& samples, double level) {
    // locate the bracketing segment (f decreases along samples)
    for (std::size_t k = 0; k + 1 < samples.size(); ++k) {
        double fa = f.value(samples[k].p);
        double fb = f.value(samples[k + 1].p);
        if ((fa - level) * (fb - level) > 0) continue;
        Vector3d a = samples[k].p, b = samples[k + 1].p;
        double sa = 0.0, sb = 1.0;
        for (int it = 0; it < 80; ++it) {
            double sm = 0.5 * (sa + sb);
            Vector3d m = a + sm * (b - a);
            ctx.S->reproject(m);
            double fm = f.value(m);
            if ((fa - level) * (fm - level) <= 0)
                sb = sm;
            else {
                sa = sm;
                fa = fm;
            }
        }
        Vector3d m = a + 0.5 * (sa + sb) * (b - a);
        ctx.S->reproject(m);
        return m;
    }
    raise(ErrorCode::Inconclusive, "trajectory does not cross the anchor level");
}

namespace {

Trajectory make_trajectory(const FlowContext& ctx, const Expression& f, FlowPath path,
                           int source_id, int target_id, int ray_sign) {
    Trajectory traj;
    traj.source_id = source_id;
    traj.target_id = target_id;
    traj.ray_sign = ray_sign;
    traj.samples = std::move(path.samples);
    double level = 0.5 * (ctx.cp(source_id).f_value + ctx.cp(target_id).f_value);
    traj.anchor = refine_level_anchor(ctx, f, traj.samples, level);
    traj.anchor_f = f.value(traj.anchor);
    return traj;
}

}  // namespace

ModuliSpace ModuliSpace::collect(int source, int target, std::vector<Trajectory> trajs) {
    ModuliSpace m;
    m.source_id = source;
    m.target_id = target;
    m.trajectories = std::move(trajs);
    for (const auto& t : m.trajectories) m.n += t.tau;
    return m;
}

std::vector<ModuliSpace> enumerate_saddle_rays(const FlowContext& ctx, const Expression& f,
                                               const CriticalPoint& x) {
    if (x.index != 1) raise(ErrorCode::NotCritical, "enumerate_saddle_rays requires μ=1");
    const Vector3d u = x.unstable_frame[0];

    std::array<Trajectory, 2> rays;
    std::array<int, 2> targets{-1, -1};
    for (int side = 0; side < 2; ++side) {
        int s = side == 0 ? 1 : -1;
        Vector3d seed = x.location.coords + s * ctx.delta * u;
        FlowPath path = descend(ctx, f, ctx.S->project(seed).coords);
        if (path.status != FlowStatus::ConvergedTo)
            raise(ErrorCode::Inconclusive, "unstable ray of saddle " + std::to_string(x.id) +
                                               " did not converge");
        const CriticalPoint& tcp = ctx.cp(path.cp_id);
        if (tcp.index == 1)
            raise(ErrorCode::MorseSmaleFailure,
                  "saddle-saddle connection: unstable ray of critical point " +
                      std::to_string(x.id) + " converged to saddle " + std::to_string(tcp.id));
        if (tcp.index != 0)
            raise(ErrorCode::MorseSmaleFailure,
                  "unstable ray of saddle " + std::to_string(x.id) +
                      " captured at a non-minimum (id " + std::to_string(tcp.id) + ")");
        Trajectory traj = make_trajectory(ctx, f, std::move(path), x.id, tcp.id, s);
        traj.tau = s;  // +u ray carries τ=+1, −u ray τ=−1
        rays[side] = std::move(traj);
        targets[side] = tcp.id;
    }

    // Group per target minimum; emit a ModuliSpace for every minimum so the
    // complex assembly sees all index-adjacent pairs.
    std::vector<ModuliSpace> out;
    for (const auto& c : *ctx.crit) {
        if (c.index != 0) continue;
        std::vector<Trajectory> trajs;
        for (int side = 0; side < 2; ++side)
            if (targets[side] == c.id) trajs.push_back(rays[side]);
        std::sort(trajs.begin(), trajs.end(), [](const Trajectory& a, const Trajectory& b) {
            return std::lexicographical_compare(a.anchor.data(), a.anchor.data() + 3,
                                                b.anchor.data(), b.anchor.data() + 3);
        });
        out.push_back(ModuliSpace::collect(x.id, c.id, std::move(trajs)));
    }
    return out;
}

StableCurve stable_curve(const FlowContext& ctx, const Expression& f, const CriticalPoint& y) {
    if (y.index != 1) raise(ErrorCode::NotCritical, "stable_curve requires μ=1");
    const Vector3d s = y.stable_frame[0];

    StableCurve curve;
    curve.saddle_id = y.id;
    std::array<std::vector<Vector3d>, 2> branches;
    for (int side = 0; side < 2; ++side) {
        int sgn = side == 0 ? -1 : 1;
        Vector3d seed = y.location.coords + sgn * ctx.delta * s;
        FlowPath path = ascend(ctx, f, ctx.S->project(seed).coords);
        if (path.status == FlowStatus::ConvergedTo) {
            const CriticalPoint& tcp = ctx.cp(path.cp_id);
            if (tcp.index == 1)
                raise(ErrorCode::MorseSmaleFailure,
                      "saddle-saddle connection: stable branch of critical point " +
                          std::to_string(y.id) + " reached saddle " + std::to_string(tcp.id));
            if (tcp.index == 2) curve.end_cp[side] = tcp.id;
        }
        branches[side].reserve(path.samples.size());
        for (const auto& smp : path.samples) branches[side].push_back(smp.p);
    }

    // Oriented polyline through y in the +s direction.
    curve.pts.reserve(branches[0].size() + branches[1].size() + 1);
    for (auto it = branches[0].rbegin(); it != branches[0].rend(); ++it) curve.pts.push_back(*it);
    curve.saddle_pos = static_cast<int>(curve.pts.size());
    curve.pts.push_back(y.location.coords);
    for (const auto& p : branches[1]) curve.pts.push_back(p);
    return curve;
}

// ---------------------------------------------------------------------------
// Launch-circle census around a maximum.

namespace {

// Discrete classifier for a descent started on the launch circle: terminal
// minimum plus, per saddle, the passage side w.r.t. the saddle's unstable
// direction when the trajectory came near it. Constant on the open arcs
// between separatrix directions.
struct FlowSignature {
    int terminal = -1;           // minimum id, or saddle id on a direct hit
    bool direct_hit = false;
    std::vector<int> sides;      // per critical point: -1/0/+1

    bool operator==(const FlowSignature& o) const {
        return terminal == o.terminal && direct_hit == o.direct_hit && sides == o.sides;
    }
    bool operator!=(const FlowSignature& o) const { return !(*this == o); }
};

struct ShotResult {
    FlowSignature sig;
    FlowPath path;
    bool captured_saddle = false;
    int saddle_id = -1;
};

class CircleShooter {
public:
    CircleShooter(const FlowContext& ctx, const Expression& f, const CriticalPoint& x)
        : ctx_(ctx), f_(f), x_(x) {
        e1_ = x.unstable_frame[0];
        e2_ = x.unstable_frame[1];
        r_side_ = 0.25 * ctx.min_pair;
    }

    Vector3d launch_point(double theta) const {
        Vector3d d = std::cos(theta) * e1_ + std::sin(theta) * e2_;
        return ctx_.S->project(x_.location.coords + ctx_.delta * d).coords;
    }

    ShotResult shoot(double theta, bool record) const {
        ShotResult out;
        std::vector<Passage> passages;
        IntegrateOptions opt;
        opt.record = record;
        opt.passages = &passages;
        FlowPath path = descend(ctx_, f_, launch_point(theta), opt);
        const auto& crit = *ctx_.crit;
        out.sig.sides.assign(crit.size(), 0);
        for (std::size_t i = 0; i < crit.size(); ++i) {
            if (crit[i].index != 1) continue;
            const Passage& pass = passages[i];
            if (pass.dist < r_side_) {
                double along = (pass.at - crit[i].location.coords).dot(crit[i].unstable_frame[0]);
                out.sig.sides[i] = along >= 0 ? 1 : -1;
            }
        }
        if (path.status == FlowStatus::ConvergedTo) {
            const CriticalPoint& tcp = ctx_.cp(path.cp_id);
            if (tcp.index == 1) {
                out.captured_saddle = true;
                out.saddle_id = tcp.id;
                out.sig.direct_hit = true;
                out.sig.terminal = tcp.id;
            } else if (tcp.index == 0) {
                out.sig.terminal = tcp.id;
            } else {
                raise(ErrorCode::Inconclusive, "launch-circle descent captured at a maximum");
            }
        } else {
            raise(ErrorCode::Inconclusive, "launch-circle descent timed out");
        }
        out.path = std::move(path);
        return out;
    }

    double theta_of(const Vector3d& p) const {
        Vector3d d = p - x_.location.coords;
        return std::atan2(d.dot(e2_), d.dot(e1_));
    }

private:
    const FlowContext& ctx_;
    const Expression& f_;
    const CriticalPoint& x_;
    Vector3d e1_, e2_;
    double r_side_;
};

constexpr double kPi = 3.14159265358979323846;

}  // namespace

MaxCensus enumerate_max_connections(const FlowContext& ctx, const Expression& f,
                                    const CriticalPoint& x,
                                    const std::vector<StableCurve>& stable_curves) {
    if (x.index != 2) raise(ErrorCode::NotCritical, "enumerate_max_connections requires μ=2");
    CircleShooter shooter(ctx, f, x);
    const int N = std::max(16, ctx.cfg.circle_samples);
    const double dtheta = 2 * kPi / N;

    MaxCensus census;
    census.max_id = x.id;

    // Fine circle of directions.
    std::vector<ShotResult> shots(N);
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t i) {
        shots[i] = shooter.shoot(i * dtheta, /*record=*/false);
    });
    census.sample_basin.resize(N);
    for (int i = 0; i < N; ++i)
        census.sample_basin[i] = shots[i].sig.direct_hit ? -1 : shots[i].sig.terminal;

    struct Window {
        double lo, hi;
    };
    std::vector<Window> windows;

    // Candidates from signature changes between adjacent directions.
    std::vector<Trajectory> found;
    for (int i = 0; i < N; ++i) {
        int j = (i + 1) % N;
        if (shots[i].sig.direct_hit) {
            // Launch sample sits on a separatrix: keep it directly.
            ShotResult hit = shooter.shoot(i * dtheta, /*record=*/true);
            if (hit.captured_saddle)
                found.push_back(make_trajectory(ctx, f, std::move(hit.path), x.id,
                                                hit.saddle_id, 0));
            continue;
        }
        if (shots[j].sig.direct_hit) continue;
        if (shots[i].sig != shots[j].sig)
            windows.push_back({i * dtheta, (i + 1) * dtheta});
    }

    // Candidates from stable-curve back-traces: a branch that ends near this
    // maximum crosses the launch circle at the separatrix angle.
    for (const auto& sc : stable_curves) {
        for (int side = 0; side < 2; ++side) {
            if (sc.end_cp[side] != x.id) continue;
            // branch points ordered away from the saddle
            std::vector<Vector3d> branch;
            if (side == 0)
                for (int k = sc.saddle_pos; k >= 0; --k) branch.push_back(sc.pts[k]);
            else
                for (std::size_t k = sc.saddle_pos; k < sc.pts.size(); ++k)
                    branch.push_back(sc.pts[k]);
            if (branch.size() < 2) continue;
            // last crossing of |p - x| = δ walking toward the maximum
            double theta_star = std::numeric_limits<double>::quiet_NaN();
            for (std::size_t k = branch.size() - 1; k >= 1; --k) {
                double da = (branch[k - 1] - x.location.coords).norm();
                double db = (branch[k] - x.location.coords).norm();
                if ((da - ctx.delta) * (db - ctx.delta) <= 0) {
                    double s = (ctx.delta - da) / (db - da + 1e-300);
                    Vector3d p = branch[k - 1] + s * (branch[k] - branch[k - 1]);
                    theta_star = shooter.theta_of(p);
                    break;
                }
            }
            if (std::isnan(theta_star)) continue;
            windows.push_back({theta_star - 2 * dtheta, theta_star + 2 * dtheta});
        }
    }

    // Bisection refinement per window.
    std::sort(windows.begin(), windows.end(),
              [](const Window& a, const Window& b) { return a.lo < b.lo; });
    std::vector<std::optional<Trajectory>> refined(windows.size());
    parallel_for(windows.size(), [&](std::size_t wi) {
        double lo = windows[wi].lo, hi = windows[wi].hi;
        ShotResult sa = shooter.shoot(lo, false);
        if (sa.captured_saddle) {
            ShotResult hit = shooter.shoot(lo, true);
            refined[wi] =
                make_trajectory(ctx, f, std::move(hit.path), x.id, hit.saddle_id, 0);
            return;
        }
        ShotResult sb = shooter.shoot(hi, false);
        if (sb.captured_saddle) {
            ShotResult hit = shooter.shoot(hi, true);
            refined[wi] =
                make_trajectory(ctx, f, std::move(hit.path), x.id, hit.saddle_id, 0);
            return;
        }
        if (sa.sig == sb.sig) {
            // No separatrix inside after all (e.g. duplicate window).
            return;
        }
        while (hi - lo > ctx.cfg.bisection_tol) {
            double mid = 0.5 * (lo + hi);
            ShotResult sm = shooter.shoot(mid, false);
            if (sm.captured_saddle) {
                ShotResult hit = shooter.shoot(mid, true);
                refined[wi] =
                    make_trajectory(ctx, f, std::move(hit.path), x.id, hit.saddle_id, 0);
                return;
            }
            if (sm.sig != sa.sig) {
                hi = mid;
                sb = std::move(sm);
            } else {
                lo = mid;
                sa = std::move(sm);
            }
        }
        // Fully bisected without capture: accept the midpoint trajectory if
        // it passes within the capture radius of some saddle.
        double mid = 0.5 * (lo + hi);
        std::vector<Passage> passages;
        IntegrateOptions opt;
        opt.passages = &passages;
        FlowPath path = descend(ctx, f, shooter.launch_point(mid), opt);
        int best = -1;
        double bestd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ctx.crit->size(); ++i) {
            if (ctx.cp(static_cast<int>(i)).index != 1) continue;
            if (passages[i].dist < bestd) {
                bestd = passages[i].dist;
                best = static_cast<int>(i);
            }
        }
        if (best < 0 || bestd > ctx.capture_radius)
            raise(ErrorCode::MorseSmaleFailure,
                  "separatrix bisection from maximum " + std::to_string(x.id) +
                      " did not converge onto a saddle (closest saddle " + std::to_string(best) +
                      " at distance " + std::to_string(bestd) + ")");
        // truncate at the closest approach to the saddle
        std::size_t cut = 0;
        double dbest = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < path.samples.size(); ++k) {
            double d = (path.samples[k].p - ctx.cp(best).location.coords).norm();
            if (d < dbest) {
                dbest = d;
                cut = k;
            }
        }
        path.samples.resize(cut + 1);
        refined[wi] = make_trajectory(ctx, f, std::move(path), x.id, best, 0);
    });
    for (auto& r : refined)
        if (r) found.push_back(std::move(*r));

    // Deduplicate by anchor and order canonically.
    std::sort(found.begin(), found.end(), [](const Trajectory& a, const Trajectory& b) {
        if (a.target_id != b.target_id) return a.target_id < b.target_id;
        return std::lexicographical_compare(a.anchor.data(), a.anchor.data() + 3, b.anchor.data(),
                                            b.anchor.data() + 3);
    });
    for (const auto& t : found) {
        bool dup = false;
        for (const auto& u : census.connections)
            if (u.target_id == t.target_id &&
                (u.anchor - t.anchor).norm() <= 10 * ctx.capture_radius) {
                dup = true;
                break;
            }
        if (!dup) census.connections.push_back(t);
    }

    // Orientation-transport signs.
    for (auto& t : census.connections)
        t.tau = trajectory_sign_transport(ctx, t, x, ctx.cp(t.target_id));
    return census;
}

ModuliSpace enumerate_max_to_saddle(const MaxCensus& census, int max_id, int saddle_id) {
    std::vector<Trajectory> trajs;
    for (const auto& t : census.connections)
        if (t.target_id == saddle_id) trajs.push_back(t);
    return ModuliSpace::collect(max_id, saddle_id, std::move(trajs));
}

// ---------------------------------------------------------------------------

Eigen::Vector3d transport_along(const ImplicitSurface& S, const std::vector<Vector3d>& pts,
                                int from_idx, int to_idx, Vector3d v) {
    int step = to_idx >= from_idx ? 1 : -1;
    for (int k = from_idx; k != to_idx + step; k += step) {
        Vector3d n = S.unit_normal(pts[k]);
        v -= v.dot(n) * n;
        double norm = v.norm();
        if (norm < 1e-14) raise(ErrorCode::IllConditioned, "transported vector degenerated");
        v /= norm;
    }
    return v;
}

int trajectory_sign_transport(const FlowContext& ctx, const Trajectory& traj,
                              const CriticalPoint& x, const CriticalPoint& y) {
    if (traj.samples.size() < 2)
        raise(ErrorCode::IllConditioned, "trajectory too short for sign transport");
    std::vector<Vector3d> pts;
    pts.reserve(traj.samples.size());
    for (const auto& s : traj.samples) pts.push_back(s.p);

    Vector3d w = transport_along(*ctx.S, pts, static_cast<int>(pts.size()) - 1, 0,
                                 y.unstable_frame[0]);
    Vector3d n0 = ctx.S->unit_normal(pts[0]);
    Vector3d d = pts[1] - pts[0];
    d -= d.dot(n0) * n0;
    double dn = d.norm();
    if (dn < 1e-300) raise(ErrorCode::IllConditioned, "degenerate flow direction");
    d /= dn;

    double s1 = d.cross(w).dot(n0);
    if (std::abs(s1) < 1e-4)
        raise(ErrorCode::IllConditioned,
              "transported frame degenerate (angle below 1e-4 rad)");
    int s2 = unstable_orientation(x);
    return (s1 > 0 ? 1 : -1) * s2;
}

// ---------------------------------------------------------------------------

const ModuliSpace* MorseData::moduli(int source_id, int target_id) const {
    for (const auto& m : saddle_moduli)
        if (m.source_id == source_id && m.target_id == target_id) return &m;
    for (const auto& m : max_moduli)
        if (m.source_id == source_id && m.target_id == target_id) return &m;
    return nullptr;
}

const StableCurve* MorseData::stable_curve_of(int saddle_id) const {
    for (const auto& sc : stable_curves)
        if (sc.saddle_id == saddle_id) return &sc;
    return nullptr;
}

MorseData build_morse_data(const ImplicitSurface& S, const Expression& f, const FlowConfig& cfg,
                           const SearchParams& search) {
    MorseData data{S, f, cfg, {}, {}, {}, {}, {}, {}};
    data.crit = find_critical_points(f, S, search);
    for (const auto& c : data.crit) data.ids_by_degree[c.index].push_back(c.id);

    FlowContext ctx = make_flow_context(data.S, data.crit, cfg);

    for (const auto& c : data.crit) {
        if (c.index != 1) continue;
        auto spaces = enumerate_saddle_rays(ctx, f, c);
        for (auto& m : spaces) data.saddle_moduli.push_back(std::move(m));
        data.stable_curves.push_back(stable_curve(ctx, f, c));
    }

    for (const auto& c : data.crit) {
        if (c.index != 2) continue;
        data.max_census.push_back(enumerate_max_connections(ctx, f, c, data.stable_curves));
        for (const auto& s : data.crit) {
            if (s.index != 1) continue;
            data.max_moduli.push_back(enumerate_max_to_saddle(data.max_census.back(), c.id, s.id));
        }
    }
    return data;
}

}  // namespace morseflow
