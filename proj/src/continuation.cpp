#include "morseflow/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "morseflow/errors.hpp"
#include "morseflow/util.hpp"

namespace morseflow {

using Eigen::Vector3d;

double Homotopy::beta(double s) const {
    if (s <= -R) return 0.0;
    if (s >= R) return 1.0;
    double t = (s + R) / (2 * R);
    if (ramp == Ramp::Cubic) return t * t * (3 - 2 * t);
    return t * t * t * (t * (t * 6 - 15) + 10);
}

Jet1 Homotopy::jet(const Vector3d& q, double s) const {
    double b = beta(s);
    if (b <= 0.0) return f0.jet1(q);
    if (b >= 1.0) return f1.jet1(q);
    Jet1 j0 = f0.jet1(q);
    Jet1 j1 = f1.jet1(q);
    Jet1 out;
    out.v = (1 - b) * j0.v + b * j1.v;
    out.g = (1 - b) * j0.g + b * j1.g;
    return out;
}

ScalarJetFn Homotopy::field() const {
    return [this](const Vector3d& q, double s) { return jet(q, s); };
}

namespace {

long long reduce_entry(long long v, Coeff mode) { return mode == Coeff::Z2 ? ((v % 2) + 2) % 2 : v; }

IMat reduce_matrix(IMat A, Coeff mode) {
    if (mode == Coeff::Z2)
        for (int i = 0; i < A.rows(); ++i)
            for (int j = 0; j < A.cols(); ++j) A(i, j) = reduce_entry(A(i, j), mode);
    return A;
}

bool mats_equal(const IMat& A, const IMat& B) {
    return A.rows() == B.rows() && A.cols() == B.cols() && (A - B).isZero(0);
}

std::vector<int> degree_positions(const MorseData& d, int degree) {
    return d.ids_by_degree[degree];
}

int position_of(const std::vector<int>& ids, int id) {
    for (std::size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == id) return static_cast<int>(i);
    return -1;
}

// Endpoint of the homotopy trajectory started at q just before the ramp.
Vector3d ramp_endpoint(const FlowContext& ctx1, const Homotopy& h, const Vector3d& q) {
    IntegrateOptions opt;
    opt.t0 = -h.R - 1;
    opt.t_end = h.R + 1;
    opt.capture = false;
    opt.record = false;
    FlowPath path = integrate_field(ctx1, h.field(), /*ascend=*/false, q, opt);
    return path.samples.back().p;
}

// Signed distance of p to an oriented stable-curve polyline: distance to the
// nearest segment, signed by the side w.r.t. (normal × tangent).
struct CurveProximity {
    double signed_dist = 0;
    int segment = -1;
    Vector3d foot = Vector3d::Zero();
    Vector3d tangent = Vector3d::Zero();
};

CurveProximity curve_proximity(const ImplicitSurface& S, const std::vector<Vector3d>& pts,
                               const Vector3d& p) {
    CurveProximity best;
    double bestd = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        Vector3d a = pts[k], b = pts[k + 1];
        Vector3d ab = b - a;
        double len2 = ab.squaredNorm();
        if (len2 == 0) continue;
        double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
        Vector3d foot = a + t * ab;
        double d = (p - foot).norm();
        if (d < bestd) {
            bestd = d;
            best.segment = static_cast<int>(k);
            best.foot = foot;
            best.tangent = ab.normalized();
        }
    }
    Vector3d n = S.unit_normal(best.foot);
    Vector3d side_dir = n.cross(best.tangent);
    double side = (p - best.foot).dot(side_dir);
    best.signed_dist = (side >= 0 ? 1.0 : -1.0) * bestd;
    return best;
}

// Launch parameterization along one unstable ray of an f0 saddle:
// τ < 0 maps to sub-δ offsets δ·2^τ along ±u, τ ≥ 0 interpolates the
// recorded ray samples by flow time (chord + reprojection).
class RayLaunch {
public:
    RayLaunch(const FlowContext& ctx0, const CriticalPoint& x, const Trajectory& ray)
        : ctx0_(ctx0), x_(x), ray_(ray) {
        u_ = x.unstable_frame[0] * ray.ray_sign;
    }

    double tau_min() const { return -26.0; }
    double tau_max() const { return ray_.samples.back().t; }

    Vector3d point(double tau) const {
        if (tau < 0) {
            double a = ctx0_.delta * std::pow(2.0, tau);
            return ctx0_.S->project(x_.location.coords + a * u_).coords;
        }
        const auto& s = ray_.samples;
        auto it = std::lower_bound(s.begin(), s.end(), tau,
                                   [](const PathSample& ps, double t) { return ps.t < t; });
        if (it == s.begin()) return s.front().p;
        if (it == s.end()) return s.back().p;
        const PathSample& b = *it;
        const PathSample& a = *(it - 1);
        double w = (tau - a.t) / (b.t - a.t);
        Vector3d q = a.p + w * (b.p - a.p);
        ctx0_.S->reproject(q);
        return q;
    }

private:
    const FlowContext& ctx0_;
    const CriticalPoint& x_;
    const Trajectory& ray_;
    Vector3d u_;
};

}  // namespace

ContinuationMatrix continuation_matrix(const Homotopy& h, const MorseData& d0,
                                       const MorseData& d1, Coeff mode) {
    ContinuationMatrix phi;
    phi.mode = mode;

    FlowContext ctx0 = d0.context();
    FlowContext ctx1 = d1.context();

    const auto mins0 = degree_positions(d0, 0), mins1 = degree_positions(d1, 0);
    const auto sads0 = degree_positions(d0, 1), sads1 = degree_positions(d1, 1);
    const auto maxs0 = degree_positions(d0, 2), maxs1 = degree_positions(d1, 2);
    phi.n[0] = IMat::Zero(static_cast<int>(mins1.size()), static_cast<int>(mins0.size()));
    phi.n[1] = IMat::Zero(static_cast<int>(sads1.size()), static_cast<int>(sads0.size()));
    phi.n[2] = IMat::Zero(static_cast<int>(maxs1.size()), static_cast<int>(maxs0.size()));

    // ---- degree 0: carry each minimum through the ramp, then descend.
    for (std::size_t c = 0; c < mins0.size(); ++c) {
        Vector3d e = ramp_endpoint(ctx1, h, d0.crit[mins0[c]].location.coords);
        int target;
        try {
            target = basin_of(ctx1, d1.f, e);
        } catch (const Error& err) {
            if (err.code() == ErrorCode::Inconclusive)
                raise(ErrorCode::NonGenericHomotopy,
                      "degree-0 continuation trajectory did not reach a minimum: " +
                          std::string(err.what()));
            throw;
        }
        phi.n[0](position_of(mins1, target), static_cast<int>(c)) = 1;
    }

    // ---- degree 1: endpoint locus of each unstable ray vs f1 stable curves.
    for (std::size_t c = 0; c < sads0.size(); ++c) {
        const CriticalPoint& x0 = d0.crit[sads0[c]];

        // central trajectory: the saddle itself through the ramp
        {
            Vector3d e = ramp_endpoint(ctx1, h, x0.location.coords);
            IntegrateOptions opt;
            opt.record = false;
            FlowPath down = descend(ctx1, d1.f, e, opt);
            if (down.status == FlowStatus::ConvergedTo && ctx1.cp(down.cp_id).index == 1) {
                phi.n[1](position_of(sads1, down.cp_id), static_cast<int>(c)) += 1;
            } else if (down.status == FlowStatus::ConvergedTo &&
                       ctx1.cp(down.cp_id).index == 2) {
                raise(ErrorCode::NonGenericHomotopy,
                      "central continuation trajectory captured at a maximum");
            } else if (down.status != FlowStatus::ConvergedTo) {
                raise(ErrorCode::NonGenericHomotopy,
                      "central continuation trajectory did not converge");
            }
        }

        // the two rays
        for (int y : d0.ids_by_degree[0]) {
            const ModuliSpace* m = d0.moduli(x0.id, y);
            if (!m) continue;
            for (const Trajectory& ray : m->trajectories) {
                RayLaunch launch(ctx0, x0, ray);
                const int kNeg = 27;
                std::vector<double> taus;
                for (int k = 0; k < kNeg; ++k)
                    taus.push_back(launch.tau_min() + k * (0.0 - launch.tau_min()) / kNeg);
                // follow the ray's own adaptive sample times
                const std::size_t stride = std::max<std::size_t>(1, ray.samples.size() / 160);
                for (std::size_t k = 0; k < ray.samples.size(); k += stride)
                    taus.push_back(ray.samples[k].t);
                taus.push_back(launch.tau_max());
                std::vector<Vector3d> ends(taus.size());
                parallel_for(taus.size(), [&](std::size_t i) {
                    ends[i] = ramp_endpoint(ctx1, h, launch.point(taus[i]));
                });

                for (std::size_t s1 = 0; s1 < sads1.size(); ++s1) {
                    const StableCurve* sc = d1.stable_curve_of(sads1[s1]);
                    if (!sc) continue;
                    const double band = 0.5 * ctx1.min_pair;
                    std::vector<double> gs(taus.size());
                    for (std::size_t i = 0; i < taus.size(); ++i)
                        gs[i] = curve_proximity(d1.S, sc->pts, ends[i]).signed_dist;

                    for (std::size_t i = 0; i + 1 < taus.size(); ++i) {
                        if (gs[i] == 0 || gs[i] * gs[i + 1] > 0) continue;
                        if (std::min(std::abs(gs[i]), std::abs(gs[i + 1])) > band) continue;
                        double lo = taus[i], hi = taus[i + 1];
                        double glo = gs[i];
                        for (int it = 0; it < 60 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi));
                             ++it) {
                            double mid = 0.5 * (lo + hi);
                            double gm =
                                curve_proximity(d1.S, sc->pts,
                                                ramp_endpoint(ctx1, h, launch.point(mid)))
                                    .signed_dist;
                            if (gm == 0 || gm * glo < 0)
                                hi = mid;
                            else {
                                lo = mid;
                                glo = gm;
                            }
                        }
                        double tstar = 0.5 * (lo + hi);
                        Vector3d pstar = ramp_endpoint(ctx1, h, launch.point(tstar));
                        CurveProximity prox = curve_proximity(d1.S, sc->pts, pstar);

                        // locus tangent by a symmetric probe
                        double probe = std::max(1e-6, 1e-4 * std::abs(tstar));
                        Vector3d pa = ramp_endpoint(ctx1, h, launch.point(tstar - probe));
                        Vector3d pb = ramp_endpoint(ctx1, h, launch.point(tstar + probe));
                        Vector3d dloc = pb - pa;
                        if (dloc.norm() == 0)
                            raise(ErrorCode::NonGenericHomotopy,
                                  "degenerate endpoint locus at a continuation crossing");
                        dloc.normalize();

                        Vector3d n = d1.S.unit_normal(prox.foot);
                        Vector3d side_dir = n.cross(prox.tangent);
                        int cdir = dloc.dot(side_dir) >= 0 ? 1 : -1;
                        Vector3d u1 = transport_along(d1.S, sc->pts, sc->saddle_pos, prox.segment,
                                                      d1.crit[sads1[s1]].unstable_frame[0]);
                        int uside = u1.dot(side_dir) >= 0 ? 1 : -1;
                        long long tau_sign =
                            static_cast<long long>(ray.ray_sign) * cdir * uside;
                        phi.n[1](static_cast<int>(s1), static_cast<int>(c)) += tau_sign;
                    }
                }
            }
        }
    }

    // ---- degree 2: preimage of each f1 maximum under the end-time map.
    for (std::size_t r = 0; r < maxs1.size(); ++r) {
        const CriticalPoint& x1 = d1.crit[maxs1[r]];
        // reverse homotopy flow from s = R+1 down to s = -R-1
        ScalarJetFn rev = [&h](const Vector3d& q, double t) { return h.jet(q, h.R + 1 - t); };
        IntegrateOptions opt;
        opt.t0 = 0;
        opt.t_end = 2 * h.R + 2;
        opt.capture = false;
        opt.record = false;
        FlowPath back = integrate_field(ctx1, rev, /*ascend=*/true, x1.location.coords, opt);
        Vector3d q0 = back.samples.back().p;
        IntegrateOptions up_opt;
        up_opt.record = false;
        FlowPath up = ascend(ctx0, d0.f, q0, up_opt);
        if (up.status != FlowStatus::ConvergedTo)
            raise(ErrorCode::Inconclusive, "degree-2 preimage ascent timed out");
        const CriticalPoint& x0 = ctx0.cp(up.cp_id);
        if (x0.index != 2)
            raise(ErrorCode::NonGenericHomotopy,
                  "degree-2 continuation preimage ascends to a non-maximum (index " +
                      std::to_string(x0.index) + ")");
        long long sign = static_cast<long long>(unstable_orientation(x0)) * unstable_orientation(x1);
        phi.n[2](static_cast<int>(r), position_of(maxs0, x0.id)) = sign;
    }

    for (auto& M : phi.n) M = reduce_matrix(std::move(M), mode);
    return phi;
}

ChainMapReport verify_chain_map(const ContinuationMatrix& phi, const MorseComplex& C0,
                                const MorseComplex& C1) {
    ChainMapReport rep;
    rep.lhs1 = reduce_matrix(mat_mul(phi.n[0], C0.d1), phi.mode);
    rep.rhs1 = reduce_matrix(mat_mul(C1.d1, phi.n[1]), phi.mode);
    rep.lhs2 = reduce_matrix(mat_mul(phi.n[1], C0.d2), phi.mode);
    rep.rhs2 = reduce_matrix(mat_mul(C1.d2, phi.n[2]), phi.mode);
    rep.pass = mats_equal(rep.lhs1, rep.rhs1) && mats_equal(rep.lhs2, rep.rhs2);
    return rep;
}

InducedMap induced_homology_map(const ContinuationMatrix& phi, const MorseComplex& C0,
                                const MorseComplex& C1, bool require_iso) {
    InducedMap out;
    for (int k = 0; k < 3; ++k) {
        HomologyBasis b0(C0, k), b1(C1, k);
        if (b0.betti() != b1.betti())
            raise(ErrorCode::NotIso, "Betti mismatch in degree " + std::to_string(k));
        const auto nb = b0.betti();
        IMat M = IMat::Zero(nb, nb);
        for (long long j = 0; j < nb; ++j) {
            IVec img = mat_vec(phi.n[k], b0.free_cycles()[j]);
            IVec coords = b1.class_coords(img);
            for (long long i = 0; i < nb; ++i) M(i, j) = coords(i);
        }
        out.H[k] = M;
        out.dets[k] = nb > 0 ? det_bareiss(M) : 1;
        if (require_iso && out.dets[k] != 1 && out.dets[k] != -1)
            raise(ErrorCode::NotIso, "induced homology map in degree " + std::to_string(k) +
                                         " has determinant " + std::to_string(out.dets[k]));
    }
    return out;
}

FunctorialityReport verify_functoriality(const InducedMap& h10, const InducedMap& h21,
                                         const InducedMap& h20) {
    FunctorialityReport rep;
    rep.pass = true;
    for (int k = 0; k < 3; ++k) {
        rep.lhs[k] = mat_mul(h21.H[k], h10.H[k]);
        rep.rhs[k] = h20.H[k];
        if (!mats_equal(rep.lhs[k], rep.rhs[k])) rep.pass = false;
    }
    return rep;
}

}  // namespace morseflow
