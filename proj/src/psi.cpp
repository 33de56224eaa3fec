#include "morseflow/psi.hpp"

#include <algorithm>
#include <cmath>

#include "morseflow/errors.hpp"
#include "morseflow/util.hpp"

namespace morseflow {

using Eigen::Vector2d;
using Eigen::Vector3d;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

PseudoCycleCurve make_curve(const ImplicitSurface& S, std::vector<Vector3d> points,
                            double max_step) {
    if (points.size() < 3)
        raise(ErrorCode::ScenarioError, "curve needs at least 3 points");
    for (auto& p : points) p = S.project(p).coords;
    if ((points.front() - points.back()).norm() > 1e-12) points.push_back(points.front());

    PseudoCycleCurve curve;
    for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const Vector3d a = points[i], b = points[i + 1];
        curve.pts.push_back(a);
        double len = (b - a).norm();
        int pieces = static_cast<int>(std::ceil(len / max_step));
        for (int k = 1; k < pieces; ++k) {
            Vector3d m = a + (b - a) * (double(k) / pieces);
            S.reproject(m);
            curve.pts.push_back(m);
        }
    }
    curve.pts.push_back(points.back());
    return curve;
}

PseudoCycleCurve torus_meridian(const ImplicitSurface& S, double ring_angle, int samples) {
    std::vector<Vector3d> pts;
    const double c = std::cos(ring_angle), s = std::sin(ring_angle);
    for (int k = 0; k < samples; ++k) {
        double psi = 2 * kPi * k / samples;
        double r = 2 + std::cos(psi);
        pts.emplace_back(r * c, std::sin(psi), r * s);
    }
    return make_curve(S, std::move(pts), 0.02 * S.diameter());
}

PseudoCycleCurve torus_longitude(const ImplicitSurface& S, double tube_angle, int samples) {
    std::vector<Vector3d> pts;
    const double r = 2 + std::cos(tube_angle);
    const double y = std::sin(tube_angle);
    for (int k = 0; k < samples; ++k) {
        double phi = 2 * kPi * k / samples;
        pts.emplace_back(r * std::cos(phi), y, r * std::sin(phi));
    }
    return make_curve(S, std::move(pts), 0.02 * S.diameter());
}

PseudoCycleCurve small_circle(const ImplicitSurface& S, const Vector3d& center, double radius,
                              int samples) {
    SurfacePoint c = S.project(center);
    TangentFrame fr = orientation_frame(c);
    std::vector<Vector3d> pts;
    for (int k = 0; k < samples; ++k) {
        double th = 2 * kPi * k / samples;
        pts.push_back(c.coords + radius * (std::cos(th) * fr.e1 + std::sin(th) * fr.e2));
    }
    return make_curve(S, std::move(pts), 0.02 * S.diameter());
}

void validate_curve(const PseudoCycleCurve& curve, const MorseData& data) {
    if (curve.pts.size() < 4 || (curve.pts.front() - curve.pts.back()).norm() > 1e-9)
        raise(ErrorCode::ScenarioError, "pseudo-cycle curve is not closed");
    FlowContext ctx = data.context();
    const double clearance = curve.clearance > 0 ? curve.clearance : 2 * ctx.delta;
    for (const auto& c : data.crit) {
        for (const auto& p : curve.pts) {
            double d = (p - c.location.coords).norm();
            if (d < clearance)
                raise(ErrorCode::ClearanceViolation,
                      "curve passes within " + std::to_string(d) + " of critical point " +
                          std::to_string(c.id) + " (clearance " + std::to_string(clearance) + ")");
        }
    }
}

namespace {

double seg_seg_distance(const Vector3d& a1, const Vector3d& b1, const Vector3d& a2,
                        const Vector3d& b2) {
    // coarse: sample-based lower bound is enough for the proximity filter
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 4; ++i) {
        Vector3d p = a1 + (b1 - a1) * (i / 4.0);
        Vector3d d = b2 - a2;
        double len2 = d.squaredNorm();
        double t = len2 > 0 ? std::clamp((p - a2).dot(d) / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, (p - (a2 + t * d)).norm());
    }
    return best;
}

struct Seg2 {
    Vector2d a, b;
};

// Proper 2D segment intersection; returns parameters (s, t) in [0,1).
bool seg_intersect_2d(const Seg2& s1, const Seg2& s2, double& s, double& t) {
    Vector2d r = s1.b - s1.a;
    Vector2d q = s2.b - s2.a;
    double denom = r.x() * q.y() - r.y() * q.x();
    if (denom == 0) return false;
    Vector2d d = s2.a - s1.a;
    s = (d.x() * q.y() - d.y() * q.x()) / denom;
    t = (d.x() * r.y() - d.y() * r.x()) / denom;
    return s >= 0.0 && s < 1.0 && t >= 0.0 && t < 1.0;
}

}  // namespace

PsiResult psi_degree1(const PseudoCycleCurve& curve, const MorseData& data) {
    validate_curve(curve, data);
    const double margin = curve.margin_deg * kPi / 180.0;
    const auto& saddles = data.ids_by_degree[1];

    PsiResult out;
    out.cycle.degree = 1;
    out.cycle.coeffs = IVec::Zero(static_cast<int>(saddles.size()));

    const double dedupe_dist = 1e-6 * data.S.diameter();

    for (std::size_t si = 0; si < saddles.size(); ++si) {
        const StableCurve* sc = data.stable_curve_of(saddles[si]);
        if (!sc)
            raise(ErrorCode::MissingModuli,
                  "no stable curve for saddle " + std::to_string(saddles[si]));
        std::vector<CurveCrossing> crossings;
        for (std::size_t i = 0; i + 1 < curve.pts.size(); ++i) {
            const Vector3d& a1 = curve.pts[i];
            const Vector3d& b1 = curve.pts[i + 1];
            double len1 = (b1 - a1).norm();
            if (len1 == 0) continue;
            for (std::size_t j = 0; j + 1 < sc->pts.size(); ++j) {
                const Vector3d& a2 = sc->pts[j];
                const Vector3d& b2 = sc->pts[j + 1];
                double len2 = (b2 - a2).norm();
                if (len2 == 0) continue;
                if (seg_seg_distance(a1, b1, a2, b2) > 0.75 * (len1 + len2)) continue;

                // local tangent-plane test
                Vector3d mid = 0.25 * (a1 + b1 + a2 + b2);
                data.S.reproject(mid);
                SurfacePoint m = data.S.point_at(mid);
                TangentFrame fr = orientation_frame(m);
                auto to2d = [&](const Vector3d& p) {
                    Vector3d d = p - m.coords;
                    return Vector2d(d.dot(fr.e1), d.dot(fr.e2));
                };
                Seg2 s1{to2d(a1), to2d(b1)};
                Seg2 s2{to2d(a2), to2d(b2)};
                double s, t;
                if (!seg_intersect_2d(s1, s2, s, t)) continue;

                Vector3d cross_pt = a1 + s * (b1 - a1);
                data.S.reproject(cross_pt);
                Vector3d t_curve = (b1 - a1).normalized();
                Vector3d t_stable = (b2 - a2).normalized();
                Vector3d n = data.S.unit_normal(cross_pt);
                double sine = t_curve.cross(t_stable).dot(n);
                double angle = std::asin(std::clamp(std::abs(sine), 0.0, 1.0));
                if (angle < margin)
                    raise(ErrorCode::NonTransverse,
                          "crossing with stable curve of saddle " + std::to_string(saddles[si]) +
                              " at angle " + std::to_string(angle * 180 / kPi) +
                              " deg (margin " + std::to_string(curve.margin_deg) + ")");
                CurveCrossing cc;
                cc.point = cross_pt;
                cc.saddle_id = saddles[si];
                cc.sign = sine >= 0 ? 1 : -1;
                cc.angle = angle;
                cc.curve_param = static_cast<double>(i) + s;
                crossings.push_back(cc);
            }
        }
        // order by curve parameter and drop near-duplicates from adjacent
        // segment pairs
        std::sort(crossings.begin(), crossings.end(),
                  [](const CurveCrossing& a, const CurveCrossing& b) {
                      return a.curve_param < b.curve_param;
                  });
        std::vector<CurveCrossing> kept;
        for (const auto& c : crossings) {
            if (!kept.empty() && (kept.back().point - c.point).norm() < dedupe_dist) continue;
            kept.push_back(c);
        }
        for (const auto& c : kept) out.cycle.coeffs(static_cast<int>(si)) += c.sign;
        out.crossings.insert(out.crossings.end(), kept.begin(), kept.end());
    }
    return out;
}

MorseCycle psi_degree0(const std::vector<std::pair<Vector3d, long long>>& points,
                       const MorseData& data) {
    FlowContext ctx = data.context();
    const auto& mins = data.ids_by_degree[0];
    MorseCycle cycle;
    cycle.degree = 0;
    cycle.coeffs = IVec::Zero(static_cast<int>(mins.size()));
    for (const auto& [p, w] : points) {
        Vector3d q = data.S.project(p).coords;
        int target = basin_of(ctx, data.f, q);
        for (std::size_t i = 0; i < mins.size(); ++i)
            if (mins[i] == target)
                cycle.coeffs(static_cast<int>(i)) = checked_add(cycle.coeffs(static_cast<int>(i)), w);
    }
    return cycle;
}

RoundtripReport roundtrip_phi_psi(const MorseCycle& a, const MorseData& d0, const MorseData& d1,
                                  const Homotopy& h) {
    RoundtripReport rep;
    PairingWitness pairing = find_pairing(a, d0);
    auto [curves, max_gap] = glue_cycle_curve(a, pairing, d0);
    (void)max_gap;
    rep.curves = static_cast<int>(curves.size());

    MorseCycle b;
    b.degree = 1;
    b.coeffs = IVec::Zero(static_cast<int>(d1.ids_by_degree[1].size()));
    for (auto& pts : curves) {
        PseudoCycleCurve curve;
        curve.pts = std::move(pts);
        PsiResult psi = psi_degree1(curve, d1);
        b.coeffs += psi.cycle.coeffs;
    }
    rep.psi_of_glued = b;

    ContinuationMatrix phi = continuation_matrix(h, d0, d1, Coeff::Z);
    MorseComplex C1 = assemble(d1, Coeff::Z);
    HomologyBasis basis1(C1, 1);
    rep.lhs_class = basis1.class_coords(b.coeffs);
    rep.rhs_class = basis1.class_coords(mat_vec(phi.n[1], a.coeffs));
    rep.pass = rep.lhs_class.size() == rep.rhs_class.size() &&
               (rep.lhs_class - rep.rhs_class).isZero(0);
    return rep;
}

CobordanceReport cobordance_invariance(const PseudoCycleCurve& a, const PseudoCycleCurve& b,
                                       const MorseData& data) {
    CobordanceReport rep;
    rep.psi_a = psi_degree1(a, data).cycle;
    rep.psi_b = psi_degree1(b, data).cycle;
    rep.difference = rep.psi_a.coeffs - rep.psi_b.coeffs;
    MorseComplex C = assemble(data, Coeff::Z);
    HomologyBasis basis(C, 1);
    rep.pass = basis.in_boundary_image(rep.difference);
    return rep;
}

}  // namespace morseflow
