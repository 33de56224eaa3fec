#include "morseflow/critical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "morseflow/errors.hpp"
#include "morseflow/util.hpp"

namespace morseflow {

using Eigen::Matrix2d;
using Eigen::Vector2d;
using Eigen::Vector3d;

namespace {

// Lexicographic-positive sign canonicalization for 2D eigenvectors: makes
// eigenframes deterministic across runs and thread counts.
Vector2d canonical(Vector2d v) {
    if (v.x() < 0 || (v.x() == 0 && v.y() < 0)) v = -v;
    return v;
}

struct EigenPair {
    Vector2d values;              // ascending
    Vector2d vectors[2];          // frame coordinates, unit
};

EigenPair symmetric_eigen_2x2(const Matrix2d& M) {
    double a = M(0, 0), b = M(0, 1), c = M(1, 1);
    double mean = 0.5 * (a + c);
    double disc = std::hypot(0.5 * (a - c), b);
    EigenPair out;
    out.values << mean - disc, mean + disc;
    Vector2d v1(b, out.values[0] - a);
    Vector2d alt(out.values[0] - c, b);
    if (alt.squaredNorm() > v1.squaredNorm()) v1 = alt;
    if (v1.squaredNorm() == 0) v1 = Vector2d(1, 0);  // multiple eigenvalue
    v1.normalize();
    out.vectors[0] = canonical(v1);
    out.vectors[1] = canonical(Vector2d(-v1.y(), v1.x()));
    return out;
}

struct Candidate {
    Vector3d q;
    double f_value;
};

// Newton on the Lagrange system F(q,λ) = (∇f − λ∇Φ, Φ) = 0.
std::optional<Vector3d> lagrange_newton(const Expression& f, const ImplicitSurface& S,
                                        Vector3d q, double tol, int max_iter = 50) {
    Jet1 jp0 = S.phi().jet1(q);
    double g2 = jp0.g.squaredNorm();
    if (g2 == 0) return std::nullopt;
    double lambda = f.jet1(q).g.dot(jp0.g) / g2;

    Eigen::AlignedBox3d inflated = S.box();
    inflated.min() -= 0.1 * S.diameter() * Vector3d::Ones();
    inflated.max() += 0.1 * S.diameter() * Vector3d::Ones();

    for (int it = 0; it < max_iter; ++it) {
        Jet2 jf = f.jet2(q);
        Jet2 jp = S.phi().jet2(q);
        Eigen::Vector4d F;
        F.head<3>() = jf.g - lambda * jp.g;
        F(3) = jp.v;
        if (F.lpNorm<Eigen::Infinity>() <= tol) return q;
        Eigen::Matrix4d J;
        J.topLeftCorner<3, 3>() = jf.h - lambda * jp.h;
        J.topRightCorner<3, 1>() = -jp.g;
        J.bottomLeftCorner<1, 3>() = jp.g.transpose();
        J(3, 3) = 0.0;
        Eigen::FullPivLU<Eigen::Matrix4d> lu(J);
        if (!lu.isInvertible()) return std::nullopt;
        Eigen::Vector4d step = lu.solve(-F);
        q += step.head<3>();
        lambda += step(3);
        if (!inflated.contains(q)) return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace

std::vector<CriticalPoint> find_critical_points(const Expression& f, const ImplicitSurface& S,
                                                const SearchParams& params) {
    const double dedupe =
        params.dedupe_radius > 0 ? params.dedupe_radius : 1e-4 * S.diameter();

    // Grid seeds projected onto the surface.
    std::vector<Vector3d> seeds;
    const int d = std::max(2, params.grid_density);
    const Vector3d lo = S.box().min(), hi = S.box().max();
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                Vector3d q(lo.x() + (hi.x() - lo.x()) * (i + 0.5) / d,
                           lo.y() + (hi.y() - lo.y()) * (j + 0.5) / d,
                           lo.z() + (hi.z() - lo.z()) * (k + 0.5) / d);
                seeds.push_back(q);
            }

    std::vector<std::optional<Candidate>> results(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
        Vector3d q = seeds[i];
        try {
            q = S.project(q).coords;
        } catch (const Error&) {
            return;
        }
        auto sol = lagrange_newton(f, S, q, params.newton_tol);
        if (!sol) return;
        SurfacePoint p;
        try {
            p = S.project(*sol);
        } catch (const Error&) {
            return;
        }
        if (!S.inside_box(p.coords)) return;
        if (restricted_gradient(f, p).vec.norm() > params.crit_tol) return;
        results[i] = Candidate{p.coords, f.value(p.coords)};
    });

    std::vector<Candidate> cands;
    for (const auto& r : results)
        if (r) cands.push_back(*r);
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.f_value != b.f_value) return a.f_value < b.f_value;
        return std::lexicographical_compare(a.q.data(), a.q.data() + 3, b.q.data(), b.q.data() + 3);
    });

    std::vector<Candidate> unique;
    for (const auto& c : cands) {
        bool dup = false;
        for (const auto& u : unique)
            if ((c.q - u.q).norm() < dedupe) {
                dup = true;
                break;
            }
        if (!dup) unique.push_back(c);
    }

    std::vector<CriticalPoint> points;
    for (const auto& c : unique) {
        CriticalPoint cp;
        cp.location = S.point_at(c.q);
        cp.f_value = c.f_value;
        Matrix2d H = restricted_hessian(f, S, cp.location, params.crit_tol * 1.0001);
        EigenPair ep = symmetric_eigen_2x2(H);
        cp.eigenvalues = ep.values;
        TangentFrame fr = orientation_frame(cp.location);
        for (int e = 0; e < 2; ++e) {
            Vector3d w = ep.vectors[e].x() * fr.e1 + ep.vectors[e].y() * fr.e2;
            if (ep.values[e] < 0)
                cp.unstable_frame.push_back(w);
            else
                cp.stable_frame.push_back(w);
        }
        cp.index = static_cast<int>(cp.unstable_frame.size());
        points.push_back(std::move(cp));
    }

    if (points.empty())
        raise(ErrorCode::EulerMismatch, "no critical points found (empty search)");

    double max_eig = 0.0;
    for (const auto& p : points)
        max_eig = std::max(max_eig, p.eigenvalues.cwiseAbs().maxCoeff());
    const double nondeg_tol = params.nondeg_rel_tol * max_eig;
    for (const auto& p : points) {
        if (p.eigenvalues.cwiseAbs().minCoeff() < nondeg_tol)
            raise(ErrorCode::DegenerateCritical,
                  "eigenvalue magnitude below nondegeneracy tolerance at f=" +
                      std::to_string(p.f_value));
    }

    for (std::size_t i = 0; i < points.size(); ++i) points[i].id = static_cast<int>(i);

    long long signed_count = 0;
    for (const auto& p : points) signed_count += (p.index % 2 == 0) ? 1 : -1;
    if (signed_count != S.expected_euler())
        raise(ErrorCode::EulerMismatch,
              "signed critical count " + std::to_string(signed_count) + " != expected Euler " +
                  std::to_string(S.expected_euler()) + " (deficit " +
                  std::to_string(S.expected_euler() - signed_count) + ")");

    return points;
}

EulerReport euler_check(const std::vector<CriticalPoint>& points, const ImplicitSurface& S) {
    EulerReport rep;
    for (const auto& p : points) rep.signed_count += (p.index % 2 == 0) ? 1 : -1;
    rep.expected = S.expected_euler();
    rep.pass = rep.signed_count == rep.expected;
    return rep;
}

int unstable_orientation(const CriticalPoint& x) {
    if (x.index == 2) {
        double s = x.unstable_frame[0].cross(x.unstable_frame[1]).dot(x.location.normal);
        return s >= 0 ? 1 : -1;
    }
    return 1;
}

double min_pairwise_distance(const std::vector<CriticalPoint>& points) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            best = std::min(best, (points[i].location.coords - points[j].location.coords).norm());
    return best;
}

}  // namespace morseflow
