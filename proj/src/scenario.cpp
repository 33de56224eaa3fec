#include "morseflow/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "morseflow/catalog.hpp"
#include "morseflow/continuation.hpp"
#include "morseflow/errors.hpp"
#include "morseflow/psi.hpp"
#include "morseflow/simplicial.hpp"
#include "morseflow/snf.hpp"
#include "morseflow/util.hpp"

namespace morseflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

Json vec3_json(const Eigen::Vector3d& v) {
    return Json::array({round12(v.x()), round12(v.y()), round12(v.z())});
}

Json imat_json(const IMat& M) {
    Json rows = Json::array();
    for (int i = 0; i < M.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
        rows.push_back(row);
    }
    return rows;
}

Json ivec_json(const IVec& v) {
    Json out = Json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Json betti_json(const HomologySummary& H) {
    Json j;
    j["betti"] = {H.betti[0], H.betti[1], H.betti[2]};
    Json tors = Json::array();
    for (int k = 0; k < 3; ++k) tors.push_back(H.torsion[k]);
    j["torsion"] = tors;
    return j;
}

Eigen::Vector3d parse_vec3(const Json& j) {
    if (!j.is_array() || j.size() != 3) raise(ErrorCode::ScenarioError, "expected a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

const std::vector<std::string> kKnownTasks = {
    "crit",         "complex", "homology",  "pairing",           "glue",
    "continue",     "functoriality", "psi", "roundtrip",         "simplicial-compare",
    "cobordance"};

}  // namespace

Scenario Scenario::from_json(const Json& j) {
    Scenario sc;
    if (!j.contains("schema") || j["schema"].get<int>() != 1)
        raise(ErrorCode::ScenarioError, "scenario must declare \"schema\": 1");
    sc.name = j.value("name", std::string("scenario"));

    if (!j.contains("surface")) raise(ErrorCode::ScenarioError, "missing \"surface\"");
    const Json& surf = j["surface"];
    if (surf.is_string()) {
        sc.surface_name = surf.get<std::string>();
        if (!is_catalog_surface(sc.surface_name))
            raise(ErrorCode::ScenarioError, "unknown catalog surface '" + sc.surface_name + "'");
    } else if (surf.is_object()) {
        sc.phi_text = surf.at("phi").get<std::string>();
        const Json& bb = surf.at("bbox");
        if (!bb.is_array() || bb.size() != 3)
            raise(ErrorCode::ScenarioError, "bbox must be 3 intervals");
        Eigen::Vector3d lo, hi;
        for (int a = 0; a < 3; ++a) {
            lo[a] = bb[a][0].get<double>();
            hi[a] = bb[a][1].get<double>();
            if (!(lo[a] < hi[a])) raise(ErrorCode::ScenarioError, "bbox interval is empty");
        }
        sc.bbox = Eigen::AlignedBox3d(lo, hi);
        sc.expected_euler = surf.at("euler").get<int>();
    } else {
        raise(ErrorCode::ScenarioError, "surface must be a name or an object");
    }

    if (!j.contains("f")) raise(ErrorCode::ScenarioError, "missing \"f\"");
    sc.f_text = j["f"].get<std::string>();
    sc.f1_text = j.value("f1", std::string());
    sc.f2_text = j.value("f2", std::string());

    std::string coeff = j.value("coeff", std::string("z"));
    if (coeff == "z")
        sc.coeff = Coeff::Z;
    else if (coeff == "z2")
        sc.coeff = Coeff::Z2;
    else
        raise(ErrorCode::ScenarioError, "coeff must be \"z\" or \"z2\"");
    sc.seed = j.value("seed", 1LL);

    if (j.contains("ramp")) {
        sc.ramp_shape = j["ramp"].value("shape", std::string("cubic"));
        if (sc.ramp_shape != "cubic" && sc.ramp_shape != "quintic")
            raise(ErrorCode::ScenarioError, "ramp shape must be cubic or quintic");
        sc.ramp_R = j["ramp"].value("R", 5.0);
        if (sc.ramp_R <= 0) raise(ErrorCode::ScenarioError, "ramp R must be positive");
    }

    if (!j.contains("tasks") || !j["tasks"].is_array() || j["tasks"].empty())
        raise(ErrorCode::ScenarioError, "missing \"tasks\"");
    for (const auto& t : j["tasks"]) {
        std::string name = t.get<std::string>();
        if (std::find(kKnownTasks.begin(), kKnownTasks.end(), name) == kKnownTasks.end())
            raise(ErrorCode::ScenarioError, "unknown task '" + name + "'");
        sc.tasks.push_back(name);
    }

    if (j.contains("tolerances")) {
        const Json& t = j["tolerances"];
        sc.flow.rk_tol = t.value("rk_tol", sc.flow.rk_tol);
        sc.flow.max_time = t.value("max_time", sc.flow.max_time);
        sc.flow.capture_radius_factor =
            t.value("capture_radius_factor", sc.flow.capture_radius_factor);
        sc.flow.shoot_radius_factor = t.value("shoot_radius_factor", sc.flow.shoot_radius_factor);
        sc.flow.bisection_tol = t.value("bisection_tol", sc.flow.bisection_tol);
        sc.flow.circle_samples = t.value("circle_samples", sc.flow.circle_samples);
        sc.flow.max_step_factor = t.value("max_step_factor", sc.flow.max_step_factor);
        sc.search.grid_density = t.value("grid_density", sc.search.grid_density);
        sc.search.newton_tol = t.value("newton_tol", sc.search.newton_tol);
        sc.search.dedupe_radius = t.value("dedupe_radius", sc.search.dedupe_radius);
        sc.search.crit_tol = t.value("crit_tol", sc.search.crit_tol);
        sc.search.nondeg_rel_tol = t.value("nondeg_rel_tol", sc.search.nondeg_rel_tol);
        sc.geom.on_surface_tol = t.value("on_surface_tol", sc.geom.on_surface_tol);
        sc.geom.reg_tol = t.value("reg_tol", sc.geom.reg_tol);
        sc.geom.newton_max_iter = t.value("newton_max_iter", sc.geom.newton_max_iter);
    }

    if (j.contains("curves")) {
        for (const auto& c : j["curves"]) {
            CurveSpec spec;
            spec.name = c.at("name").get<std::string>();
            spec.kind = c.at("kind").get<std::string>();
            if (spec.kind == "meridian") {
                spec.ring_angle = c.value("ring_angle", 2.0);
            } else if (spec.kind == "longitude") {
                spec.tube_angle = c.value("tube_angle", 2.0);
            } else if (spec.kind == "small-circle") {
                if (c.contains("center") && c["center"].is_array()) {
                    spec.center_coords = parse_vec3(c["center"]);
                    spec.center_is_coords = true;
                } else {
                    spec.center = c.value("center", std::string("max"));
                }
                spec.radius = c.value("radius", -1.0);
            } else if (spec.kind == "points") {
                if (!c.contains("points")) raise(ErrorCode::ScenarioError, "points curve needs points");
                for (const auto& p : c["points"]) spec.points.push_back(parse_vec3(p));
            } else {
                raise(ErrorCode::ScenarioError, "unknown curve kind '" + spec.kind + "'");
            }
            spec.samples = c.value("samples", 256);
            spec.expect_zero = c.value("expect_zero", false);
            sc.curves.push_back(std::move(spec));
        }
    }

    if (j.contains("points0")) {
        for (const auto& p : j["points0"])
            sc.points0.push_back({parse_vec3(p.at("point")), p.value("weight", 1LL)});
    }

    if (j.contains("triangulation")) {
        const Json& t = j["triangulation"];
        if (t.is_string())
            sc.triangulation = t.get<std::string>();
        else
            sc.triangulation_path = t.at("path").get<std::string>();
    }

    if (j.contains("cobordance")) {
        sc.cobordance_a = j["cobordance"].at("curve_a").get<std::string>();
        sc.cobordance_b = j["cobordance"].at("curve_b").get<std::string>();
    }
    sc.debug_flip_first_sign = j.value("debug_flip_first_sign", false);

    // task input validation
    auto has_task = [&](const std::string& t) {
        return std::find(sc.tasks.begin(), sc.tasks.end(), t) != sc.tasks.end();
    };
    if ((has_task("continue") || has_task("roundtrip")) && sc.f1_text.empty())
        raise(ErrorCode::ScenarioError, "continue/roundtrip tasks require \"f1\"");
    if (has_task("functoriality") && (sc.f1_text.empty() || sc.f2_text.empty()))
        raise(ErrorCode::ScenarioError, "functoriality requires \"f1\" and \"f2\"");
    if (has_task("psi") && sc.curves.empty() && sc.points0.empty())
        raise(ErrorCode::ScenarioError, "psi requires curves or points0");
    if (has_task("simplicial-compare") && sc.triangulation.empty() && sc.triangulation_path.empty())
        raise(ErrorCode::ScenarioError, "simplicial-compare requires a triangulation");
    if (has_task("cobordance") && (sc.cobordance_a.empty() || sc.cobordance_b.empty()))
        raise(ErrorCode::ScenarioError, "cobordance requires curve_a and curve_b");
    if (sc.coeff == Coeff::Z2)
        for (const char* t : {"pairing", "glue", "roundtrip", "functoriality", "psi", "cobordance"})
            if (has_task(t))
                raise(ErrorCode::ScenarioError,
                      std::string("task '") + t + "' requires integer coefficients");
    return sc;
}

Scenario Scenario::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::ScenarioError, "cannot open scenario file '" + path + "'");
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        raise(ErrorCode::ScenarioError, std::string("scenario JSON parse error: ") + e.what());
    }
    return from_json(j);
}

Json Scenario::echo() const {
    Json j;
    j["schema"] = 1;
    j["name"] = name;
    if (!surface_name.empty())
        j["surface"] = surface_name;
    else {
        Json s;
        s["phi"] = phi_text;
        s["bbox"] = {Json::array({bbox.min().x(), bbox.max().x()}),
                     Json::array({bbox.min().y(), bbox.max().y()}),
                     Json::array({bbox.min().z(), bbox.max().z()})};
        s["euler"] = expected_euler;
        j["surface"] = s;
    }
    j["f"] = f_text;
    if (!f1_text.empty()) j["f1"] = f1_text;
    if (!f2_text.empty()) j["f2"] = f2_text;
    j["coeff"] = coeff == Coeff::Z ? "z" : "z2";
    j["seed"] = seed;
    j["tasks"] = tasks;
    return j;
}

// ---------------------------------------------------------------------------

namespace {

struct Checks {
    Json flags = Json::object();
    bool all_pass = true;

    void set(const std::string& name, bool pass) {
        flags[name] = pass;
        if (!pass) all_pass = false;
    }
};

ImplicitSurface scenario_surface(const Scenario& sc) {
    if (!sc.surface_name.empty()) {
        ImplicitSurface base = catalog_surface(sc.surface_name);
        return ImplicitSurface(base.phi(), base.box(), base.expected_euler(), sc.geom);
    }
    return ImplicitSurface(Expression::parse(sc.phi_text), sc.bbox, sc.expected_euler, sc.geom);
}

Json crit_table(const MorseData& data) {
    Json arr = Json::array();
    for (const auto& c : data.crit) {
        Json row;
        row["id"] = c.id;
        row["coords"] = vec3_json(c.location.coords);
        row["f_value"] = round12(c.f_value);
        row["index"] = c.index;
        row["eigenvalues"] = {round12(c.eigenvalues[0]), round12(c.eigenvalues[1])};
        arr.push_back(row);
    }
    return arr;
}

Json moduli_json(const std::vector<ModuliSpace>& spaces) {
    Json arr = Json::array();
    for (const auto& m : spaces) {
        Json row;
        row["source"] = m.source_id;
        row["target"] = m.target_id;
        row["count"] = static_cast<long long>(m.trajectories.size());
        row["n"] = m.n;
        Json taus = Json::array();
        Json anchors = Json::array();
        for (const auto& t : m.trajectories) {
            taus.push_back(t.tau);
            anchors.push_back(vec3_json(t.anchor));
        }
        row["tau"] = taus;
        row["anchors"] = anchors;
        arr.push_back(row);
    }
    return arr;
}

PseudoCycleCurve realize_curve(const CurveSpec& spec, const MorseData& data) {
    const ImplicitSurface& S = data.S;
    if (spec.kind == "meridian") return torus_meridian(S, spec.ring_angle, spec.samples);
    if (spec.kind == "longitude") return torus_longitude(S, spec.tube_angle, spec.samples);
    if (spec.kind == "points") return make_curve(S, spec.points, 0.02 * S.diameter());
    // small-circle
    Eigen::Vector3d center;
    if (spec.center_is_coords) {
        center = spec.center_coords;
    } else {
        std::string which = spec.center;
        int degree = 2, pick = 0;
        auto colon = which.find(':');
        std::string base = which.substr(0, colon);
        if (colon != std::string::npos) pick = std::stoi(which.substr(colon + 1));
        if (base == "max")
            degree = 2;
        else if (base == "min")
            degree = 0;
        else if (base == "saddle")
            degree = 1;
        else
            raise(ErrorCode::ScenarioError, "unknown curve center '" + which + "'");
        const auto& ids = data.ids_by_degree[degree];
        if (pick < 0 || pick >= static_cast<int>(ids.size()))
            raise(ErrorCode::ScenarioError, "curve center index out of range");
        center = data.crit[ids[pick]].location.coords;
    }
    double radius = spec.radius > 0 ? spec.radius : 0.1 * S.diameter();
    return small_circle(S, center, radius, spec.samples);
}

Homotopy make_homotopy(const Scenario& sc, const Expression& f0, const Expression& f1) {
    Homotopy h;
    h.f0 = f0;
    h.f1 = f1;
    h.R = sc.ramp_R;
    h.ramp = sc.ramp_shape == "quintic" ? Homotopy::Ramp::Quintic : Homotopy::Ramp::Cubic;
    return h;
}

Json induced_json(const InducedMap& m) {
    Json j;
    j["H0"] = imat_json(m.H[0]);
    j["H1"] = imat_json(m.H[1]);
    j["H2"] = imat_json(m.H[2]);
    j["dets"] = {m.dets[0], m.dets[1], m.dets[2]};
    return j;
}

SimplicialComplex load_triangulation(const Scenario& sc) {
    if (!sc.triangulation.empty()) return builtin_triangulation(sc.triangulation);
    std::ifstream in(sc.triangulation_path);
    if (!in)
        raise(ErrorCode::ScenarioError,
              "cannot open triangulation file '" + sc.triangulation_path + "'");
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        raise(ErrorCode::ScenarioError, std::string("triangulation JSON parse error: ") + e.what());
    }
    std::vector<std::array<int, 2>> edges;
    std::vector<std::array<int, 3>> triangles;
    for (const auto& e : j.at("edges")) edges.push_back({e[0].get<int>(), e[1].get<int>()});
    for (const auto& t : j.at("triangles"))
        triangles.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<int>()});
    return SimplicialComplex::build(j.at("vertices").get<int>(), std::move(edges),
                                    std::move(triangles));
}

}  // namespace

std::string dump_report(const Json& report) { return report.dump(1) + "\n"; }

RunResult run_scenario(const Scenario& sc_in, const RunOptions& opts) {
    Scenario sc = sc_in;
    if (opts.coeff_override) sc.coeff = *opts.coeff_override;
    if (opts.seed_override) sc.seed = *opts.seed_override;
    sc.flow.rk_tol *= opts.tol_scale;
    sc.flow.bisection_tol *= opts.tol_scale;

    Json report;
    report["schema"] = 1;
    report["scenario"] = sc.echo();
    {
        Json tol;
        tol["rk_tol"] = round12(sc.flow.rk_tol);
        tol["max_time"] = round12(sc.flow.max_time);
        tol["capture_radius_factor"] = round12(sc.flow.capture_radius_factor);
        tol["shoot_radius_factor"] = round12(sc.flow.shoot_radius_factor);
        tol["bisection_tol"] = round12(sc.flow.bisection_tol);
        tol["circle_samples"] = sc.flow.circle_samples;
        tol["grid_density"] = sc.search.grid_density;
        tol["crit_tol"] = round12(sc.search.crit_tol);
        tol["on_surface_tol"] = round12(sc.geom.on_surface_tol);
        tol["reg_tol"] = round12(sc.geom.reg_tol);
        report["tolerances"] = tol;
    }
    Json tasks_out = Json::object();
    Checks checks;

    auto has_task = [&](const std::string& t) {
        return std::find(sc.tasks.begin(), sc.tasks.end(), t) != sc.tasks.end();
    };

    try {
        ImplicitSurface S = scenario_surface(sc);
        Expression f = Expression::parse(sc.f_text);

        const bool need_data =
            has_task("complex") || has_task("homology") || has_task("pairing") ||
            has_task("glue") || has_task("continue") || has_task("functoriality") ||
            has_task("psi") || has_task("roundtrip") || has_task("simplicial-compare") ||
            has_task("cobordance");

        std::optional<MorseData> data;
        if (need_data) {
            data.emplace(build_morse_data(S, f, sc.flow, sc.search));
            if (sc.debug_flip_first_sign) {
                // test fixture: corrupt one orientation sign
                for (auto& m : data->max_moduli)
                    if (!m.trajectories.empty()) {
                        m.trajectories[0].tau = -m.trajectories[0].tau;
                        m.n += 2LL * m.trajectories[0].tau;
                        break;
                    }
            }
        }

        if (has_task("crit") || need_data) {
            std::vector<CriticalPoint> crit =
                data ? data->crit : find_critical_points(f, S, sc.search);
            Json t;
            if (data)
                t["table"] = crit_table(*data);
            else {
                MorseData tmp{S, f, sc.flow, crit, {}, {}, {}, {}, {}};
                t["table"] = crit_table(tmp);
            }
            EulerReport euler = euler_check(crit, S);
            t["euler"] = {{"signed_count", euler.signed_count},
                          {"expected", euler.expected},
                          {"pass", euler.pass}};
            tasks_out["crit"] = t;
            checks.set("euler", euler.pass);
        }

        std::optional<MorseComplex> C0;
        if (data) C0 = assemble(*data, sc.coeff);

        if (has_task("complex") && data) {
            Json t;
            t["generators"] = {C0->gens[0], C0->gens[1], C0->gens[2]};
            t["d1"] = imat_json(C0->d1);
            t["d2"] = imat_json(C0->d2);
            t["saddle_moduli"] = moduli_json(data->saddle_moduli);
            t["max_moduli"] = moduli_json(data->max_moduli);
            DSquaredReport dsq = verify_d_squared(*C0);
            t["d1_d2"] = imat_json(dsq.product);
            tasks_out["complex"] = t;
            checks.set("d_squared", dsq.pass);
        }

        std::optional<HomologySummary> H0;
        if (has_task("homology") && data) {
            H0 = homology(*C0);
            Json t = betti_json(*H0);
            SNFResult s1 = smith_normal_form(C0->d1);
            SNFResult s2 = smith_normal_form(C0->d2);
            t["snf_d1"] = s1.diag;
            t["snf_d2"] = s2.diag;
            // Euler-Poincaré consistency
            long long lhs = H0->betti[0] - H0->betti[1] + H0->betti[2];
            long long rhs = static_cast<long long>(C0->gens[0].size()) -
                            static_cast<long long>(C0->gens[1].size()) +
                            static_cast<long long>(C0->gens[2].size());
            t["euler_poincare"] = {{"betti_alternating", lhs}, {"generator_alternating", rhs}};
            tasks_out["homology"] = t;
            checks.set("euler_poincare", lhs == rhs);
        }

        if (has_task("pairing") && data) {
            if (sc.coeff != Coeff::Z) raise(ErrorCode::ScenarioError, "pairing requires coeff z");
            // kernel basis of ∂1
            SNFResult s1 = smith_normal_form(C0->d1);
            Json t = Json::array();
            bool all_ok = true;
            const int n1 = static_cast<int>(C0->gens[1].size());
            for (int i = 0; i < n1; ++i) {
                long long d = (i < static_cast<int>(s1.diag.size())) ? s1.diag[i] : 0;
                if (d != 0) continue;
                MorseCycle a;
                a.degree = 1;
                a.coeffs = s1.V.col(i);
                PairingWitness w = find_pairing(a, *data);
                Json row;
                row["cycle"] = ivec_json(a.coeffs);
                row["elements"] = static_cast<long long>(w.elements.size());
                row["pairs"] = static_cast<long long>(w.matching.size());
                bool ok = w.elements.size() == 2 * w.matching.size();
                row["valid"] = ok;
                all_ok = all_ok && ok;
                t.push_back(row);
            }
            tasks_out["pairing"] = t;
            checks.set("pairing", all_ok);
        }

        if (has_task("glue") && data) {
            if (sc.coeff != Coeff::Z) raise(ErrorCode::ScenarioError, "glue requires coeff z");
            HomologyBasis basis(*C0, 1);
            Json t = Json::array();
            FlowContext ctx = data->context();
            bool all_ok = true;
            for (const auto& z : basis.free_cycles()) {
                MorseCycle a;
                a.degree = 1;
                a.coeffs = z;
                PairingWitness w = find_pairing(a, *data);
                GluedCurves glued = glue_cycle_curve(a, w, *data);
                Json row;
                row["cycle"] = ivec_json(z);
                row["curves"] = static_cast<long long>(glued.curves.size());
                row["max_gap"] = round12(glued.max_gap);
                row["gap_tol"] = round12(10 * ctx.capture_radius);
                bool ok = glued.max_gap <= 10 * ctx.capture_radius;
                row["closed"] = ok;
                all_ok = all_ok && ok;
                t.push_back(row);
            }
            tasks_out["glue"] = t;
            checks.set("glue_closed", all_ok);
        }

        std::optional<MorseData> data1;
        std::optional<MorseComplex> C1;
        Expression f1, f2;
        if (!sc.f1_text.empty()) f1 = Expression::parse(sc.f1_text);
        if (!sc.f2_text.empty()) f2 = Expression::parse(sc.f2_text);
        if (has_task("continue") || has_task("functoriality") || has_task("roundtrip")) {
            data1.emplace(build_morse_data(S, f1, sc.flow, sc.search));
            C1 = assemble(*data1, sc.coeff);
        }

        if (has_task("continue") && data && data1) {
            Homotopy h = make_homotopy(sc, f, f1);
            ContinuationMatrix phi = continuation_matrix(h, *data, *data1, sc.coeff);
            Json t;
            t["n0"] = imat_json(phi.n[0]);
            t["n1"] = imat_json(phi.n[1]);
            t["n2"] = imat_json(phi.n[2]);
            ChainMapReport cm = verify_chain_map(phi, *C0, *C1);
            t["chain_map_pass"] = cm.pass;
            checks.set("chain_map", cm.pass);
            if (sc.f1_text == sc.f_text) {
                bool ident = true;
                for (int k = 0; k < 3; ++k) {
                    IMat I = IMat::Identity(phi.n[k].rows(), phi.n[k].cols());
                    if (phi.n[k].rows() != phi.n[k].cols() || !(phi.n[k] - I).isZero(0))
                        ident = false;
                }
                t["identity"] = ident;
                checks.set("phi_identity", ident);
            }
            if (sc.coeff == Coeff::Z) {
                InducedMap ind = induced_homology_map(phi, *C0, *C1);
                t["induced"] = induced_json(ind);
                bool dets_ok = true;
                for (long long d : ind.dets)
                    if (d != 1 && d != -1) dets_ok = false;
                checks.set("induced_iso", dets_ok);
            }
            tasks_out["continue"] = t;
        }

        if (has_task("functoriality") && data && data1) {
            MorseData data2 = build_morse_data(S, f2, sc.flow, sc.search);
            MorseComplex C2 = assemble(data2, sc.coeff);
            Homotopy h10 = make_homotopy(sc, f, f1);
            Homotopy h21 = make_homotopy(sc, f1, f2);
            Homotopy h20 = make_homotopy(sc, f, f2);
            ContinuationMatrix p10 = continuation_matrix(h10, *data, *data1, Coeff::Z);
            ContinuationMatrix p21 = continuation_matrix(h21, *data1, data2, Coeff::Z);
            ContinuationMatrix p20 = continuation_matrix(h20, *data, data2, Coeff::Z);
            InducedMap i10 = induced_homology_map(p10, *C0, *C1);
            InducedMap i21 = induced_homology_map(p21, *C1, C2);
            InducedMap i20 = induced_homology_map(p20, *C0, C2);
            FunctorialityReport rep = verify_functoriality(i10, i21, i20);
            Json t;
            t["H10"] = induced_json(i10);
            t["H21"] = induced_json(i21);
            t["H20"] = induced_json(i20);
            t["pass"] = rep.pass;
            tasks_out["functoriality"] = t;
            checks.set("functoriality", rep.pass);
        }

        std::map<std::string, PseudoCycleCurve> curve_map;
        if (data)
            for (const auto& spec : sc.curves) curve_map[spec.name] = realize_curve(spec, *data);

        if (has_task("psi") && data) {
            Json t = Json::object();
            bool boundary_ok = true, zero_ok = true;
            Json curves_out = Json::array();
            for (const auto& spec : sc.curves) {
                PsiResult psi = psi_degree1(curve_map.at(spec.name), *data);
                Json row;
                row["curve"] = spec.name;
                row["coefficients"] = ivec_json(psi.cycle.coeffs);
                row["crossings"] = static_cast<long long>(psi.crossings.size());
                IVec boundary = mat_vec(C0->d1, psi.cycle.coeffs);
                bool bzero = boundary.isZero(0);
                row["boundary_zero"] = bzero;
                boundary_ok = boundary_ok && bzero;
                if (spec.expect_zero) {
                    bool z = psi.cycle.coeffs.isZero(0);
                    row["expected_zero"] = z;
                    zero_ok = zero_ok && z;
                }
                curves_out.push_back(row);
            }
            t["curves"] = curves_out;
            if (!sc.points0.empty()) {
                MorseCycle c0 = psi_degree0(sc.points0, *data);
                Json pts = Json::array();
                for (const auto& [p, w] : sc.points0) {
                    FlowContext ctx = data->context();
                    Json row;
                    row["point"] = vec3_json(p);
                    row["weight"] = w;
                    row["basin_min"] = basin_of(ctx, data->f, data->S.project(p).coords);
                    pts.push_back(row);
                }
                t["points0"] = pts;
                t["psi0_coefficients"] = ivec_json(c0.coeffs);
            }
            tasks_out["psi"] = t;
            checks.set("psi_boundary_zero", boundary_ok);
            if (std::any_of(sc.curves.begin(), sc.curves.end(),
                            [](const CurveSpec& s) { return s.expect_zero; }))
                checks.set("psi_contractible_zero", zero_ok);
        }

        if (has_task("roundtrip") && data && data1) {
            Homotopy h = make_homotopy(sc, f, f1);
            HomologyBasis basis(*C0, 1);
            Json t = Json::array();
            bool all_ok = true;
            for (const auto& z : basis.free_cycles()) {
                MorseCycle a;
                a.degree = 1;
                a.coeffs = z;
                RoundtripReport rt = roundtrip_phi_psi(a, *data, *data1, h);
                Json row;
                row["cycle"] = ivec_json(z);
                row["curves"] = rt.curves;
                row["psi_of_glued"] = ivec_json(rt.psi_of_glued.coeffs);
                row["class_psi_glue"] = ivec_json(rt.lhs_class);
                row["class_phi"] = ivec_json(rt.rhs_class);
                row["pass"] = rt.pass;
                all_ok = all_ok && rt.pass;
                t.push_back(row);
            }
            tasks_out["roundtrip"] = t;
            checks.set("roundtrip", all_ok);
        }

        if (has_task("cobordance") && data) {
            CobordanceReport rep = cobordance_invariance(curve_map.at(sc.cobordance_a),
                                                         curve_map.at(sc.cobordance_b), *data);
            Json t;
            t["curve_a"] = sc.cobordance_a;
            t["curve_b"] = sc.cobordance_b;
            t["psi_a"] = ivec_json(rep.psi_a.coeffs);
            t["psi_b"] = ivec_json(rep.psi_b.coeffs);
            t["difference"] = ivec_json(rep.difference);
            t["difference_in_boundary_image"] = rep.pass;
            tasks_out["cobordance"] = t;
            checks.set("cobordance", rep.pass);
        }

        if (has_task("simplicial-compare") && H0) {
            SimplicialComplex K = load_triangulation(sc);
            HomologySummary HS = simplicial_homology(K, sc.coeff);
            Json t = betti_json(HS);
            t["vertices"] = K.vertices;
            t["edges"] = static_cast<long long>(K.edges.size());
            t["triangles"] = static_cast<long long>(K.triangles.size());
            bool match = HS.betti == H0->betti && HS.torsion == H0->torsion;
            t["betti_match"] = match;
            tasks_out["simplicial-compare"] = t;
            checks.set("betti_match", match);
        }
    } catch (const Error& e) {
        report["tasks"] = tasks_out;
        report["checks"] = checks.flags;
        report["status"] = "error";
        report["error"] = {{"type", code_name(e.code())},
                           {"exit_class", exit_class(e.code())},
                           {"message", e.what()}};
        return {report, exit_class(e.code())};
    }

    report["tasks"] = tasks_out;
    report["checks"] = checks.flags;
    report["status"] = checks.all_pass ? "ok" : "check-failed";
    return {report, checks.all_pass ? 0 : 4};
}

RunResult dump_trajectories(const Scenario& sc, const RunOptions& opts) {
    Scenario s = sc;
    if (opts.coeff_override) s.coeff = *opts.coeff_override;
    s.flow.rk_tol *= opts.tol_scale;
    s.flow.bisection_tol *= opts.tol_scale;

    Json report;
    report["schema"] = 1;
    report["scenario"] = s.echo();
    try {
        ImplicitSurface S = scenario_surface(s);
        Expression f = Expression::parse(s.f_text);
        MorseData data = build_morse_data(S, f, s.flow, s.search);
        auto polyline = [](const std::vector<PathSample>& samples) {
            Json arr = Json::array();
            for (const auto& p : samples) arr.push_back(vec3_json(p.p));
            return arr;
        };
        Json trajs = Json::array();
        for (const auto& m : data.saddle_moduli)
            for (const auto& t : m.trajectories) {
                Json row;
                row["source"] = t.source_id;
                row["target"] = t.target_id;
                row["tau"] = t.tau;
                row["points"] = polyline(t.samples);
                trajs.push_back(row);
            }
        for (const auto& m : data.max_moduli)
            for (const auto& t : m.trajectories) {
                Json row;
                row["source"] = t.source_id;
                row["target"] = t.target_id;
                row["tau"] = t.tau;
                row["points"] = polyline(t.samples);
                trajs.push_back(row);
            }
        report["trajectories"] = trajs;
        Json stables = Json::array();
        for (const auto& scv : data.stable_curves) {
            Json row;
            row["saddle"] = scv.saddle_id;
            Json arr = Json::array();
            for (const auto& p : scv.pts) arr.push_back(vec3_json(p));
            row["points"] = arr;
            stables.push_back(row);
        }
        report["stable_curves"] = stables;
        report["status"] = "ok";
    } catch (const Error& e) {
        report["status"] = "error";
        report["error"] = {{"type", code_name(e.code())},
                           {"exit_class", exit_class(e.code())},
                           {"message", e.what()}};
        return {report, exit_class(e.code())};
    }
    return {report, 0};
}

}  // namespace morseflow
