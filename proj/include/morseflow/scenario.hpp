#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "morseflow/complex.hpp"
#include "morseflow/flow.hpp"

namespace morseflow {

using Json = nlohmann::ordered_json;

// Declarative scenario (schema 1). Parsed and validated from JSON.
struct CurveSpec {
    std::string name;
    std::string kind;  // meridian | longitude | small-circle | points
    double ring_angle = 2.0;
    double tube_angle = 2.0;
    std::string center = "max";  // small-circle anchor: max|min|saddle:<k>|coords
    Eigen::Vector3d center_coords = Eigen::Vector3d::Zero();
    bool center_is_coords = false;
    double radius = -1.0;  // <0: 0.1 * diameter
    int samples = 256;
    bool expect_zero = false;  // contractible input: Ψ must be the zero vector
    std::vector<Eigen::Vector3d> points;
};

struct Scenario {
    std::string name = "scenario";
    std::string surface_name;  // catalog name, empty when custom
    std::string phi_text;      // custom surface
    Eigen::AlignedBox3d bbox;
    int expected_euler = 0;
    std::string f_text;
    std::string f1_text, f2_text;
    Coeff coeff = Coeff::Z;
    long long seed = 1;
    std::string ramp_shape = "cubic";
    double ramp_R = 5.0;
    std::vector<std::string> tasks;
    std::vector<CurveSpec> curves;
    std::vector<std::pair<Eigen::Vector3d, long long>> points0;
    std::string triangulation;       // builtin name
    std::string triangulation_path;  // or a JSON file
    std::string cobordance_a, cobordance_b;
    bool debug_flip_first_sign = false;

    FlowConfig flow;
    SearchParams search;
    GeometryTols geom;

    static Scenario from_json(const Json& j);
    static Scenario from_file(const std::string& path);
    Json echo() const;
};

struct RunResult {
    Json report;
    int exit_code = 0;
};

struct RunOptions {
    double tol_scale = 1.0;  // multiplies rk_tol and bisection_tol
    std::optional<Coeff> coeff_override;
    std::optional<long long> seed_override;
};

RunResult run_scenario(const Scenario& sc, const RunOptions& opts = {});

// Serializes a report deterministically (canonical ordering, floats rounded
// to 12 significant digits at insertion).
std::string dump_report(const Json& report);

// Trajectory/stable-curve polylines for plotting.
RunResult dump_trajectories(const Scenario& sc, const RunOptions& opts = {});

// Built-in verification catalog. Returns the worst exit code; prints one
// summary line per entry.
int verify_all(std::ostream& os);

// Named built-in scenarios used by verify-all and the acceptance suite.
std::vector<std::string> builtin_scenario_names();
Scenario builtin_scenario(const std::string& name);

}  // namespace morseflow
