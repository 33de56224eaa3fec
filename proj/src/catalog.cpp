#include "morseflow/catalog.hpp"

#include "morseflow/errors.hpp"

namespace morseflow {

bool is_catalog_surface(const std::string& name) {
    return name == "sphere" || name == "vertical-torus" || name == "dumbbell";
}

ImplicitSurface catalog_surface(const std::string& name) {
    using Eigen::Vector3d;
    if (name == "sphere") {
        return ImplicitSurface(Expression::parse("x^2 + y^2 + z^2 - 1"),
                               Eigen::AlignedBox3d(Vector3d(-1.5, -1.5, -1.5),
                                                   Vector3d(1.5, 1.5, 1.5)),
                               2);
    }
    if (name == "vertical-torus") {
        return ImplicitSurface(Expression::parse("(sqrt(x^2 + z^2) - 2)^2 + y^2 - 1"),
                               Eigen::AlignedBox3d(Vector3d(-3.3, -1.3, -3.3),
                                                   Vector3d(3.3, 1.3, 3.3)),
                               0);
    }
    if (name == "dumbbell") {
        return ImplicitSurface(Expression::parse("y^2 + z^2 - (1 - x^2)*(x^2 + 0.5)"),
                               Eigen::AlignedBox3d(Vector3d(-1.15, -0.9, -0.9),
                                                   Vector3d(1.15, 0.9, 0.9)),
                               2);
    }
    raise(ErrorCode::ScenarioError, "unknown catalog surface '" + name + "'");
}

}  // namespace morseflow
