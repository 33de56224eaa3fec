#pragma once

#include <string>

#include "morseflow/geometry.hpp"

namespace morseflow {

// Built-in surfaces: "sphere" (unit), "vertical-torus" (ring radius 2, tube
// radius 1, tube plane xz), "dumbbell" (revolution of s(x) = (1-x^2)(x^2+0.5)
// around the x axis). Throws ScenarioError for unknown names.
ImplicitSurface catalog_surface(const std::string& name);

bool is_catalog_surface(const std::string& name);

}  // namespace morseflow
