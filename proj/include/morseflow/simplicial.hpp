#pragma once

#include <array>
#include <string>
#include <vector>

#include "morseflow/complex.hpp"

namespace morseflow {

// Oriented simplicial surface data with its integer boundary matrices.
// The singular-homology oracle.
struct SimplicialComplex {
    int vertices = 0;
    std::vector<std::array<int, 2>> edges;      // oriented (tail, head)
    std::vector<std::array<int, 3>> triangles;  // oriented vertex triples
    IMat D1, D2;

    // Builds D1/D2 and validates D1·D2 = 0. Throws NotAComplex.
    static SimplicialComplex build(int vertices, std::vector<std::array<int, 2>> edges,
                                   std::vector<std::array<int, 3>> triangles);
};

HomologySummary simplicial_homology(const SimplicialComplex& K, Coeff mode = Coeff::Z);

// Built-in triangulations: "tetrahedron" (boundary of the 3-simplex) and
// "csaszar" (the 7-vertex torus).
SimplicialComplex builtin_triangulation(const std::string& name);

}  // namespace morseflow
