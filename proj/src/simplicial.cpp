#include "morseflow/simplicial.hpp"

#include <algorithm>
#include <map>

#include "morseflow/errors.hpp"

namespace morseflow {

SimplicialComplex SimplicialComplex::build(int vertices, std::vector<std::array<int, 2>> edges,
                                           std::vector<std::array<int, 3>> triangles) {
    SimplicialComplex K;
    K.vertices = vertices;
    K.edges = std::move(edges);
    K.triangles = std::move(triangles);

    auto check_vertex = [&](int v) {
        if (v < 0 || v >= vertices)
            raise(ErrorCode::NotAComplex, "simplex references invalid vertex " + std::to_string(v));
    };
    std::map<std::pair<int, int>, int> edge_index;
    for (std::size_t j = 0; j < K.edges.size(); ++j) {
        check_vertex(K.edges[j][0]);
        check_vertex(K.edges[j][1]);
        edge_index[{K.edges[j][0], K.edges[j][1]}] = static_cast<int>(j);
    }

    K.D1 = IMat::Zero(vertices, static_cast<int>(K.edges.size()));
    for (std::size_t j = 0; j < K.edges.size(); ++j) {
        K.D1(K.edges[j][0], static_cast<int>(j)) -= 1;
        K.D1(K.edges[j][1], static_cast<int>(j)) += 1;
    }

    K.D2 = IMat::Zero(static_cast<int>(K.edges.size()), static_cast<int>(K.triangles.size()));
    for (std::size_t j = 0; j < K.triangles.size(); ++j) {
        const auto& t = K.triangles[j];
        for (int v : t) check_vertex(v);
        const std::array<std::pair<int, int>, 3> sides{
            std::pair{t[0], t[1]}, std::pair{t[1], t[2]}, std::pair{t[2], t[0]}};
        for (const auto& [u, v] : sides) {
            auto it = edge_index.find({u, v});
            if (it != edge_index.end()) {
                K.D2(it->second, static_cast<int>(j)) += 1;
                continue;
            }
            it = edge_index.find({v, u});
            if (it == edge_index.end())
                raise(ErrorCode::NotAComplex, "triangle side (" + std::to_string(u) + "," +
                                                  std::to_string(v) + ") is not an edge");
            K.D2(it->second, static_cast<int>(j)) -= 1;
        }
    }

    if (!mat_mul(K.D1, K.D2).isZero(0))
        raise(ErrorCode::NotAComplex, "D1 * D2 != 0");
    return K;
}

HomologySummary simplicial_homology(const SimplicialComplex& K, Coeff mode) {
    return homology_from_boundaries(K.vertices, static_cast<long long>(K.edges.size()),
                                    static_cast<long long>(K.triangles.size()), K.D1, K.D2, mode);
}

SimplicialComplex builtin_triangulation(const std::string& name) {
    if (name == "tetrahedron") {
        std::vector<std::array<int, 2>> edges;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) edges.push_back({i, j});
        // boundary of the oriented 3-simplex [0,1,2,3]
        std::vector<std::array<int, 3>> tris{{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
        return SimplicialComplex::build(4, std::move(edges), std::move(tris));
    }
    if (name == "csaszar") {
        // 7-vertex torus, faces {i,i+1,i+3} and {i,i+2,i+3} mod 7, with a
        // coherent orientation (every K7 pair is an edge).
        std::vector<std::array<int, 2>> edges;
        for (int i = 0; i < 7; ++i)
            for (int j = i + 1; j < 7; ++j) edges.push_back({i, j});
        std::vector<std::array<int, 3>> tris{
            {0, 1, 3}, {0, 3, 2}, {2, 4, 1}, {3, 1, 4}, {2, 3, 5}, {5, 4, 2}, {4, 6, 3},
            {3, 6, 5}, {0, 4, 5}, {0, 6, 4}, {5, 6, 1}, {1, 0, 5}, {0, 2, 6}, {6, 2, 1}};
        return SimplicialComplex::build(7, std::move(edges), std::move(tris));
    }
    if (name == "point") {
        return SimplicialComplex::build(1, {}, {});
    }
    raise(ErrorCode::ScenarioError, "unknown triangulation '" + name + "'");
}

}  // namespace morseflow
