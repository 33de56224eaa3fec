#pragma once

#include <array>
#include <utility>
#include <vector>

#include "morseflow/flow.hpp"
#include "morseflow/snf.hpp"

namespace morseflow {

enum class Coeff { Z, Z2 };

// Graded boundary data of the Morse complex: d1 maps saddles to minima,
// d2 maps maxima to saddles; entry (row y, col x) = n(x, y).
struct MorseComplex {
    std::array<std::vector<int>, 3> gens;  // critical point ids per degree
    IMat d1, d2;
    Coeff mode = Coeff::Z;

    int degree_of_gen(int degree, int pos) const { return gens[degree][pos]; }
    int pos_of(int degree, int cp_id) const;
    const IMat& boundary(int k) const;  // k = 1 or 2
};

// Populates the boundary matrices from enumerated moduli spaces.
// Throws MissingModuli when an index-adjacent pair has no census.
MorseComplex assemble(const std::vector<CriticalPoint>& crit,
                      const std::vector<ModuliSpace>& saddle_moduli,
                      const std::vector<ModuliSpace>& max_moduli, Coeff mode);

inline MorseComplex assemble(const MorseData& data, Coeff mode) {
    return assemble(data.crit, data.saddle_moduli, data.max_moduli, mode);
}

struct DSquaredReport {
    IMat product;
    bool pass = false;
};

DSquaredReport verify_d_squared(const MorseComplex& C);

struct HomologySummary {
    std::array<long long, 3> betti{0, 0, 0};
    std::array<std::vector<long long>, 3> torsion;
};

// SNF-based Betti numbers and torsion for a two-step complex with
// generator counts (n0, n1, n2). Over Z2 ranks are taken mod 2 and torsion
// is empty.
HomologySummary homology_from_boundaries(long long n0, long long n1, long long n2, const IMat& D1,
                                         const IMat& D2, Coeff mode);

HomologySummary homology(const MorseComplex& C);

struct MorseCycle {
    int degree = 0;
    IVec coeffs;  // indexed by position in gens[degree]
};

bool is_cycle(const MorseComplex& C, const MorseCycle& a);

// Basis bookkeeping for H_k = ker ∂_k / im ∂_{k+1} over Z, built from SNF
// kernel coordinates. class_coords() maps a cycle to its free homology
// coordinates (torsion coordinates are reduced mod their order first, and
// must match for class equality).
class HomologyBasis {
public:
    HomologyBasis(const MorseComplex& C, int degree);

    long long betti() const { return betti_; }
    // Cycles representing a basis of the free part of H_k.
    const std::vector<IVec>& free_cycles() const { return free_cycles_; }
    // Free coordinates of [z]; throws NotACycle when z is not a cycle.
    IVec class_coords(const IVec& z) const;
    // Does z lie in im ∂_{k+1}?
    bool in_boundary_image(const IVec& z) const;

private:
    int degree_;
    long long betti_ = 0;
    int n_ = 0;                  // chain rank in this degree
    IMat kernel_coords_;         // rows of V^{-1} picking kernel coordinates
    std::vector<int> kernel_idx_;
    IMat B_;                     // boundary image in kernel coordinates
    SNFResult bsnf_;
    std::vector<int> free_idx_;  // indices of zero diagonal entries of SNF(B)
    std::vector<std::pair<int, long long>> torsion_idx_;  // (index, order > 1)
    std::vector<IVec> free_cycles_;
};

// Δa pairing witness (Lemma ∼_{Δa}): the multiset of trajectory copies with
// signs σ = sgn(a_x)·τ, matched in opposite-sign pairs per endpoint.
struct PairingElement {
    int source_id = -1;   // x with a_x ≠ 0
    int copy = 0;         // 0..|a_x|-1
    int traj_index = 0;   // index into the (x, y) moduli space
    int endpoint_id = -1; // y
    int sigma = 0;
};

struct PairingWitness {
    std::vector<PairingElement> elements;
    std::vector<std::pair<int, int>> matching;  // index pairs into elements
};

// Throws NotACycle if ∂a ≠ 0 (no matching can exist).
PairingWitness find_pairing(const MorseCycle& a, const MorseData& data);

// Realizes a degree-1 Morse cycle as closed oriented polylines on Σ by
// gluing the unstable rays of each saddle copy at the paired minima.
// Throws GluingGap when paired ray endpoints differ by more than
// 10·capture_radius.
struct GluedCurves {
    std::vector<std::vector<Eigen::Vector3d>> curves;
    double max_gap = 0;  // largest junction/closure gap encountered
};

GluedCurves glue_cycle_curve(const MorseCycle& a, const PairingWitness& pairing,
                             const MorseData& data);

}  // namespace morseflow
