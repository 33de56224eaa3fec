#pragma once

#include "morseflow/complex.hpp"
#include "morseflow/flow.hpp"

namespace morseflow {

// Asymptotically constant homotopy f_s = (1-β(s)) f0 + β(s) f1 with
// β ≡ 0 for s ≤ -R and β ≡ 1 for s ≥ R.
struct Homotopy {
    enum class Ramp { Cubic, Quintic };

    Expression f0, f1;
    double R = 5.0;
    Ramp ramp = Ramp::Cubic;

    double beta(double s) const;
    Jet1 jet(const Eigen::Vector3d& q, double s) const;
    ScalarJetFn field() const;
};

// Per-degree integer matrices n(x0, x1); rows indexed by Crit_k f1, columns
// by Crit_k f0, so the matrix acts on f0 coefficient vectors.
struct ContinuationMatrix {
    std::array<IMat, 3> n;
    Coeff mode = Coeff::Z;
};

// Counts continuation trajectories degree by degree:
//   0: each minimum is carried through the ramp and descends under f1;
//   1: the unstable rays of each f0 saddle sweep an endpoint locus whose
//      transversal crossings with the f1 stable curves are bisected in the
//      launch offset;
//   2: local degree of the end-time flow map at each f1 maximum, evaluated
//      through its preimage (reverse homotopy flow + reverse f0 basin).
// Throws NonGenericHomotopy when a continuation trajectory terminates at a
// critical point of intermediate index.
ContinuationMatrix continuation_matrix(const Homotopy& h, const MorseData& d0,
                                       const MorseData& d1, Coeff mode);

struct ChainMapReport {
    bool pass = false;
    IMat lhs1, rhs1;  // Φ0·∂1(f0) vs ∂1(f1)·Φ1
    IMat lhs2, rhs2;  // Φ1·∂2(f0) vs ∂2(f1)·Φ2
};

ChainMapReport verify_chain_map(const ContinuationMatrix& phi, const MorseComplex& C0,
                                const MorseComplex& C1);

// Induced map on homology, one integer matrix per degree over the SNF bases.
// Throws NotIso if some degree fails to have determinant ±1.
struct InducedMap {
    std::array<IMat, 3> H;
    std::array<long long, 3> dets{1, 1, 1};
};

InducedMap induced_homology_map(const ContinuationMatrix& phi, const MorseComplex& C0,
                                const MorseComplex& C1, bool require_iso = true);

// H(Φ21)·H(Φ10) = H(Φ20), exact per degree.
struct FunctorialityReport {
    bool pass = false;
    std::array<IMat, 3> lhs, rhs;
};

FunctorialityReport verify_functoriality(const InducedMap& h10, const InducedMap& h21,
                                         const InducedMap& h20);

}  // namespace morseflow
