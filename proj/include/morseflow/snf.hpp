#pragma once

#include <Eigen/Dense>
#include <vector>

namespace morseflow {

using IMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using IVec = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

// U·A·V = diag(d1,...,dr,0,...) with U, V unimodular and d1 | d2 | ... | dr.
// Uinv/Vinv are maintained alongside so no integer inversion is ever needed.
struct SNFResult {
    std::vector<long long> diag;  // length min(rows, cols), nonnegative
    int rank = 0;
    IMat U, Uinv;
    IMat V, Vinv;
};

// Elementary row/column reduction with smallest-pivot selection; exact,
// overflow-checked (throws Overflow rather than wrapping).
SNFResult smith_normal_form(const IMat& A);

// Exact determinant / rank via fraction-free (Bareiss) elimination.
// Independent of the SNF code path.
long long det_bareiss(IMat A);
int rank_bareiss(IMat A);

int rank_gf2(const IMat& A);

// Overflow-checked products.
IMat mat_mul(const IMat& A, const IMat& B);
IVec mat_vec(const IMat& A, const IVec& x);

// Solves A x = b over the integers using a precomputed SNF of A.
struct IntSolve {
    bool solvable = false;
    IVec x;
};
IntSolve solve_integer(const SNFResult& snf, int rows, int cols, const IVec& b);

}  // namespace morseflow
