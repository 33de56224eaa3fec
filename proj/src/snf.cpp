#include "morseflow/snf.hpp"

#include <cstdlib>

#include "morseflow/util.hpp"

namespace morseflow {

namespace {

// Elementary operations applied to B while keeping U·A·V = B in sync.
struct Workspace {
    IMat B, U, Uinv, V, Vinv;

    void row_sub(int i, int k, long long q) {  // row_i -= q * row_k
        if (q == 0) return;
        for (int j = 0; j < B.cols(); ++j) B(i, j) = checked_sub(B(i, j), checked_mul(q, B(k, j)));
        for (int j = 0; j < U.cols(); ++j) U(i, j) = checked_sub(U(i, j), checked_mul(q, U(k, j)));
        for (int r = 0; r < Uinv.rows(); ++r)
            Uinv(r, k) = checked_add(Uinv(r, k), checked_mul(q, Uinv(r, i)));
    }

    void col_sub(int j, int k, long long q) {  // col_j -= q * col_k
        if (q == 0) return;
        for (int i = 0; i < B.rows(); ++i) B(i, j) = checked_sub(B(i, j), checked_mul(q, B(i, k)));
        for (int i = 0; i < V.rows(); ++i) V(i, j) = checked_sub(V(i, j), checked_mul(q, V(i, k)));
        for (int c = 0; c < Vinv.cols(); ++c)
            Vinv(k, c) = checked_add(Vinv(k, c), checked_mul(q, Vinv(j, c)));
    }

    void row_swap(int i, int k) {
        if (i == k) return;
        B.row(i).swap(B.row(k));
        U.row(i).swap(U.row(k));
        Uinv.col(i).swap(Uinv.col(k));
    }

    void col_swap(int j, int k) {
        if (j == k) return;
        B.col(j).swap(B.col(k));
        V.col(j).swap(V.col(k));
        Vinv.row(j).swap(Vinv.row(k));
    }

    void row_neg(int i) {
        for (int j = 0; j < B.cols(); ++j) B(i, j) = checked_neg(B(i, j));
        for (int j = 0; j < U.cols(); ++j) U(i, j) = checked_neg(U(i, j));
        for (int r = 0; r < Uinv.rows(); ++r) Uinv(r, i) = checked_neg(Uinv(r, i));
    }
};

}  // namespace

SNFResult smith_normal_form(const IMat& A) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    Workspace w;
    w.B = A;
    w.U = IMat::Identity(m, m);
    w.Uinv = IMat::Identity(m, m);
    w.V = IMat::Identity(n, n);
    w.Vinv = IMat::Identity(n, n);

    const int mn = std::min(m, n);
    for (int t = 0; t < mn; ++t) {
        for (;;) {
            // Smallest-magnitude nonzero pivot in the trailing submatrix.
            int pi = -1, pj = -1;
            long long best = 0;
            for (int i = t; i < m; ++i)
                for (int j = t; j < n; ++j) {
                    long long a = std::llabs(w.B(i, j));
                    if (a != 0 && (pi < 0 || a < best)) {
                        best = a;
                        pi = i;
                        pj = j;
                    }
                }
            if (pi < 0) goto done;  // trailing submatrix is all zero
            w.row_swap(t, pi);
            w.col_swap(t, pj);

            bool reduced = true;
            for (int i = t + 1; i < m; ++i) {
                long long q = w.B(i, t) / w.B(t, t);
                w.row_sub(i, t, q);
                if (w.B(i, t) != 0) reduced = false;  // remainder became the new smaller entry
            }
            for (int j = t + 1; j < n; ++j) {
                long long q = w.B(t, j) / w.B(t, t);
                w.col_sub(j, t, q);
                if (w.B(t, j) != 0) reduced = false;
            }
            if (!reduced) continue;

            // Divisibility: fold any non-multiple into row t and restart.
            bool divides = true;
            for (int i = t + 1; i < m && divides; ++i)
                for (int j = t + 1; j < n; ++j)
                    if (w.B(i, j) % w.B(t, t) != 0) {
                        w.row_sub(t, i, -1);  // row_t += row_i
                        divides = false;
                        break;
                    }
            if (divides) break;
        }
        if (w.B(t, t) < 0) w.row_neg(t);
    }
done:
    SNFResult res;
    res.diag.assign(mn, 0);
    for (int t = 0; t < mn; ++t) {
        res.diag[t] = w.B(t, t);
        if (res.diag[t] != 0) ++res.rank;
    }
    res.U = std::move(w.U);
    res.Uinv = std::move(w.Uinv);
    res.V = std::move(w.V);
    res.Vinv = std::move(w.Vinv);
    return res;
}

long long det_bareiss(IMat A) {
    const int n = static_cast<int>(A.rows());
    if (n != A.cols()) raise(ErrorCode::Overflow, "det of non-square matrix");
    if (n == 0) return 1;
    long long prev = 1;
    long long sign = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (A(k, k) == 0) {
            int p = -1;
            for (int i = k + 1; i < n; ++i)
                if (A(i, k) != 0) {
                    p = i;
                    break;
                }
            if (p < 0) return 0;
            A.row(k).swap(A.row(p));
            sign = -sign;
        }
        for (int i = k + 1; i < n; ++i) {
            for (int j = k + 1; j < n; ++j) {
                long long num =
                    checked_sub(checked_mul(A(i, j), A(k, k)), checked_mul(A(i, k), A(k, j)));
                A(i, j) = num / prev;  // divides exactly (Bareiss)
            }
            A(i, k) = 0;
        }
        prev = A(k, k);
    }
    return checked_mul(sign, A(n - 1, n - 1));
}

int rank_bareiss(IMat A) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    long long prev = 1;
    int rank = 0;
    int row = 0;
    for (int col = 0; col < n && row < m; ++col) {
        int p = -1;
        for (int i = row; i < m; ++i)
            if (A(i, col) != 0) {
                p = i;
                break;
            }
        if (p < 0) continue;
        A.row(row).swap(A.row(p));
        for (int i = row + 1; i < m; ++i) {
            for (int j = col + 1; j < n; ++j) {
                long long num =
                    checked_sub(checked_mul(A(i, j), A(row, col)), checked_mul(A(i, col), A(row, j)));
                A(i, j) = num / prev;
            }
            A(i, col) = 0;
        }
        prev = A(row, col);
        ++rank;
        ++row;
    }
    return rank;
}

int rank_gf2(const IMat& A) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    std::vector<std::vector<unsigned char>> B(m, std::vector<unsigned char>(n, 0));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) B[i][j] = static_cast<unsigned char>(((A(i, j) % 2) + 2) % 2);
    int rank = 0, row = 0;
    for (int col = 0; col < n && row < m; ++col) {
        int p = -1;
        for (int i = row; i < m; ++i)
            if (B[i][col]) {
                p = i;
                break;
            }
        if (p < 0) continue;
        std::swap(B[row], B[p]);
        for (int i = 0; i < m; ++i)
            if (i != row && B[i][col])
                for (int j = col; j < n; ++j) B[i][j] ^= B[row][j];
        ++rank;
        ++row;
    }
    return rank;
}

IMat mat_mul(const IMat& A, const IMat& B) {
    IMat C = IMat::Zero(A.rows(), B.cols());
    for (int i = 0; i < A.rows(); ++i)
        for (int k = 0; k < A.cols(); ++k) {
            if (A(i, k) == 0) continue;
            for (int j = 0; j < B.cols(); ++j)
                C(i, j) = checked_add(C(i, j), checked_mul(A(i, k), B(k, j)));
        }
    return C;
}

IVec mat_vec(const IMat& A, const IVec& x) {
    IVec y = IVec::Zero(A.rows());
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j)
            if (A(i, j) != 0) y(i) = checked_add(y(i), checked_mul(A(i, j), x(j)));
    return y;
}

IntSolve solve_integer(const SNFResult& snf, int rows, int cols, const IVec& b) {
    IntSolve out;
    IVec w = mat_vec(snf.U, b);
    IVec y = IVec::Zero(cols);
    const int mn = static_cast<int>(snf.diag.size());
    for (int i = 0; i < rows; ++i) {
        long long d = (i < mn) ? snf.diag[i] : 0;
        if (d != 0) {
            if (w(i) % d != 0) return out;
            y(i) = w(i) / d;
        } else if (w(i) != 0) {
            return out;
        }
    }
    out.solvable = true;
    out.x = mat_vec(snf.V, y);
    return out;
}

}  // namespace morseflow
