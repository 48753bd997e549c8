#pragma once

#include <cstddef>
#include <vector>

namespace mnav::kernels {

// Dense row-major matrix kernels shared by the autodiff tape and the plain
// network evaluation paths. Every kernel accumulates along a fixed index
// order, so results are reproducible bit for bit and a single-column call
// matches the corresponding column of a batched call exactly.

/// C(r x m) = A(r x k) * B(k x m), saxpy form (unit-stride inner loop).
inline void matmul_nn(const double* __restrict A, const double* __restrict B,
                      double* __restrict C, int r, int k, int m) {
    for (int i = 0; i < r; ++i) {
        double* __restrict ci = C + static_cast<size_t>(i) * m;
        for (int j = 0; j < m; ++j) ci[j] = 0.0;
        const double* ai = A + static_cast<size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double a = ai[p];
            const double* __restrict bp = B + static_cast<size_t>(p) * m;
            for (int j = 0; j < m; ++j) ci[j] += a * bp[j];
        }
    }
}

/// C(k x m) += A(r x k)^T * B(r x m).
inline void matmul_tn_acc(const double* __restrict A, const double* __restrict B,
                          double* __restrict C, int r, int k, int m) {
    for (int i = 0; i < r; ++i) {
        const double* ai = A + static_cast<size_t>(i) * k;
        const double* __restrict bi = B + static_cast<size_t>(i) * m;
        for (int p = 0; p < k; ++p) {
            const double a = ai[p];
            double* __restrict cp = C + static_cast<size_t>(p) * m;
            for (int j = 0; j < m; ++j) cp[j] += a * bi[j];
        }
    }
}

/// C(r x k) += A(r x m) * B(k x m)^T, via a scratch transpose of B.
inline void matmul_nt_acc(const double* __restrict A, const double* __restrict B,
                          double* __restrict C, int r, int k, int m,
                          std::vector<double>& scratch) {
    scratch.resize(static_cast<size_t>(k) * m);
    double* __restrict T = scratch.data();
    for (int p = 0; p < k; ++p)
        for (int j = 0; j < m; ++j) T[static_cast<size_t>(j) * k + p] = B[static_cast<size_t>(p) * m + j];
    for (int i = 0; i < r; ++i) {
        const double* ai = A + static_cast<size_t>(i) * m;
        double* __restrict ci = C + static_cast<size_t>(i) * k;
        for (int j = 0; j < m; ++j) {
            const double a = ai[j];
            const double* __restrict bj = T + static_cast<size_t>(j) * k;
            for (int p = 0; p < k; ++p) ci[p] += a * bj[p];
        }
    }
}

}  // namespace mnav::kernels
