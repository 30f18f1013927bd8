#pragma once

#include <cmath>
#include <cstddef>

namespace emrseg {

// Dense kernels used by the LSTM and the skip-gram trainer. Matrices are
// row-major. These are the SIMD inner loops; thread-level parallelism lives
// one level up (notes, batches).

template <class Real>
inline Real dot(const Real* a, const Real* b, std::size_t n) {
    Real s = 0;
#pragma omp simd reduction(+ : s)
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

template <class Real>
inline void axpy(Real alpha, const Real* x, Real* y, std::size_t n) {
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// y = W x + b
template <class Real>
inline void matvec(const Real* w, std::size_t rows, std::size_t cols,
                   const Real* x, const Real* b, Real* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        Real s = b ? b[r] : Real(0);
        const Real* wr = w + r * cols;
#pragma omp simd reduction(+ : s)
        for (std::size_t c = 0; c < cols; ++c) s += wr[c] * x[c];
        y[r] = s;
    }
}

// y += W^T x  (x has `rows` entries, y has `cols`)
template <class Real>
inline void matvec_t_add(const Real* w, std::size_t rows, std::size_t cols,
                         const Real* x, Real* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const Real xr = x[r];
        const Real* wr = w + r * cols;
#pragma omp simd
        for (std::size_t c = 0; c < cols; ++c) y[c] += xr * wr[c];
    }
}

// W += a b^T
template <class Real>
inline void outer_add(Real* w, const Real* a, std::size_t rows, const Real* b,
                      std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        Real* wr = w + r * cols;
        const Real ar = a[r];
#pragma omp simd
        for (std::size_t c = 0; c < cols; ++c) wr[c] += ar * b[c];
    }
}

template <class Real>
inline Real sigmoid(Real x) {
    return Real(1) / (Real(1) + std::exp(-x));
}

}  // namespace emrseg
