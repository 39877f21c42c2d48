#pragma once

// Internal dense kernels: three row-major GEMM variants plus the
// im2col/col2im gathers shared by conv2d and conv_transpose2d. Inner loops
// run over contiguous memory so -O3 can vectorize them.

#include <cstdint>
#include <vector>

namespace pyrad::detail {

// C[M x N] (+)= A[M x K] * B[K x N]
inline void gemm_nn(float* __restrict c, const float* __restrict a, const float* __restrict b,
                    int64_t m, int64_t n, int64_t k, bool accumulate) {
    for (int64_t i = 0; i < m; ++i) {
        float* ci = c + i * n;
        if (!accumulate) {
            for (int64_t j = 0; j < n; ++j) ci[j] = 0.0f;
        }
        const float* ai = a + i * k;
        for (int64_t l = 0; l < k; ++l) {
            const float av = ai[l];
            if (av == 0.0f) continue;
            const float* bl = b + l * n;
            for (int64_t j = 0; j < n; ++j) ci[j] += av * bl[j];
        }
    }
}

// C[M x N] (+)= A[K x M]^T * B[K x N]
inline void gemm_tn(float* __restrict c, const float* __restrict a, const float* __restrict b,
                    int64_t m, int64_t n, int64_t k, bool accumulate) {
    if (!accumulate) {
        for (int64_t i = 0; i < m * n; ++i) c[i] = 0.0f;
    }
    for (int64_t l = 0; l < k; ++l) {
        const float* al = a + l * m;
        const float* bl = b + l * n;
        for (int64_t i = 0; i < m; ++i) {
            const float av = al[i];
            if (av == 0.0f) continue;
            float* ci = c + i * n;
            for (int64_t j = 0; j < n; ++j) ci[j] += av * bl[j];
        }
    }
}

// C[M x N] (+)= A[M x K] * B[N x K]^T
inline void gemm_nt(float* __restrict c, const float* __restrict a, const float* __restrict b,
                    int64_t m, int64_t n, int64_t k, bool accumulate) {
    for (int64_t i = 0; i < m; ++i) {
        const float* ai = a + i * k;
        float* ci = c + i * n;
        for (int64_t j = 0; j < n; ++j) {
            const float* bj = b + j * k;
            float acc = 0.0f;
            for (int64_t l = 0; l < k; ++l) acc += ai[l] * bj[l];
            ci[j] = accumulate ? ci[j] + acc : acc;
        }
    }
}

// Gather one sample's patches: src C,H,W -> col[(C*kh*kw) x (oh*ow)] with
// src element (c, a*stride - pad + ki, b*stride - pad + kj) at
// col[c*kh*kw + ki*kw + kj][a*ow + b]; out-of-bounds reads are zero.
inline void im2col(float* __restrict col, const float* __restrict src, int channels, int height, int width,
                   int kh, int kw, int stride, int pad, int oh, int ow) {
    const int64_t plane = static_cast<int64_t>(oh) * ow;
    for (int c = 0; c < channels; ++c) {
        const float* srcc = src + static_cast<int64_t>(c) * height * width;
        for (int ki = 0; ki < kh; ++ki) {
            for (int kj = 0; kj < kw; ++kj) {
                float* row = col + ((static_cast<int64_t>(c) * kh + ki) * kw + kj) * plane;
                for (int a = 0; a < oh; ++a) {
                    const int y = a * stride - pad + ki;
                    float* out = row + static_cast<int64_t>(a) * ow;
                    if (y < 0 || y >= height) {
                        for (int b = 0; b < ow; ++b) out[b] = 0.0f;
                        continue;
                    }
                    const float* srcy = srcc + static_cast<int64_t>(y) * width;
                    for (int b = 0; b < ow; ++b) {
                        const int xcol = b * stride - pad + kj;
                        out[b] = (xcol >= 0 && xcol < width) ? srcy[xcol] : 0.0f;
                    }
                }
            }
        }
    }
}

// Adjoint scatter of im2col: col[(C*kh*kw) x (fh*fw)] accumulated into
// dst C,th,tw at (c, a*stride - pad + ki, b*stride - pad + kj). Serves both
// the conv2d input gradient (from = output grid) and the transposed-conv
// forward (from = input grid).
inline void col2im(float* __restrict dst, const float* __restrict col, int channels, int th, int tw,
                   int kh, int kw, int stride, int pad, int fh, int fw) {
    const int64_t plane = static_cast<int64_t>(fh) * fw;
    for (int c = 0; c < channels; ++c) {
        float* dstc = dst + static_cast<int64_t>(c) * th * tw;
        for (int ki = 0; ki < kh; ++ki) {
            for (int kj = 0; kj < kw; ++kj) {
                const float* row = col + ((static_cast<int64_t>(c) * kh + ki) * kw + kj) * plane;
                for (int a = 0; a < fh; ++a) {
                    const int y = a * stride - pad + ki;
                    if (y < 0 || y >= th) continue;
                    float* dsty = dstc + static_cast<int64_t>(y) * tw;
                    const float* in = row + static_cast<int64_t>(a) * fw;
                    for (int b = 0; b < fw; ++b) {
                        const int xcol = b * stride - pad + kj;
                        if (xcol >= 0 && xcol < tw) dsty[xcol] += in[b];
                    }
                }
            }
        }
    }
}

} // namespace pyrad::detail
