#include <vector>

#include "kernels.hpp"
#include "ops_util.hpp"
#include "pyrad/ops.hpp"

namespace pyrad {

using detail::needs_grad;

namespace {

int conv_out_extent(const char* op, int in, int k, int stride, int pad) {
    const int out = (in + 2 * pad - k) / stride + 1;
    if (in + 2 * pad < k || out < 1) {
        throw ConfigError(strf(op, ": output extent ", out, " not positive for input ", in, ", kernel ", k,
                               ", stride ", stride, ", padding ", pad));
    }
    return out;
}

void check_conv_args(const char* op, const Tensor& b, int out_c, int stride, int padding) {
    if (b.ndim() != 1 || b.extent(0) != out_c) {
        throw ConfigError(strf(op, ": bias shape ", shape_str(b.shape()), " must be [", out_c, "]"));
    }
    if (stride < 1) throw ConfigError(strf(op, ": stride must be >= 1, got ", stride));
    if (padding < 0) throw ConfigError(strf(op, ": padding must be >= 0, got ", padding));
}

} // namespace

Tensor conv2d(GradGraph* g, const Tensor& x, const Tensor& w, const Tensor& b, int stride, int padding) {
    detail::check_4d(x, "conv2d", "input");
    detail::check_4d(w, "conv2d", "weight");
    const int n = x.extent(0), in_c = x.extent(1), h = x.extent(2), wd = x.extent(3);
    const int out_c = w.extent(0), kh = w.extent(2), kw = w.extent(3);
    if (w.extent(1) != in_c) {
        throw ConfigError(strf("conv2d: input channels ", in_c, " do not match weight in-channels ", w.extent(1)));
    }
    check_conv_args("conv2d", b, out_c, stride, padding);
    const int oh = conv_out_extent("conv2d", h, kh, stride, padding);
    const int ow = conv_out_extent("conv2d", wd, kw, stride, padding);

    const int64_t patch = static_cast<int64_t>(in_c) * kh * kw;
    const int64_t oplane = static_cast<int64_t>(oh) * ow;
    Tensor y({n, out_c, oh, ow});
    std::vector<float> col(static_cast<size_t>(patch * oplane));
    for (int i = 0; i < n; ++i) {
        const float* xi = x.data() + static_cast<int64_t>(i) * in_c * h * wd;
        float* yi = y.data() + static_cast<int64_t>(i) * out_c * oplane;
        detail::im2col(col.data(), xi, in_c, h, wd, kh, kw, stride, padding, oh, ow);
        detail::gemm_nn(yi, w.data(), col.data(), out_c, oplane, patch, false);
        for (int oc = 0; oc < out_c; ++oc) {
            const float bias = b.data()[oc];
            float* row = yi + oc * oplane;
            for (int64_t j = 0; j < oplane; ++j) row[j] += bias;
        }
    }

    if (g && g->wants({&x, &w, &b})) {
        auto xi = x.impl();
        auto wi = w.impl();
        auto bi = b.impl();
        auto yi = y.impl();
        g->record("conv2d", {&x, &w, &b}, y, [=] {
            const float* dy = yi->g.data();
            std::vector<float> colbuf(static_cast<size_t>(patch * oplane));
            const bool want_x = needs_grad(*xi), want_w = needs_grad(*wi), want_b = needs_grad(*bi);
            float* dx = want_x ? detail::grad_buf(*xi).data() : nullptr;
            float* dw = want_w ? detail::grad_buf(*wi).data() : nullptr;
            float* db = want_b ? detail::grad_buf(*bi).data() : nullptr;
            std::vector<float> dcol(want_x ? static_cast<size_t>(patch * oplane) : 0);
            for (int i = 0; i < n; ++i) {
                const float* dyi = dy + static_cast<int64_t>(i) * out_c * oplane;
                if (want_w) {
                    detail::im2col(colbuf.data(), xi->v.data() + static_cast<int64_t>(i) * in_c * h * wd, in_c, h,
                                   wd, kh, kw, stride, padding, oh, ow);
                    detail::gemm_nt(dw, dyi, colbuf.data(), out_c, patch, oplane, true);
                }
                if (want_x) {
                    detail::gemm_tn(dcol.data(), wi->v.data(), dyi, patch, oplane, out_c, false);
                    detail::col2im(dx + static_cast<int64_t>(i) * in_c * h * wd, dcol.data(), in_c, h, wd, kh, kw,
                                   stride, padding, oh, ow);
                }
                if (want_b) {
                    for (int oc = 0; oc < out_c; ++oc) {
                        const float* row = dyi + oc * oplane;
                        float acc = 0.0f;
                        for (int64_t j = 0; j < oplane; ++j) acc += row[j];
                        db[oc] += acc;
                    }
                }
            }
        });
    }
    return y;
}

Tensor conv_transpose2d(GradGraph* g, const Tensor& x, const Tensor& w, const Tensor& b, int stride, int padding) {
    detail::check_4d(x, "conv_transpose2d", "input");
    detail::check_4d(w, "conv_transpose2d", "weight");
    const int n = x.extent(0), in_c = x.extent(1), h = x.extent(2), wd = x.extent(3);
    const int out_c = w.extent(1), kh = w.extent(2), kw = w.extent(3);
    if (w.extent(0) != in_c) {
        throw ConfigError(
            strf("conv_transpose2d: input channels ", in_c, " do not match weight in-channels ", w.extent(0)));
    }
    check_conv_args("conv_transpose2d", b, out_c, stride, padding);
    const int oh = (h - 1) * stride - 2 * padding + kh;
    const int ow = (wd - 1) * stride - 2 * padding + kw;
    if (oh < 1 || ow < 1) {
        throw ConfigError(strf("conv_transpose2d: output extent ", oh, "x", ow, " not positive for input ", h, "x",
                               wd, ", kernel ", kh, ", stride ", stride, ", padding ", padding));
    }

    const int64_t patch = static_cast<int64_t>(out_c) * kh * kw; // scatter patch rows
    const int64_t iplane = static_cast<int64_t>(h) * wd;
    const int64_t oplane = static_cast<int64_t>(oh) * ow;
    Tensor y({n, out_c, oh, ow});
    std::vector<float> col(static_cast<size_t>(patch * iplane));
    for (int i = 0; i < n; ++i) {
        const float* xi = x.data() + static_cast<int64_t>(i) * in_c * iplane;
        float* yi = y.data() + static_cast<int64_t>(i) * out_c * oplane;
        detail::gemm_tn(col.data(), w.data(), xi, patch, iplane, in_c, false);
        detail::col2im(yi, col.data(), out_c, oh, ow, kh, kw, stride, padding, h, wd);
        for (int oc = 0; oc < out_c; ++oc) {
            const float bias = b.data()[oc];
            float* row = yi + oc * oplane;
            for (int64_t j = 0; j < oplane; ++j) row[j] += bias;
        }
    }

    if (g && g->wants({&x, &w, &b})) {
        auto xi = x.impl();
        auto wi = w.impl();
        auto bi = b.impl();
        auto yi = y.impl();
        g->record("conv_transpose2d", {&x, &w, &b}, y, [=] {
            const float* dy = yi->g.data();
            const bool want_x = needs_grad(*xi), want_w = needs_grad(*wi), want_b = needs_grad(*bi);
            float* dx = want_x ? detail::grad_buf(*xi).data() : nullptr;
            float* dw = want_w ? detail::grad_buf(*wi).data() : nullptr;
            float* db = want_b ? detail::grad_buf(*bi).data() : nullptr;
            std::vector<float> dcol(static_cast<size_t>(patch * iplane));
            for (int i = 0; i < n; ++i) {
                const float* dyi = dy + static_cast<int64_t>(i) * out_c * oplane;
                if (want_x || want_w) {
                    // Gather of dy over the input grid is shared by both grads.
                    detail::im2col(dcol.data(), dyi, out_c, oh, ow, kh, kw, stride, padding, h, wd);
                }
                if (want_x) {
                    detail::gemm_nn(dx + static_cast<int64_t>(i) * in_c * iplane, wi->v.data(), dcol.data(), in_c,
                                    iplane, patch, true);
                }
                if (want_w) {
                    detail::gemm_nt(dw, xi->v.data() + static_cast<int64_t>(i) * in_c * iplane, dcol.data(), in_c,
                                    patch, iplane, true);
                }
                if (want_b) {
                    for (int oc = 0; oc < out_c; ++oc) {
                        const float* row = dyi + oc * oplane;
                        float acc = 0.0f;
                        for (int64_t j = 0; j < oplane; ++j) acc += row[j];
                        db[oc] += acc;
                    }
                }
            }
        });
    }
    return y;
}

Tensor linear(GradGraph* g, const Tensor& x, const Tensor& w, const Tensor& b) {
    if (x.ndim() != 2) throw ConfigError(strf("linear: input must be N,F, got ", shape_str(x.shape())));
    if (w.ndim() != 2) throw ConfigError(strf("linear: weight must be Fout,Fin, got ", shape_str(w.shape())));
    const int n = x.extent(0), f_in = x.extent(1);
    const int f_out = w.extent(0);
    if (w.extent(1) != f_in) {
        throw ConfigError(strf("linear: input features ", f_in, " do not match weight in-features ", w.extent(1)));
    }
    if (b.ndim() != 1 || b.extent(0) != f_out) {
        throw ConfigError(strf("linear: bias shape ", shape_str(b.shape()), " must be [", f_out, "]"));
    }

    Tensor y({n, f_out});
    detail::gemm_nt(y.data(), x.data(), w.data(), n, f_out, f_in, false);
    for (int i = 0; i < n; ++i) {
        float* row = y.data() + static_cast<int64_t>(i) * f_out;
        for (int j = 0; j < f_out; ++j) row[j] += b.data()[j];
    }

    if (g && g->wants({&x, &w, &b})) {
        auto xi = x.impl();
        auto wi = w.impl();
        auto bi = b.impl();
        auto yi = y.impl();
        g->record("linear", {&x, &w, &b}, y, [=] {
            const float* dy = yi->g.data();
            if (needs_grad(*xi)) {
                detail::gemm_nn(detail::grad_buf(*xi).data(), dy, wi->v.data(), n, f_in, f_out, true);
            }
            if (needs_grad(*wi)) {
                detail::gemm_tn(detail::grad_buf(*wi).data(), dy, xi->v.data(), f_out, f_in, n, true);
            }
            if (needs_grad(*bi)) {
                float* db = detail::grad_buf(*bi).data();
                for (int i = 0; i < n; ++i) {
                    const float* row = dy + static_cast<int64_t>(i) * f_out;
                    for (int j = 0; j < f_out; ++j) db[j] += row[j];
                }
            }
        });
    }
    return y;
}

} // namespace pyrad
