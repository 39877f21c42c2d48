#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <vector>

#include "ops_util.hpp"
#include "pyrad/ops.hpp"

namespace pyrad {

using detail::needs_grad;

namespace {

// N,C,H,W or N,C view used by batch_norm.
struct NormDims {
    int n, c, h, w;
    int64_t per_channel() const { return static_cast<int64_t>(n) * h * w; }
};

NormDims norm_dims(const Tensor& x) {
    if (x.ndim() == 4) return {x.extent(0), x.extent(1), x.extent(2), x.extent(3)};
    if (x.ndim() == 2) return {x.extent(0), x.extent(1), 1, 1};
    throw ConfigError(strf("batch_norm: input must be N,C,H,W or N,C, got ", shape_str(x.shape())));
}

} // namespace

Tensor batch_norm(GradGraph* g, const Tensor& x, const Tensor& gamma, const Tensor& beta, Tensor& running_mean,
                  Tensor& running_var, bool training, float momentum, float eps) {
    const NormDims d = norm_dims(x);
    for (const Tensor* t : {&gamma, &beta, static_cast<const Tensor*>(&running_mean),
                            static_cast<const Tensor*>(&running_var)}) {
        if (t->ndim() != 1 || t->extent(0) != d.c) {
            throw ConfigError(strf("batch_norm: affine/stat shape ", shape_str(t->shape()), " must be [", d.c,
                                   "] for input ", shape_str(x.shape())));
        }
    }
    if (training && d.n < 2) {
        throw UsageError(strf("batch_norm: train mode needs batch size >= 2, got ", d.n));
    }

    const int64_t plane = static_cast<int64_t>(d.h) * d.w;
    const int64_t cstride = static_cast<int64_t>(d.c) * plane;
    const int64_t m = d.per_channel();

    std::vector<float> invstd(static_cast<size_t>(d.c));
    std::vector<float> mean(static_cast<size_t>(d.c));
    if (training) {
        for (int c = 0; c < d.c; ++c) {
            double acc = 0.0;
            for (int i = 0; i < d.n; ++i) {
                const float* p = x.data() + i * cstride + c * plane;
                for (int64_t j = 0; j < plane; ++j) acc += p[j];
            }
            const double mu = acc / static_cast<double>(m);
            double vacc = 0.0;
            for (int i = 0; i < d.n; ++i) {
                const float* p = x.data() + i * cstride + c * plane;
                for (int64_t j = 0; j < plane; ++j) {
                    const double dlt = p[j] - mu;
                    vacc += dlt * dlt;
                }
            }
            const double var = vacc / static_cast<double>(m); // biased, used for normalization
            mean[c] = static_cast<float>(mu);
            invstd[c] = static_cast<float>(1.0 / std::sqrt(var + eps));
            running_mean.data()[c] = (1.0f - momentum) * running_mean.data()[c] + momentum * mean[c];
            const double unbiased = vacc / static_cast<double>(m - 1);
            running_var.data()[c] =
                (1.0f - momentum) * running_var.data()[c] + momentum * static_cast<float>(unbiased);
        }
    } else {
        for (int c = 0; c < d.c; ++c) {
            mean[c] = running_mean.data()[c];
            invstd[c] = static_cast<float>(1.0 / std::sqrt(static_cast<double>(running_var.data()[c]) + eps));
        }
    }

    Tensor y(x.shape());
    auto xhat = std::make_shared<std::vector<float>>(static_cast<size_t>(x.numel()));
    for (int c = 0; c < d.c; ++c) {
        const float mu = mean[c], is = invstd[c];
        const float gm = gamma.data()[c], bt = beta.data()[c];
        for (int i = 0; i < d.n; ++i) {
            const float* p = x.data() + i * cstride + c * plane;
            float* q = y.data() + i * cstride + c * plane;
            float* xh = xhat->data() + i * cstride + c * plane;
            for (int64_t j = 0; j < plane; ++j) {
                const float h = (p[j] - mu) * is;
                xh[j] = h;
                q[j] = gm * h + bt;
            }
        }
    }

    if (g && g->wants({&x, &gamma, &beta})) {
        auto xi = x.impl();
        auto gi = gamma.impl();
        auto bi = beta.impl();
        auto yi = y.impl();
        auto istd = std::make_shared<std::vector<float>>(invstd);
        const NormDims dims = d;
        g->record("batch_norm", {&x, &gamma, &beta}, y, [=] {
            const float* dy = yi->g.data();
            const int64_t pl = static_cast<int64_t>(dims.h) * dims.w;
            const int64_t cs = static_cast<int64_t>(dims.c) * pl;
            const int64_t cnt = dims.per_channel();
            const bool want_x = needs_grad(*xi), want_g = needs_grad(*gi), want_b = needs_grad(*bi);
            float* dxb = want_x ? detail::grad_buf(*xi).data() : nullptr;
            float* dgb = want_g ? detail::grad_buf(*gi).data() : nullptr;
            float* dbb = want_b ? detail::grad_buf(*bi).data() : nullptr;
            for (int c = 0; c < dims.c; ++c) {
                double sdy = 0.0, sdyx = 0.0;
                for (int i = 0; i < dims.n; ++i) {
                    const float* dyr = dy + i * cs + c * pl;
                    const float* xhr = xhat->data() + i * cs + c * pl;
                    for (int64_t j = 0; j < pl; ++j) {
                        sdy += dyr[j];
                        sdyx += static_cast<double>(dyr[j]) * xhr[j];
                    }
                }
                if (want_g) dgb[c] += static_cast<float>(sdyx);
                if (want_b) dbb[c] += static_cast<float>(sdy);
                if (want_x) {
                    const float k = gi->v[static_cast<size_t>(c)] * (*istd)[static_cast<size_t>(c)];
                    if (training) {
                        const float mdy = static_cast<float>(sdy / static_cast<double>(cnt));
                        const float mdyx = static_cast<float>(sdyx / static_cast<double>(cnt));
                        for (int i = 0; i < dims.n; ++i) {
                            const float* dyr = dy + i * cs + c * pl;
                            const float* xhr = xhat->data() + i * cs + c * pl;
                            float* dxr = dxb + i * cs + c * pl;
                            for (int64_t j = 0; j < pl; ++j) dxr[j] += k * (dyr[j] - mdy - xhr[j] * mdyx);
                        }
                    } else {
                        for (int i = 0; i < dims.n; ++i) {
                            const float* dyr = dy + i * cs + c * pl;
                            float* dxr = dxb + i * cs + c * pl;
                            for (int64_t j = 0; j < pl; ++j) dxr[j] += k * dyr[j];
                        }
                    }
                }
            }
        });
    }
    return y;
}

Tensor relu(GradGraph* g, const Tensor& x) {
    Tensor y(x.shape());
    const float* p = x.data();
    float* q = y.data();
    const int64_t n = x.numel();
    for (int64_t i = 0; i < n; ++i) q[i] = p[i] > 0.0f ? p[i] : 0.0f;
    if (g && g->wants({&x})) {
        auto xi = x.impl();
        auto yi = y.impl();
        g->record("relu", {&x}, y, [=] {
            if (!needs_grad(*xi)) return;
            float* dx = detail::grad_buf(*xi).data();
            const float* dy = yi->g.data();
            for (int64_t i = 0; i < n; ++i) {
                if (xi->v[static_cast<size_t>(i)] > 0.0f) dx[i] += dy[i];
            }
        });
    }
    return y;
}

Tensor tanh(GradGraph* g, const Tensor& x) {
    Tensor y(x.shape());
    const float* p = x.data();
    float* q = y.data();
    const int64_t n = x.numel();
    for (int64_t i = 0; i < n; ++i) q[i] = std::tanh(p[i]);
    if (g && g->wants({&x})) {
        auto xi = x.impl();
        auto yi = y.impl();
        g->record("tanh", {&x}, y, [=] {
            if (!needs_grad(*xi)) return;
            float* dx = detail::grad_buf(*xi).data();
            const float* dy = yi->g.data();
            for (int64_t i = 0; i < n; ++i) {
                const float t = yi->v[static_cast<size_t>(i)];
                dx[i] += dy[i] * (1.0f - t * t);
            }
        });
    }
    return y;
}

Tensor unit_range(GradGraph* g, const Tensor& x) {
    Tensor y(x.shape());
    const float* p = x.data();
    float* q = y.data();
    const int64_t n = x.numel();
    for (int64_t i = 0; i < n; ++i) q[i] = 0.5f * (std::tanh(p[i]) + 1.0f);
    if (g && g->wants({&x})) {
        auto xi = x.impl();
        auto yi = y.impl();
        g->record("unit_range", {&x}, y, [=] {
            if (!needs_grad(*xi)) return;
            float* dx = detail::grad_buf(*xi).data();
            const float* dy = yi->g.data();
            for (int64_t i = 0; i < n; ++i) {
                const float t = 2.0f * yi->v[static_cast<size_t>(i)] - 1.0f;
                dx[i] += dy[i] * 0.5f * (1.0f - t * t);
            }
        });
    }
    return y;
}

Tensor activation(GradGraph* g, const Tensor& x, Activation kind) {
    switch (kind) {
    case Activation::relu: return relu(g, x);
    case Activation::tanh: return tanh(g, x);
    case Activation::unit_range: return unit_range(g, x);
    }
    throw UsageError("activation: unknown kind");
}

Tensor adaptive_avg_pool(GradGraph* g, const Tensor& x, int out_h, int out_w) {
    detail::check_4d(x, "adaptive_avg_pool", "input");
    const int n = x.extent(0), c = x.extent(1), h = x.extent(2), w = x.extent(3);
    if (out_h < 1 || out_w < 1 || out_h > h || out_w > w) {
        throw ConfigError(strf("adaptive_avg_pool: output ", out_h, "x", out_w, " invalid for input ", h, "x", w));
    }
    Tensor y({n, c, out_h, out_w});
    const int64_t iplane = static_cast<int64_t>(h) * w;
    const int64_t oplane = static_cast<int64_t>(out_h) * out_w;
    auto lo = [](int i, int in, int out) { return static_cast<int>((static_cast<int64_t>(i) * in) / out); };
    for (int64_t img = 0; img < static_cast<int64_t>(n) * c; ++img) {
        const float* src = x.data() + img * iplane;
        float* dst = y.data() + img * oplane;
        for (int a = 0; a < out_h; ++a) {
            const int y0 = lo(a, h, out_h), y1 = lo(a + 1, h, out_h);
            for (int bcol = 0; bcol < out_w; ++bcol) {
                const int x0 = lo(bcol, w, out_w), x1 = lo(bcol + 1, w, out_w);
                double acc = 0.0;
                for (int yy = y0; yy < y1; ++yy) {
                    for (int xx = x0; xx < x1; ++xx) acc += src[yy * w + xx];
                }
                dst[a * out_w + bcol] = static_cast<float>(acc / ((y1 - y0) * (x1 - x0)));
            }
        }
    }
    if (g && g->wants({&x})) {
        auto xi = x.impl();
        auto yi = y.impl();
        g->record("adaptive_avg_pool", {&x}, y, [=] {
            if (!needs_grad(*xi)) return;
            float* dx = detail::grad_buf(*xi).data();
            const float* dy = yi->g.data();
            for (int64_t img = 0; img < static_cast<int64_t>(n) * c; ++img) {
                const float* dyp = dy + img * oplane;
                float* dxp = dx + img * iplane;
                for (int a = 0; a < out_h; ++a) {
                    const int y0 = lo(a, h, out_h), y1 = lo(a + 1, h, out_h);
                    for (int bcol = 0; bcol < out_w; ++bcol) {
                        const int x0 = lo(bcol, w, out_w), x1 = lo(bcol + 1, w, out_w);
                        const float share = dyp[a * out_w + bcol] / static_cast<float>((y1 - y0) * (x1 - x0));
                        for (int yy = y0; yy < y1; ++yy) {
                            for (int xx = x0; xx < x1; ++xx) dxp[yy * w + xx] += share;
                        }
                    }
                }
            }
        });
    }
    return y;
}

Tensor add(GradGraph* g, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw UsageError(strf("add: shapes ", shape_str(a.shape()), " and ", shape_str(b.shape()), " differ"));
    }
    Tensor y(a.shape());
    const int64_t n = a.numel();
    for (int64_t i = 0; i < n; ++i) y.data()[i] = a.data()[i] + b.data()[i];
    if (g && g->wants({&a, &b})) {
        auto ai = a.impl();
        auto bi = b.impl();
        auto yi = y.impl();
        g->record("add", {&a, &b}, y, [=] {
            const float* dy = yi->g.data();
            for (auto& t : {ai, bi}) {
                if (!needs_grad(*t)) continue;
                float* d = detail::grad_buf(*t).data();
                for (int64_t i = 0; i < n; ++i) d[i] += dy[i];
            }
        });
    }
    return y;
}

Tensor mul_scalar(GradGraph* g, const Tensor& x, float c) {
    Tensor y(x.shape());
    const int64_t n = x.numel();
    for (int64_t i = 0; i < n; ++i) y.data()[i] = x.data()[i] * c;
    if (g && g->wants({&x})) {
        auto xi = x.impl();
        auto yi = y.impl();
        g->record("mul_scalar", {&x}, y, [=] {
            if (!needs_grad(*xi)) return;
            float* dx = detail::grad_buf(*xi).data();
            const float* dy = yi->g.data();
            for (int64_t i = 0; i < n; ++i) dx[i] += dy[i] * c;
        });
    }
    return y;
}

Tensor reshape(GradGraph* g, const Tensor& x, Shape shape) {
    if (shape_numel(shape) != x.numel()) {
        throw UsageError(strf("reshape: ", shape_str(x.shape()), " has ", x.numel(), " values, target ",
                              shape_str(shape), " wants ", shape_numel(shape)));
    }
    Tensor y = Tensor::from(std::move(shape), std::vector<float>(x.data(), x.data() + x.numel()));
    if (g && g->wants({&x})) {
        auto xi = x.impl();
        auto yi = y.impl();
        const int64_t n = x.numel();
        g->record("reshape", {&x}, y, [=] {
            if (!needs_grad(*xi)) return;
            float* dx = detail::grad_buf(*xi).data();
            const float* dy = yi->g.data();
            for (int64_t i = 0; i < n; ++i) dx[i] += dy[i];
        });
    }
    return y;
}

Tensor concat_channels(GradGraph* g, std::span<const Tensor> parts) {
    if (parts.empty()) throw UsageError("concat_channels: no inputs");
    for (const Tensor& t : parts) detail::check_4d(t, "concat_channels", "input");
    const int n = parts[0].extent(0), h = parts[0].extent(2), w = parts[0].extent(3);
    int total_c = 0;
    for (const Tensor& t : parts) {
        if (t.extent(0) != n || t.extent(2) != h || t.extent(3) != w) {
            throw ConfigError(strf("concat_channels: mismatched shape ", shape_str(t.shape()), " vs ",
                                   shape_str(parts[0].shape())));
        }
        total_c += t.extent(1);
    }
    Tensor y({n, total_c, h, w});
    const int64_t plane = static_cast<int64_t>(h) * w;
    int offset_c = 0;
    for (const Tensor& t : parts) {
        const int c = t.extent(1);
        for (int i = 0; i < n; ++i) {
            std::memcpy(y.data() + (static_cast<int64_t>(i) * total_c + offset_c) * plane,
                        t.data() + static_cast<int64_t>(i) * c * plane, sizeof(float) * c * plane);
        }
        offset_c += c;
    }

    bool track = false;
    if (g) {
        for (const Tensor& t : parts) {
            if (g->wants({&t})) track = true;
        }
    }
    if (track) {
        std::vector<std::shared_ptr<detail::TensorImpl>> impls;
        std::vector<const Tensor*> refs;
        for (const Tensor& t : parts) {
            impls.push_back(t.impl());
            refs.push_back(&t);
        }
        auto yi = y.impl();
        auto body = [impls, yi, n, total_c, plane] {
            const float* dy = yi->g.data();
            int off = 0;
            for (auto& t : impls) {
                const int c = t->shape[1];
                if (needs_grad(*t)) {
                    float* dx = detail::grad_buf(*t).data();
                    for (int i = 0; i < n; ++i) {
                        const float* src = dy + (static_cast<int64_t>(i) * total_c + off) * plane;
                        float* dst = dx + static_cast<int64_t>(i) * c * plane;
                        for (int64_t j = 0; j < c * plane; ++j) dst[j] += src[j];
                    }
                }
                off += c;
            }
        };
        switch (refs.size()) {
        case 1: g->record("concat_channels", {refs[0]}, y, body); break;
        case 2: g->record("concat_channels", {refs[0], refs[1]}, y, body); break;
        case 3: g->record("concat_channels", {refs[0], refs[1], refs[2]}, y, body); break;
        case 4: g->record("concat_channels", {refs[0], refs[1], refs[2], refs[3]}, y, body); break;
        default: {
            // initializer_list caps at the common arities above; fold pairwise otherwise
            throw UsageError("concat_channels: more than 4 tracked inputs unsupported");
        }
        }
    }
    return y;
}

Tensor tile2x2(GradGraph* g, const Tensor& q0, const Tensor& q1, const Tensor& q2, const Tensor& q3) {
    const Tensor* qs[4] = {&q0, &q1, &q2, &q3};
    for (const Tensor* t : qs) detail::check_4d(*t, "tile2x2", "input");
    const Shape& s = q0.shape();
    for (const Tensor* t : qs) {
        if (t->shape() != s) {
            throw ConfigError(strf("tile2x2: quadrant shape ", shape_str(t->shape()), " differs from ",
                                   shape_str(s)));
        }
    }
    const int n = s[0], c = s[1], h = s[2], w = s[3];
    Tensor y({n, c, 2 * h, 2 * w});
    const int64_t iplane = static_cast<int64_t>(h) * w;
    for (int q = 0; q < 4; ++q) {
        const int row0 = (q / 2) * h, col0 = (q % 2) * w;
        for (int64_t img = 0; img < static_cast<int64_t>(n) * c; ++img) {
            const float* src = qs[q]->data() + img * iplane;
            float* dst = y.data() + img * iplane * 4;
            for (int a = 0; a < h; ++a) {
                std::memcpy(dst + static_cast<int64_t>(row0 + a) * 2 * w + col0, src + static_cast<int64_t>(a) * w,
                            sizeof(float) * w);
            }
        }
    }
    if (g && g->wants({&q0, &q1, &q2, &q3})) {
        std::array<std::shared_ptr<detail::TensorImpl>, 4> impls = {q0.impl(), q1.impl(), q2.impl(), q3.impl()};
        auto yi = y.impl();
        g->record("tile2x2", {&q0, &q1, &q2, &q3}, y, [=] {
            const float* dy = yi->g.data();
            for (int q = 0; q < 4; ++q) {
                if (!needs_grad(*impls[static_cast<size_t>(q)])) continue;
                float* dx = detail::grad_buf(*impls[static_cast<size_t>(q)]).data();
                const int row0 = (q / 2) * h, col0 = (q % 2) * w;
                for (int64_t img = 0; img < static_cast<int64_t>(n) * c; ++img) {
                    const float* src = dy + img * iplane * 4;
                    float* dst = dx + img * iplane;
                    for (int a = 0; a < h; ++a) {
                        const float* srow = src + static_cast<int64_t>(row0 + a) * 2 * w + col0;
                        float* drow = dst + static_cast<int64_t>(a) * w;
                        for (int bcol = 0; bcol < w; ++bcol) drow[bcol] += srow[bcol];
                    }
                }
            }
        });
    }
    return y;
}

Tensor resize_bilinear(GradGraph* g, const Tensor& x, int out_h, int out_w) {
    detail::check_4d(x, "resize_bilinear", "input");
    const int n = x.extent(0), c = x.extent(1), h = x.extent(2), w = x.extent(3);
    if (out_h < 1 || out_w < 1) {
        throw ConfigError(strf("resize_bilinear: output ", out_h, "x", out_w, " invalid"));
    }
    if (out_h == h && out_w == w) {
        // Identity resize is bitwise exact.
        Tensor y = Tensor::from(x.shape(), std::vector<float>(x.data(), x.data() + x.numel()));
        if (g && g->wants({&x})) {
            auto xi = x.impl();
            auto yi = y.impl();
            const int64_t total = x.numel();
            g->record("resize_bilinear", {&x}, y, [=] {
                if (!needs_grad(*xi)) return;
                float* dx = detail::grad_buf(*xi).data();
                const float* dy = yi->g.data();
                for (int64_t i = 0; i < total; ++i) dx[i] += dy[i];
            });
        }
        return y;
    }

    struct Axis {
        int i0, i1;
        float w1; // weight of i1; i0 gets 1-w1
    };
    auto build = [](int in, int out) {
        std::vector<Axis> ax(static_cast<size_t>(out));
        const double scale = static_cast<double>(in) / out;
        for (int i = 0; i < out; ++i) {
            double src = (i + 0.5) * scale - 0.5;
            if (src < 0.0) src = 0.0;
            int lo = static_cast<int>(src);
            if (lo > in - 1) lo = in - 1;
            const int hi = std::min(lo + 1, in - 1);
            ax[static_cast<size_t>(i)] = {lo, hi, static_cast<float>(src - lo)};
        }
        return ax;
    };
    const auto ay = build(h, out_h);
    const auto axw = build(w, out_w);

    Tensor y({n, c, out_h, out_w});
    const int64_t iplane = static_cast<int64_t>(h) * w;
    const int64_t oplane = static_cast<int64_t>(out_h) * out_w;
    for (int64_t img = 0; img < static_cast<int64_t>(n) * c; ++img) {
        const float* src = x.data() + img * iplane;
        float* dst = y.data() + img * oplane;
        for (int a = 0; a < out_h; ++a) {
            const Axis& ra = ay[static_cast<size_t>(a)];
            for (int bcol = 0; bcol < out_w; ++bcol) {
                const Axis& rb = axw[static_cast<size_t>(bcol)];
                const float v00 = src[ra.i0 * w + rb.i0], v01 = src[ra.i0 * w + rb.i1];
                const float v10 = src[ra.i1 * w + rb.i0], v11 = src[ra.i1 * w + rb.i1];
                const float top = v00 + (v01 - v00) * rb.w1;
                const float bot = v10 + (v11 - v10) * rb.w1;
                dst[a * out_w + bcol] = top + (bot - top) * ra.w1;
            }
        }
    }
    if (g && g->wants({&x})) {
        auto xi = x.impl();
        auto yi = y.impl();
        g->record("resize_bilinear", {&x}, y, [=] {
            if (!needs_grad(*xi)) return;
            float* dx = detail::grad_buf(*xi).data();
            const float* dy = yi->g.data();
            for (int64_t img = 0; img < static_cast<int64_t>(n) * c; ++img) {
                const float* dyp = dy + img * oplane;
                float* dxp = dx + img * iplane;
                for (int a = 0; a < out_h; ++a) {
                    const Axis& ra = ay[static_cast<size_t>(a)];
                    for (int bcol = 0; bcol < out_w; ++bcol) {
                        const Axis& rb = axw[static_cast<size_t>(bcol)];
                        const float gout = dyp[a * out_w + bcol];
                        dxp[ra.i0 * w + rb.i0] += gout * (1.0f - ra.w1) * (1.0f - rb.w1);
                        dxp[ra.i0 * w + rb.i1] += gout * (1.0f - ra.w1) * rb.w1;
                        dxp[ra.i1 * w + rb.i0] += gout * ra.w1 * (1.0f - rb.w1);
                        dxp[ra.i1 * w + rb.i1] += gout * ra.w1 * rb.w1;
                    }
                }
            }
        });
    }
    return y;
}

Tensor scaled_sse(GradGraph* g, const Tensor& a, const Tensor& b, double scale) {
    if (a.shape() != b.shape()) {
        throw UsageError(strf("scaled_sse: shapes ", shape_str(a.shape()), " and ", shape_str(b.shape()),
                              " differ"));
    }
    const int64_t n = a.numel();
    double acc = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(a.data()[i]) - b.data()[i];
        acc += d * d;
    }
    Tensor y = Tensor::scalar(static_cast<float>(acc * scale));
    if (g && g->wants({&a, &b})) {
        auto ai = a.impl();
        auto bi = b.impl();
        auto yi = y.impl();
        g->record("scaled_sse", {&a, &b}, y, [=] {
            const float go = yi->g[0];
            const float k = static_cast<float>(2.0 * scale) * go;
            const bool want_a = needs_grad(*ai), want_b = needs_grad(*bi);
            float* da = want_a ? detail::grad_buf(*ai).data() : nullptr;
            float* db = want_b ? detail::grad_buf(*bi).data() : nullptr;
            for (int64_t i = 0; i < n; ++i) {
                const float d = ai->v[static_cast<size_t>(i)] - bi->v[static_cast<size_t>(i)];
                if (want_a) da[i] += k * d;
                if (want_b) db[i] -= k * d;
            }
        });
    }
    return y;
}

} // namespace pyrad
