#include "pyrad/optim.hpp"

#include <cmath>

#include "pyrad/common.hpp"

namespace pyrad {

namespace {

// Householder QR of a (rows x cols) column-major-free row-major matrix with
// rows >= cols; returns Q (rows x cols) with orthonormal columns, columns
// sign-fixed so diag(R) > 0.
std::vector<double> thin_q(std::vector<double> a, int rows, int cols) {
    std::vector<std::vector<double>> vs;
    vs.reserve(static_cast<size_t>(cols));
    std::vector<double> rdiag(static_cast<size_t>(cols));
    for (int k = 0; k < cols; ++k) {
        double norm = 0.0;
        for (int i = k; i < rows; ++i) norm += a[static_cast<size_t>(i) * cols + k] * a[static_cast<size_t>(i) * cols + k];
        norm = std::sqrt(norm);
        std::vector<double> v(static_cast<size_t>(rows - k));
        const double akk = a[static_cast<size_t>(k) * cols + k];
        const double alpha = akk >= 0.0 ? -norm : norm;
        v[0] = akk - alpha;
        for (int i = k + 1; i < rows; ++i) v[static_cast<size_t>(i - k)] = a[static_cast<size_t>(i) * cols + k];
        double vnorm2 = 0.0;
        for (double x : v) vnorm2 += x * x;
        if (vnorm2 > 0.0) {
            for (int j = k; j < cols; ++j) {
                double dot = 0.0;
                for (int i = k; i < rows; ++i) dot += v[static_cast<size_t>(i - k)] * a[static_cast<size_t>(i) * cols + j];
                const double f = 2.0 * dot / vnorm2;
                for (int i = k; i < rows; ++i) a[static_cast<size_t>(i) * cols + j] -= f * v[static_cast<size_t>(i - k)];
            }
        }
        rdiag[static_cast<size_t>(k)] = a[static_cast<size_t>(k) * cols + k];
        vs.push_back(std::move(v));
    }
    // Accumulate Q = H_0 ... H_{c-1} applied to the first `cols` columns of I.
    std::vector<double> q(static_cast<size_t>(rows) * cols, 0.0);
    for (int j = 0; j < cols; ++j) q[static_cast<size_t>(j) * cols + j] = 1.0;
    for (int k = cols - 1; k >= 0; --k) {
        const auto& v = vs[static_cast<size_t>(k)];
        double vnorm2 = 0.0;
        for (double x : v) vnorm2 += x * x;
        if (vnorm2 == 0.0) continue;
        for (int j = 0; j < cols; ++j) {
            double dot = 0.0;
            for (int i = k; i < rows; ++i) dot += v[static_cast<size_t>(i - k)] * q[static_cast<size_t>(i) * cols + j];
            const double f = 2.0 * dot / vnorm2;
            for (int i = k; i < rows; ++i) q[static_cast<size_t>(i) * cols + j] -= f * v[static_cast<size_t>(i - k)];
        }
    }
    for (int j = 0; j < cols; ++j) {
        if (rdiag[static_cast<size_t>(j)] < 0.0) {
            for (int i = 0; i < rows; ++i) q[static_cast<size_t>(i) * cols + j] = -q[static_cast<size_t>(i) * cols + j];
        }
    }
    return q;
}

} // namespace

Tensor orthogonal_init(Shape shape, Rng& rng, bool requires_grad) {
    if (shape.empty()) throw ConfigError("orthogonal_init: empty shape");
    const int64_t out = shape[0];
    const int64_t fan_in = shape_numel(shape) / out;
    if (out < 1 || fan_in < 1) throw ConfigError(strf("orthogonal_init: degenerate shape ", shape_str(shape)));

    // Work on a tall matrix so Q has orthonormal columns; transpose back if
    // the flattened weight is wide.
    const bool wide = out <= fan_in;
    const int rows = static_cast<int>(wide ? fan_in : out);
    const int cols = static_cast<int>(wide ? out : fan_in);
    std::vector<double> gauss(static_cast<size_t>(rows) * cols);
    for (double& x : gauss) x = rng.normal();
    const std::vector<double> q = thin_q(std::move(gauss), rows, cols);

    Tensor t(shape, requires_grad);
    float* dst = t.data();
    if (wide) {
        for (int64_t r = 0; r < out; ++r) {
            for (int64_t c = 0; c < fan_in; ++c) {
                dst[r * fan_in + c] = static_cast<float>(q[static_cast<size_t>(c) * out + r]);
            }
        }
    } else {
        for (size_t i = 0; i < q.size(); ++i) dst[i] = static_cast<float>(q[i]);
    }
    return t;
}

Tensor orthogonal_init(Shape shape, uint64_t seed, bool requires_grad) {
    Rng rng(seed);
    return orthogonal_init(std::move(shape), rng, requires_grad);
}

Adam::Adam(std::vector<NamedTensor> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
    if (cfg_.lr <= 0.0f) throw ConfigError("adam: learning rate must be positive");
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (const auto& p : params_) {
        m_.emplace_back(static_cast<size_t>(p.t.numel()), 0.0f);
        v_.emplace_back(static_cast<size_t>(p.t.numel()), 0.0f);
    }
}

void Adam::step() {
    ++step_;
    const double bc1 = 1.0 - std::pow(static_cast<double>(cfg_.beta1), static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(static_cast<double>(cfg_.beta2), static_cast<double>(step_));
    for (size_t pi = 0; pi < params_.size(); ++pi) {
        Tensor& t = params_[pi].t;
        if (!t.has_grad()) {
            throw UsageError(strf("adam: parameter '", params_[pi].name, "' has no gradient"));
        }
        float* theta = t.data();
        std::span<const float> grad = t.grad();
        float* m = m_[pi].data();
        float* v = v_[pi].data();
        const int64_t n = t.numel();
        for (int64_t i = 0; i < n; ++i) {
            float gval = grad[static_cast<size_t>(i)];
            if (!std::isfinite(gval)) {
                throw NumericError(strf("adam: non-finite gradient in '", params_[pi].name, "' at index ", i,
                                        " on step ", step_));
            }
            if (cfg_.weight_decay != 0.0f && !cfg_.decoupled_weight_decay) gval += cfg_.weight_decay * theta[i];
            m[i] = cfg_.beta1 * m[i] + (1.0f - cfg_.beta1) * gval;
            v[i] = cfg_.beta2 * v[i] + (1.0f - cfg_.beta2) * gval * gval;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            double upd = cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
            if (cfg_.weight_decay != 0.0f && cfg_.decoupled_weight_decay) {
                upd += static_cast<double>(cfg_.lr) * cfg_.weight_decay * theta[i];
            }
            theta[i] -= static_cast<float>(upd);
        }
    }
}

std::vector<NamedTensor> Adam::state() const {
    std::vector<NamedTensor> out;
    out.push_back({"optim.step", Tensor::scalar(static_cast<float>(step_))});
    for (size_t pi = 0; pi < params_.size(); ++pi) {
        out.push_back({"optim.m." + params_[pi].name, Tensor::from(params_[pi].t.shape(), m_[pi])});
        out.push_back({"optim.v." + params_[pi].name, Tensor::from(params_[pi].t.shape(), v_[pi])});
    }
    return out;
}

void Adam::load_state(const std::vector<NamedTensor>& state) {
    bool saw_step = false;
    size_t matched = 0;
    for (const auto& nt : state) {
        if (nt.name == "optim.step") {
            step_ = static_cast<int64_t>(nt.t.item());
            saw_step = true;
            continue;
        }
        for (size_t pi = 0; pi < params_.size(); ++pi) {
            const bool is_m = nt.name == "optim.m." + params_[pi].name;
            const bool is_v = nt.name == "optim.v." + params_[pi].name;
            if (!is_m && !is_v) continue;
            if (nt.t.numel() != params_[pi].t.numel()) {
                throw DataError(strf("optimizer state '", nt.name, "' has ", nt.t.numel(), " values, expected ",
                                     params_[pi].t.numel()));
            }
            auto& dst = is_m ? m_[pi] : v_[pi];
            dst.assign(nt.t.data(), nt.t.data() + nt.t.numel());
            ++matched;
        }
    }
    if (!saw_step || matched != 2 * params_.size()) {
        throw DataError(strf("optimizer state incomplete: matched ", matched, " of ", 2 * params_.size(),
                             " moment tensors", saw_step ? "" : ", step counter missing"));
    }
}

} // namespace pyrad
