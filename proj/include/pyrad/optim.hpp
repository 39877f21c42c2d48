#pragma once

#include <span>
#include <string>
#include <vector>

#include "pyrad/rng.hpp"
#include "pyrad/tensor.hpp"

namespace pyrad {

struct NamedTensor {
    std::string name;
    Tensor t;
};

// Orthonormal weight init: the tensor is flattened to (extent 0, rest) and
// whichever side is smaller comes out orthonormal (QQ^T = I within f32).
// Factorization runs in f64 via Householder QR, signs fixed from diag(R).
Tensor orthogonal_init(Shape shape, Rng& rng, bool requires_grad = true);
Tensor orthogonal_init(Shape shape, uint64_t seed, bool requires_grad = true);

struct AdamConfig {
    float lr = 1e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
    float weight_decay = 1e-4f;
    // false: classic L2, g <- g + wd*theta. true: decoupled decay step.
    bool decoupled_weight_decay = false;
};

// Adam over a fixed parameter list. Moment buffers mirror the parameter
// shapes; the step counter drives bias correction.
class Adam {
public:
    Adam(std::vector<NamedTensor> params, AdamConfig cfg);

    // Consumes the populated grads of every bound parameter.
    void step();

    int64_t step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }
    std::span<const NamedTensor> params() const { return params_; }

    // Moment buffers + step counter as named tensors (optim.* prefix).
    std::vector<NamedTensor> state() const;
    void load_state(const std::vector<NamedTensor>& state);

private:
    std::vector<NamedTensor> params_;
    std::vector<std::vector<float>> m_;
    std::vector<std::vector<float>> v_;
    int64_t step_ = 0;
    AdamConfig cfg_;
};

} // namespace pyrad
