#pragma once

#include "pyrad/autograd.hpp"
#include "pyrad/tensor.hpp"

namespace pyrad::detail {

// True while a backward pass should deposit a gradient into t: either a
// requires_grad leaf or an intermediate still linked to a live tape.
inline bool needs_grad(const TensorImpl& t) {
    return t.requires_grad || (t.graph != nullptr && t.node >= 0);
}

inline void check_4d(const Tensor& t, const char* op, const char* role) {
    if (!t.defined() || t.ndim() != 4) {
        throw ConfigError(strf(op, ": ", role, " must be N,C,H,W, got ",
                               t.defined() ? shape_str(t.shape()) : std::string("<undefined>")));
    }
}

} // namespace pyrad::detail
