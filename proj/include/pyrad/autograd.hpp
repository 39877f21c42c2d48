#pragma once

#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

#include "pyrad/tensor.hpp"

namespace pyrad {

// Reverse-mode tape. Operators record one node per call (op kind, inputs,
// output, backward closure) in forward order; backward() replays the tape in
// reverse exactly once. Single-threaded per instance.
class GradGraph {
public:
    GradGraph() = default;
    ~GradGraph();
    GradGraph(const GradGraph&) = delete;
    GradGraph& operator=(const GradGraph&) = delete;

    // True when at least one input is a requires_grad leaf or was produced
    // by this graph. Operators skip recording otherwise, so frozen
    // subnetworks run tape-free.
    bool wants(std::initializer_list<const Tensor*> inputs) const;

    void record(const char* op, std::initializer_list<const Tensor*> inputs, const Tensor& output,
                std::function<void()> backward_fn);

    // Seeds d(loss)/d(loss)=1 and accumulates grads into every reachable
    // tensor; requires_grad leaves keep theirs, intermediate buffers are
    // released. One backward per recorded forward.
    void backward(const Tensor& loss);

    size_t size() const { return nodes_.size(); }
    void reset();

private:
    struct Node {
        const char* op;
        std::vector<std::shared_ptr<detail::TensorImpl>> inputs;
        std::shared_ptr<detail::TensorImpl> output;
        std::function<void()> backward_fn;
    };

    void unlink_outputs();

    std::vector<Node> nodes_;
    bool used_ = false;
};

namespace detail {

// Grad buffer of t, allocated zero-filled on first use.
std::vector<float>& grad_buf(TensorImpl& t);

} // namespace detail

// Central finite differences (f(x+h*e_i) - f(x-h*e_i)) / (2h) per element.
// Gradient oracle for the tape; lives in the engine so the CLI self-check
// can use it too.
Tensor finite_difference(const std::function<float(const Tensor&)>& f, const Tensor& x, float h = 1e-3f);

} // namespace pyrad
