#include "pathomics/graph.hpp"

#include <stdexcept>

namespace pathomics {

Var Graph::leaf(Tensor value, std::string tag) {
    (void)tag;
    nodes_.push_back(Node{std::move(value), Tensor{}, {}, nullptr, "leaf"});
    return Var{this, nodes_.size() - 1};
}

Var Graph::param(Tensor& stored, const std::string& name) {
    auto it = bound_.find(&stored);
    if (it != bound_.end()) return Var{this, it->second};
    Var v = leaf(stored, "param");
    bound_.emplace(&stored, v.id);
    bindings_.push_back(Binding{&stored, v.id, name});
    return v;
}

Var Graph::make_node(const char* tag, Tensor value, std::vector<std::size_t> parents,
                     BackwardFn backward) {
    if (!value.all_finite()) {
        throw std::runtime_error(std::string(tag) + ": non-finite value in forward pass");
    }
    nodes_.push_back(Node{std::move(value), Tensor{}, std::move(parents), std::move(backward), tag});
    return Var{this, nodes_.size() - 1};
}

void Graph::add_adjoint(std::size_t id, const Tensor& contribution) {
    Tensor& slot = adjoints_[id];
    if (slot.data.empty()) {
        slot = contribution;
        return;
    }
    for (std::size_t i = 0; i < slot.data.size(); ++i) slot.data[i] += contribution.data[i];
}

void Graph::backward(Var loss) {
    if (loss.graph != this) throw std::invalid_argument("backward: var from another graph");
    adjoints_.assign(nodes_.size(), Tensor{});
    adjoints_[loss.id] = Tensor::ones(nodes_[loss.id].value.shape);
    backward_visits_ = 0;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
        if (adjoints_[i].data.empty()) continue;
        ++backward_visits_;
        if (nodes_[i].backward) nodes_[i].backward(*this);
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (adjoints_[i].data.empty()) continue;
        Node& n = nodes_[i];
        if (n.grad.data.empty()) n.grad = Tensor::zeros(n.value.shape);
        for (std::size_t k = 0; k < n.grad.data.size(); ++k) n.grad.data[k] += adjoints_[i].data[k];
    }
    adjoints_.clear();
}

const Tensor& Graph::grad(Var v) {
    Node& n = nodes_[v.id];
    if (n.grad.data.empty()) n.grad = Tensor::zeros(n.value.shape);
    return n.grad;
}

Tensor Graph::grad_for(const Tensor& param) const {
    auto it = bound_.find(&param);
    if (it == bound_.end()) return Tensor::zeros(param.shape);
    const Node& n = nodes_[it->second];
    if (n.grad.data.empty()) return Tensor::zeros(param.shape);
    return n.grad;
}

void Graph::zero_grad() {
    for (Node& n : nodes_) n.grad = Tensor{};
}

void Graph::reset() {
    nodes_.clear();
    adjoints_.clear();
    bound_.clear();
    bindings_.clear();
    backward_visits_ = 0;
}

}  // namespace pathomics
