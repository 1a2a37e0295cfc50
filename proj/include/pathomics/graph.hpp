#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pathomics/tensor.hpp"

namespace pathomics {

class Graph;

// Handle to a node on a Graph. Cheap to copy; valid until Graph::reset().
struct Var {
    Graph* graph = nullptr;
    std::size_t id = 0;

    bool valid() const { return graph != nullptr; }
};

// Define-by-run reverse-mode tape. Nodes are appended in forward order, so
// reverse creation order is a topological order for the backward sweep.
//
// backward() propagates adjoints through a scratch buffer and then folds the
// result into each node's persistent grad, so repeated backward calls without
// zero_grad() accumulate exact multiples. Not shareable across threads.
class Graph {
  public:
    using BackwardFn = std::function<void(Graph&)>;

    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    // Constant input; no gradient tracking beyond the node itself.
    Var leaf(Tensor value, std::string tag = "leaf");

    // Binds an externally owned parameter tensor. Binding the same tensor
    // twice returns the same node so fan-out accumulates naturally.
    Var param(Tensor& stored, const std::string& name = "");

    Var make_node(const char* tag, Tensor value, std::vector<std::size_t> parents,
                  BackwardFn backward);

    // Seeds the loss adjoint with ones and sweeps the tape once. Each node's
    // persistent grad receives exactly one adjoint contribution per call.
    void backward(Var loss);

    void zero_grad();
    // Drops all nodes and bindings; keeps buffer capacity for the next pass.
    void reset();

    const Tensor& value(Var v) const { return nodes_[v.id].value; }
    const Tensor& grad(Var v);

    std::size_t node_count() const { return nodes_.size(); }
    std::size_t backward_visits() const { return backward_visits_; }

    struct Binding {
        Tensor* param;
        std::size_t node;
        std::string name;
    };
    const std::vector<Binding>& bindings() const { return bindings_; }
    // Gradient for a bound parameter tensor; zeros if it was never bound or
    // never reached by backward.
    Tensor grad_for(const Tensor& param) const;

    // Low-level access for operator backward rules. Adjoint slots are only
    // alive during a backward() sweep.
    const Tensor& value_of(std::size_t id) const { return nodes_[id].value; }
    void add_adjoint(std::size_t id, const Tensor& contribution);
    const Tensor& adjoint_of(std::size_t id) const { return adjoints_[id]; }
    bool has_adjoint(std::size_t id) const {
        return id < adjoints_.size() && !adjoints_[id].data.empty();
    }

  private:
    struct Node {
        Tensor value;
        Tensor grad;  // lazily shaped on first accumulation
        std::vector<std::size_t> parents;
        BackwardFn backward;
        const char* tag = "";
    };

    std::vector<Node> nodes_;
    std::vector<Tensor> adjoints_;
    std::unordered_map<const Tensor*, std::size_t> bound_;
    std::vector<Binding> bindings_;
    std::size_t backward_visits_ = 0;
};

}  // namespace pathomics
