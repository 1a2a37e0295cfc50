#include "pathomics/ops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pathomics {

namespace {

void check_same_graph(Var a, Var b, const char* op) {
    if (a.graph != b.graph) {
        throw std::invalid_argument(std::string(op) + ": operands from different graphs");
    }
}

// C(m,n) += A(m,k) * B(k,n)
void mm_nn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            double av = arow[l];
            if (av == 0.0) continue;
            const double* brow = b + l * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C(m,k) += A(m,n) * B(k,n)^T
void mm_nt_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t n,
               std::size_t k) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * n;
        double* crow = c + i * k;
        for (std::size_t l = 0; l < k; ++l) {
            const double* brow = b + l * n;
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += arow[j] * brow[j];
            crow[l] += acc;
        }
    }
}

// C(k,n) += A(m,k)^T * B(m,n)
void mm_tn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
               std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        const double* brow = b + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            double av = arow[l];
            if (av == 0.0) continue;
            double* crow = c + l * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

template <typename F, typename DF>
Var make_unary(const char* tag, Var x, F f, DF df) {
    Graph& g = *x.graph;
    const Tensor& xv = g.value(x);
    Tensor out = Tensor::zeros(xv.shape);
    for (std::size_t i = 0; i < xv.data.size(); ++i) out.data[i] = f(xv.data[i]);
    std::size_t xid = x.id;
    // self id == node count at creation time
    std::size_t self = g.node_count();
    return g.make_node(tag, std::move(out), {xid}, [self, xid, df](Graph& gg) {
        const Tensor& adj = gg.adjoint_of(self);
        const Tensor& xval = gg.value_of(xid);
        const Tensor& yval = gg.value_of(self);
        Tensor dx = Tensor::zeros(xval.shape);
        for (std::size_t i = 0; i < dx.data.size(); ++i) {
            dx.data[i] = adj.data[i] * df(xval.data[i], yval.data[i]);
        }
        gg.add_adjoint(xid, dx);
    });
}

}  // namespace

Var matmul(Var a, Var b) {
    check_same_graph(a, b, "matmul");
    Graph& g = *a.graph;
    const Tensor& av = g.value(a);
    const Tensor& bv = g.value(b);
    if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.rows()) {
        throw std::invalid_argument("matmul: incompatible shapes " + shape_str(av.shape) + " vs " +
                                    shape_str(bv.shape));
    }
    std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
    Tensor out = Tensor::zeros({m, n});
    mm_nn_acc(av.data.data(), bv.data.data(), out.data.data(), m, k, n);
    std::size_t aid = a.id, bid = b.id;
    std::size_t self = g.node_count();
    return g.make_node("matmul", std::move(out), {aid, bid}, [self, aid, bid, m, k, n](Graph& gg) {
        const Tensor& adj = gg.adjoint_of(self);
        const Tensor& aval = gg.value_of(aid);
        const Tensor& bval = gg.value_of(bid);
        Tensor da = Tensor::zeros({m, k});
        mm_nt_acc(adj.data.data(), bval.data.data(), da.data.data(), m, n, k);
        gg.add_adjoint(aid, da);
        Tensor db = Tensor::zeros({k, n});
        mm_tn_acc(aval.data.data(), adj.data.data(), db.data.data(), m, k, n);
        gg.add_adjoint(bid, db);
    });
}

Var transpose(Var a) {
    Graph& g = *a.graph;
    const Tensor& av = g.value(a);
    if (av.rank() != 2) {
        throw std::invalid_argument("transpose: rank-2 required, got " + shape_str(av.shape));
    }
    std::size_t r = av.rows(), c = av.cols();
    Tensor out = Tensor::zeros({c, r});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.at(j, i) = av.at(i, j);
    std::size_t aid = a.id;
    std::size_t self = g.node_count();
    return g.make_node("transpose", std::move(out), {aid}, [self, aid, r, c](Graph& gg) {
        const Tensor& adj = gg.adjoint_of(self);
        Tensor da = Tensor::zeros({r, c});
        for (std::size_t i = 0; i < c; ++i)
            for (std::size_t j = 0; j < r; ++j) da.at(j, i) = adj.at(i, j);
        gg.add_adjoint(aid, da);
    });
}

Var add(Var a, Var b) {
    check_same_graph(a, b, "add");
    Graph& g = *a.graph;
    const Tensor& av = g.value(a);
    const Tensor& bv = g.value(b);
    require_same_shape(av, bv, "add");
    Tensor out = av;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += bv.data[i];
    std::size_t aid = a.id, bid = b.id;
    std::size_t self = g.node_count();
    return g.make_node("add", std::move(out), {aid, bid}, [self, aid, bid](Graph& gg) {
        const Tensor& adj = gg.adjoint_of(self);
        gg.add_adjoint(aid, adj);
        gg.add_adjoint(bid, adj);
    });
}

Var sub(Var a, Var b) {
    check_same_graph(a, b, "sub");
    Graph& g = *a.graph;
    const Tensor& av = g.value(a);
    const Tensor& bv = g.value(b);
    require_same_shape(av, bv, "sub");
    Tensor out = av;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= bv.data[i];
    std::size_t aid = a.id, bid = b.id;
    std::size_t self = g.node_count();
    return g.make_node("sub", std::move(out), {aid, bid}, [self, aid, bid](Graph& gg) {
        const Tensor& adj = gg.adjoint_of(self);
        gg.add_adjoint(aid, adj);
        Tensor db = adj;
        for (double& v : db.data) v = -v;
        gg.add_adjoint(bid, db);
    });
}

Var mul(Var a, Var b) {
    check_same_graph(a, b, "mul");
    Graph& g = *a.graph;
    const Tensor& av = g.value(a);
    const Tensor& bv = g.value(b);
    require_same_shape(av, bv, "mul");
    Tensor out = av;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= bv.data[i];
    std::size_t aid = a.id, bid = b.id;
    std::size_t self = g.node_count();
    return g.make_node("mul", std::move(out), {aid, bid}, [self, aid, bid](Graph& gg) {
        const Tensor& adj = gg.adjoint_of(self);
        const Tensor& aval = gg.value_of(aid);
        const Tensor& bval = gg.value_of(bid);
        Tensor da = Tensor::zeros(aval.shape);
        Tensor db = Tensor::zeros(bval.shape);
        for (std::size_t i = 0; i < adj.data.size(); ++i) {
            da.data[i] = adj.data[i] * bval.data[i];
            db.data[i] = adj.data[i] * aval.data[i];
        }
        gg.add_adjoint(aid, da);
        gg.add_adjoint(bid, db);
    });
}

Var div(Var a, Var b) {
    check_same_graph(a, b, "div");
    Graph& g = *a.graph;
    const Tensor& av = g.value(a);
    const Tensor& bv = g.value(b);
    require_same_shape(av, bv, "div");
    for (double v : bv.data) {
        if (v == 0.0) throw std::domain_error("div: zero denominator");
    }
    Tensor out = av;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] /= bv.data[i];
    std::size_t aid = a.id, bid = b.id;
    std::size_t self = g.node_count();
    return g.make_node("div", std::move(out), {aid, bid}, [self, aid, bid](Graph& gg) {
        const Tensor& adj = gg.adjoint_of(self);
        const Tensor& aval = gg.value_of(aid);
        const Tensor& bval = gg.value_of(bid);
        Tensor da = Tensor::zeros(aval.shape);
        Tensor db = Tensor::zeros(bval.shape);
        for (std::size_t i = 0; i < adj.data.size(); ++i) {
            da.data[i] = adj.data[i] / bval.data[i];
            db.data[i] = -adj.data[i] * aval.data[i] / (bval.data[i] * bval.data[i]);
        }
        gg.add_adjoint(aid, da);
        gg.add_adjoint(bid, db);
    });
}

Var add_rowvec(Var m, Var v) {
    check_same_graph(m, v, "add_rowvec");
    Graph& g = *m.graph;
    const Tensor& mv = g.value(m);
    const Tensor& vv = g.value(v);
    if (mv.rank() != 2 || vv.rank() != 1 || mv.cols() != vv.shape[0]) {
        throw std::invalid_argument("add_rowvec: incompatible shapes " + shape_str(mv.shape) +
                                    " vs " + shape_str(vv.shape));
    }
    std::size_t r = mv.rows(), c = mv.cols();
    Tensor out = mv;
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) += vv.data[j];
    std::size_t mid = m.id, vid = v.id;
    std::size_t self = g.node_count();
    return g.make_node("add_rowvec", std::move(out), {mid, vid}, [self, mid, vid, r, c](Graph& gg) {
        const Tensor& adj = gg.adjoint_of(self);
        gg.add_adjoint(mid, adj);
        Tensor dv = Tensor::zeros({c});
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) dv.data[j] += adj.at(i, j);
        gg.add_adjoint(vid, dv);
    });
}

Var affine(Var x, double scale, double shift) {
    Graph& g = *x.graph;
    const Tensor& xv = g.value(x);
    Tensor out = xv;
    for (double& v : out.data) v = scale * v + shift;
    std::size_t xid = x.id;
    std::size_t self = g.node_count();
    return g.make_node("affine", std::move(out), {xid}, [self, xid, scale](Graph& gg) {
        const Tensor& adj = gg.adjoint_of(self);
        Tensor dx = adj;
        for (double& v : dx.data) v *= scale;
        gg.add_adjoint(xid, dx);
    });
}

namespace {

struct Lanes {
    std::size_t count;   // number of independent lanes
    std::size_t length;  // entries per lane
    std::size_t stride;  // step between entries of one lane
    std::size_t pitch;   // step between lane starts
};

Lanes lanes_for(const Tensor& t, int axis, const char* op) {
    if (t.rank() == 1) {
        if (axis != 0) throw std::invalid_argument(std::string(op) + ": axis out of range for vector");
        return {1, t.shape[0], 1, 0};
    }
    if (t.rank() == 2) {
        if (axis == 1) return {t.rows(), t.cols(), 1, t.cols()};
        if (axis == 0) return {t.cols(), t.rows(), t.cols(), 1};
        throw std::invalid_argument(std::string(op) + ": axis out of range for matrix");
    }
    throw std::invalid_argument(std::string(op) + ": rank " + std::to_string(t.rank()) +
                                " unsupported");
}

}  // namespace

Var softmax(Var x, int axis) {
    Graph& g = *x.graph;
    const Tensor& xv = g.value(x);
    Lanes ln = lanes_for(xv, axis, "softmax");
    Tensor out = Tensor::zeros(xv.shape);
    for (std::size_t lane = 0; lane < ln.count; ++lane) {
        std::size_t base = lane * ln.pitch;
        double mx = xv.data[base];
        for (std::size_t i = 1; i < ln.length; ++i) mx = std::max(mx, xv.data[base + i * ln.stride]);
        double sum = 0.0;
        for (std::size_t i = 0; i < ln.length; ++i) {
            double e = std::exp(xv.data[base + i * ln.stride] - mx);
            out.data[base + i * ln.stride] = e;
            sum += e;
        }
        for (std::size_t i = 0; i < ln.length; ++i) out.data[base + i * ln.stride] /= sum;
    }
    std::size_t xid = x.id;
    std::size_t self = g.node_count();
    return g.make_node("softmax", std::move(out), {xid}, [self, xid, ln](Graph& gg) {
        const Tensor& adj = gg.adjoint_of(self);
        const Tensor& yval = gg.value_of(self);
        Tensor dx = Tensor::zeros(yval.shape);
        for (std::size_t lane = 0; lane < ln.count; ++lane) {
            std::size_t base = lane * ln.pitch;
            double dot = 0.0;
            for (std::size_t i = 0; i < ln.length; ++i) {
                std::size_t k = base + i * ln.stride;
                dot += adj.data[k] * yval.data[k];
            }
            for (std::size_t i = 0; i < ln.length; ++i) {
                std::size_t k = base + i * ln.stride;
                dx.data[k] = yval.data[k] * (adj.data[k] - dot);
            }
        }
        gg.add_adjoint(xid, dx);
    });
}

Var selu(Var x) {
    return make_unary(
        "selu", x,
        [](double v) {
            return v > 0.0 ? kSeluLambda * v : kSeluLambda * kSeluAlpha * (std::exp(v) - 1.0);
        },
        [](double v, double) {
            return v > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(v);
        });
}

Var tanh(Var x) {
    return make_unary(
        "tanh", x, [](double v) { return std::tanh(v); },
        [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var x) {
    return make_unary(
        "sigmoid", x,
        [](double v) {
            if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
            double e = std::exp(v);
            return e / (1.0 + e);
        },
        [](double, double y) { return y * (1.0 - y); });
}

Var relu(Var x) {
    return make_unary(
        "relu", x, [](double v) { return v > 0.0 ? v : 0.0; },
        [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var log(Var x) {
    const Tensor& xv = x.graph->value(x);
    for (double v : xv.data) {
        if (v <= 0.0) {
            throw std::domain_error("log: non-positive entry " + std::to_string(v));
        }
    }
    return make_unary(
        "log", x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Var sqrt(Var x) {
    const Tensor& xv = x.graph->value(x);
    for (double v : xv.data) {
        if (v <= 0.0) {
            throw std::domain_error("sqrt: non-positive entry " + std::to_string(v));
        }
    }
    return make_unary(
        "sqrt", x, [](double v) { return std::sqrt(v); },
        [](double, double y) { return 0.5 / y; });
}

Var square(Var x) {
    return make_unary(
        "square", x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Var clamp(Var x, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("clamp: lo must be < hi");
    return make_unary(
        "clamp", x,
        [lo, hi](double v) { return v < lo ? lo : (v > hi ? hi : v); },
        [lo, hi](double v, double) { return (v > lo && v < hi) ? 1.0 : 0.0; });
}

Var mean_all(Var x) {
    Graph& g = *x.graph;
    const Tensor& xv = g.value(x);
    double sum = 0.0;
    for (double v : xv.data) sum += v;
    double n = static_cast<double>(xv.data.size());
    std::size_t xid = x.id;
    std::size_t self = g.node_count();
    return g.make_node("mean", Tensor::scalar(sum / n), {xid}, [self, xid, n](Graph& gg) {
        const Tensor& adj = gg.adjoint_of(self);
        const Tensor& xval = gg.value_of(xid);
        Tensor dx = Tensor::full(xval.shape, adj.data[0] / n);
        gg.add_adjoint(xid, dx);
    });
}

Var sum_all(Var x) {
    Graph& g = *x.graph;
    const Tensor& xv = g.value(x);
    double sum = 0.0;
    for (double v : xv.data) sum += v;
    std::size_t xid = x.id;
    std::size_t self = g.node_count();
    return g.make_node("sum", Tensor::scalar(sum), {xid}, [self, xid](Graph& gg) {
        const Tensor& adj = gg.adjoint_of(self);
        const Tensor& xval = gg.value_of(xid);
        Tensor dx = Tensor::full(xval.shape, adj.data[0]);
        gg.add_adjoint(xid, dx);
    });
}

Var concat(const std::vector<Var>& parts, int axis) {
    if (parts.empty()) throw std::invalid_argument("concat: no parts");
    Graph& g = *parts[0].graph;
    for (Var p : parts) check_same_graph(parts[0], p, "concat");

    const Tensor& first = g.value(parts[0]);
    std::vector<std::size_t> pids;
    pids.reserve(parts.size());
    for (Var p : parts) pids.push_back(p.id);

    if (first.rank() == 1) {
        if (axis != 0) throw std::invalid_argument("concat: axis out of range for vectors");
        std::size_t total = 0;
        for (Var p : parts) {
            const Tensor& t = g.value(p);
            if (t.rank() != 1) throw std::invalid_argument("concat: mixed ranks");
            total += t.shape[0];
        }
        Tensor out = Tensor::zeros({total});
        std::size_t off = 0;
        std::vector<std::size_t> offsets, sizes;
        for (Var p : parts) {
            const Tensor& t = g.value(p);
            offsets.push_back(off);
            sizes.push_back(t.shape[0]);
            for (std::size_t i = 0; i < t.shape[0]; ++i) out.data[off + i] = t.data[i];
            off += t.shape[0];
        }
        std::size_t self = g.node_count();
        return g.make_node("concat", std::move(out), pids,
                           [self, pids, offsets, sizes](Graph& gg) {
                               const Tensor& adj = gg.adjoint_of(self);
                               for (std::size_t pi = 0; pi < pids.size(); ++pi) {
                                   Tensor dp = Tensor::zeros({sizes[pi]});
                                   for (std::size_t i = 0; i < sizes[pi]; ++i)
                                       dp.data[i] = adj.data[offsets[pi] + i];
                                   gg.add_adjoint(pids[pi], dp);
                               }
                           });
    }

    if (first.rank() != 2) throw std::invalid_argument("concat: rank unsupported");
    if (axis == 0) {
        std::size_t c = first.cols(), rtotal = 0;
        for (Var p : parts) {
            const Tensor& t = g.value(p);
            if (t.rank() != 2 || t.cols() != c)
                throw std::invalid_argument("concat: column mismatch " + shape_str(t.shape));
            rtotal += t.rows();
        }
        Tensor out = Tensor::zeros({rtotal, c});
        std::size_t roff = 0;
        std::vector<std::size_t> offsets, sizes;
        for (Var p : parts) {
            const Tensor& t = g.value(p);
            offsets.push_back(roff);
            sizes.push_back(t.rows());
            for (std::size_t i = 0; i < t.data.size(); ++i) out.data[roff * c + i] = t.data[i];
            roff += t.rows();
        }
        std::size_t self = g.node_count();
        return g.make_node("concat", std::move(out), pids,
                           [self, pids, offsets, sizes, c](Graph& gg) {
                               const Tensor& adj = gg.adjoint_of(self);
                               for (std::size_t pi = 0; pi < pids.size(); ++pi) {
                                   Tensor dp = Tensor::zeros({sizes[pi], c});
                                   for (std::size_t i = 0; i < dp.data.size(); ++i)
                                       dp.data[i] = adj.data[offsets[pi] * c + i];
                                   gg.add_adjoint(pids[pi], dp);
                               }
                           });
    }
    if (axis == 1) {
        std::size_t r = first.rows(), ctotal = 0;
        std::vector<std::size_t> widths;
        for (Var p : parts) {
            const Tensor& t = g.value(p);
            if (t.rank() != 2 || t.rows() != r)
                throw std::invalid_argument("concat: row mismatch " + shape_str(t.shape));
            widths.push_back(t.cols());
            ctotal += t.cols();
        }
        Tensor out = Tensor::zeros({r, ctotal});
        std::size_t coff = 0;
        std::vector<std::size_t> offsets;
        for (std::size_t pi = 0; pi < parts.size(); ++pi) {
            const Tensor& t = g.value(parts[pi]);
            offsets.push_back(coff);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < widths[pi]; ++j)
                    out.at(i, coff + j) = t.at(i, j);
            coff += widths[pi];
        }
        std::size_t self = g.node_count();
        return g.make_node("concat", std::move(out), pids,
                           [self, pids, offsets, widths, r](Graph& gg) {
                               const Tensor& adj = gg.adjoint_of(self);
                               for (std::size_t pi = 0; pi < pids.size(); ++pi) {
                                   Tensor dp = Tensor::zeros({r, widths[pi]});
                                   for (std::size_t i = 0; i < r; ++i)
                                       for (std::size_t j = 0; j < widths[pi]; ++j)
                                           dp.at(i, j) = adj.at(i, offsets[pi] + j);
                                   gg.add_adjoint(pids[pi], dp);
                               }
                           });
    }
    throw std::invalid_argument("concat: axis out of range");
}

Var slice(Var x, int axis, std::size_t start, std::size_t len) {
    Graph& g = *x.graph;
    const Tensor& xv = g.value(x);
    if (len == 0) throw std::invalid_argument("slice: empty slice");
    std::size_t xid = x.id;
    if (xv.rank() == 1) {
        if (axis != 0) throw std::invalid_argument("slice: axis out of range for vector");
        if (start + len > xv.shape[0])
            throw std::invalid_argument("slice: range past end of " + shape_str(xv.shape));
        Tensor out = Tensor::zeros({len});
        for (std::size_t i = 0; i < len; ++i) out.data[i] = xv.data[start + i];
        std::size_t self = g.node_count();
        std::size_t n = xv.shape[0];
        return g.make_node("slice", std::move(out), {xid}, [self, xid, start, len, n](Graph& gg) {
            const Tensor& adj = gg.adjoint_of(self);
            Tensor dx = Tensor::zeros({n});
            for (std::size_t i = 0; i < len; ++i) dx.data[start + i] = adj.data[i];
            gg.add_adjoint(xid, dx);
        });
    }
    if (xv.rank() != 2) throw std::invalid_argument("slice: rank unsupported");
    std::size_t r = xv.rows(), c = xv.cols();
    if (axis == 0) {
        if (start + len > r)
            throw std::invalid_argument("slice: range past end of " + shape_str(xv.shape));
        Tensor out = Tensor::zeros({len, c});
        for (std::size_t i = 0; i < len * c; ++i) out.data[i] = xv.data[start * c + i];
        std::size_t self = g.node_count();
        return g.make_node("slice", std::move(out), {xid}, [self, xid, start, len, r, c](Graph& gg) {
            const Tensor& adj = gg.adjoint_of(self);
            Tensor dx = Tensor::zeros({r, c});
            for (std::size_t i = 0; i < len * c; ++i) dx.data[start * c + i] = adj.data[i];
            gg.add_adjoint(xid, dx);
        });
    }
    if (axis == 1) {
        if (start + len > c)
            throw std::invalid_argument("slice: range past end of " + shape_str(xv.shape));
        Tensor out = Tensor::zeros({r, len});
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < len; ++j) out.at(i, j) = xv.at(i, start + j);
        std::size_t self = g.node_count();
        return g.make_node("slice", std::move(out), {xid}, [self, xid, start, len, r, c](Graph& gg) {
            const Tensor& adj = gg.adjoint_of(self);
            Tensor dx = Tensor::zeros({r, c});
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < len; ++j) dx.at(i, start + j) = adj.at(i, j);
            gg.add_adjoint(xid, dx);
        });
    }
    throw std::invalid_argument("slice: axis out of range");
}

Var reshape(Var x, std::vector<std::size_t> shape) {
    Graph& g = *x.graph;
    const Tensor& xv = g.value(x);
    if (shape_size(shape) != xv.data.size()) {
        throw std::invalid_argument("reshape: size mismatch " + shape_str(xv.shape) + " -> " +
                                    shape_str(shape));
    }
    Tensor out(shape, xv.data);
    std::size_t xid = x.id;
    std::size_t self = g.node_count();
    std::vector<std::size_t> old_shape = xv.shape;
    return g.make_node("reshape", std::move(out), {xid}, [self, xid, old_shape](Graph& gg) {
        const Tensor& adj = gg.adjoint_of(self);
        gg.add_adjoint(xid, Tensor(old_shape, adj.data));
    });
}

Var gather_rows(Var x, std::vector<std::size_t> rows) {
    Graph& g = *x.graph;
    const Tensor& xv = g.value(x);
    if (xv.rank() != 2) throw std::invalid_argument("gather_rows: rank-2 required");
    if (rows.empty()) throw std::invalid_argument("gather_rows: empty index set");
    std::size_t r = xv.rows(), c = xv.cols();
    for (std::size_t idx : rows) {
        if (idx >= r)
            throw std::invalid_argument("gather_rows: index " + std::to_string(idx) +
                                        " out of range for " + shape_str(xv.shape));
    }
    Tensor out = Tensor::zeros({rows.size(), c});
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t j = 0; j < c; ++j) out.at(t, j) = xv.at(rows[t], j);
    std::size_t xid = x.id;
    std::size_t self = g.node_count();
    return g.make_node("gather_rows", std::move(out), {xid}, [self, xid, rows, r, c](Graph& gg) {
        const Tensor& adj = gg.adjoint_of(self);
        Tensor dx = Tensor::zeros({r, c});
        for (std::size_t t = 0; t < rows.size(); ++t)
            for (std::size_t j = 0; j < c; ++j) dx.at(rows[t], j) += adj.at(t, j);
        gg.add_adjoint(xid, dx);
    });
}

Var alpha_dropout(Var x, double rate, bool training, SplitRng& rng) {
    if (rate < 0.0 || rate >= 1.0) {
        throw std::invalid_argument("alpha_dropout: rate " + std::to_string(rate) +
                                    " outside [0,1)");
    }
    if (!training || rate == 0.0) return x;
    Graph& g = *x.graph;
    const Tensor& xv = g.value(x);
    double q = 1.0 - rate;
    double sat = kSeluSaturation;
    double a = 1.0 / std::sqrt(q * (1.0 + rate * sat * sat));
    double b = -a * rate * sat;
    std::vector<unsigned char> keep(xv.data.size());
    Tensor out = Tensor::zeros(xv.shape);
    for (std::size_t i = 0; i < xv.data.size(); ++i) {
        keep[i] = rng.uniform() >= rate ? 1 : 0;
        out.data[i] = keep[i] ? a * xv.data[i] + b : a * sat + b;
    }
    std::size_t xid = x.id;
    std::size_t self = g.node_count();
    return g.make_node("alpha_dropout", std::move(out), {xid},
                       [self, xid, keep = std::move(keep), a](Graph& gg) {
                           const Tensor& adj = gg.adjoint_of(self);
                           Tensor dx = Tensor::zeros(gg.value_of(xid).shape);
                           for (std::size_t i = 0; i < dx.data.size(); ++i) {
                               if (keep[i]) dx.data[i] = a * adj.data[i];
                           }
                           gg.add_adjoint(xid, dx);
                       });
}

Var layer_norm_rows(Var x, Var gamma, Var beta, double eps) {
    check_same_graph(x, gamma, "layer_norm");
    check_same_graph(x, beta, "layer_norm");
    Graph& g = *x.graph;
    const Tensor& xv = g.value(x);
    const Tensor& gv = g.value(gamma);
    const Tensor& bv = g.value(beta);
    if (xv.rank() != 2 || gv.rank() != 1 || bv.rank() != 1 || gv.shape[0] != xv.cols() ||
        bv.shape[0] != xv.cols()) {
        throw std::invalid_argument("layer_norm: incompatible shapes " + shape_str(xv.shape) +
                                    ", " + shape_str(gv.shape) + ", " + shape_str(bv.shape));
    }
    std::size_t r = xv.rows(), c = xv.cols();
    Tensor out = Tensor::zeros({r, c});
    std::vector<double> inv_std(r), xhat(r * c);
    for (std::size_t i = 0; i < r; ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < c; ++j) mean += xv.at(i, j);
        mean /= static_cast<double>(c);
        double var = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            double d = xv.at(i, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(c);
        inv_std[i] = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < c; ++j) {
            double h = (xv.at(i, j) - mean) * inv_std[i];
            xhat[i * c + j] = h;
            out.at(i, j) = gv.data[j] * h + bv.data[j];
        }
    }
    std::size_t xid = x.id, gid = gamma.id, bid = beta.id;
    std::size_t self = g.node_count();
    return g.make_node(
        "layer_norm", std::move(out), {xid, gid, bid},
        [self, xid, gid, bid, r, c, inv_std = std::move(inv_std), xhat = std::move(xhat)](Graph& gg) {
            const Tensor& adj = gg.adjoint_of(self);
            const Tensor& gval = gg.value_of(gid);
            Tensor dx = Tensor::zeros({r, c});
            Tensor dgamma = Tensor::zeros({c});
            Tensor dbeta = Tensor::zeros({c});
            for (std::size_t i = 0; i < r; ++i) {
                double mean_dyh = 0.0, mean_dyh_xhat = 0.0;
                for (std::size_t j = 0; j < c; ++j) {
                    double dyh = adj.at(i, j) * gval.data[j];
                    double h = xhat[i * c + j];
                    mean_dyh += dyh;
                    mean_dyh_xhat += dyh * h;
                    dgamma.data[j] += adj.at(i, j) * h;
                    dbeta.data[j] += adj.at(i, j);
                }
                mean_dyh /= static_cast<double>(c);
                mean_dyh_xhat /= static_cast<double>(c);
                for (std::size_t j = 0; j < c; ++j) {
                    double dyh = adj.at(i, j) * gval.data[j];
                    double h = xhat[i * c + j];
                    dx.at(i, j) = (dyh - mean_dyh - h * mean_dyh_xhat) * inv_std[i];
                }
            }
            gg.add_adjoint(xid, dx);
            gg.add_adjoint(gid, dgamma);
            gg.add_adjoint(bid, dbeta);
        });
}

}  // namespace pathomics
