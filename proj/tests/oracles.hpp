#pragma once

// Independent reference implementations used to freeze expected values.
// Everything here is deliberately written from the formulas, not from the
// library code paths it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "pathomics/rng.hpp"
#include "pathomics/survival.hpp"
#include "pathomics/tensor.hpp"

namespace oracles {

using pathomics::SplitRng;
using pathomics::Tensor;

inline std::vector<double> softmax_direct(const std::vector<double>& x) {
    std::vector<double> e(x.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        e[i] = std::exp(x[i]);
        sum += e[i];
    }
    for (double& v : e) v /= sum;
    return e;
}

inline Tensor matmul_direct(const Tensor& a, const Tensor& b) {
    Tensor c = Tensor::zeros({a.rows(), b.cols()});
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += a.at(i, k) * b.at(k, j);
            c.at(i, j) = acc;
        }
    return c;
}

// Gated attention weights evaluated term by term: for each row h of the
// group, score = w . (tanh(h V1) * sigm(h V2)), then exp-normalize.
inline std::vector<double> gated_weights_direct(const Tensor& group, const Tensor& v1,
                                                const Tensor& v2, const Tensor& w) {
    std::size_t k = group.rows(), hidden = v1.cols();
    std::vector<double> scores(k, 0.0);
    for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t h = 0; h < hidden; ++h) {
            double t = 0.0, s = 0.0;
            for (std::size_t j = 0; j < group.cols(); ++j) {
                t += group.at(r, j) * v1.at(j, h);
                s += group.at(r, j) * v2.at(j, h);
            }
            double sig = 1.0 / (1.0 + std::exp(-s));
            scores[r] += w.at(h, 0) * std::tanh(t) * sig;
        }
    }
    return softmax_direct(scores);
}

inline std::vector<double> gated_pool_direct(const Tensor& group, const Tensor& v1,
                                             const Tensor& v2, const Tensor& w) {
    std::vector<double> a = gated_weights_direct(group, v1, v2, w);
    std::vector<double> pooled(group.cols(), 0.0);
    for (std::size_t r = 0; r < group.rows(); ++r)
        for (std::size_t j = 0; j < group.cols(); ++j) pooled[j] += a[r] * group.at(r, j);
    return pooled;
}

// SA(Q,K,V) = softmax(Q K^T / sqrt(d_k)) V, straight from the definition.
inline Tensor self_attention_direct(const Tensor& q, const Tensor& k, const Tensor& v) {
    std::size_t n = q.rows(), dk = q.cols();
    Tensor out = Tensor::zeros({n, v.cols()});
    double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> logits(k.rows(), 0.0);
        for (std::size_t r = 0; r < k.rows(); ++r) {
            for (std::size_t c = 0; c < dk; ++c) logits[r] += q.at(i, c) * k.at(r, c);
            logits[r] *= scale;
        }
        std::vector<double> a = softmax_direct(logits);
        for (std::size_t r = 0; r < k.rows(); ++r)
            for (std::size_t c = 0; c < v.cols(); ++c) out.at(i, c) += a[r] * v.at(r, c);
    }
    return out;
}

inline double mse_direct(const Tensor& a, const Tensor& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        double d = a.data[i] - b.data[i];
        sum += d * d;
    }
    return sum / static_cast<double>(a.data.size());
}

// Appendix-style NLL from hazards, S(-1)=1 convention.
inline double survival_nll_direct(const std::vector<double>& hazards, int y, int censored) {
    auto surv = [&](int r) {
        double s = 1.0;
        for (int u = 0; u <= r; ++u) s *= 1.0 - hazards[static_cast<std::size_t>(u)];
        return s;
    };
    if (censored == 1) return -std::log(surv(y));
    return -std::log(surv(y - 1)) - std::log(hazards[static_cast<std::size_t>(y)]);
}

// One Adam trajectory on plain scalars.
struct ScalarAdam {
    double m = 0.0, v = 0.0;
    long long t = 0;
    double step(double param, double grad, double lr, double b1, double b2, double eps) {
        ++t;
        m = b1 * m + (1 - b1) * grad;
        v = b2 * v + (1 - b2) * grad * grad;
        double mhat = m / (1 - std::pow(b1, static_cast<double>(t)));
        double vhat = v / (1 - std::pow(b2, static_cast<double>(t)));
        return param - lr * mhat / (std::sqrt(vhat) + eps);
    }
};

// All-pairs concordance with explicit comparability predicate.
inline double c_index_bruteforce(const std::vector<double>& risks,
                                 const std::vector<pathomics::SurvivalRecord>& records) {
    long long comparable = 0, concordant = 0, tied = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (std::size_t j = 0; j < records.size(); ++j) {
            if (i == j) continue;
            if (records[i].event != 1) continue;
            if (!(records[i].os_months < records[j].os_months)) continue;
            ++comparable;
            if (risks[i] > risks[j]) ++concordant;
            else if (risks[i] == risks[j]) ++tied;
        }
    }
    return (static_cast<double>(concordant) + 0.5 * static_cast<double>(tied)) /
           static_cast<double>(comparable);
}

inline Tensor random_tensor(std::vector<std::size_t> shape, SplitRng& rng, double scale = 1.0) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& v : t.data) v = scale * rng.normal();
    return t;
}

// Kendall tau-b between two sequences.
inline double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
    long long concordant = 0, discordant = 0, tx = 0, ty = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            double dx = x[i] - x[j], dy = y[i] - y[j];
            if (dx == 0.0 && dy == 0.0) continue;
            if (dx == 0.0) { ++tx; continue; }
            if (dy == 0.0) { ++ty; continue; }
            if ((dx > 0) == (dy > 0)) ++concordant; else ++discordant;
        }
    }
    double n0 = static_cast<double>(concordant + discordant + tx + ty);
    double denom = std::sqrt((static_cast<double>(concordant + discordant + tx)) *
                             (static_cast<double>(concordant + discordant + ty)));
    (void)n0;
    if (denom == 0.0) return 0.0;
    return static_cast<double>(concordant - discordant) / denom;
}

}  // namespace oracles
