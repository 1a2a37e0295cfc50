#pragma once

#include <vector>

#include "pathomics/graph.hpp"
#include "pathomics/rng.hpp"

namespace pathomics {

// Canonical self-normalizing network constants.
inline constexpr double kSeluLambda = 1.0507009873554805;
inline constexpr double kSeluAlpha = 1.6732632423543772;
inline constexpr double kSeluSaturation = -kSeluLambda * kSeluAlpha;

// a {m,k} x b {k,n} -> {m,n}
Var matmul(Var a, Var b);
Var transpose(Var a);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
// m {r,c} + v {c}, broadcast over rows
Var add_rowvec(Var m, Var v);
// scale * x + shift, elementwise
Var affine(Var x, double scale, double shift);
inline Var neg(Var x) { return affine(x, -1.0, 0.0); }

// Max-subtracted, so finite inputs can never overflow. axis 0 for vectors;
// axis 0 (columns) or 1 (rows) for matrices.
Var softmax(Var x, int axis);

Var selu(Var x);
Var tanh(Var x);
Var sigmoid(Var x);
Var relu(Var x);
// strictly positive input required
Var log(Var x);
Var sqrt(Var x);
Var square(Var x);
Var clamp(Var x, double lo, double hi);

Var mean_all(Var x);
Var sum_all(Var x);

Var concat(const std::vector<Var>& parts, int axis);
Var slice(Var x, int axis, std::size_t start, std::size_t len);
Var reshape(Var x, std::vector<std::size_t> shape);
// out row t = x row rows[t]; duplicate indices allowed
Var gather_rows(Var x, std::vector<std::size_t> rows);

// Drops entries to the SeLU saturation value and rescales so zero-mean
// unit-variance inputs keep their moments in expectation. Identity when
// training is off or rate is 0.
Var alpha_dropout(Var x, double rate, bool training, SplitRng& rng);

// y = gamma * (x - mean_row) / sqrt(var_row + eps) + beta, per row of x.
Var layer_norm_rows(Var x, Var gamma, Var beta, double eps = 1e-5);

}  // namespace pathomics
