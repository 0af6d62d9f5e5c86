#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version (dfi::kernels) and a serial
// reference (dfi::kernels::serial) with identical per-element arithmetic, so the two agree
// bit for bit regardless of thread count.

#include "dfi/matrix.hpp"
#include "dfi/pce.hpp"
#include "dfi/predictor.hpp"

#include <functional>
#include <span>
#include <vector>

namespace dfi::kernels {

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Row l, column i: Phi_{u_i}(xi_l). Accepts points outside [-1, 1].
Matrix design_matrix(const std::vector<MultiIndex>& indices, const Matrix& xi);

/// Surrogate value at each row of `nu`.
std::vector<double> evaluate_batch(const PceSurrogate& surrogate, const Matrix& nu);

/// Row m, column n: prediction at station n for posterior sample m.
Matrix pushforward(const Matrix& samples, const Predictor& predictor);

/// f applied to each row of x.
std::vector<double> evaluate_rows(const ScalarFunction& f, const Matrix& x);

namespace serial {
Matrix design_matrix(const std::vector<MultiIndex>& indices, const Matrix& xi);
std::vector<double> evaluate_batch(const PceSurrogate& surrogate, const Matrix& nu);
Matrix pushforward(const Matrix& samples, const Predictor& predictor);
std::vector<double> evaluate_rows(const ScalarFunction& f, const Matrix& x);
} // namespace serial

/// Sets the OpenMP team size; 0 keeps the runtime default.
void set_workers(int workers);
int max_workers();

} // namespace dfi::kernels
