#pragma once

#include <Eigen/Core>

#include <span>

namespace dfi {

/// Row-major so that each sample (row) is a contiguous span.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const Matrix& m, Eigen::Index r)
{
    return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

inline std::span<double> row_span(Matrix& m, Eigen::Index r)
{
    return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

} // namespace dfi
