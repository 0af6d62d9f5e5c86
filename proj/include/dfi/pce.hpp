#pragma once

#include "dfi/core_types.hpp"
#include "dfi/matrix.hpp"

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace dfi {

/// Degrees (u_1..u_s) of a product basis function.
struct MultiIndex {
    std::vector<int> degrees;

    [[nodiscard]] int order() const noexcept;
    [[nodiscard]] std::size_t size() const noexcept { return degrees.size(); }
    [[nodiscard]] bool is_constant() const noexcept { return order() == 0; }
    int operator[](std::size_t j) const { return degrees[j]; }

    bool operator==(const MultiIndex&) const = default;
};

/// Graded ordering: lower total order first; within one order, larger leading degree first,
/// so (0,0) < (1,0) < (0,1) < (2,0) < (1,1) < (0,2).
std::strong_ordering graded_compare(const MultiIndex& a, const MultiIndex& b);

struct GradedLess {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const { return graded_compare(a, b) < 0; }
};

struct MultiIndexHash {
    std::size_t operator()(const MultiIndex& u) const noexcept;
};

/// xi = 2 (nu - a) / (b - a) - 1. Throws ValidationError when a >= b.
double scale_to_reference(double nu, double lower, double upper);

/// sqrt(2n+1) P_n(x), orthonormal under the uniform probability measure on [-1, 1].
/// Rejects |x| > 1 + 1e-12.
double legendre_normalized(int degree, double x);

/// Same recurrence without the domain check; surrogates are evaluated outside the box
/// when chains wander past the bounds.
double legendre_normalized_unchecked(int degree, double x);

inline constexpr std::size_t default_index_cap = 2'000'000;

/// All multi-indices with |u| <= order in graded order. Throws ValidationError when the
/// cardinality C(s+p, p) exceeds `cap`.
std::vector<MultiIndex> total_order_index_set(std::size_t dimension, int order,
                                              std::size_t cap = default_index_cap);

/// phi_k(xi_j) for k <= max_degree, laid out [j * (max_degree + 1) + k].
class LegendreTable {
public:
    LegendreTable(std::span<const double> xi, int max_degree);
    [[nodiscard]] double operator()(std::size_t j, int k) const
    {
        return values_[j * static_cast<std::size_t>(max_degree_ + 1) + static_cast<std::size_t>(k)];
    }
    [[nodiscard]] int max_degree() const noexcept { return max_degree_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return dimension_; }

private:
    std::size_t dimension_;
    int max_degree_;
    std::vector<double> values_;
};

/// Product basis value Phi_u at a tabulated point.
double basis_value(const MultiIndex& u, const LegendreTable& table);

/// Sum_u c_u Phi_u(xi) over a ParameterSpace. Always contains the constant term.
class PceSurrogate {
public:
    PceSurrogate() = default;
    PceSurrogate(ParameterSpace space, std::vector<MultiIndex> indices, std::vector<double> coefficients);

    [[nodiscard]] std::size_t dimension() const noexcept { return space_.size(); }
    [[nodiscard]] const ParameterSpace& space() const noexcept { return space_; }
    [[nodiscard]] const std::vector<MultiIndex>& indices() const noexcept { return indices_; }
    [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] int max_degree() const noexcept { return max_degree_; }
    [[nodiscard]] double coefficient_of(const MultiIndex& u) const;

    /// Evaluates at physical parameters nu. Throws ValidationError on dimension mismatch.
    [[nodiscard]] double evaluate(std::span<const double> nu) const;
    [[nodiscard]] double evaluate_reference(std::span<const double> xi) const;
    [[nodiscard]] double evaluate(const LegendreTable& table) const;

private:
    ParameterSpace space_;
    std::vector<MultiIndex> indices_;
    std::vector<double> coefficients_;
    int max_degree_ = 0;
};

double eval_surrogate(const PceSurrogate& surrogate, std::span<const double> nu);

struct FitOptions {
    int order = 2;
    double prune_tau = 1e-4;
    int prune_passes = 5;
    std::size_t index_cap = default_index_cap;
};

struct FitResult {
    PceSurrogate surrogate;
    std::size_t failures = 0;   ///< rows dropped for non-finite outputs
    std::size_t used_samples = 0;
    int passes = 0;             ///< pruning passes that removed at least one term
    double train_error = 0.0;   ///< relative l2 error on the retained training rows
};

/// Least squares on the total-order basis, then repeated magnitude pruning: terms with
/// |c_u| < tau * max|c| are removed (never the constant) and the remainder refitted.
/// Throws NumericalError for rank-deficient designs or when every output is non-finite.
FitResult fit_surrogate(const ParameterSpace& space, const Matrix& inputs, std::span<const double> outputs,
                        const FitOptions& options);

/// sqrt( sum (f - g)^2 / sum f^2 ) over all entries.
double relative_l2_error(std::span<const double> reference, std::span<const double> approximation);
double relative_l2_error(const Matrix& reference, const Matrix& approximation);

/// Surrogates at increasing scalar station coordinates, sharing one ParameterSpace.
class SurrogateFamily {
public:
    SurrogateFamily() = default;
    SurrogateFamily(std::vector<double> coordinates, std::vector<PceSurrogate> surrogates);

    [[nodiscard]] std::size_t size() const noexcept { return coordinates_.size(); }
    [[nodiscard]] const std::vector<double>& coordinates() const noexcept { return coordinates_; }
    [[nodiscard]] const std::vector<PceSurrogate>& surrogates() const noexcept { return surrogates_; }
    [[nodiscard]] const ParameterSpace& space() const { return surrogates_.front().space(); }

    /// Linear interpolation of coefficients over the union of the bracketing index sets;
    /// exact copy at a station coordinate. Throws ValidationError outside the station range.
    [[nodiscard]] PceSurrogate interpolate(double t) const;

private:
    std::vector<double> coordinates_;
    std::vector<PceSurrogate> surrogates_;
};

PceSurrogate interpolate_coefficients(const SurrogateFamily& family, double t);

} // namespace dfi
