#include "dfi/pce.hpp"

#include "dfi/errors.hpp"
#include "dfi/kernels.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_set>

namespace dfi {

int MultiIndex::order() const noexcept
{
    return std::accumulate(degrees.begin(), degrees.end(), 0);
}

std::strong_ordering graded_compare(const MultiIndex& a, const MultiIndex& b)
{
    if (auto c = a.order() <=> b.order(); c != 0) return c;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t j = 0; j < n; ++j) {
        if (a.degrees[j] != b.degrees[j]) return b.degrees[j] <=> a.degrees[j];
    }
    return a.size() <=> b.size();
}

std::size_t MultiIndexHash::operator()(const MultiIndex& u) const noexcept
{
    std::size_t h = 1469598103934665603ULL;
    for (int d : u.degrees) {
        h ^= static_cast<std::size_t>(d) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

double scale_to_reference(double nu, double lower, double upper)
{
    if (!(lower < upper)) throw ValidationError("scale_to_reference: degenerate bounds");
    return 2.0 * (nu - lower) / (upper - lower) - 1.0;
}

double legendre_normalized_unchecked(int degree, double x)
{
    double p_prev = 1.0;
    if (degree == 0) return 1.0;
    double p = x;
    for (int n = 1; n < degree; ++n) {
        const double next = ((2.0 * n + 1.0) * x * p - n * p_prev) / (n + 1.0);
        p_prev = p;
        p = next;
    }
    return std::sqrt(2.0 * degree + 1.0) * p;
}

double legendre_normalized(int degree, double x)
{
    if (degree < 0) throw ValidationError("legendre_normalized: negative degree");
    if (!(std::abs(x) <= 1.0 + 1e-12)) throw ValidationError("legendre_normalized: |x| > 1");
    return legendre_normalized_unchecked(degree, x);
}

namespace {

void append_with_order(std::vector<MultiIndex>& out, std::vector<int>& current, std::size_t position, int remaining)
{
    if (position + 1 == current.size()) {
        current[position] = remaining;
        out.push_back(MultiIndex{current});
        return;
    }
    for (int d = remaining; d >= 0; --d) {
        current[position] = d;
        append_with_order(out, current, position + 1, remaining - d);
    }
    current[position] = 0;
}

} // namespace

std::vector<MultiIndex> total_order_index_set(std::size_t dimension, int order, std::size_t cap)
{
    if (dimension < 1) throw ValidationError("total_order_index_set: dimension must be >= 1");
    if (order < 0) throw ValidationError("total_order_index_set: order must be >= 0");
    // C(s+p, p) built incrementally; each partial product is itself a binomial coefficient.
    long double count = 1.0L;
    for (int i = 1; i <= order; ++i) {
        count = count * static_cast<long double>(dimension + static_cast<std::size_t>(i)) / i;
        if (count > static_cast<long double>(cap)) {
            throw ValidationError("total_order_index_set: basis size exceeds the cap of " + std::to_string(cap) +
                                  " terms");
        }
    }
    std::vector<MultiIndex> out;
    out.reserve(static_cast<std::size_t>(std::llround(count)));
    std::vector<int> current(dimension, 0);
    for (int d = 0; d <= order; ++d) append_with_order(out, current, 0, d);
    return out;
}

LegendreTable::LegendreTable(std::span<const double> xi, int max_degree)
    : dimension_(xi.size())
    , max_degree_(max_degree)
    , values_(xi.size() * static_cast<std::size_t>(max_degree + 1))
{
    const auto stride = static_cast<std::size_t>(max_degree + 1);
    for (std::size_t j = 0; j < xi.size(); ++j) {
        double* row = values_.data() + j * stride;
        const double x = xi[j];
        double p_prev = 1.0;
        double p = x;
        row[0] = 1.0;
        if (max_degree >= 1) row[1] = std::sqrt(3.0) * x;
        for (int n = 1; n < max_degree; ++n) {
            const double next = ((2.0 * n + 1.0) * x * p - n * p_prev) / (n + 1.0);
            p_prev = p;
            p = next;
            row[n + 1] = std::sqrt(2.0 * (n + 1) + 1.0) * p;
        }
    }
}

double basis_value(const MultiIndex& u, const LegendreTable& table)
{
    double value = 1.0;
    for (std::size_t j = 0; j < u.degrees.size(); ++j) {
        if (u.degrees[j] != 0) value *= table(j, u.degrees[j]);
    }
    return value;
}

PceSurrogate::PceSurrogate(ParameterSpace space, std::vector<MultiIndex> indices, std::vector<double> coefficients)
    : space_(std::move(space))
    , indices_(std::move(indices))
    , coefficients_(std::move(coefficients))
{
    if (indices_.size() != coefficients_.size()) {
        throw ValidationError("PceSurrogate: index and coefficient counts differ");
    }
    std::unordered_set<MultiIndex, MultiIndexHash> seen;
    bool has_constant = false;
    for (const auto& u : indices_) {
        if (u.size() != space_.size()) throw ValidationError("PceSurrogate: multi-index length does not match dimension");
        for (int d : u.degrees) {
            if (d < 0) throw ValidationError("PceSurrogate: negative degree");
            max_degree_ = std::max(max_degree_, d);
        }
        if (!seen.insert(u).second) throw ValidationError("PceSurrogate: duplicate multi-index");
        has_constant = has_constant || u.is_constant();
    }
    if (!has_constant) throw ValidationError("PceSurrogate: constant term missing");
}

double PceSurrogate::coefficient_of(const MultiIndex& u) const
{
    for (std::size_t i = 0; i < indices_.size(); ++i) {
        if (indices_[i] == u) return coefficients_[i];
    }
    return 0.0;
}

double PceSurrogate::evaluate(const LegendreTable& table) const
{
    double sum = 0.0;
    for (std::size_t i = 0; i < indices_.size(); ++i) sum += coefficients_[i] * basis_value(indices_[i], table);
    return sum;
}

double PceSurrogate::evaluate_reference(std::span<const double> xi) const
{
    if (xi.size() != space_.size()) throw ValidationError("PceSurrogate: dimension mismatch");
    return evaluate(LegendreTable(xi, max_degree_));
}

double PceSurrogate::evaluate(std::span<const double> nu) const
{
    if (nu.size() != space_.size()) throw ValidationError("PceSurrogate: dimension mismatch");
    const auto xi = space_.to_reference(nu);
    return evaluate(LegendreTable(xi, max_degree_));
}

double eval_surrogate(const PceSurrogate& surrogate, std::span<const double> nu)
{
    return surrogate.evaluate(nu);
}

namespace {

std::vector<double> least_squares(const Matrix& design, std::span<const double> y)
{
    const Eigen::MatrixXd a = design;
    const Eigen::Map<const Eigen::VectorXd> b(y.data(), static_cast<Eigen::Index>(y.size()));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-12);
    if (qr.rank() < a.cols()) {
        throw NumericalError("fit_surrogate: rank-deficient design matrix (" + std::to_string(a.rows()) +
                             " usable samples, " + std::to_string(a.cols()) + " terms, rank " +
                             std::to_string(qr.rank()) + "); supply at least " + std::to_string(a.cols()) +
                             " well-spread samples");
    }
    const Eigen::VectorXd c = qr.solve(b);
    return {c.data(), c.data() + c.size()};
}

} // namespace

FitResult fit_surrogate(const ParameterSpace& space, const Matrix& inputs, std::span<const double> outputs,
                        const FitOptions& options)
{
    const std::size_t s = space.size();
    if (static_cast<std::size_t>(inputs.cols()) != s) throw ValidationError("fit_surrogate: input columns != dimension");
    if (static_cast<std::size_t>(inputs.rows()) != outputs.size()) {
        throw ValidationError("fit_surrogate: input rows != output count");
    }
    if (options.prune_passes < 0 || !(options.prune_tau >= 0.0)) throw ValidationError("fit_surrogate: bad pruning options");

    FitResult result;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index l = 0; l < inputs.rows(); ++l) {
        if (std::isfinite(outputs[static_cast<std::size_t>(l)])) keep.push_back(l);
        else ++result.failures;
    }
    if (keep.empty()) throw NumericalError("fit_surrogate: every training output is non-finite");
    result.used_samples = keep.size();

    Matrix xi(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(s));
    std::vector<double> y(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        const auto ref = space.to_reference(row_span(inputs, keep[r]));
        for (std::size_t j = 0; j < s; ++j) {
            if (!(std::abs(ref[j]) <= 1.0 + 1e-9)) {
                throw ValidationError("fit_surrogate: sample " + std::to_string(keep[r] + 1) + " outside bounds of '" +
                                      space[j].name + "'");
            }
            xi(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = ref[j];
        }
        y[r] = outputs[static_cast<std::size_t>(keep[r])];
    }

    auto indices = total_order_index_set(s, options.order, options.index_cap);
    if (keep.size() < indices.size()) {
        throw NumericalError("fit_surrogate: rank-deficient design, " + std::to_string(keep.size()) +
                             " usable samples but order " + std::to_string(options.order) + " needs at least " +
                             std::to_string(indices.size()));
    }

    Matrix design = kernels::design_matrix(indices, xi);
    auto coefficients = least_squares(design, y);
    for (int pass = 0; pass < options.prune_passes; ++pass) {
        double largest = 0.0;
        for (double c : coefficients) largest = std::max(largest, std::abs(c));
        const double cutoff = options.prune_tau * largest;
        std::vector<MultiIndex> kept;
        std::vector<Eigen::Index> columns;
        for (std::size_t i = 0; i < indices.size(); ++i) {
            if (indices[i].is_constant() || !(std::abs(coefficients[i]) < cutoff)) {
                kept.push_back(indices[i]);
                columns.push_back(static_cast<Eigen::Index>(i));
            }
        }
        if (kept.size() == indices.size()) break;
        Matrix reduced(design.rows(), static_cast<Eigen::Index>(columns.size()));
        for (std::size_t c = 0; c < columns.size(); ++c) reduced.col(static_cast<Eigen::Index>(c)) = design.col(columns[c]);
        design = std::move(reduced);
        indices = std::move(kept);
        coefficients = least_squares(design, y);
        ++result.passes;
    }

    const Eigen::Map<const Eigen::VectorXd> c(coefficients.data(), static_cast<Eigen::Index>(coefficients.size()));
    const Eigen::VectorXd fitted = design * c;
    result.train_error = relative_l2_error(y, std::span<const double>(fitted.data(), static_cast<std::size_t>(fitted.size())));
    result.surrogate = PceSurrogate(space, std::move(indices), std::move(coefficients));
    return result;
}

double relative_l2_error(std::span<const double> reference, std::span<const double> approximation)
{
    if (reference.size() != approximation.size()) throw ValidationError("relative_l2_error: shape mismatch");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = reference[i] - approximation[i];
        num += d * d;
        den += reference[i] * reference[i];
    }
    if (!(den > 0.0)) throw ValidationError("relative_l2_error: reference outputs are all zero");
    return std::sqrt(num / den);
}

double relative_l2_error(const Matrix& reference, const Matrix& approximation)
{
    if (reference.rows() != approximation.rows() || reference.cols() != approximation.cols()) {
        throw ValidationError("relative_l2_error: shape mismatch");
    }
    return relative_l2_error(std::span<const double>(reference.data(), static_cast<std::size_t>(reference.size())),
                             std::span<const double>(approximation.data(), static_cast<std::size_t>(approximation.size())));
}

SurrogateFamily::SurrogateFamily(std::vector<double> coordinates, std::vector<PceSurrogate> surrogates)
    : coordinates_(std::move(coordinates))
    , surrogates_(std::move(surrogates))
{
    if (coordinates_.empty() || coordinates_.size() != surrogates_.size()) {
        throw ValidationError("SurrogateFamily: need one surrogate per station coordinate");
    }
    for (std::size_t i = 1; i < coordinates_.size(); ++i) {
        if (!(coordinates_[i] > coordinates_[i - 1])) {
            throw ValidationError("SurrogateFamily: station coordinates must be strictly increasing");
        }
        if (!(surrogates_[i].space() == surrogates_[0].space())) {
            throw ValidationError("SurrogateFamily: surrogates must share one parameter space");
        }
    }
}

PceSurrogate SurrogateFamily::interpolate(double t) const
{
    if (!(t >= coordinates_.front() && t <= coordinates_.back())) {
        throw ValidationError("interpolate_coefficients: coordinate " + std::to_string(t) + " outside station range [" +
                              std::to_string(coordinates_.front()) + ", " + std::to_string(coordinates_.back()) + "]");
    }
    const auto it = std::lower_bound(coordinates_.begin(), coordinates_.end(), t);
    const auto hi = static_cast<std::size_t>(it - coordinates_.begin());
    if (coordinates_[hi] == t) return surrogates_[hi];
    const std::size_t lo = hi - 1;
    const double w = (t - coordinates_[lo]) / (coordinates_[hi] - coordinates_[lo]);

    std::map<MultiIndex, std::pair<double, double>, GradedLess> merged;
    const auto& a = surrogates_[lo];
    const auto& b = surrogates_[hi];
    for (std::size_t i = 0; i < a.indices().size(); ++i) merged[a.indices()[i]].first = a.coefficients()[i];
    for (std::size_t i = 0; i < b.indices().size(); ++i) merged[b.indices()[i]].second = b.coefficients()[i];

    std::vector<MultiIndex> indices;
    std::vector<double> coefficients;
    indices.reserve(merged.size());
    coefficients.reserve(merged.size());
    for (const auto& [u, c] : merged) {
        indices.push_back(u);
        coefficients.push_back((1.0 - w) * c.first + w * c.second);
    }
    return PceSurrogate(a.space(), std::move(indices), std::move(coefficients));
}

PceSurrogate interpolate_coefficients(const SurrogateFamily& family, double t)
{
    return family.interpolate(t);
}

} // namespace dfi
