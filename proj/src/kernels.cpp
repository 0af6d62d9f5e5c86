#include "dfi/kernels.hpp"

#include "dfi/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <exception>
#include <mutex>

namespace dfi::kernels {

namespace {

int max_order(const std::vector<MultiIndex>& indices)
{
    int degree = 0;
    for (const auto& u : indices) {
        for (int d : u.degrees) degree = std::max(degree, d);
    }
    return degree;
}

void design_row(const std::vector<MultiIndex>& indices, std::span<const double> xi, int degree,
                std::span<double> out)
{
    const LegendreTable table(xi, degree);
    for (std::size_t i = 0; i < indices.size(); ++i) out[i] = basis_value(indices[i], table);
}

// Collects the first exception thrown inside a parallel region and rethrows it afterwards.
class ExceptionSlot {
public:
    template <typename F>
    void run(F&& f) noexcept
    {
        try {
            f();
        } catch (...) {
            std::lock_guard lock(mutex_);
            if (!error_) error_ = std::current_exception();
        }
    }
    void rethrow() const
    {
        if (error_) std::rethrow_exception(error_);
    }

private:
    std::mutex mutex_;
    std::exception_ptr error_;
};

} // namespace

Matrix design_matrix(const std::vector<MultiIndex>& indices, const Matrix& xi)
{
    Matrix out(xi.rows(), static_cast<Eigen::Index>(indices.size()));
    const int degree = max_order(indices);
    ExceptionSlot slot;
#pragma omp parallel for schedule(static)
    for (Eigen::Index l = 0; l < xi.rows(); ++l) {
        slot.run([&] { design_row(indices, row_span(xi, l), degree, row_span(out, l)); });
    }
    slot.rethrow();
    return out;
}

std::vector<double> evaluate_batch(const PceSurrogate& surrogate, const Matrix& nu)
{
    std::vector<double> out(static_cast<std::size_t>(nu.rows()));
    ExceptionSlot slot;
#pragma omp parallel for schedule(static)
    for (Eigen::Index l = 0; l < nu.rows(); ++l) {
        slot.run([&] { out[static_cast<std::size_t>(l)] = surrogate.evaluate(row_span(nu, l)); });
    }
    slot.rethrow();
    return out;
}

Matrix pushforward(const Matrix& samples, const Predictor& predictor)
{
    if (static_cast<std::size_t>(samples.cols()) != predictor.inputs) {
        throw ValidationError("pushforward: sample dimension does not match predictor");
    }
    Matrix out(samples.rows(), static_cast<Eigen::Index>(predictor.outputs));
    ExceptionSlot slot;
#pragma omp parallel for schedule(static)
    for (Eigen::Index m = 0; m < samples.rows(); ++m) {
        slot.run([&] { predictor(row_span(samples, m), row_span(out, m)); });
    }
    slot.rethrow();
    return out;
}

std::vector<double> evaluate_rows(const ScalarFunction& f, const Matrix& x)
{
    std::vector<double> out(static_cast<std::size_t>(x.rows()));
    ExceptionSlot slot;
#pragma omp parallel for schedule(static)
    for (Eigen::Index l = 0; l < x.rows(); ++l) {
        slot.run([&] { out[static_cast<std::size_t>(l)] = f(row_span(x, l)); });
    }
    slot.rethrow();
    return out;
}

namespace serial {

Matrix design_matrix(const std::vector<MultiIndex>& indices, const Matrix& xi)
{
    Matrix out(xi.rows(), static_cast<Eigen::Index>(indices.size()));
    const int degree = max_order(indices);
    for (Eigen::Index l = 0; l < xi.rows(); ++l) design_row(indices, row_span(xi, l), degree, row_span(out, l));
    return out;
}

std::vector<double> evaluate_batch(const PceSurrogate& surrogate, const Matrix& nu)
{
    std::vector<double> out(static_cast<std::size_t>(nu.rows()));
    for (Eigen::Index l = 0; l < nu.rows(); ++l) out[static_cast<std::size_t>(l)] = surrogate.evaluate(row_span(nu, l));
    return out;
}

Matrix pushforward(const Matrix& samples, const Predictor& predictor)
{
    if (static_cast<std::size_t>(samples.cols()) != predictor.inputs) {
        throw ValidationError("pushforward: sample dimension does not match predictor");
    }
    Matrix out(samples.rows(), static_cast<Eigen::Index>(predictor.outputs));
    for (Eigen::Index m = 0; m < samples.rows(); ++m) predictor(row_span(samples, m), row_span(out, m));
    return out;
}

std::vector<double> evaluate_rows(const ScalarFunction& f, const Matrix& x)
{
    std::vector<double> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index l = 0; l < x.rows(); ++l) out[static_cast<std::size_t>(l)] = f(row_span(x, l));
    return out;
}

} // namespace serial

void set_workers(int workers)
{
    if (workers > 0) omp_set_num_threads(workers);
}

int max_workers()
{
    return omp_get_max_threads();
}

} // namespace dfi::kernels
