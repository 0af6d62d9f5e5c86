// Serial reference vs OpenMP kernels. Usage: bench_kernels [rows] [repeats]

#include "dfi/kernels.hpp"
#include "dfi/pce.hpp"
#include "dfi/testmodels.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <string>

using namespace dfi;

namespace {

template <class F>
double best_of(int repeats, F&& f)
{
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

template <class A, class B>
void report(const char* name, int repeats, A&& serial, B&& parallel)
{
    const double ts = best_of(repeats, serial);
    const double tp = best_of(repeats, parallel);
    std::printf("%-16s serial %10.4f ms   openmp %10.4f ms   speedup %5.2fx\n", name, 1e3 * ts, 1e3 * tp, ts / tp);
}

} // namespace

int main(int argc, char** argv)
{
    const Eigen::Index rows = argc > 1 ? std::atol(argv[1]) : 20'000;
    const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;
    std::printf("rows %ld, repeats %d, threads %d\n", static_cast<long>(rows), repeats, kernels::max_workers());

    const std::size_t s = 8;
    std::vector<Parameter> params;
    for (std::size_t j = 0; j < s; ++j) params.push_back({"p" + std::to_string(j), 0.0, -1.0, 1.0, ""});
    const ParameterSpace space(params);
    const auto indices = total_order_index_set(s, 3);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix xi(rows, static_cast<Eigen::Index>(s));
    for (Eigen::Index i = 0; i < xi.size(); ++i) xi.data()[i] = u(rng);
    std::vector<double> coefficients(indices.size());
    for (auto& c : coefficients) c = u(rng);
    const PceSurrogate surrogate(space, indices, coefficients);

    volatile double sink = 0.0;
    report("design_matrix", repeats, [&] { sink = sink + kernels::serial::design_matrix(indices, xi)(0, 0); },
           [&] { sink = sink + kernels::design_matrix(indices, xi)(0, 0); });
    report("evaluate_batch", repeats, [&] { sink = sink + kernels::serial::evaluate_batch(surrogate, xi)[0]; },
           [&] { sink = sink + kernels::evaluate_batch(surrogate, xi)[0]; });

    const auto arrhenius_space = testmodels::arrhenius_space(0.9, 1.1, -0.5, 0.5);
    std::vector<double> temps;
    for (int t = 0; t < 32; ++t) temps.push_back(900.0 + 25.0 * t);
    const auto predictor = testmodels::arrhenius_predictor(temps, 0.0);
    Matrix samples(rows, 2);
    for (Eigen::Index r = 0; r < rows; ++r) {
        samples(r, 0) = 1.0 + 0.1 * u(rng);
        samples(r, 1) = 0.5 * u(rng);
    }
    report("pushforward", repeats, [&] { sink = sink + kernels::serial::pushforward(samples, predictor)(0, 0); },
           [&] { sink = sink + kernels::pushforward(samples, predictor)(0, 0); });

    const kernels::ScalarFunction f = [&](std::span<const double> x) { return surrogate.evaluate_reference(x); };
    report("evaluate_rows", repeats, [&] { sink = sink + kernels::serial::evaluate_rows(f, xi)[0]; },
           [&] { sink = sink + kernels::evaluate_rows(f, xi)[0]; });
    return 0;
}
