#pragma once

#include <functional>
#include <span>
#include <vector>

namespace dfi {

/// Maps a parameter vector to one prediction per measurement station. Must be reentrant:
/// pushforward and concurrent chains call it from several threads.
struct Predictor {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::function<void(std::span<const double> nu, std::span<double> out)> fn;

    void operator()(std::span<const double> nu, std::span<double> out) const { fn(nu, out); }
    [[nodiscard]] std::vector<double> operator()(std::span<const double> nu) const
    {
        std::vector<double> out(outputs);
        fn(nu, out);
        return out;
    }
};

} // namespace dfi
