#pragma once

#include <cstdint>
#include <string_view>

namespace dfi {

/// Derives an independent stream seed from the master seed, a stage name and an index.
/// seed = splitmix64(master ^ fnv1a(stage) ^ splitmix64(index)); stable across platforms.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage, std::uint64_t index = 0);

std::uint64_t splitmix64(std::uint64_t x);

} // namespace dfi
