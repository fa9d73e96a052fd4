#include "qs3orao/rng.hpp"

namespace qs3orao {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(master_seed) ^ splitmix64(stream ^ 0xD1B54A32D192ED03ULL));
}

}  // namespace qs3orao
