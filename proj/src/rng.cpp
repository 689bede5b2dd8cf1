#include "prnu/rng.hpp"

#include <algorithm>
#include <numeric>

namespace prnu {

std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, SequentialRng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates: the first k slots end up as the sample.
    for (std::size_t i = 0; i < k && i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(std::min(k, n));
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace prnu
