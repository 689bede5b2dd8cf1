#pragma once

#include <cstddef>
#include <vector>

namespace prnu {

// Sets the OpenMP worker count for subsequent kernels. n <= 0 leaves the
// runtime default untouched. Every kernel in this library is written so the
// result is bit-identical for any thread count; this knob only changes speed.
void set_thread_count(int n);
int thread_count();

// Block size of the fixed reduction tree. Reductions sum each block
// sequentially and then fold the block partials in block order, so the
// summation tree depends only on n, never on the thread count.
inline constexpr std::size_t kSumBlock = 4096;

template <class F>
double block_sum(std::size_t n, F&& term) {
    if (n == 0) return 0.0;
    const std::size_t nblocks = (n + kSumBlock - 1) / kSumBlock;
    std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kSumBlock;
        const std::size_t hi = lo + kSumBlock < n ? lo + kSumBlock : n;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        partial[static_cast<std::size_t>(b)] = s;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

namespace serial {

// Reference implementation: same reduction tree, plain loop.
template <class F>
double block_sum(std::size_t n, F&& term) {
    if (n == 0) return 0.0;
    const std::size_t nblocks = (n + kSumBlock - 1) / kSumBlock;
    double total = 0.0;
    for (std::size_t b = 0; b < nblocks; ++b) {
        const std::size_t lo = b * kSumBlock;
        const std::size_t hi = lo + kSumBlock < n ? lo + kSumBlock : n;
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        total += s;
    }
    return total;
}

} // namespace serial

} // namespace prnu
