#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace ergolab {

/// Number of worker threads used by parallel loops. Defaults to the
/// hardware concurrency. Results never depend on this value.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Runs body(begin, end) over [0, n) split into fixed blocks of `grain`
/// indices. Nested calls from inside a worker run serially.
void parallel_for(std::size_t n, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// Sum of term(i) over [0, n). Each fixed-size block is summed in index
/// order and block partials are combined in block order, so the result is
/// bitwise independent of the thread count.
template <class T, class Term>
T deterministic_sum(std::size_t n, Term&& term, std::size_t grain = 1024) {
    const std::size_t blocks = (n + grain - 1) / grain;
    std::vector<T> partial(blocks, T{});
    parallel_for(n, grain, [&](std::size_t begin, std::size_t end) {
        T acc{};
        for (std::size_t i = begin; i < end; ++i) {
            acc += term(i);
        }
        partial[begin / grain] = acc;
    });
    T total{};
    for (const T& p : partial) {
        total += p;
    }
    return total;
}

} // namespace ergolab
