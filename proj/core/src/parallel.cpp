#include "weightguard/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wg {

int effective_threads(int requested) {
    int n = requested > 0 ? requested
                          : static_cast<int>(std::thread::hardware_concurrency());
    n = std::max(n, 1);
    if (const char* cap = std::getenv("WEIGHTGUARD_THREADS")) {
        const int c = std::atoi(cap);
        if (c > 0) {
            n = std::min(n, c);
        }
    }
    return n;
}

void parallel_for(int64_t n, int threads,
                  const std::function<void(int64_t)>& fn) {
    threads = static_cast<int>(
            std::max<int64_t>(1, std::min<int64_t>(threads, n)));
    if (threads == 1) {
        for (int64_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }

    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            for (int64_t i = t; i < n; i += threads) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) {
                        first_error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

} // namespace wg
