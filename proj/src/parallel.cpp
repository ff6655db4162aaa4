#include "qfluor/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace qfluor {

int thread_count()
{
    if (const char* env = std::getenv("QFLUOR_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(long n, const std::function<void(long)>& body, int threads)
{
    if (n <= 0) return;
    const int nt = static_cast<int>(std::min<long>(threads > 0 ? threads : thread_count(), n));
    if (nt <= 1) {
        for (long i = 0; i < n; ++i) body(i);
        return;
    }
    // dynamic hand-out; the costly late anchors would otherwise pile up on one worker
    std::atomic<long> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto work = [&] {
        for (;;) {
            const long i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!err) err = std::current_exception();
                next = n;
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (int t = 0; t < nt; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

} // namespace qfluor
