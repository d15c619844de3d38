#include "nomina/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace nomina {

std::size_t thread_count() {
    static const std::size_t count = [] {
        std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
        if (const char* env = std::getenv("NOMINA_THREADS")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end != env && v >= 1) return std::min<std::size_t>(static_cast<std::size_t>(v), hw);
        }
        return hw;
    }();
    return count;
}

void parallel_for(std::size_t n, std::size_t min_per_thread,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t workers = thread_count();
    if (min_per_thread == 0) min_per_thread = 1;
    workers = std::min(workers, n / min_per_thread + (n % min_per_thread ? 1 : 0));
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> threads;
    threads.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    fn(0, std::min(n, chunk));
    for (auto& t : threads) t.join();
}

}  // namespace nomina
