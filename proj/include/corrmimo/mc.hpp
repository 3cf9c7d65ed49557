#pragma once

#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "corrmimo/types.hpp"

namespace corrmimo {

/// Monte Carlo estimate: sample mean, standard error, trial count.
struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t trials = 0;
};

/// Mean and stderr from samples, reduced in index order.
inline MCEstimate mc_from_samples(const std::vector<double>& samples) {
    MCEstimate e;
    e.trials = static_cast<std::int64_t>(samples.size());
    if (samples.empty()) return e;
    double sum = 0.0;
    for (double s : samples) sum += s;
    e.mean = sum / static_cast<double>(samples.size());
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double s : samples) ss += (s - e.mean) * (s - e.mean);
        const double var = ss / static_cast<double>(samples.size() - 1);
        e.std_error = std::sqrt(var / static_cast<double>(samples.size()));
    }
    return e;
}

/// Worker cap: CORRMIMO_THREADS if set, else hardware concurrency. Affects
/// speed only; every reduction is done serially in trial order.
inline int thread_budget() {
    if (const char* env = std::getenv("CORRMIMO_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(i) once for every i in [0, count) over a static chunk partition.
/// fn must write results into per-index storage; no ordering guarantees
/// between calls on different threads. The first worker exception is
/// rethrown on the calling thread after all workers finish.
template <typename Fn>
inline void parallel_trials(std::int64_t count, Fn&& fn) {
    if (count <= 0) return;
    const int workers = std::min<std::int64_t>(thread_budget(), count);
    if (workers <= 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::mutex error_mutex;
    std::exception_ptr error;
    const std::int64_t chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::int64_t begin = w * chunk;
        const std::int64_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &fn, &error_mutex, &error] {
            try {
                for (std::int64_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace corrmimo
