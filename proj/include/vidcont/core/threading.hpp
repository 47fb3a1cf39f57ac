#pragma once

#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace vidcont {

inline int worker_count() {
    static const int n = [] {
        if (const char *env = std::getenv("VIDCONT_THREADS")) {
            const int v = std::atoi(env);
            if (v > 0) return v;
        }
        const unsigned hc = std::thread::hardware_concurrency();
        return hc > 0 ? static_cast<int>(hc) : 1;
    }();
    return n;
}

namespace detail {

// Persistent pool; kernels call parallel_for at high frequency, so thread
// startup cost has to be paid once. Nested calls from a worker run inline.
class ThreadPool {
public:
    static ThreadPool &instance() {
        static ThreadPool pool(worker_count());
        return pool;
    }

    static bool &inside_worker() {
        thread_local bool flag = false;
        return flag;
    }

    void run(int64_t n, const std::function<void(int64_t, int64_t)> &body) {
        const int workers = static_cast<int>(threads_.size()) + 1;
        const int64_t chunk = (n + workers - 1) / workers;
        {
            std::unique_lock<std::mutex> lock(mutex_);
            body_ = &body;
            total_ = n;
            chunk_ = chunk;
            remaining_ = 0;
            for (int w = 1; w < workers; ++w)
                if (static_cast<int64_t>(w) * chunk < n) ++remaining_;
            ++generation_;
        }
        cv_start_.notify_all();
        // chunk 0 runs on the caller; flag it so nested calls run inline
        if (n > 0) {
            const bool prev = inside_worker();
            inside_worker() = true;
            body(0, std::min<int64_t>(chunk, n));
            inside_worker() = prev;
        }
        std::unique_lock<std::mutex> lock(mutex_);
        cv_done_.wait(lock, [this] { return remaining_ == 0; });
        body_ = nullptr;
    }

private:
    explicit ThreadPool(int workers) {
        for (int w = 1; w < workers; ++w)
            threads_.emplace_back([this, w] { worker_loop(w); });
    }

    ~ThreadPool() {
        {
            std::unique_lock<std::mutex> lock(mutex_);
            stop_ = true;
            ++generation_;
        }
        cv_start_.notify_all();
        for (auto &t : threads_) t.join();
    }

    void worker_loop(int index) {
        inside_worker() = true;
        uint64_t seen = 0;
        for (;;) {
            const std::function<void(int64_t, int64_t)> *body = nullptr;
            int64_t lo = 0, hi = 0;
            {
                std::unique_lock<std::mutex> lock(mutex_);
                cv_start_.wait(lock, [&] { return generation_ != seen; });
                seen = generation_;
                if (stop_) return;
                lo = static_cast<int64_t>(index) * chunk_;
                hi = std::min<int64_t>(total_, lo + chunk_);
                if (lo >= hi) continue;
                body = body_;
            }
            (*body)(lo, hi);
            {
                std::unique_lock<std::mutex> lock(mutex_);
                if (--remaining_ == 0) cv_done_.notify_all();
            }
        }
    }

    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable cv_start_, cv_done_;
    const std::function<void(int64_t, int64_t)> *body_ = nullptr;
    int64_t total_ = 0, chunk_ = 0;
    int remaining_ = 0;
    uint64_t generation_ = 0;
    bool stop_ = false;
};

}  // namespace detail

// Splits [0, n) into contiguous chunks, one per worker. Each index is
// processed by exactly one thread, so per-index results do not depend on the
// thread count.
inline void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)> &body) {
    if (n <= 0) return;
    if (n < 64 || worker_count() <= 1 || detail::ThreadPool::inside_worker()) {
        body(0, n);
        return;
    }
    detail::ThreadPool::instance().run(n, body);
}

}  // namespace vidcont
