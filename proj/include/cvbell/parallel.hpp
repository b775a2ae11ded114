// Copyright 2026 The cvbell developers

// Licensed under the Apache License, Version 2.0 (the License);
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

// http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an AS IS BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace cvbell {

/// Worker cap: WORKER_COUNT env var when set to a positive integer, else the
/// hardware concurrency. Performance-only; results never depend on it.
inline std::int64_t resolve_worker_count() {
    if (const char* env = std::getenv("WORKER_COUNT")) {
        char* end = nullptr;
        const long long parsed = std::strtoll(env, &end, 10);
        if (end != env && *end == '\0' && parsed > 0) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<std::int64_t>(hw);
}

/// Runs fn(i) for i in [0, count). Tasks must be independent; output written
/// by index so the result is identical for any worker count.
template <typename Fn>
void parallel_for_indexed(std::int64_t count, Fn&& fn) {
    if (count <= 0) return;
    const std::int64_t workers = std::min(count, resolve_worker_count());
    if (workers <= 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto drain = [&]() {
        for (std::int64_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (std::int64_t w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace cvbell
