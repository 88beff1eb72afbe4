// SPDX-License-Identifier: Apache-2.0
//
// nomasim: uplink Monte-Carlo simulator for code-domain NOMA in Massive MIMO
// Copyright (C) 2026 The nomasim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace nomasim
{
    /// Error raised inside a parallel task, tagged with the task index.
    class TaskError : public std::runtime_error
    {
    public:
        TaskError(std::size_t index, const std::string &what)
            : std::runtime_error("trial " + std::to_string(index) + ": " + what), index_(index) {}

        std::size_t index() const { return index_; }

    private:
        std::size_t index_;
    };

    /// Runs fn(i) for i in [0, count) on up to `workers` threads. Each index runs
    /// exactly once; callers store results by index, so the outcome does not depend
    /// on scheduling. The first failure (lowest index among those observed) is
    /// rethrown as TaskError after all threads join.
    template <typename Fn>
    void parallel_for(std::size_t count, unsigned workers, Fn &&fn)
    {
        if (count == 0)
            return;
        workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::size_t>(count, 1024))));

        std::atomic<std::size_t> next{0};
        std::atomic<bool> failed{false};
        std::mutex error_mutex;
        std::size_t error_index = count;
        std::string error_message;

        auto body = [&]
        {
            for (;;)
            {
                if (failed.load(std::memory_order_relaxed))
                    return;
                const std::size_t i = next.fetch_add(1);
                if (i >= count)
                    return;
                try
                {
                    fn(i);
                }
                catch (const std::exception &e)
                {
                    std::lock_guard lock(error_mutex);
                    if (i < error_index)
                    {
                        error_index = i;
                        error_message = e.what();
                    }
                    failed = true;
                }
            }
        };

        if (workers == 1)
            body();
        else
        {
            std::vector<std::jthread> pool;
            pool.reserve(workers);
            for (unsigned w = 0; w < workers; ++w)
                pool.emplace_back(body);
        }
        if (failed)
            throw TaskError(error_index, error_message);
    }
} // namespace nomasim
