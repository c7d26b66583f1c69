/*
 * Copyright 2026 The cnrl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace cnrl {

/// Malformed input text (edge lists, CSV tables, configs). Carries the 1-based
/// line number when one applies, 0 otherwise.
class ParseError : public std::runtime_error
{
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// An iterative numerical method failed to reach its tolerance, or diverged.
class ConvergenceError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/**
 * Number of worker threads used by the parallel sections of the library.
 *
 * Read once from the CNRL_NUM_THREADS environment variable; falls back to
 * std::thread::hardware_concurrency(). Always at least 1.
 */
std::size_t thread_count();

/**
 * Runs body(i) for every i in [0, count) on up to thread_count() threads.
 *
 * Each index is visited exactly once. The body must only write to state owned by
 * its index, so the result never depends on scheduling. The first exception
 * thrown by any body is rethrown on the calling thread after all workers join.
 */
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace cnrl
