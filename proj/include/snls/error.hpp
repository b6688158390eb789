/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace snls {

/// Invalid or inconsistent configuration. `key()` names the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key + ": " + message), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// A solver produced a non-finite state.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(std::size_t step, double norm)
        : std::runtime_error("numerical blow-up at step " + std::to_string(step) +
                             " (L2 norm = " + std::to_string(norm) + ")"),
          step_(step), norm_(norm) {}

    std::size_t step() const noexcept { return step_; }
    double norm() const noexcept { return norm_; }

private:
    std::size_t step_;
    double norm_;
};

/// Picard iteration observed a successive-residual ratio >= 1.
class NonContractionError : public std::runtime_error {
public:
    NonContractionError(std::size_t iteration, double ratio)
        : std::runtime_error("Picard map is not contracting: residual ratio " +
                             std::to_string(ratio) + " at iteration " +
                             std::to_string(iteration)),
          iteration_(iteration), ratio_(ratio) {}

    std::size_t iteration() const noexcept { return iteration_; }
    double ratio() const noexcept { return ratio_; }

private:
    std::size_t iteration_;
    double ratio_;
};

} // namespace snls
