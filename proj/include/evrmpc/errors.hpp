// Copyright 2026 The evrmpc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EVRMPC__ERRORS_HPP_
#define EVRMPC__ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace evrmpc
{

/// Invalid parameters, envelopes, weights or run configuration.
class ConfigError : public std::invalid_argument
{
public:
  explicit ConfigError(const std::string & what) : std::invalid_argument(what) {}
};

/// Malformed or unreadable input files (drive cycles, maps, logs).
class DataError : public std::runtime_error
{
public:
  explicit DataError(const std::string & what) : std::runtime_error(what) {}
};

/// A solve could not produce a usable answer and no fallback remained.
class SolverError : public std::runtime_error
{
public:
  explicit SolverError(const std::string & what) : std::runtime_error(what) {}
};

}  // namespace evrmpc

#endif  // EVRMPC__ERRORS_HPP_
