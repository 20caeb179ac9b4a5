/*
Copyright 2026 The rsirl Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

     https://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>

namespace rsirl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// geometry
class DegenerateDirection : public Error {
 public:
  explicit DegenerateDirection(const std::string& what = "cost vector is proportional to all-ones")
      : Error(what) {}
};
class EmptyEnvelope : public Error {
 public:
  explicit EmptyEnvelope(const std::string& what = "half-space excludes the whole envelope")
      : Error(what) {}
};
class TooManyConstraints : public Error {
 public:
  using Error::Error;
};
class DegenerateHull : public Error {
 public:
  using Error::Error;
};

// solvers
class Infeasible : public Error {
 public:
  explicit Infeasible(const std::string& what = "linear program is infeasible") : Error(what) {}
};
class Unbounded : public Error {
 public:
  explicit Unbounded(const std::string& what = "linear program is unbounded") : Error(what) {}
};
class NotConverged : public Error {
 public:
  using Error::Error;
};

// inference / active
class InfeasibleKkt : public Error {
 public:
  using Error::Error;
};
class AllDegenerate : public Error {
 public:
  using Error::Error;
};

// multistep
class GridTooLarge : public Error {
 public:
  using Error::Error;
};
class IllConditioned : public Error {
 public:
  using Error::Error;
};
class TooFewSequences : public Error {
 public:
  using Error::Error;
};

// harness
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rsirl
