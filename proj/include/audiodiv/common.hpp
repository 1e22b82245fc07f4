// Copyright 2026 The audiodiv Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace audiodiv {

/// Row-major dense matrix. Rows are samples (or frames), columns are
/// embedding dimensions.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Error hierarchy. The CLI maps these onto exit codes: everything derived
// from DataFault exits with 2, NumericalError with 3.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataFault : public Error {
 public:
  using Error::Error;
};

class FormatError : public DataFault {
 public:
  using DataFault::DataFault;
};

class DataError : public DataFault {
 public:
  using DataFault::DataFault;
};

class IoError : public DataFault {
 public:
  using DataFault::DataFault;
};

class DomainError : public DataFault {
 public:
  using DataFault::DataFault;
};

class InsufficientData : public DataFault {
 public:
  using DataFault::DataFault;
};

class DegenerateData : public DataFault {
 public:
  using DataFault::DataFault;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

enum class Orientation { kLowerBetter, kHigherBetter };

inline std::string_view to_string(Orientation o) {
  return o == Orientation::kLowerBetter ? "lower-better" : "higher-better";
}

inline Orientation parse_orientation(std::string_view s) {
  if (s == "lower-better") return Orientation::kLowerBetter;
  if (s == "higher-better") return Orientation::kHigherBetter;
  throw DomainError("unknown orientation '" + std::string(s) + "'");
}

}  // namespace audiodiv
