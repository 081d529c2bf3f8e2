// Copyright 2026 The cotx Authors
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

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cotx {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Points = Eigen::Matrix2Xd;

/// UE index used for "serves nobody" (u_i = 0 in the one-based notation).
inline constexpr int kNoUe = -1;

/// How a virtual AP (pair of physical APs) combines at its served UE.
enum class Cooperation {
  none,         ///< virtual APs are never activated
  noncoherent,  ///< powers add: h = g1 + g2
  coherent,     ///< amplitudes add: h = (sqrt(g1) + sqrt(g2))^2
};

/// Raised for invalid inputs and malformed files.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string_view to_string(Cooperation mode);
Cooperation cooperation_from_string(std::string_view name);

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace cotx
