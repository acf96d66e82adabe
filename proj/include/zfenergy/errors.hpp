// SPDX-License-Identifier: Apache-2.0
//
// zfenergy - transmit-energy statistics for a multi-antenna downlink with mobile users
// Copyright (C) 2026 the zfenergy authors
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

#include <limits>
#include <stdexcept>
#include <string>

namespace zfe {

/// Invalid configuration value or violated argument precondition.
/// The message names the offending field or argument.
class config_error : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative numerical routine failed to reach its accuracy target.
/// Carries the best estimate obtained so far and the error actually achieved.
class numerical_error : public std::runtime_error {
  public:
    explicit numerical_error(const std::string& what,
                             double best_estimate = std::numeric_limits<double>::quiet_NaN(),
                             double achieved_error = std::numeric_limits<double>::quiet_NaN())
        : std::runtime_error(what), best_estimate_(best_estimate), achieved_error_(achieved_error) {}

    double best_estimate() const { return best_estimate_; }
    double achieved_error() const { return achieved_error_; }

  private:
    double best_estimate_;
    double achieved_error_;
};

/// Gram matrix factorization failed: rank deficiency or conditioning beyond
/// the accepted threshold. Carries the condition-number estimate.
class singular_matrix_error : public numerical_error {
  public:
    explicit singular_matrix_error(const std::string& what, double condition_estimate)
        : numerical_error(what), condition_estimate_(condition_estimate) {}

    double condition_estimate() const { return condition_estimate_; }

  private:
    double condition_estimate_;
};

} // namespace zfe
