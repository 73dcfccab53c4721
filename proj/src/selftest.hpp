// SPDX-License-Identifier: Apache-2.0
//
// hbsim - hybrid beamforming link simulator for massive MIMO-OFDM
// Copyright (C) 2026 hbsim contributors
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

#ifndef HBSIM_SELFTEST_HPP
#define HBSIM_SELFTEST_HPP

#include <functional>
#include <string>
#include <vector>

namespace hbsim {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Runtime invariant suites: beta monotonicity, zero interference, AB modulus
// exactness, water-filling KKT, ZF-THP dominance, the CSI error moment
// identity, CSV determinism and the FFT-search/grid-search equivalence.
std::vector<SuiteResult> run_selftest();

// Individual suites (also driven by the acceptance tests).
SuiteResult selftest_beta_monotonicity(int n_seeds = 100);
SuiteResult selftest_zero_interference(int n_seeds = 25);
SuiteResult selftest_ab_modulus(int n_seeds = 10);
SuiteResult selftest_waterfill_kkt(int n_cases = 50);
SuiteResult selftest_thp_dominance(int n_seeds = 100, double sigma2 = 1e-4);
SuiteResult selftest_moment_identity(int n_draws = 10000);
SuiteResult selftest_csv_determinism();
SuiteResult selftest_appendix_equivalence(int n_matrices = 500);

}  // namespace hbsim

#endif  // HBSIM_SELFTEST_HPP
