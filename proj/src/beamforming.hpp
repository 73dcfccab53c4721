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

#ifndef HBSIM_BEAMFORMING_HPP
#define HBSIM_BEAMFORMING_HPP

#include <vector>

#include "channel.hpp"
#include "numerics.hpp"

namespace hbsim {

enum class AbMode {
  kIdeal,      // orthonormal columns, amplitude and phase adjustable
  kPhaseOnly,  // phase shift network, every entry has modulus 1/sqrt(M)
};

// Wideband analog stage shared by all subcarriers (M x R).
struct AnalogBeamformer {
  CMat matrix;
  AbMode mode = AbMode::kIdeal;
};

// Per-subcarrier digital stage behind an analog beamformer. The power share
// is measured through the analog stage: ||W_rf * matrix||_F^2 = 1/l_used.
struct DigitalPrecoder {
  CMat matrix;  // R x K
  double beta = 0.0;
};

struct RfSufficiency {
  int kappa_h = 1;
  int kappa_v = 1;
  int kappa = 1;
};

// Water-filling allocation over parallel streams.
struct WaterFilling {
  std::vector<double> levels;  // per-stream powers, sum to the budget
  double water_level = 0.0;
  double log_offset = 0.0;     // sum over active streams of log2(water_level)
};

struct ZfPrecoder {
  CMat matrix;  // M x K
  double beta = 0.0;
};

// Sum of per-UE SCMs (Eq. form: one term per scheduled UE/subcarrier pair).
CMat aggregate_scm(const std::vector<const CMat*>& scms);

// Weighted variant used by the scenario runner: each UE's SCM is constant
// across its group's sub-band, so the per-subcarrier sum collapses to a
// sub-band-size weighting.
CMat aggregate_scm_weighted(const std::vector<const CMat*>& scms,
                            const std::vector<double>& weights);

// Analog stage from the aggregate SCM: columns are the top-R eigenvectors.
AnalogBeamformer unified_ab_ideal(const CMat& scm, int r_chains);

// PSN-constrained analog stage: keep only the phases of the top eigenvectors,
// fixed modulus 1/sqrt(M) per entry; arg(0) is taken as 0.
AnalogBeamformer unified_ab_phase_only(const CMat& scm, int r_chains);

// tr[W^H R W]; throws NonRealTrace if the imaginary residue is not negligible.
double trace_objective(const AnalogBeamformer& w, const CMat& scm);

// Full-digital ZF precoder with beta chosen so ||W||_F^2 = 1/l_used.
ZfPrecoder zf_full(const CMat& h, int l_used);

// Digital ZF on the effective channel H^T W_rf; power measured through the
// analog stage.
DigitalPrecoder zf_hybrid(const CMat& h, const AnalogBeamformer& w_rf, int l_used);

// Per-subcarrier ZF sum rate, k_l streams of equal share 1/k_l:
// k_l * log2(1 + beta^2 / (k_l sigma2)).
double sum_rate_zf(double beta, int k_l, double sigma2);

WaterFilling water_fill(const std::vector<double>& gain_over_noise, double budget);

// ZF-THP benchmark rate: QR of the effective row channel, water-filled power
// over the triangular gains, exact finite-SNR form.
double sum_rate_zf_thp(const CMat& h_eff_t, double sigma2, double budget);

// Sufficient RF chain count for a sector-limited array (rank estimate of the
// constrained array-response span, per dimension, clamped to >= 1).
RfSufficiency sufficient_rf_chains(const ArrayGeometry& geom, const Sector& sector);

}  // namespace hbsim

#endif  // HBSIM_BEAMFORMING_HPP
