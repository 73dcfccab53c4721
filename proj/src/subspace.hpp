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
//
// Per-UE SCM estimation from partial CSI measured on one row plus one column
// of the UPA: per-dimension covariance, FFT dominant-angle search, steering
// subspace assembly, dimension reduction, CSI-error robustness and FDD angle
// rescaling.

#ifndef HBSIM_SUBSPACE_HPP
#define HBSIM_SUBSPACE_HPP

#include <utility>
#include <vector>

#include "channel.hpp"
#include "numerics.hpp"
#include "rng.hpp"

namespace hbsim {

// Which antennas are wired for uplink channel estimation: one row (possibly
// a reduced prefix of it) plus one column, sharing the corner element, so
// P = m_h' + m_v - 1.
struct PartialConnection {
  std::vector<int> row_indices;  // antennas of the measured row, size m_h'
  std::vector<int> col_indices;  // antennas of the measured column, size m_v
  int m_h_measured = 0;          // m_h' (== m_h unless reduced)

  int p() const {
    return static_cast<int>(row_indices.size() + col_indices.size()) - 1;
  }
  // Explicit P x M selector with exactly one 1 per row: the measured row
  // first, then the column minus the shared corner.
  CMat selector(int m_total) const;
};

// Builds the row+column pattern for a geometry; m_h_measured < m_h selects
// the conservative prefix of the first row.
PartialConnection make_partial_connection(const ArrayGeometry& geom, int m_h_measured = 0);

enum class ScmDimension { kHorizontal, kVertical };

// Per-dimension covariance (m_d x m_d), an average of sample outer products.
struct DimScm {
  CMat matrix;
  ScmDimension dimension = ScmDimension::kHorizontal;
};

// Grid angle located by the FFT search: omega0 = 2 pi (bin_index - 1) / n_fft.
struct DominantAngle {
  double omega0 = 0.0;
  int bin_index = 1;  // 1-based
  int n_fft = 1;
};

// Kronecker-factored SCM estimate with its construction metadata.
struct ScmEstimate {
  CMat matrix;    // M x M, conj(V) V^T with V = h_factor kron v_factor
  CMat h_factor;  // m_h x n_h, unit Frobenius norm
  CMat v_factor;  // m_v x n_v, unit Frobenius norm
  DominantAngle h_angle;
  DominantAngle v_angle;
  std::vector<double> h_weights;  // retained d_mm values
  std::vector<double> v_weights;
};

struct CsiErrorModel {
  double zeta = 1.0;  // CSI accuracy level in [0,1]
};

struct FddConfig {
  double f_ul = 1.0;
  double f_dl = 1.0;
  double eta() const { return f_ul / f_dl; }
};

// Estimation knobs. n_fft = 0 picks the smallest power of two >= 4 * m_d that
// is a multiple of m_d. snapshots is the number of repeated noisy pilot
// measurements per subcarrier inside one coherence block; it is forced to 1
// when zeta == 1 since the repeats would be identical.
struct ScParams {
  double gamma = 10.0;  // dimension-reduction threshold; infinity keeps all
  int n_fft = 0;
  int stride = 1;
  int snapshots = 1024;
};

// Noisy partial CSI at one subcarrier: the selected row/column entries of the
// frequency-domain channel, each independently corrupted as
// zeta * h + sqrt(1 - zeta^2) * eps with unit-variance complex Gaussian eps.
std::pair<CVec, CVec> measure_partial_csi(const UeChannelProfile& profile,
                                          const ArrayGeometry& geom,
                                          const PartialConnection& conn, int l,
                                          int fft_size, const CsiErrorModel& err,
                                          Rng& rng);

DimScm dim_scm(const std::vector<CVec>& samples, ScmDimension dimension);

// Default FFT length rule for the dominant-angle search.
int default_n_fft(int m_d);

// argmax over the n_fft grid of e^H[w] R e[w], via the real part of the FFT
// of the superdiagonal sum vector; ties resolve to the lowest bin.
DominantAngle dominant_angle(const DimScm& scm, int n_fft);

// Steering matrix tracking the m_d angles associated with the dominant one:
// column m = e_{m_target}[omega0 + 2 pi (m-1)/m_d]. Unitary when
// m_target == m_d.
CMat steering_matrix(const DominantAngle& angle, int m_d, int m_target);

// d_mm = s_m^H R s_m, real non-negative quadratic forms.
std::vector<double> steering_weights(const DimScm& scm, const CMat& s);

// One retained steering column: its grid angle, weight and original index.
struct RetainedColumn {
  DominantAngle angle;
  double weight = 0.0;
  int index = 0;  // 1-based column index within the steering comb
};

// Keep columns with d_11/d_mm <= gamma, cap at the kappa_dim largest;
// gamma = infinity keeps the full comb uncapped.
std::vector<RetainedColumn> reduce_columns(const DominantAngle& anchor, int m_d,
                                           const std::vector<double>& d,
                                           double gamma, int kappa_dim);

// Factor matrix from retained columns: unit-Frobenius S * D.
CMat build_factor(const std::vector<RetainedColumn>& cols, int m_target);

// reduce_columns + build_factor, the per-dimension subspace of the estimate.
CMat reduce_and_assemble(const CMat& s, const std::vector<double>& d, double gamma,
                         int kappa_dim, const DominantAngle& anchor, int m_d);

ScmEstimate assemble_scm(const CMat& h_factor, const CMat& v_factor);

// Rescales a grid angle between carriers: omega_dl = (f_dl/f_ul) * omega_ul,
// applied on the principal interval (-pi, pi] and snapped back to the grid.
DominantAngle fdd_rescale(const DominantAngle& angle, const FddConfig& cfg);

// Everything the estimator needs for one UE.
struct EstimationInputs {
  const UeChannelProfile* profile = nullptr;
  ArrayGeometry geom;          // array as seen by the measurement carrier
  PartialConnection conn;
  std::vector<int> subcarriers;  // 1-based measurement subcarriers
  int fft_size = 0;
  ScParams params;
  int kappa_h = 1;
  int kappa_v = 1;
  CsiErrorModel err;
};

// End-to-end SC estimate for one UE (TDD / same-carrier case).
ScmEstimate estimate_ue_scm(const EstimationInputs& in, Rng& rng);

// FDD variant: measured at the uplink carrier (in.geom must be the uplink
// array), each retained column angle rescaled to the downlink before the
// factors are rebuilt. With rescale = false the uplink angles are used as-is,
// which is the mismatched baseline.
ScmEstimate estimate_ue_scm_fdd(const EstimationInputs& in, const FddConfig& fdd,
                                bool rescale, Rng& rng);

// Both FDD variants from a single shared measurement pass:
// {with rescaling, without}.
std::pair<ScmEstimate, ScmEstimate> estimate_ue_scm_fdd_pair(const EstimationInputs& in,
                                                             const FddConfig& fdd,
                                                             Rng& rng);

// Feedback protocol shapes for the FDD downlink-CSI path: either the UE
// sends raw partial CSI and the BS runs the whole pipeline, or the UE reduces
// first and sends weights/indices/dominant angles.
struct ReducedFeedback {
  DominantAngle h_angle;
  DominantAngle v_angle;
  std::vector<double> h_weights;
  std::vector<int> h_indices;
  std::vector<double> v_weights;
  std::vector<int> v_indices;
};

ScmEstimate estimate_from_raw_feedback(const EstimationInputs& in, Rng& rng);
ReducedFeedback compute_reduced_feedback(const EstimationInputs& in, Rng& rng);
ScmEstimate estimate_from_reduced_feedback(const ReducedFeedback& fb,
                                           const ArrayGeometry& geom);

// Uplink feedback volume per UE in bytes (complex entries as two 4-byte
// floats, indices/angles 4 bytes each).
size_t feedback_bytes_raw(const EstimationInputs& in);
size_t feedback_bytes_reduced(const ReducedFeedback& fb);

}  // namespace hbsim

#endif  // HBSIM_SUBSPACE_HPP
