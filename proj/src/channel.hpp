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

#ifndef HBSIM_CHANNEL_HPP
#define HBSIM_CHANNEL_HPP

#include <vector>

#include "numerics.hpp"
#include "rng.hpp"

namespace hbsim {

// Uniform planar array, m_h antennas per row and m_v per column. Only the
// spacing/wavelength ratios matter; both must stay at or below half a
// wavelength.
struct ArrayGeometry {
  int m_h = 1;
  int m_v = 1;
  double d_h_over_lambda = 0.5;
  double d_v_over_lambda = 0.5;

  int antennas() const { return m_h * m_v; }

  // Same array seen at a different carrier: spacing in wavelengths scales
  // with frequency (used for the FDD uplink measurements).
  ArrayGeometry at_carrier_ratio(double freq_ratio) const {
    return {m_h, m_v, d_h_over_lambda * freq_ratio, d_v_over_lambda * freq_ratio};
  }
};

// Served angular sector; azimuth and elevation in [0, pi].
struct Sector {
  double phi_min = 0.0;
  double phi_max = M_PI;
  double theta_min = 0.0;
  double theta_max = M_PI;

  bool contains(double phi, double theta) const {
    return phi >= phi_min && phi <= phi_max && theta >= theta_min && theta <= theta_max;
  }
};

// One propagation ray: complex gain, integer sample delay, departure angles.
struct Ray {
  cd gain;
  int delay_samples = 0;
  double phi = 0.0;
  double theta = 0.0;
  int cluster = 0;
};

// Per-UE ray ensemble. n_cl/n_ray keep the nominal cluster counts that enter
// the channel prefactor even when the LoS cluster is collapsed to one ray.
struct UeChannelProfile {
  std::vector<Ray> rays;
  bool is_los = false;
  int n_cl = 1;
  int n_ray = 1;
};

// Simplified parameterized cluster model standing in for full 3GPP tables:
// cluster centers uniform in the sector, per-ray offsets uniform within the
// cluster spread, i.i.d. complex Gaussian gains, uniform integer delays.
struct ClusterParams {
  int n_cl = 6;
  int n_ray = 8;
  double cluster_spread_rad = 5.0 * M_PI / 180.0;
  double los_prob = 0.5;
  double los_rician_db = 10.0;  // LoS ray power over summed NLoS power
  int max_delay = 0;            // must stay below the CP length
};

struct TrueSubspace {
  CMat basis;  // M x n_rays, column j = sqrt(|gain_j|) * a(phi_j, theta_j)
};

struct TrueScm {
  CMat matrix;  // M x M Hermitian PSD, conj(V) * V^T
};

// horizontal steering vector, entry m = exp(j 2 pi m (d_h/lambda) cos(phi) sin(theta)) / sqrt(m_h)
CVec steering_h(const ArrayGeometry& geom, double phi, double theta);

// vertical steering vector, entry m = exp(j 2 pi m (d_v/lambda) cos(theta)) / sqrt(m_v)
CVec steering_v(const ArrayGeometry& geom, double theta);

// full array response a(phi, theta) = a_h kron a_v; unit 2-norm
CVec array_response(const ArrayGeometry& geom, double phi, double theta);

UeChannelProfile generate_profile(Rng& rng, const ArrayGeometry& geom,
                                  const Sector& sector, const ClusterParams& params);

// Frequency-domain channel at subcarrier l (1-based) of an fft_size-point grid.
CVec freq_channel(const UeChannelProfile& profile, const ArrayGeometry& geom,
                  int l, int fft_size);

TrueSubspace true_subspace(const UeChannelProfile& profile, const ArrayGeometry& geom);

TrueScm true_scm(const TrueSubspace& sub);

}  // namespace hbsim

#endif  // HBSIM_CHANNEL_HPP
