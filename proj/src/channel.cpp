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

#include "channel.hpp"

#include <algorithm>
#include <cmath>

namespace hbsim {

CVec steering_h(const ArrayGeometry& geom, double phi, double theta) {
  CVec a(geom.m_h);
  const double step = 2.0 * M_PI * geom.d_h_over_lambda * std::cos(phi) * std::sin(theta);
  const double scale = 1.0 / std::sqrt(static_cast<double>(geom.m_h));
  for (int m = 0; m < geom.m_h; ++m) a[m] = std::polar(scale, step * m);
  return a;
}

CVec steering_v(const ArrayGeometry& geom, double theta) {
  CVec a(geom.m_v);
  const double step = 2.0 * M_PI * geom.d_v_over_lambda * std::cos(theta);
  const double scale = 1.0 / std::sqrt(static_cast<double>(geom.m_v));
  for (int m = 0; m < geom.m_v; ++m) a[m] = std::polar(scale, step * m);
  return a;
}

CVec array_response(const ArrayGeometry& geom, double phi, double theta) {
  const CVec ah = steering_h(geom, phi, theta);
  const CVec av = steering_v(geom, theta);
  CVec a(static_cast<size_t>(geom.m_h) * geom.m_v);
  for (int ih = 0; ih < geom.m_h; ++ih)
    for (int iv = 0; iv < geom.m_v; ++iv)
      a[static_cast<size_t>(ih) * geom.m_v + iv] = ah[ih] * av[iv];
  return a;
}

UeChannelProfile generate_profile(Rng& rng, const ArrayGeometry& geom,
                                  const Sector& sector, const ClusterParams& params) {
  if (params.n_cl < 1 || params.n_ray < 1)
    throw Error(ErrorKind::kBadParams, "generate_profile: cluster counts must be >= 1");
  if (params.max_delay < 0)
    throw Error(ErrorKind::kBadParams, "generate_profile: negative max_delay");
  if (params.los_prob < 0.0 || params.los_prob > 1.0)
    throw Error(ErrorKind::kBadParams, "generate_profile: los_prob outside [0,1]");
  if (sector.phi_min >= sector.phi_max || sector.theta_min >= sector.theta_max)
    throw Error(ErrorKind::kBadParams, "generate_profile: empty sector");

  UeChannelProfile p;
  p.n_cl = params.n_cl;
  p.n_ray = params.n_ray;
  p.is_los = rng.uniform() < params.los_prob;

  const double half = 0.5 * params.cluster_spread_rad;
  auto clamp_phi = [&](double x) { return std::clamp(x, sector.phi_min, sector.phi_max); };
  auto clamp_theta = [&](double x) { return std::clamp(x, sector.theta_min, sector.theta_max); };

  for (int c = 0; c < params.n_cl; ++c) {
    const double phi_c = rng.uniform(sector.phi_min, sector.phi_max);
    const double theta_c = rng.uniform(sector.theta_min, sector.theta_max);
    if (p.is_los && c == 0) {
      // direct path: single ray at the cluster center, zero delay; its gain
      // is fixed after the NLoS power is known
      Ray ray;
      ray.gain = 0.0;
      ray.delay_samples = 0;
      ray.phi = phi_c;
      ray.theta = theta_c;
      ray.cluster = 0;
      p.rays.push_back(ray);
      continue;
    }
    for (int j = 0; j < params.n_ray; ++j) {
      Ray ray;
      ray.gain = rng.cgauss();
      ray.delay_samples =
          params.max_delay == 0 ? 0
                                : static_cast<int>(rng.uniform_index(
                                      static_cast<std::uint64_t>(params.max_delay) + 1));
      ray.phi = clamp_phi(phi_c + rng.uniform(-half, half));
      ray.theta = clamp_theta(theta_c + rng.uniform(-half, half));
      ray.cluster = c;
      p.rays.push_back(ray);
    }
  }

  if (p.is_los) {
    double nlos_power = 0.0;
    for (const Ray& r : p.rays) nlos_power += std::norm(r.gain);
    const double k_lin = std::pow(10.0, params.los_rician_db / 10.0);
    double los_mag;
    if (nlos_power > 0.0) {
      los_mag = std::sqrt(k_lin * nlos_power);
    } else {
      los_mag = 1.0;  // degenerate single-path profile
    }
    p.rays[0].gain = std::polar(los_mag, rng.uniform(0.0, 2.0 * M_PI));
  }

  // Global gain scale tying the ray-weight SCM to the frequency-averaged
  // channel covariance: with effective per-ray amplitude pref*gain, demand
  //   sum |pref * gain_j|^2 = sum |gain_j|
  // so that tr(conj(V) V^T) equals the subcarrier-averaged tr(conj(h) h^T)
  // up to shared-delay cross terms.
  const double pref2 = static_cast<double>(geom.antennas()) /
                       (static_cast<double>(params.n_cl) * params.n_ray);
  double sum_abs = 0.0, sum_sq = 0.0;
  for (const Ray& r : p.rays) {
    sum_abs += std::abs(r.gain);
    sum_sq += std::norm(r.gain);
  }
  if (sum_sq > 0.0) {
    const double s = sum_abs / (pref2 * sum_sq);
    for (Ray& r : p.rays) r.gain *= s;
  }
  return p;
}

CVec freq_channel(const UeChannelProfile& profile, const ArrayGeometry& geom,
                  int l, int fft_size) {
  if (l < 1 || l > fft_size)
    throw Error(ErrorKind::kBadParams, "freq_channel: subcarrier index outside 1..L");

  const int m = geom.antennas();
  const double pref = std::sqrt(static_cast<double>(m) /
                                (static_cast<double>(profile.n_cl) * profile.n_ray));
  CVec h(m);
  for (const Ray& ray : profile.rays) {
    const double phase = -2.0 * M_PI * ray.delay_samples * (l - 1) / static_cast<double>(fft_size);
    const cd alpha = pref * ray.gain * std::polar(1.0, phase);
    const CVec a = array_response(geom, ray.phi, ray.theta);
    for (int i = 0; i < m; ++i) h[i] += alpha * a[i];
  }
  return h;
}

TrueSubspace true_subspace(const UeChannelProfile& profile, const ArrayGeometry& geom) {
  const int m = geom.antennas();
  const int n = static_cast<int>(profile.rays.size());
  TrueSubspace sub;
  sub.basis = CMat(m, n);
  for (int j = 0; j < n; ++j) {
    const Ray& ray = profile.rays[j];
    const double w = std::sqrt(std::abs(ray.gain));
    const CVec a = array_response(geom, ray.phi, ray.theta);
    for (int i = 0; i < m; ++i) sub.basis(i, j) = w * a[i];
  }
  return sub;
}

TrueScm true_scm(const TrueSubspace& sub) {
  TrueScm scm;
  scm.matrix = conjugate(sub.basis) * transpose(sub.basis);
  // enforce exact Hermitian symmetry against rounding in the product
  for (int r = 0; r < scm.matrix.rows(); ++r)
    for (int c = r + 1; c < scm.matrix.cols(); ++c) {
      const cd avg = 0.5 * (scm.matrix(r, c) + std::conj(scm.matrix(c, r)));
      scm.matrix(r, c) = avg;
      scm.matrix(c, r) = std::conj(avg);
    }
  for (int r = 0; r < scm.matrix.rows(); ++r)
    scm.matrix(r, r) = cd(scm.matrix(r, r).real(), 0.0);
  return scm;
}

}  // namespace hbsim
