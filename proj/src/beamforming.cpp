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

#include "beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hbsim {

CMat aggregate_scm(const std::vector<const CMat*>& scms) {
  std::vector<double> w(scms.size(), 1.0);
  return aggregate_scm_weighted(scms, w);
}

CMat aggregate_scm_weighted(const std::vector<const CMat*>& scms,
                            const std::vector<double>& weights) {
  if (scms.empty()) throw Error(ErrorKind::kEmpty, "aggregate_scm: no input");
  if (scms.size() != weights.size())
    throw Error(ErrorKind::kDimMismatch, "aggregate_scm: weight count differs");
  const int m = scms.front()->rows();
  CMat sum(m, m);
  for (size_t i = 0; i < scms.size(); ++i) {
    const CMat& s = *scms[i];
    if (s.rows() != m || s.cols() != m)
      throw Error(ErrorKind::kDimMismatch, "aggregate_scm: mixed dimensions");
    const double w = weights[i];
    for (size_t k = 0; k < sum.data().size(); ++k) sum.data()[k] += w * s.data()[k];
  }
  return sum;
}

AnalogBeamformer unified_ab_ideal(const CMat& scm, int r_chains) {
  const int m = scm.rows();
  if (r_chains < 1 || r_chains > m)
    throw Error(ErrorKind::kBadParams, "unified_ab_ideal: need 1 <= R <= M");
  const EigenDecomposition ed = hermitian_eig(scm);
  AnalogBeamformer ab;
  ab.mode = AbMode::kIdeal;
  ab.matrix = CMat(m, r_chains);
  for (int c = 0; c < r_chains; ++c)
    for (int r = 0; r < m; ++r) ab.matrix(r, c) = ed.vectors(r, c);
  return ab;
}

AnalogBeamformer unified_ab_phase_only(const CMat& scm, int r_chains) {
  AnalogBeamformer ab = unified_ab_ideal(scm, r_chains);
  ab.mode = AbMode::kPhaseOnly;
  const double mag = 1.0 / std::sqrt(static_cast<double>(scm.rows()));
  for (cd& z : ab.matrix.data()) {
    const double arg = (z == cd{}) ? 0.0 : std::arg(z);
    z = std::polar(mag, arg);
  }
  return ab;
}

double trace_objective(const AnalogBeamformer& w, const CMat& scm) {
  if (w.matrix.rows() != scm.rows())
    throw Error(ErrorKind::kDimMismatch, "trace_objective: dimension mismatch");
  const cd t = trace(adjoint(w.matrix) * (scm * w.matrix));
  // absolute floor keeps the relative test meaningful when the trace is ~0
  const double floor = 1e-12 * (1.0 + fro_norm(scm));
  if (std::abs(t.imag()) > 1e-6 * std::abs(t) + floor)
    throw Error(ErrorKind::kNonRealTrace, "trace_objective: non-real trace");
  return t.real();
}

ZfPrecoder zf_full(const CMat& h, int l_used) {
  if (l_used < 1) throw Error(ErrorKind::kBadParams, "zf_full: l_used must be >= 1");
  const CMat h_conj = conjugate(h);
  const CMat gram = transpose(h) * h_conj;  // H^T H*, K x K Hermitian PD
  const CMat inv = solve_hermitian(gram, CMat::identity(gram.rows()));
  const double tr_inv = trace(inv).real();
  ZfPrecoder out;
  out.beta = std::sqrt(1.0 / (static_cast<double>(l_used) * tr_inv));
  out.matrix = out.beta * (h_conj * inv);
  return out;
}

DigitalPrecoder zf_hybrid(const CMat& h, const AnalogBeamformer& w_rf, int l_used) {
  if (l_used < 1) throw Error(ErrorKind::kBadParams, "zf_hybrid: l_used must be >= 1");
  if (h.rows() != w_rf.matrix.rows())
    throw Error(ErrorKind::kDimMismatch, "zf_hybrid: channel/AB dimension mismatch");

  // effective channel H_p^T = H^T W_rf (K x R)
  const CMat h_p_t = transpose(h) * w_rf.matrix;
  const CMat h_p_conj = adjoint(h_p_t);  // = H_p^* (R x K)
  const CMat gram = h_p_t * h_p_conj;    // H_p^T H_p^*, K x K
  const CMat inv = solve_hermitian(gram, CMat::identity(gram.rows()));
  const CMat w0 = h_p_conj * inv;  // unnormalized W^BB, R x K

  // Power through the analog stage. For an ideal (orthonormal) AB this equals
  // tr[(H_p^T H_p^*)^-1]; for the PSN it has to be measured on the product.
  const double p = [&] {
    if (w_rf.mode == AbMode::kIdeal) return trace(inv).real();
    const double n = fro_norm(w_rf.matrix * w0);
    return n * n;
  }();

  DigitalPrecoder out;
  out.beta = std::sqrt(1.0 / (static_cast<double>(l_used) * p));
  out.matrix = out.beta * w0;
  return out;
}

double sum_rate_zf(double beta, int k_l, double sigma2) {
  if (k_l < 1 || sigma2 <= 0.0 || beta < 0.0)
    throw Error(ErrorKind::kBadParams, "sum_rate_zf: invalid arguments");
  return k_l * std::log2(1.0 + beta * beta / (k_l * sigma2));
}

WaterFilling water_fill(const std::vector<double>& gain_over_noise, double budget) {
  if (gain_over_noise.empty())
    throw Error(ErrorKind::kEmpty, "water_fill: no streams");
  if (budget <= 0.0) throw Error(ErrorKind::kBadParams, "water_fill: budget must be > 0");

  const size_t n = gain_over_noise.size();
  std::vector<double> inv(n);
  for (size_t i = 0; i < n; ++i) {
    if (gain_over_noise[i] <= 0.0)
      throw Error(ErrorKind::kBadParams, "water_fill: non-positive gain");
    inv[i] = 1.0 / gain_over_noise[i];
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return inv[a] < inv[b]; });

  // grow the active set by ascending 1/gain until the water level drops below
  // the next stream's floor
  double level = 0.0;
  size_t active = 0;
  double inv_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    inv_sum += inv[order[i]];
    const double candidate = (budget + inv_sum) / static_cast<double>(i + 1);
    if (candidate <= inv[order[i]]) break;
    level = candidate;
    active = i + 1;
  }

  WaterFilling wf;
  wf.levels.assign(n, 0.0);
  wf.water_level = level;
  wf.log_offset = 0.0;
  for (size_t i = 0; i < active; ++i) {
    wf.levels[order[i]] = level - inv[order[i]];
    wf.log_offset += std::log2(level);
  }
  return wf;
}

double sum_rate_zf_thp(const CMat& h_eff_t, double sigma2, double budget) {
  if (sigma2 <= 0.0 || budget <= 0.0)
    throw Error(ErrorKind::kBadParams, "sum_rate_zf_thp: invalid noise/budget");
  const QrResult qr = qr_decompose(h_eff_t);
  const int k = qr.g.rows();
  std::vector<double> gains(k);
  for (int i = 0; i < k; ++i) {
    const double g = qr.g(i, i).real();
    gains[i] = g * g / sigma2;
  }
  const WaterFilling wf = water_fill(gains, budget);
  double rate = 0.0;
  for (int i = 0; i < k; ++i) rate += std::log2(1.0 + wf.levels[i] * gains[i]);
  return rate;
}

namespace {

// Extrema of cos(phi)*sin(theta) on the sector rectangle. cos(phi) is
// monotone on [0,pi], sin(theta) is concave with its max at pi/2, so the
// extrema live on the corner/critical grid.
void cos_sin_extrema(const Sector& s, double* lo, double* hi) {
  std::vector<double> phis = {s.phi_min, s.phi_max};
  if (s.phi_min < M_PI / 2.0 && M_PI / 2.0 < s.phi_max) phis.push_back(M_PI / 2.0);
  std::vector<double> thetas = {s.theta_min, s.theta_max};
  if (s.theta_min < M_PI / 2.0 && M_PI / 2.0 < s.theta_max) thetas.push_back(M_PI / 2.0);
  *lo = 2.0;
  *hi = -2.0;
  for (double phi : phis)
    for (double theta : thetas) {
      const double v = std::cos(phi) * std::sin(theta);
      *lo = std::min(*lo, v);
      *hi = std::max(*hi, v);
    }
}

}  // namespace

RfSufficiency sufficient_rf_chains(const ArrayGeometry& geom, const Sector& sector) {
  if (sector.phi_min >= sector.phi_max || sector.theta_min >= sector.theta_max)
    throw Error(ErrorKind::kBadParams, "sufficient_rf_chains: empty sector");

  double lo = 0.0, hi = 0.0;
  cos_sin_extrema(sector, &lo, &hi);

  RfSufficiency out;
  out.kappa_h = std::max(
      1, static_cast<int>(std::ceil(geom.m_h * geom.d_h_over_lambda * (hi - lo))));
  out.kappa_v = std::max(
      1, static_cast<int>(std::ceil(geom.m_v * geom.d_v_over_lambda *
                                    (std::cos(sector.theta_min) - std::cos(sector.theta_max)))));
  out.kappa = out.kappa_h * out.kappa_v;
  return out;
}

}  // namespace hbsim
