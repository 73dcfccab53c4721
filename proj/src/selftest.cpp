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

#include "selftest.hpp"

#include <cmath>
#include <cstdio>

#include "beamforming.hpp"
#include "numerics.hpp"
#include "rng.hpp"
#include "simulation.hpp"
#include "subspace.hpp"

namespace hbsim {

namespace {

CMat random_matrix(Rng& rng, int rows, int cols) {
  CMat m(rows, cols);
  for (cd& z : m.data()) z = rng.cgauss();
  return m;
}

CMat random_psd(Rng& rng, int n, int inner = 0) {
  const CMat x = random_matrix(rng, n, inner > 0 ? inner : n);
  CMat r = x * adjoint(x);
  // exact Hermitian symmetry
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const cd avg = 0.5 * (r(i, j) + std::conj(r(j, i)));
      r(i, j) = avg;
      r(j, i) = std::conj(avg);
    }
  for (int i = 0; i < n; ++i) r(i, i) = cd(r(i, i).real(), 0.0);
  return r;
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

}  // namespace

SuiteResult selftest_beta_monotonicity(int n_seeds) {
  const int m = 16, k = 4, r_chains = 8, l_used = 4;
  int violations = 0;
  double worst = 0.0;
  for (int s = 0; s < n_seeds; ++s) {
    Rng rng(mix64(0xb37a, s));
    const CMat h = random_matrix(rng, m, k);
    const CMat scm = random_psd(rng, m);
    const AnalogBeamformer ab = (s % 2 == 0) ? unified_ab_ideal(scm, r_chains)
                                             : unified_ab_phase_only(scm, r_chains);
    const double beta_full = zf_full(h, l_used).beta;
    const double beta_hyb = zf_hybrid(h, ab, l_used).beta;
    worst = std::max(worst, beta_hyb - beta_full);
    if (beta_hyb > beta_full + 1e-9) ++violations;
  }
  SuiteResult res;
  res.name = "beta_monotonicity";
  res.passed = violations == 0;
  res.detail = fmt("violations=%.0f worst_excess=%.3g", violations, worst);
  return res;
}

SuiteResult selftest_zero_interference(int n_seeds) {
  const int m = 16, k = 4, r_chains = 8, l_used = 4;
  double worst = 0.0;
  for (int s = 0; s < n_seeds; ++s) {
    Rng rng(mix64(0x21f0, s));
    const CMat h = random_matrix(rng, m, k);

    const ZfPrecoder zf = zf_full(h, l_used);
    CMat resid = transpose(h) * zf.matrix - cd(zf.beta) * CMat::identity(k);
    worst = std::max(worst, fro_norm(resid) / zf.beta);

    const AnalogBeamformer ab = unified_ab_phase_only(random_psd(rng, m), r_chains);
    const DigitalPrecoder dp = zf_hybrid(h, ab, l_used);
    resid = (transpose(h) * ab.matrix) * dp.matrix - cd(dp.beta) * CMat::identity(k);
    worst = std::max(worst, fro_norm(resid) / dp.beta);
  }
  SuiteResult res;
  res.name = "zero_interference";
  res.passed = worst < 1e-7;
  res.detail = fmt("worst_residual=%.3g (limit 1e-7)", worst);
  return res;
}

SuiteResult selftest_ab_modulus(int n_seeds) {
  const int m = 32, r_chains = 6;
  double worst_mod = 0.0, worst_orth = 0.0;
  for (int s = 0; s < n_seeds; ++s) {
    Rng rng(mix64(0xab0d, s));
    const CMat scm = random_psd(rng, m);

    const AnalogBeamformer po = unified_ab_phase_only(scm, r_chains);
    const double want = 1.0 / std::sqrt(static_cast<double>(m));
    for (const cd& z : po.matrix.data())
      worst_mod = std::max(worst_mod, std::abs(std::abs(z) - want));

    const AnalogBeamformer id = unified_ab_ideal(scm, r_chains);
    const CMat gram = adjoint(id.matrix) * id.matrix;
    worst_orth = std::max(worst_orth, fro_norm(gram - CMat::identity(r_chains)));
  }
  SuiteResult res;
  res.name = "ab_modulus";
  res.passed = worst_mod <= 1e-12 && worst_orth <= 1e-9;
  res.detail = fmt("modulus_err=%.3g orthonormality_err=%.3g", worst_mod, worst_orth);
  return res;
}

SuiteResult selftest_waterfill_kkt(int n_cases) {
  double worst_active = 0.0, worst_sum = 0.0;
  bool inactive_ok = true;
  for (int s = 0; s < n_cases; ++s) {
    Rng rng(mix64(0x3a7e, s));
    const int n = 1 + static_cast<int>(rng.uniform_index(8));
    std::vector<double> gains(n);
    for (double& g : gains) g = std::pow(10.0, rng.uniform(-3.0, 3.0));
    const double budget = std::pow(10.0, rng.uniform(-2.0, 1.0));
    const WaterFilling wf = water_fill(gains, budget);

    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      total += wf.levels[i];
      if (wf.levels[i] > 0.0)
        worst_active = std::max(worst_active,
                                std::abs(1.0 / gains[i] + wf.levels[i] - wf.water_level));
      else if (1.0 / gains[i] < wf.water_level - 1e-12)
        inactive_ok = false;
    }
    worst_sum = std::max(worst_sum, std::abs(total - budget));
  }
  SuiteResult res;
  res.name = "waterfill_kkt";
  res.passed = worst_active < 1e-9 && worst_sum < 1e-9 && inactive_ok;
  res.detail = fmt("active_err=%.3g budget_err=%.3g", worst_active, worst_sum) +
               (inactive_ok ? "" : " inactive_violation");
  return res;
}

SuiteResult selftest_thp_dominance(int n_seeds, double sigma2) {
  const int m = 16, k = 4, l_used = 1;
  int wins = 0;
  for (int s = 0; s < n_seeds; ++s) {
    Rng rng(mix64(0x7a9c, s));
    const CMat h = random_matrix(rng, m, k);
    const double beta = zf_full(h, l_used).beta;
    const double rate_zf = sum_rate_zf(beta, k, sigma2);
    const double rate_thp = sum_rate_zf_thp(transpose(h), sigma2, 1.0 / l_used);
    if (rate_thp >= rate_zf) ++wins;
  }
  SuiteResult res;
  res.name = "thp_dominance";
  res.passed = wins * 100 >= 95 * n_seeds;
  res.detail = fmt("thp_wins=%.0f of %.0f (need 95%%)", wins, n_seeds);
  return res;
}

SuiteResult selftest_moment_identity(int n_draws) {
  const int n = 8;
  const double zeta = 0.6;
  Rng rng(mix64(0x303d, 7));
  CVec h(n);
  for (cd& z : h) z = rng.cgauss();

  CMat acc(n, n);
  CVec sample(n);
  const double err_scale = std::sqrt(1.0 - zeta * zeta);
  for (int d = 0; d < n_draws; ++d) {
    for (int i = 0; i < n; ++i) sample[i] = zeta * h[i] + err_scale * rng.cgauss();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) acc(i, j) += sample[i] * std::conj(sample[j]);
  }
  for (cd& z : acc.data()) z /= static_cast<double>(n_draws);

  CMat target(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) target(i, j) = zeta * zeta * h[i] * std::conj(h[j]);
  for (int i = 0; i < n; ++i) target(i, i) += 1.0 - zeta * zeta;

  const double rel = fro_norm(acc - target) / fro_norm(target);
  SuiteResult res;
  res.name = "csi_error_moment";
  res.passed = rel < 0.03;
  res.detail = fmt("relative_error=%.4f (limit 0.03)", rel);
  return res;
}

SuiteResult selftest_csv_determinism() {
  ScenarioConfig cfg = default_scenario("desk");
  cfg.geom = {4, 4, 0.5, 0.5};
  cfg.fft_size = 32;
  cfg.l_used = 16;
  cfg.cp_length = 4;
  cfg.n_groups = 2;
  cfg.ues_per_group = 2;
  cfg.r_chains = 8;
  cfg.precoder_granularity = 4;
  cfg.snr_grid_db = {10.0};
  cfg.seeds = {1, 2, 3};
  cfg.methods = {Method::kFcZf, Method::kPhbPhase, Method::kScPhb};

  const std::string a = render_csv(run_scenario(cfg, 1));
  const std::string b = render_csv(run_scenario(cfg, 1));
  const std::string c = render_csv(run_scenario(cfg, 3));  // threaded run

  SuiteResult res;
  res.name = "csv_determinism";
  res.passed = (a == b) && (a == c);
  res.detail = res.passed ? "byte-identical across reruns and thread counts"
                          : "outputs differ between runs";
  return res;
}

SuiteResult selftest_appendix_equivalence(int n_matrices) {
  int argmax_mismatches = 0;
  double worst_identity = 0.0;
  for (int m_d : {4, 8, 16}) {
    const int n_fft = default_n_fft(m_d);
    for (int s = 0; s < n_matrices; ++s) {
      Rng rng(mix64(0xa99e, m_d, s));
      DimScm scm;
      scm.matrix = random_psd(rng, m_d);
      const DominantAngle ang = dominant_angle(scm, n_fft);

      // direct grid evaluation of e^H[w] R e[w]
      int best = 0;
      double best_val = -1e300;
      for (int k = 0; k < n_fft; ++k) {
        const double omega = 2.0 * M_PI * k / n_fft;
        CVec e(m_d);
        const double scale = 1.0 / std::sqrt(static_cast<double>(m_d));
        for (int i = 0; i < m_d; ++i) e[i] = std::polar(scale, omega * i);
        const double val = dot(e, scm.matrix * e).real();
        if (val > best_val) {
          best_val = val;
          best = k;
        }
      }
      if (best + 1 != ang.bin_index) ++argmax_mismatches;

      // pointwise identity (2/m_d) Re[FFT(rho)_n] == e^H R e
      CVec rho(n_fft, cd{});
      double diag = 0.0;
      for (int i = 0; i < m_d; ++i) diag += scm.matrix(i, i).real();
      rho[0] = 0.5 * diag;
      for (int p = 1; p < m_d; ++p) {
        cd acc{};
        for (int i = 0; i + p < m_d; ++i) acc += scm.matrix(i, i + p);
        rho[p] = acc;
      }
      const CVec f = fft(rho);
      for (int k = 0; k < n_fft; ++k) {
        const double omega = 2.0 * M_PI * k / n_fft;
        CVec e(m_d);
        const double scale = 1.0 / std::sqrt(static_cast<double>(m_d));
        for (int i = 0; i < m_d; ++i) e[i] = std::polar(scale, omega * i);
        const double direct = dot(e, scm.matrix * e).real();
        const double via_fft = 2.0 / static_cast<double>(m_d) * f[k].real();
        worst_identity = std::max(worst_identity, std::abs(direct - via_fft));
      }
    }
  }
  SuiteResult res;
  res.name = "appendix_equivalence";
  res.passed = argmax_mismatches == 0 && worst_identity < 1e-9;
  res.detail = fmt("argmax_mismatches=%.0f identity_err=%.3g", argmax_mismatches, worst_identity);
  return res;
}

std::vector<SuiteResult> run_selftest() {
  return {
      selftest_beta_monotonicity(),
      selftest_zero_interference(),
      selftest_ab_modulus(),
      selftest_waterfill_kkt(),
      selftest_thp_dominance(),
      selftest_moment_identity(),
      selftest_csv_determinism(),
      selftest_appendix_equivalence(),
  };
}

}  // namespace hbsim
