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

#include "subspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hbsim {

CMat PartialConnection::selector(int m_total) const {
  const int rows = p();
  CMat t(rows, m_total);
  int r = 0;
  for (int idx : row_indices) t(r++, idx) = 1.0;
  for (size_t i = 1; i < col_indices.size(); ++i) t(r++, col_indices[i]) = 1.0;
  return t;
}

PartialConnection make_partial_connection(const ArrayGeometry& geom, int m_h_measured) {
  if (m_h_measured <= 0) m_h_measured = geom.m_h;
  if (m_h_measured > geom.m_h)
    throw Error(ErrorKind::kBadSelector, "partial connection: measured row longer than the array row");

  // antenna m = i_h * m_v + i_v (horizontal kron vertical ordering); the
  // measured row is i_v = 0, the measured column is i_h = 0
  PartialConnection conn;
  conn.m_h_measured = m_h_measured;
  conn.row_indices.resize(m_h_measured);
  for (int ih = 0; ih < m_h_measured; ++ih) conn.row_indices[ih] = ih * geom.m_v;
  conn.col_indices.resize(geom.m_v);
  for (int iv = 0; iv < geom.m_v; ++iv) conn.col_indices[iv] = iv;
  return conn;
}

namespace {

void validate_connection(const ArrayGeometry& geom, const PartialConnection& conn) {
  if (conn.row_indices.empty() || conn.col_indices.empty())
    throw Error(ErrorKind::kBadSelector, "partial connection: empty row or column");
  if (conn.m_h_measured != static_cast<int>(conn.row_indices.size()))
    throw Error(ErrorKind::kBadSelector, "partial connection: inconsistent row size");
  if (static_cast<int>(conn.col_indices.size()) != geom.m_v)
    throw Error(ErrorKind::kBadSelector, "partial connection: column must span m_v antennas");
  const int m = geom.antennas();
  for (int idx : conn.row_indices)
    if (idx < 0 || idx >= m)
      throw Error(ErrorKind::kBadSelector, "partial connection: antenna index out of range");
  for (int idx : conn.col_indices)
    if (idx < 0 || idx >= m)
      throw Error(ErrorKind::kBadSelector, "partial connection: antenna index out of range");
  if (conn.row_indices.front() != conn.col_indices.front())
    throw Error(ErrorKind::kBadSelector, "partial connection: row and column must share the corner");
}

// clean (error-free) selected entries at one subcarrier
void select_clean(const UeChannelProfile& profile, const ArrayGeometry& geom,
                  const PartialConnection& conn, int l, int fft_size, CVec* h_row,
                  CVec* v_col) {
  const CVec h = freq_channel(profile, geom, l, fft_size);
  h_row->resize(conn.row_indices.size());
  v_col->resize(conn.col_indices.size());
  for (size_t i = 0; i < conn.row_indices.size(); ++i)
    (*h_row)[i] = h[conn.row_indices[i]];
  for (size_t i = 0; i < conn.col_indices.size(); ++i)
    (*v_col)[i] = h[conn.col_indices[i]];
}

// Eq.-style corruption; zeta == 1 draws nothing so the noiseless path is
// reproducible regardless of the snapshot count.
void corrupt(const CVec& clean, double zeta, Rng& rng, CVec* out) {
  out->resize(clean.size());
  if (zeta == 1.0) {
    *out = clean;
    return;
  }
  const double err_scale = std::sqrt(1.0 - zeta * zeta);
  for (size_t i = 0; i < clean.size(); ++i)
    (*out)[i] = zeta * clean[i] + err_scale * rng.cgauss();
}

void accumulate_outer(const CVec& v, CMat* acc) {
  const int n = static_cast<int>(v.size());
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) (*acc)(r, c) += v[r] * std::conj(v[c]);
}

void hermitize(CMat* m) {
  for (int r = 0; r < m->rows(); ++r) {
    for (int c = r + 1; c < m->cols(); ++c) {
      const cd avg = 0.5 * ((*m)(r, c) + std::conj((*m)(c, r)));
      (*m)(r, c) = avg;
      (*m)(c, r) = std::conj(avg);
    }
    (*m)(r, r) = cd((*m)(r, r).real(), 0.0);
  }
}

}  // namespace

std::pair<CVec, CVec> measure_partial_csi(const UeChannelProfile& profile,
                                          const ArrayGeometry& geom,
                                          const PartialConnection& conn, int l,
                                          int fft_size, const CsiErrorModel& err,
                                          Rng& rng) {
  validate_connection(geom, conn);
  if (err.zeta < 0.0 || err.zeta > 1.0)
    throw Error(ErrorKind::kBadParams, "measure_partial_csi: zeta outside [0,1]");
  CVec h_clean, v_clean;
  select_clean(profile, geom, conn, l, fft_size, &h_clean, &v_clean);
  std::pair<CVec, CVec> out;
  corrupt(h_clean, err.zeta, rng, &out.first);
  corrupt(v_clean, err.zeta, rng, &out.second);
  return out;
}

DimScm dim_scm(const std::vector<CVec>& samples, ScmDimension dimension) {
  if (samples.empty()) throw Error(ErrorKind::kEmpty, "dim_scm: no samples");
  const size_t n = samples.front().size();
  for (const CVec& s : samples)
    if (s.size() != n) throw Error(ErrorKind::kDimMismatch, "dim_scm: uneven sample lengths");

  DimScm out;
  out.dimension = dimension;
  out.matrix = CMat(static_cast<int>(n), static_cast<int>(n));
  for (const CVec& s : samples) accumulate_outer(s, &out.matrix);
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (cd& z : out.matrix.data()) z *= inv;
  hermitize(&out.matrix);
  return out;
}

int default_n_fft(int m_d) {
  if (m_d < 1) throw Error(ErrorKind::kBadNfft, "default_n_fft: m_d must be >= 1");
  size_t n = 1;
  while (n < 4 * static_cast<size_t>(m_d)) n <<= 1;
  for (int i = 0; i < 8; ++i, n <<= 1)
    if (n % static_cast<size_t>(m_d) == 0) return static_cast<int>(n);
  throw Error(ErrorKind::kBadNfft,
              "default_n_fft: no power-of-two FFT length is a multiple of m_d");
}

namespace {

void check_n_fft(int n_fft, int m_d) {
  if (n_fft < m_d || n_fft < 1 || (n_fft & (n_fft - 1)) != 0 || n_fft % m_d != 0)
    throw Error(ErrorKind::kBadNfft,
                "dominant_angle: N_F must be a power of two, >= m_d and a multiple of m_d");
}

// FFT of the superdiagonal sum vector; bin k (0-based) carries
// g(2 pi k / N_F) whose doubled real part over m_d is e^H[w_k] R e[w_k].
CVec spectrum(const CMat& r, int n_fft) {
  const int m_d = r.rows();
  CVec rho(n_fft, cd{});
  double diag = 0.0;
  for (int m = 0; m < m_d; ++m) diag += r(m, m).real();
  rho[0] = 0.5 * diag;
  for (int p = 1; p < m_d; ++p) {
    cd s{};
    for (int m = 0; m + p < m_d; ++m) s += r(m, m + p);
    rho[p] = s;
  }
  return fft(rho);
}

struct DominantSearch {
  DominantAngle angle;
  std::vector<double> comb_weights;  // d_mm via bin reuse, one per comb column
};

DominantSearch dominant_search(const CMat& r, int n_fft) {
  check_n_fft(n_fft, r.rows());
  const int m_d = r.rows();
  const CVec f = spectrum(r, n_fft);

  int best = 0;
  for (int k = 1; k < n_fft; ++k)
    if (f[k].real() > f[best].real()) best = k;

  DominantSearch out;
  out.angle.n_fft = n_fft;
  out.angle.bin_index = best + 1;
  out.angle.omega0 = 2.0 * M_PI * best / static_cast<double>(n_fft);

  const int stride = n_fft / m_d;
  out.comb_weights.resize(m_d);
  for (int m = 0; m < m_d; ++m) {
    const int k = (best + m * stride) % n_fft;
    out.comb_weights[m] = 2.0 / static_cast<double>(m_d) * f[k].real();
  }
  return out;
}

CVec grid_steering(double omega, int len) {
  CVec e(len);
  const double scale = 1.0 / std::sqrt(static_cast<double>(len));
  for (int n = 0; n < len; ++n) e[n] = std::polar(scale, omega * n);
  return e;
}

}  // namespace

DominantAngle dominant_angle(const DimScm& scm, int n_fft) {
  return dominant_search(scm.matrix, n_fft).angle;
}

CMat steering_matrix(const DominantAngle& angle, int m_d, int m_target) {
  if (m_target < m_d)
    throw Error(ErrorKind::kBadParams, "steering_matrix: m_target must be >= m_d");
  CMat s(m_target, m_d);
  for (int m = 0; m < m_d; ++m) {
    const double omega = angle.omega0 + 2.0 * M_PI * m / static_cast<double>(m_d);
    s.set_column(m, grid_steering(omega, m_target));
  }
  return s;
}

std::vector<double> steering_weights(const DimScm& scm, const CMat& s) {
  if (s.rows() != scm.matrix.rows())
    throw Error(ErrorKind::kDimMismatch, "steering_weights: dimension mismatch");
  std::vector<double> d(s.cols());
  const double scale = fro_norm(scm.matrix);
  for (int m = 0; m < s.cols(); ++m) {
    const CVec sm = s.column(m);
    const CVec rs = scm.matrix * sm;
    const cd q = dot(sm, rs);
    if (std::abs(q.imag()) > 1e-6 * std::abs(q) + 1e-12 * (1.0 + scale))
      throw Error(ErrorKind::kNonRealForm, "steering_weights: non-real quadratic form");
    d[m] = q.real();
  }
  return d;
}

std::vector<RetainedColumn> reduce_columns(const DominantAngle& anchor, int m_d,
                                           const std::vector<double>& d, double gamma,
                                           int kappa_dim) {
  if (static_cast<int>(d.size()) != m_d)
    throw Error(ErrorKind::kDimMismatch, "reduce_columns: weight count differs from m_d");
  if (!(gamma > 1.0))
    throw Error(ErrorKind::kBadParams, "reduce_columns: gamma must be > 1");

  const double d_lead = d.empty() ? 0.0 : d[0];
  const bool keep_all = std::isinf(gamma);

  std::vector<int> kept;
  for (int m = 0; m < m_d; ++m) {
    if (keep_all || d_lead <= gamma * d[m]) kept.push_back(m);
  }
  // descending weight, ties by original position
  std::stable_sort(kept.begin(), kept.end(), [&](int a, int b) { return d[a] > d[b]; });
  if (!keep_all && kappa_dim >= 1 && static_cast<int>(kept.size()) > kappa_dim)
    kept.resize(kappa_dim);

  std::vector<RetainedColumn> out;
  out.reserve(kept.size());
  const int stride = anchor.n_fft / m_d;
  for (int m : kept) {
    RetainedColumn col;
    col.index = m + 1;
    col.weight = d[m];
    col.angle.n_fft = anchor.n_fft;
    const int k = ((anchor.bin_index - 1) + m * stride) % anchor.n_fft;
    col.angle.bin_index = k + 1;
    col.angle.omega0 = 2.0 * M_PI * k / static_cast<double>(anchor.n_fft);
    out.push_back(col);
  }
  return out;
}

CMat build_factor(const std::vector<RetainedColumn>& cols, int m_target) {
  if (cols.empty()) throw Error(ErrorKind::kEmpty, "build_factor: no retained columns");
  double sq = 0.0;
  for (const RetainedColumn& c : cols) sq += c.weight * c.weight;
  if (sq <= 0.0)
    throw Error(ErrorKind::kBadParams, "build_factor: all retained weights are zero");
  const double inv = 1.0 / std::sqrt(sq);

  CMat f(m_target, static_cast<int>(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) {
    const CVec e = grid_steering(cols[j].angle.omega0, m_target);
    for (int i = 0; i < m_target; ++i) f(i, static_cast<int>(j)) = cols[j].weight * inv * e[i];
  }
  return f;
}

CMat reduce_and_assemble(const CMat& s, const std::vector<double>& d, double gamma,
                         int kappa_dim, const DominantAngle& anchor, int m_d) {
  if (s.cols() != m_d)
    throw Error(ErrorKind::kDimMismatch, "reduce_and_assemble: steering column count differs");
  const std::vector<RetainedColumn> cols = reduce_columns(anchor, m_d, d, gamma, kappa_dim);
  return build_factor(cols, s.rows());
}

ScmEstimate assemble_scm(const CMat& h_factor, const CMat& v_factor) {
  if (h_factor.empty() || v_factor.empty())
    throw Error(ErrorKind::kDimMismatch, "assemble_scm: empty factor");
  ScmEstimate out;
  out.h_factor = h_factor;
  out.v_factor = v_factor;
  const CMat v = kron(h_factor, v_factor);
  out.matrix = conjugate(v) * transpose(v);
  hermitize(&out.matrix);
  return out;
}

DominantAngle fdd_rescale(const DominantAngle& angle, const FddConfig& cfg) {
  if (cfg.f_ul <= 0.0 || cfg.f_dl <= 0.0)
    throw Error(ErrorKind::kBadParams, "fdd_rescale: carriers must be positive");

  // scale on the principal interval so physical angles near zero move
  // continuously, then wrap and snap to the search grid
  double w = angle.omega0 > M_PI ? angle.omega0 - 2.0 * M_PI : angle.omega0;
  w *= cfg.f_dl / cfg.f_ul;
  w = std::fmod(w, 2.0 * M_PI);
  if (w < 0.0) w += 2.0 * M_PI;

  const int n = angle.n_fft;
  int k = static_cast<int>(std::lround(w * n / (2.0 * M_PI))) % n;
  if (k < 0) k += n;

  DominantAngle out;
  out.n_fft = n;
  out.bin_index = k + 1;
  out.omega0 = 2.0 * M_PI * k / static_cast<double>(n);
  return out;
}

namespace {

struct DimensionEstimate {
  DominantAngle anchor;
  std::vector<RetainedColumn> retained;
};

// Shared front end of the estimator: sample covariances for both dimensions,
// dominant-angle search with bin-reused weights, threshold reduction.
void estimate_front(const EstimationInputs& in, Rng& rng, DimensionEstimate* hor,
                    DimensionEstimate* ver) {
  validate_connection(in.geom, in.conn);
  if (in.profile == nullptr)
    throw Error(ErrorKind::kBadParams, "estimate_ue_scm: missing profile");
  if (in.subcarriers.empty())
    throw Error(ErrorKind::kEmpty, "estimate_ue_scm: no measurement subcarriers");
  if (in.err.zeta < 0.0 || in.err.zeta > 1.0)
    throw Error(ErrorKind::kBadParams, "estimate_ue_scm: zeta outside [0,1]");
  if (in.params.stride < 1 || in.params.snapshots < 1)
    throw Error(ErrorKind::kBadParams, "estimate_ue_scm: bad stride/snapshots");

  const int m_h = in.conn.m_h_measured;
  const int m_v = static_cast<int>(in.conn.col_indices.size());
  const int snapshots = (in.err.zeta == 1.0) ? 1 : in.params.snapshots;

  CMat acc_h(m_h, m_h), acc_v(m_v, m_v);
  CVec h_clean, v_clean, h_s, v_s;
  long count = 0;
  for (int l : in.subcarriers) {
    select_clean(*in.profile, in.geom, in.conn, l, in.fft_size, &h_clean, &v_clean);
    for (int s = 0; s < snapshots; ++s) {
      corrupt(h_clean, in.err.zeta, rng, &h_s);
      corrupt(v_clean, in.err.zeta, rng, &v_s);
      accumulate_outer(h_s, &acc_h);
      accumulate_outer(v_s, &acc_v);
      ++count;
    }
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (cd& z : acc_h.data()) z *= inv;
  for (cd& z : acc_v.data()) z *= inv;
  hermitize(&acc_h);
  hermitize(&acc_v);

  const int n_fft_h = in.params.n_fft > 0 ? in.params.n_fft : default_n_fft(m_h);
  const int n_fft_v = in.params.n_fft > 0 ? in.params.n_fft : default_n_fft(m_v);

  const DominantSearch sh = dominant_search(acc_h, n_fft_h);
  const DominantSearch sv = dominant_search(acc_v, n_fft_v);

  hor->anchor = sh.angle;
  hor->retained = reduce_columns(sh.angle, m_h, sh.comb_weights, in.params.gamma, in.kappa_h);
  ver->anchor = sv.angle;
  ver->retained = reduce_columns(sv.angle, m_v, sv.comb_weights, in.params.gamma, in.kappa_v);
}

ScmEstimate assemble_from(const DimensionEstimate& hor, const DimensionEstimate& ver,
                          int m_h_target, int m_v_target) {
  const CMat fh = build_factor(hor.retained, m_h_target);
  const CMat fv = build_factor(ver.retained, m_v_target);
  ScmEstimate out = assemble_scm(fh, fv);
  out.h_angle = hor.anchor;
  out.v_angle = ver.anchor;
  for (const RetainedColumn& c : hor.retained) out.h_weights.push_back(c.weight);
  for (const RetainedColumn& c : ver.retained) out.v_weights.push_back(c.weight);
  return out;
}

}  // namespace

ScmEstimate estimate_ue_scm(const EstimationInputs& in, Rng& rng) {
  DimensionEstimate hor, ver;
  estimate_front(in, rng, &hor, &ver);
  return assemble_from(hor, ver, in.geom.m_h, in.geom.m_v);
}

ScmEstimate estimate_ue_scm_fdd(const EstimationInputs& in, const FddConfig& fdd,
                                bool rescale, Rng& rng) {
  DimensionEstimate hor, ver;
  estimate_front(in, rng, &hor, &ver);
  if (rescale) {
    for (RetainedColumn& c : hor.retained) c.angle = fdd_rescale(c.angle, fdd);
    for (RetainedColumn& c : ver.retained) c.angle = fdd_rescale(c.angle, fdd);
    hor.anchor = fdd_rescale(hor.anchor, fdd);
    ver.anchor = fdd_rescale(ver.anchor, fdd);
  }
  return assemble_from(hor, ver, in.geom.m_h, in.geom.m_v);
}

std::pair<ScmEstimate, ScmEstimate> estimate_ue_scm_fdd_pair(const EstimationInputs& in,
                                                             const FddConfig& fdd,
                                                             Rng& rng) {
  DimensionEstimate hor, ver;
  estimate_front(in, rng, &hor, &ver);

  std::pair<ScmEstimate, ScmEstimate> out;
  out.second = assemble_from(hor, ver, in.geom.m_h, in.geom.m_v);

  for (RetainedColumn& c : hor.retained) c.angle = fdd_rescale(c.angle, fdd);
  for (RetainedColumn& c : ver.retained) c.angle = fdd_rescale(c.angle, fdd);
  hor.anchor = fdd_rescale(hor.anchor, fdd);
  ver.anchor = fdd_rescale(ver.anchor, fdd);
  out.first = assemble_from(hor, ver, in.geom.m_h, in.geom.m_v);
  return out;
}

ScmEstimate estimate_from_raw_feedback(const EstimationInputs& in, Rng& rng) {
  // raw partial CSI is fed back and the whole pipeline runs at the BS;
  // numerically identical to the local estimate
  return estimate_ue_scm(in, rng);
}

ReducedFeedback compute_reduced_feedback(const EstimationInputs& in, Rng& rng) {
  DimensionEstimate hor, ver;
  estimate_front(in, rng, &hor, &ver);
  ReducedFeedback fb;
  fb.h_angle = hor.anchor;
  fb.v_angle = ver.anchor;
  for (const RetainedColumn& c : hor.retained) {
    fb.h_weights.push_back(c.weight);
    fb.h_indices.push_back(c.index);
  }
  for (const RetainedColumn& c : ver.retained) {
    fb.v_weights.push_back(c.weight);
    fb.v_indices.push_back(c.index);
  }
  return fb;
}

ScmEstimate estimate_from_reduced_feedback(const ReducedFeedback& fb,
                                           const ArrayGeometry& geom) {
  auto rebuild = [](const DominantAngle& anchor, const std::vector<double>& w,
                    const std::vector<int>& idx, int m_d) {
    std::vector<RetainedColumn> cols(w.size());
    const int stride = anchor.n_fft / m_d;
    for (size_t j = 0; j < w.size(); ++j) {
      cols[j].weight = w[j];
      cols[j].index = idx[j];
      cols[j].angle.n_fft = anchor.n_fft;
      const int k = ((anchor.bin_index - 1) + (idx[j] - 1) * stride) % anchor.n_fft;
      cols[j].angle.bin_index = k + 1;
      cols[j].angle.omega0 = 2.0 * M_PI * k / static_cast<double>(anchor.n_fft);
    }
    return cols;
  };
  DimensionEstimate hor, ver;
  hor.anchor = fb.h_angle;
  hor.retained = rebuild(fb.h_angle, fb.h_weights, fb.h_indices, geom.m_h);
  ver.anchor = fb.v_angle;
  ver.retained = rebuild(fb.v_angle, fb.v_weights, fb.v_indices, geom.m_v);
  return assemble_from(hor, ver, geom.m_h, geom.m_v);
}

size_t feedback_bytes_raw(const EstimationInputs& in) {
  const int snapshots = (in.err.zeta == 1.0) ? 1 : in.params.snapshots;
  return in.subcarriers.size() * static_cast<size_t>(snapshots) *
         static_cast<size_t>(in.conn.p()) * 8;
}

size_t feedback_bytes_reduced(const ReducedFeedback& fb) {
  // weights and the dominant angle as 4-byte floats; indices 4 bytes, the
  // leading index is implied
  const size_t h = fb.h_weights.size() * 4 + (fb.h_indices.size() - 1) * 4 + 4;
  const size_t v = fb.v_weights.size() * 4 + (fb.v_indices.size() - 1) * 4 + 4;
  return h + v;
}

}  // namespace hbsim
