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

#include "numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hbsim {

CMat CMat::identity(int n) {
  CMat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMat CMat::from_column(const CVec& v) {
  CMat m(static_cast<int>(v.size()), 1);
  for (size_t i = 0; i < v.size(); ++i) m.a_[i] = v[i];
  return m;
}

CVec CMat::column(int c) const {
  CVec v(rows_);
  for (int r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

void CMat::set_column(int c, const CVec& v) {
  for (int r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

bool CMat::is_finite() const {
  for (const cd& z : a_) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

CMat operator*(const CMat& a, const CMat& b) {
  if (a.cols() != b.rows())
    throw Error(ErrorKind::kDimMismatch, "matmul: inner dimensions differ");
  CMat c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = 0; k < a.cols(); ++k) {
      const cd aik = a(i, k);
      if (aik == cd{}) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

CMat operator+(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::kDimMismatch, "add: shapes differ");
  CMat c = a;
  for (size_t i = 0; i < c.data().size(); ++i) c.data()[i] += b.data()[i];
  return c;
}

CMat operator-(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::kDimMismatch, "sub: shapes differ");
  CMat c = a;
  for (size_t i = 0; i < c.data().size(); ++i) c.data()[i] -= b.data()[i];
  return c;
}

CMat operator*(cd s, const CMat& a) {
  CMat c = a;
  for (cd& z : c.data()) z *= s;
  return c;
}

CMat transpose(const CMat& a) {
  CMat t(a.cols(), a.rows());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  return t;
}

CMat conjugate(const CMat& a) {
  CMat c = a;
  for (cd& z : c.data()) z = std::conj(z);
  return c;
}

CMat adjoint(const CMat& a) {
  CMat t(a.cols(), a.rows());
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) t(c, r) = std::conj(a(r, c));
  return t;
}

CVec operator*(const CMat& a, const CVec& x) {
  if (a.cols() != static_cast<int>(x.size()))
    throw Error(ErrorKind::kDimMismatch, "matvec: dimensions differ");
  CVec y(a.rows());
  for (int r = 0; r < a.rows(); ++r) {
    cd s{};
    for (int c = 0; c < a.cols(); ++c) s += a(r, c) * x[c];
    y[r] = s;
  }
  return y;
}

cd trace(const CMat& a) {
  cd s{};
  for (int i = 0; i < std::min(a.rows(), a.cols()); ++i) s += a(i, i);
  return s;
}

double fro_norm(const CMat& a) {
  double s = 0.0;
  for (const cd& z : a.data()) s += std::norm(z);
  return std::sqrt(s);
}

double norm2(const CVec& v) {
  double s = 0.0;
  for (const cd& z : v) s += std::norm(z);
  return std::sqrt(s);
}

cd dot(const CVec& a, const CVec& b) {
  if (a.size() != b.size())
    throw Error(ErrorKind::kDimMismatch, "dot: lengths differ");
  cd s{};
  for (size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

double hermitian_defect(const CMat& a) {
  if (a.rows() != a.cols())
    throw Error(ErrorKind::kDimMismatch, "hermitian_defect: square input required");
  double num = 0.0, den = 0.0;
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) {
      num += std::norm(a(r, c) - std::conj(a(c, r)));
      den += std::norm(a(r, c));
    }
  }
  if (den == 0.0) return 0.0;
  return std::sqrt(num / den);
}

namespace {

// One Jacobi rotation zeroing a(p,q). The complex off-diagonal entry is
// absorbed into a unit phase so the 2x2 block reduces to the real symmetric
// case.
void jacobi_rotate(CMat& a, CMat& v, int p, int q) {
  const cd apq = a(p, q);
  const double abs_apq = std::abs(apq);
  if (abs_apq == 0.0) return;

  const cd phase = apq / abs_apq;
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double tau = (aqq - app) / (2.0 * abs_apq);
  double t;
  if (tau >= 0.0)
    t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
  else
    t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  // columns p and q of A and V: [p q] <- [p q] * [[c, s*conj(phase)], [-s*phase, c]]... kept
  // explicit below to preserve Hermitian structure exactly.
  const int n = a.rows();
  for (int i = 0; i < n; ++i) {
    const cd aip = a(i, p);
    const cd aiq = a(i, q);
    a(i, p) = c * aip - s * std::conj(phase) * aiq;
    a(i, q) = s * phase * aip + c * aiq;
  }
  for (int j = 0; j < n; ++j) {
    const cd apj = a(p, j);
    const cd aqj = a(q, j);
    a(p, j) = c * apj - s * phase * aqj;
    a(q, j) = s * std::conj(phase) * apj + c * aqj;
  }
  for (int i = 0; i < n; ++i) {
    const cd vip = v(i, p);
    const cd viq = v(i, q);
    v(i, p) = c * vip - s * std::conj(phase) * viq;
    v(i, q) = s * phase * vip + c * viq;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = cd(a(p, p).real(), 0.0);
  a(q, q) = cd(a(q, q).real(), 0.0);
}

double off_diag_norm(const CMat& a) {
  double s = 0.0;
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c)
      if (r != c) s += std::norm(a(r, c));
  return std::sqrt(s);
}

}  // namespace

EigenDecomposition hermitian_eig(const CMat& a) {
  if (a.rows() != a.cols())
    throw Error(ErrorKind::kDimMismatch, "hermitian_eig: square input required");
  if (!a.is_finite())
    throw Error(ErrorKind::kNonFinite, "hermitian_eig: NaN/Inf in input");
  if (hermitian_defect(a) > 1e-8)
    throw Error(ErrorKind::kNonHermitian, "hermitian_eig: input is not Hermitian");

  const int n = a.rows();
  // symmetrize to wash out the (tolerated) asymmetry before iterating
  CMat w(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) w(r, c) = 0.5 * (a(r, c) + std::conj(a(c, r)));

  CMat v = CMat::identity(n);
  const double scale = fro_norm(w);
  const double tol = (scale == 0.0) ? 0.0 : 1e-13 * scale;

  for (int sweep = 0; sweep < 64; ++sweep) {
    if (off_diag_norm(w) <= tol) break;
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q)
        if (std::abs(w(p, q)) > tol / (n + 1)) jacobi_rotate(w, v, p, q);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = w(i, i).real();
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return diag[x] > diag[y]; });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = CMat(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[j] = diag[order[j]];
    for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

QrResult qr_decompose(const CMat& a) {
  const int k = a.rows();
  const int r = a.cols();
  if (k > r)
    throw Error(ErrorKind::kDimMismatch, "qr_decompose: expects K <= R (wide input)");

  // Modified Gram-Schmidt over rows, processed from the last row up so the
  // coefficient matrix comes out upper triangular in A = G * Q.
  QrResult out;
  out.g = CMat(k, k);
  out.q = CMat(k, r);

  double max_pivot = 0.0;
  std::vector<CVec> rows(k);
  for (int i = 0; i < k; ++i) {
    rows[i].resize(r);
    for (int j = 0; j < r; ++j) rows[i][j] = a(i, j);
  }

  for (int i = k - 1; i >= 0; --i) {
    CVec v = rows[i];
    for (int j = k - 1; j > i; --j) {
      CVec qj(r);
      for (int c = 0; c < r; ++c) qj[c] = out.q(j, c);
      const cd coef = dot(qj, v);
      out.g(i, j) = coef;
      for (int c = 0; c < r; ++c) v[c] -= coef * qj[c];
    }
    const double nv = norm2(v);
    max_pivot = std::max(max_pivot, nv);
    if (nv <= 1e-10 * std::max(max_pivot, 1e-300))
      throw Error(ErrorKind::kRankDeficient, "qr_decompose: input rows are rank deficient");
    out.g(i, i) = nv;
    for (int c = 0; c < r; ++c) out.q(i, c) = v[c] / nv;
  }
  return out;
}

CVec fft(const CVec& x) {
  const size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw Error(ErrorKind::kBadLength, "fft: length must be a power of two");

  CVec y = x;
  // bit-reversal permutation
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(y[i], y[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const cd wlen = std::polar(1.0, ang);
    for (size_t i = 0; i < n; i += len) {
      cd w = 1.0;
      for (size_t j = 0; j < len / 2; ++j) {
        const cd u = y[i + j];
        const cd t = w * y[i + j + len / 2];
        y[i + j] = u + t;
        y[i + j + len / 2] = u - t;
        w *= wlen;
      }
    }
  }
  return y;
}

CMat solve_hermitian(const CMat& a, const CMat& b) {
  if (a.rows() != a.cols())
    throw Error(ErrorKind::kDimMismatch, "solve_hermitian: square input required");
  if (a.rows() != b.rows())
    throw Error(ErrorKind::kDimMismatch, "solve_hermitian: rhs rows differ");

  const EigenDecomposition ed = hermitian_eig(a);
  const double lmax = ed.values.empty() ? 0.0 : std::abs(ed.values.front());
  const double lmin = ed.values.empty() ? 0.0 : ed.values.back();
  if (lmax <= 0.0 || lmin <= 1e-12 * lmax)
    throw Error(ErrorKind::kIllConditioned,
                "solve_hermitian: matrix is singular or badly conditioned");

  // X = V diag(1/lambda) V^H B
  CMat vhb = adjoint(ed.vectors) * b;
  for (int i = 0; i < vhb.rows(); ++i)
    for (int j = 0; j < vhb.cols(); ++j) vhb(i, j) /= ed.values[i];
  return ed.vectors * vhb;
}

CMat kron(const CMat& a, const CMat& b) {
  CMat k(a.rows() * b.rows(), a.cols() * b.cols());
  for (int ra = 0; ra < a.rows(); ++ra)
    for (int ca = 0; ca < a.cols(); ++ca) {
      const cd f = a(ra, ca);
      if (f == cd{}) continue;
      for (int rb = 0; rb < b.rows(); ++rb)
        for (int cb = 0; cb < b.cols(); ++cb)
          k(ra * b.rows() + rb, ca * b.cols() + cb) = f * b(rb, cb);
    }
  return k;
}

int rank_psd(const CMat& a, double tol) {
  const EigenDecomposition ed = hermitian_eig(a);
  if (ed.values.empty()) return 0;
  const double thresh = tol * std::max(std::abs(ed.values.front()), 0.0);
  int r = 0;
  for (double v : ed.values)
    if (v > thresh) ++r;
  return r;
}

}  // namespace hbsim
