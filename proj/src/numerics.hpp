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

#ifndef HBSIM_NUMERICS_HPP
#define HBSIM_NUMERICS_HPP

#include <complex>
#include <vector>

#include "errors.hpp"

namespace hbsim {

using cd = std::complex<double>;
using CVec = std::vector<cd>;

// Dense row-major complex matrix. All higher modules are built on this one
// value type; operations are pure functions and safe to call concurrently.
class CMat {
 public:
  CMat() = default;
  CMat(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}

  static CMat identity(int n);
  static CMat from_column(const CVec& v);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return a_.empty(); }

  cd& operator()(int r, int c) { return a_[static_cast<size_t>(r) * cols_ + c]; }
  const cd& operator()(int r, int c) const { return a_[static_cast<size_t>(r) * cols_ + c]; }

  const std::vector<cd>& data() const { return a_; }
  std::vector<cd>& data() { return a_; }

  CVec column(int c) const;
  void set_column(int c, const CVec& v);

  bool is_finite() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<cd> a_;
};

CMat operator*(const CMat& a, const CMat& b);
CMat operator+(const CMat& a, const CMat& b);
CMat operator-(const CMat& a, const CMat& b);
CMat operator*(cd s, const CMat& a);

CMat transpose(const CMat& a);
CMat conjugate(const CMat& a);
CMat adjoint(const CMat& a);

CVec operator*(const CMat& a, const CVec& x);

cd trace(const CMat& a);
double fro_norm(const CMat& a);
double norm2(const CVec& v);
cd dot(const CVec& a, const CVec& b);  // conjugate-linear in the first argument

// relative Hermitian asymmetry ||A - A^H||_F / ||A||_F (0 for the zero matrix)
double hermitian_defect(const CMat& a);

struct EigenDecomposition {
  CMat vectors;                 // columns are eigenvectors, unitary
  std::vector<double> values;   // non-increasing
};

// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
// Throws NonHermitian when the relative asymmetry exceeds 1e-8 and NonFinite
// on NaN/Inf input. Ties keep the sweep order (stable sort).
EigenDecomposition hermitian_eig(const CMat& a);

struct QrResult {
  CMat g;  // K x K upper triangular, real non-negative diagonal
  CMat q;  // K x R, orthonormal rows (Q Q^H = I_K)
};

// Row-space decomposition A = G * Q of a wide matrix (K <= R). G comes out
// upper triangular because rows are orthonormalized from the last one up.
// Throws RankDeficient when the smallest/largest row-norm ratio during
// elimination drops below 1e-10.
QrResult qr_decompose(const CMat& a);

// Radix-2 forward DFT, negative exponent, no normalization:
// X[n] = sum_m x[m] exp(-j 2 pi n m / N). Throws BadLength unless N is a
// power of two.
CVec fft(const CVec& x);

// Solves A X = B for Hermitian positive definite A via eigendecomposition.
// Throws IllConditioned when min/max eigenvalue <= 1e-12.
CMat solve_hermitian(const CMat& a, const CMat& b);

CMat kron(const CMat& a, const CMat& b);

// Count of eigenvalues above tol * max |eigenvalue| for Hermitian PSD input.
int rank_psd(const CMat& a, double tol = 1e-9);

}  // namespace hbsim

#endif  // HBSIM_NUMERICS_HPP
