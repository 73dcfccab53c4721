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

#ifndef HBSIM_ERRORS_HPP
#define HBSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hbsim {

enum class ErrorKind {
  kNonFinite,
  kNonHermitian,
  kBadLength,
  kIllConditioned,
  kRankDeficient,
  kDimMismatch,
  kNonRealTrace,
  kNonRealForm,
  kBadParams,
  kBadSelector,
  kBadNfft,
  kEmpty,
  kBadConfig,
  kIoError,
};

// All failures surface as this exception; the kind maps 1:1 onto the
// C API status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::kNonFinite: return "NonFinite";
    case ErrorKind::kNonHermitian: return "NonHermitian";
    case ErrorKind::kBadLength: return "BadLength";
    case ErrorKind::kIllConditioned: return "IllConditioned";
    case ErrorKind::kRankDeficient: return "RankDeficient";
    case ErrorKind::kDimMismatch: return "DimMismatch";
    case ErrorKind::kNonRealTrace: return "NonRealTrace";
    case ErrorKind::kNonRealForm: return "NonRealForm";
    case ErrorKind::kBadParams: return "BadParams";
    case ErrorKind::kBadSelector: return "BadSelector";
    case ErrorKind::kBadNfft: return "BadNfft";
    case ErrorKind::kEmpty: return "Empty";
    case ErrorKind::kBadConfig: return "BadConfig";
    case ErrorKind::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace hbsim

#endif  // HBSIM_ERRORS_HPP
