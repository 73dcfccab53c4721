/* SPDX-License-Identifier: Apache-2.0
 *
 * hbsim - hybrid beamforming link simulator for massive MIMO-OFDM
 * Copyright (C) 2026 hbsim contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 * ------------------------------------------------------------------------
 *
 * C API of the hbsim shared library. All state lives behind opaque handles;
 * every call returns a status code and the last failure message is available
 * per thread via hbsim_last_error().
 */

#ifndef HBSIM_H
#define HBSIM_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hbsim_status {
  HBSIM_OK = 0,
  HBSIM_ERR_INVALID_ARG = 1,  /* bad parameters, selectors, configs */
  HBSIM_ERR_NUMERIC = 2,      /* ill-conditioned or non-finite inputs */
  HBSIM_ERR_PARSE = 3,        /* malformed JSON / unknown keys */
  HBSIM_ERR_IO = 4,           /* file system failures */
  HBSIM_ERR_INTERNAL = 5
} hbsim_status;

typedef struct hbsim_scenario hbsim_scenario; /* opaque scenario config */
typedef struct hbsim_run hbsim_run;           /* opaque run record */

/* Library version, e.g. "hbsim 0.1.0". */
const char* hbsim_version(void);

/* Message for the most recent failure on the calling thread ("" if none). */
const char* hbsim_last_error(void);

/* Baseline scenario by scale name: "desk" or "paper". */
hbsim_status hbsim_scenario_default(const char* scale, hbsim_scenario** out);

/* Baseline overlaid with a JSON config; unknown keys are rejected. */
hbsim_status hbsim_scenario_from_json(const char* scale, const char* json_text,
                                      hbsim_scenario** out);

/* Canonical JSON of a scenario; the string stays owned by the handle and is
 * valid until the next call on it or until free. */
hbsim_status hbsim_scenario_to_json(hbsim_scenario* scenario, const char** out_json);

void hbsim_scenario_free(hbsim_scenario* scenario);

/* Monte-Carlo run over all seeds/methods/SNRs. n_threads <= 1 is serial;
 * the result is byte-identical regardless of the thread count. */
hbsim_status hbsim_run_scenario(const hbsim_scenario* scenario, int n_threads,
                                hbsim_run** out);

/* CSV with columns method, snr_db, seed, sum_rate_bps_hz, ratio_vs_fczf,
 * ratio_vs_fczfthp (per-seed rows plus seed="mean" aggregates). */
hbsim_status hbsim_run_write_csv(const hbsim_run* run, const char* path);

/* Sidecar manifest "<csv_path>.manifest.json" with config hash, seeds and
 * version. */
hbsim_status hbsim_run_write_manifest(const hbsim_run* run, const char* csv_path);

/* Mean over seeds of the band-average sum rate for one method/SNR point.
 * method is the CSV method tag. */
hbsim_status hbsim_run_mean_rate(const hbsim_run* run, const char* method,
                                 double snr_db, double* out_rate);

void hbsim_run_free(hbsim_run* run);

/* Sufficient RF chain count for a sector-limited UPA. Angles in radians. */
hbsim_status hbsim_sufficiency(int m_h, int m_v, double d_h_over_lambda,
                               double d_v_over_lambda, double phi_min, double phi_max,
                               double theta_min, double theta_max, int* kappa_h,
                               int* kappa_v, int* kappa);

/* Runs the invariant suites; emits one line per suite through the callback
 * (may be NULL) and stores the failure count. */
typedef void (*hbsim_log_fn)(const char* line, void* user);
hbsim_status hbsim_selftest(hbsim_log_fn log, void* user, int* failures);

#ifdef __cplusplus
}
#endif

#endif /* HBSIM_H */
