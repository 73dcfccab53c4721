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
// Scenario configuration, multi-group scheduling, seeded Monte-Carlo
// execution and CSV reporting.

#ifndef HBSIM_SIMULATION_HPP
#define HBSIM_SIMULATION_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "beamforming.hpp"
#include "channel.hpp"
#include "subspace.hpp"

namespace hbsim {

enum class Method {
  kFcZf,             // full-digital ZF, full CSI
  kFcZfThp,          // full-digital ZF-THP benchmark
  kPhbIdeal,         // proposed HB, ideal AB (amplitude + phase), true SCMs
  kPhbPhase,         // proposed HB, phase-only PSN, true SCMs
  kScPhb,            // proposed HB on SC-estimated SCMs (same carrier)
  kScPhbFddRescaled, // SC on the uplink carrier, angles rescaled to downlink
  kScPhbFddRaw,      // SC on the uplink carrier, no rescaling
  kPhbPhaseGroup1,   // ablation: AB built from group 1's SCMs only
};

const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct DuplexConfig {
  bool fdd = false;
  double eta = 1.0;  // F_c^UL / F_c^DL
};

struct ScenarioConfig {
  ArrayGeometry geom{8, 8, 0.5, 0.5};
  Sector sector{M_PI / 6.0, 5.0 * M_PI / 6.0, 5.0 * M_PI / 9.0, 3.0 * M_PI / 4.0};
  int fft_size = 128;  // L
  int l_used = 96;
  int cp_length = 9;
  int n_groups = 4;
  int ues_per_group = 4;  // K_l
  int r_chains = 24;
  std::vector<double> snr_grid_db{0.0, 10.0, 20.0};
  std::vector<std::uint64_t> seeds;
  std::vector<Method> methods;
  ScParams sc_params;
  double csi_error = 1.0;  // zeta
  DuplexConfig duplex;
  int precoder_granularity = 12;  // L_pg
  ClusterParams channel_params;   // max_delay < 0 resolves to cp_length - 1
};

// Spec'd baseline profiles; "desk" is the acceptance scale, "paper" the
// full-scale setup behind a flag.
ScenarioConfig default_scenario(const std::string& scale);

// Parses a JSON config; keys overlay the given base. Unknown keys are
// rejected.
ScenarioConfig scenario_from_json(const std::string& json_text,
                                  const ScenarioConfig& base);

std::string scenario_to_json(const ScenarioConfig& cfg);

// Throws BadConfig on violated invariants (K_l <= R, even sub-bands, power
// of two FFT, granularity dividing the sub-band, ...).
void validate_config(const ScenarioConfig& cfg);

struct SubBand {
  int first = 1;  // 1-based subcarrier index
  int count = 0;
};

// N_g equal contiguous sub-bands over the used band, group g owns sub-band g.
std::vector<SubBand> schedule_groups(const ScenarioConfig& cfg);

struct RunEntry {
  Method method;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  double sum_rate = 0.0;            // average per-subcarrier sum rate, bits/s/Hz
  std::vector<double> group_rates;  // per-group average over its sub-band
  int unservable_blocks = 0;        // ill-conditioned effective channels (diagnostic)
};

struct RunRecord {
  ScenarioConfig cfg;
  std::vector<RunEntry> entries;  // method-major, then snr, then seed order
  double wall_seconds = 0.0;

  const RunEntry* find(Method m, double snr_db, std::uint64_t seed) const;
  double mean_rate(Method m, double snr_db) const;
  // per-group mean over seeds
  std::vector<double> mean_group_rates(Method m, double snr_db) const;
};

RunRecord run_scenario(const ScenarioConfig& cfg, int n_threads = 1);

// CSV with the fixed schema: method, snr_db, seed, sum_rate_bps_hz,
// ratio_vs_fczf, ratio_vs_fczfthp; one row per (method, snr, seed) plus a
// seed="mean" aggregate per (method, snr). Ratio cells are empty when the
// reference method is not part of the run.
std::string render_csv(const RunRecord& rec);
void write_csv(const RunRecord& rec, const std::string& path);

// Sidecar run manifest (config hash, seeds, version) next to the CSV.
std::string render_manifest(const RunRecord& rec);
void write_manifest(const RunRecord& rec, const std::string& csv_path);

std::string version_string();

}  // namespace hbsim

#endif  // HBSIM_SIMULATION_HPP
