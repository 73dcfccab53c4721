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

#include "simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

#include <json.hpp>

namespace hbsim {

using nlohmann::json;

const char* method_name(Method m) {
  switch (m) {
    case Method::kFcZf: return "fc_zf";
    case Method::kFcZfThp: return "fc_zf_thp";
    case Method::kPhbIdeal: return "phb_ideal";
    case Method::kPhbPhase: return "phb_phase";
    case Method::kScPhb: return "sc_phb";
    case Method::kScPhbFddRescaled: return "sc_phb_fdd_rescaled";
    case Method::kScPhbFddRaw: return "sc_phb_fdd_raw";
    case Method::kPhbPhaseGroup1: return "phb_phase_group1";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  static const std::map<std::string, Method> table = {
      {"fc_zf", Method::kFcZf},
      {"fc_zf_thp", Method::kFcZfThp},
      {"phb_ideal", Method::kPhbIdeal},
      {"phb_phase", Method::kPhbPhase},
      {"sc_phb", Method::kScPhb},
      {"sc_phb_fdd_rescaled", Method::kScPhbFddRescaled},
      {"sc_phb_fdd_raw", Method::kScPhbFddRaw},
      {"phb_phase_group1", Method::kPhbPhaseGroup1},
  };
  auto it = table.find(name);
  if (it == table.end())
    throw Error(ErrorKind::kBadConfig, "unknown method tag: " + name);
  return it->second;
}

std::string version_string() { return "hbsim 0.1.0"; }

ScenarioConfig default_scenario(const std::string& scale) {
  ScenarioConfig cfg;  // member initializers hold the desk profile
  cfg.seeds.resize(20);
  for (size_t i = 0; i < cfg.seeds.size(); ++i) cfg.seeds[i] = i + 1;
  cfg.methods = {Method::kFcZf, Method::kFcZfThp, Method::kPhbIdeal, Method::kPhbPhase,
                 Method::kScPhb};
  cfg.channel_params.max_delay = -1;

  if (scale == "desk") return cfg;
  if (scale == "paper") {
    cfg.geom = {16, 16, 0.5, 0.5};
    cfg.fft_size = 2048;
    cfg.l_used = 1200;
    cfg.cp_length = 144;
    cfg.n_groups = 4;
    cfg.ues_per_group = 16;
    cfg.r_chains = 64;
    cfg.snr_grid_db = {0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0};
    cfg.seeds.resize(10);
    for (size_t i = 0; i < cfg.seeds.size(); ++i) cfg.seeds[i] = i + 1;
    cfg.sc_params.stride = 48;
    return cfg;
  }
  throw Error(ErrorKind::kBadConfig, "unknown scale: " + scale);
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw Error(ErrorKind::kBadConfig, "unknown config key '" + it.key() + "' in " + where);
  }
}

double parse_gamma(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "infinity")
      return std::numeric_limits<double>::infinity();
    throw Error(ErrorKind::kBadConfig, "sc_params.gamma: expected a number or \"inf\"");
  }
  return j.get<double>();
}

}  // namespace

ScenarioConfig scenario_from_json(const std::string& json_text, const ScenarioConfig& base) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kBadConfig, std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kBadConfig, "config root must be an object");

  ScenarioConfig cfg = base;
  reject_unknown(j,
                 {"geom", "sector", "fft_size", "l_used", "cp_length", "n_groups",
                  "ues_per_group", "r_chains", "snr_grid_db", "seeds", "methods",
                  "sc_params", "csi_error", "duplex", "precoder_granularity",
                  "channel_params"},
                 "config");
  try {
    if (j.contains("geom")) {
      const json& g = j["geom"];
      reject_unknown(g, {"m_h", "m_v", "d_h_over_lambda", "d_v_over_lambda"}, "geom");
      if (g.contains("m_h")) cfg.geom.m_h = g["m_h"].get<int>();
      if (g.contains("m_v")) cfg.geom.m_v = g["m_v"].get<int>();
      if (g.contains("d_h_over_lambda")) cfg.geom.d_h_over_lambda = g["d_h_over_lambda"].get<double>();
      if (g.contains("d_v_over_lambda")) cfg.geom.d_v_over_lambda = g["d_v_over_lambda"].get<double>();
    }
    if (j.contains("sector")) {
      const json& s = j["sector"];
      reject_unknown(s, {"phi_min", "phi_max", "theta_min", "theta_max"}, "sector");
      if (s.contains("phi_min")) cfg.sector.phi_min = s["phi_min"].get<double>();
      if (s.contains("phi_max")) cfg.sector.phi_max = s["phi_max"].get<double>();
      if (s.contains("theta_min")) cfg.sector.theta_min = s["theta_min"].get<double>();
      if (s.contains("theta_max")) cfg.sector.theta_max = s["theta_max"].get<double>();
    }
    if (j.contains("fft_size")) cfg.fft_size = j["fft_size"].get<int>();
    if (j.contains("l_used")) cfg.l_used = j["l_used"].get<int>();
    if (j.contains("cp_length")) cfg.cp_length = j["cp_length"].get<int>();
    if (j.contains("n_groups")) cfg.n_groups = j["n_groups"].get<int>();
    if (j.contains("ues_per_group")) cfg.ues_per_group = j["ues_per_group"].get<int>();
    if (j.contains("r_chains")) cfg.r_chains = j["r_chains"].get<int>();
    if (j.contains("snr_grid_db")) cfg.snr_grid_db = j["snr_grid_db"].get<std::vector<double>>();
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const json& m : j["methods"]) cfg.methods.push_back(method_from_name(m.get<std::string>()));
    }
    if (j.contains("sc_params")) {
      const json& p = j["sc_params"];
      reject_unknown(p, {"gamma", "n_fft", "stride", "snapshots"}, "sc_params");
      if (p.contains("gamma")) cfg.sc_params.gamma = parse_gamma(p["gamma"]);
      if (p.contains("n_fft")) cfg.sc_params.n_fft = p["n_fft"].get<int>();
      if (p.contains("stride")) cfg.sc_params.stride = p["stride"].get<int>();
      if (p.contains("snapshots")) cfg.sc_params.snapshots = p["snapshots"].get<int>();
    }
    if (j.contains("csi_error")) cfg.csi_error = j["csi_error"].get<double>();
    if (j.contains("duplex")) {
      const json& d = j["duplex"];
      reject_unknown(d, {"mode", "eta"}, "duplex");
      if (d.contains("mode")) {
        const std::string mode = d["mode"].get<std::string>();
        if (mode == "tdd")
          cfg.duplex.fdd = false;
        else if (mode == "fdd")
          cfg.duplex.fdd = true;
        else
          throw Error(ErrorKind::kBadConfig, "duplex.mode must be \"tdd\" or \"fdd\"");
      }
      if (d.contains("eta")) cfg.duplex.eta = d["eta"].get<double>();
    }
    if (j.contains("precoder_granularity"))
      cfg.precoder_granularity = j["precoder_granularity"].get<int>();
    if (j.contains("channel_params")) {
      const json& c = j["channel_params"];
      reject_unknown(c,
                     {"n_cl", "n_ray", "cluster_spread_deg", "los_prob", "los_rician_db",
                      "max_delay"},
                     "channel_params");
      if (c.contains("n_cl")) cfg.channel_params.n_cl = c["n_cl"].get<int>();
      if (c.contains("n_ray")) cfg.channel_params.n_ray = c["n_ray"].get<int>();
      if (c.contains("cluster_spread_deg"))
        cfg.channel_params.cluster_spread_rad = c["cluster_spread_deg"].get<double>() * M_PI / 180.0;
      if (c.contains("los_prob")) cfg.channel_params.los_prob = c["los_prob"].get<double>();
      if (c.contains("los_rician_db")) cfg.channel_params.los_rician_db = c["los_rician_db"].get<double>();
      if (c.contains("max_delay")) cfg.channel_params.max_delay = c["max_delay"].get<int>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kBadConfig, std::string("config type error: ") + e.what());
  }
  return cfg;
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["geom"] = {{"m_h", cfg.geom.m_h},
               {"m_v", cfg.geom.m_v},
               {"d_h_over_lambda", cfg.geom.d_h_over_lambda},
               {"d_v_over_lambda", cfg.geom.d_v_over_lambda}};
  j["sector"] = {{"phi_min", cfg.sector.phi_min},
                 {"phi_max", cfg.sector.phi_max},
                 {"theta_min", cfg.sector.theta_min},
                 {"theta_max", cfg.sector.theta_max}};
  j["fft_size"] = cfg.fft_size;
  j["l_used"] = cfg.l_used;
  j["cp_length"] = cfg.cp_length;
  j["n_groups"] = cfg.n_groups;
  j["ues_per_group"] = cfg.ues_per_group;
  j["r_chains"] = cfg.r_chains;
  j["snr_grid_db"] = cfg.snr_grid_db;
  j["seeds"] = cfg.seeds;
  json methods = json::array();
  for (Method m : cfg.methods) methods.push_back(method_name(m));
  j["methods"] = methods;
  if (std::isinf(cfg.sc_params.gamma))
    j["sc_params"]["gamma"] = "inf";
  else
    j["sc_params"]["gamma"] = cfg.sc_params.gamma;
  j["sc_params"]["n_fft"] = cfg.sc_params.n_fft;
  j["sc_params"]["stride"] = cfg.sc_params.stride;
  j["sc_params"]["snapshots"] = cfg.sc_params.snapshots;
  j["csi_error"] = cfg.csi_error;
  j["duplex"] = {{"mode", cfg.duplex.fdd ? "fdd" : "tdd"}, {"eta", cfg.duplex.eta}};
  j["precoder_granularity"] = cfg.precoder_granularity;
  j["channel_params"] = {{"n_cl", cfg.channel_params.n_cl},
                         {"n_ray", cfg.channel_params.n_ray},
                         {"cluster_spread_deg", cfg.channel_params.cluster_spread_rad * 180.0 / M_PI},
                         {"los_prob", cfg.channel_params.los_prob},
                         {"los_rician_db", cfg.channel_params.los_rician_db},
                         {"max_delay", cfg.channel_params.max_delay}};
  return j.dump(2);
}

void validate_config(const ScenarioConfig& cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::kBadConfig, msg); };
  if (cfg.geom.m_h < 1 || cfg.geom.m_v < 1) fail("antenna counts must be >= 1");
  if (cfg.geom.d_h_over_lambda <= 0.0 || cfg.geom.d_h_over_lambda > 0.5 ||
      cfg.geom.d_v_over_lambda <= 0.0 || cfg.geom.d_v_over_lambda > 0.5)
    fail("antenna spacing must be in (0, 0.5] wavelengths");
  if (cfg.fft_size < 2 || (cfg.fft_size & (cfg.fft_size - 1)) != 0)
    fail("fft_size must be a power of two");
  if (cfg.l_used < 1 || cfg.l_used > cfg.fft_size) fail("l_used must be in 1..fft_size");
  if (cfg.cp_length < 1 || cfg.cp_length > cfg.fft_size) fail("cp_length must be in 1..fft_size");
  if (cfg.n_groups < 1 || cfg.l_used % cfg.n_groups != 0)
    fail("sub-bands must divide the used band evenly");
  if (cfg.ues_per_group < 1) fail("ues_per_group must be >= 1");
  if (cfg.ues_per_group > cfg.r_chains) fail("K_l must not exceed the RF chain count");
  if (cfg.r_chains > cfg.geom.antennas()) fail("r_chains must not exceed the antenna count");
  const int subband = cfg.l_used / cfg.n_groups;
  if (cfg.precoder_granularity < 1 || subband % cfg.precoder_granularity != 0)
    fail("precoder_granularity must divide the sub-band size");
  if (cfg.snr_grid_db.empty()) fail("snr_grid_db must not be empty");
  if (cfg.seeds.empty()) fail("seeds must not be empty");
  if (cfg.methods.empty()) fail("methods must not be empty");
  if (cfg.csi_error < 0.0 || cfg.csi_error > 1.0) fail("csi_error must be in [0,1]");
  if (!(cfg.sc_params.gamma > 1.0)) fail("sc_params.gamma must be > 1");
  if (cfg.sc_params.stride < 1 || cfg.sc_params.stride > subband)
    fail("sc_params.stride must be in 1..sub-band size");
  if (cfg.sc_params.snapshots < 1) fail("sc_params.snapshots must be >= 1");
  if (cfg.duplex.eta <= 0.0) fail("duplex.eta must be > 0");
  if (cfg.duplex.fdd && cfg.geom.d_h_over_lambda * std::max(1.0, cfg.duplex.eta) > 0.5 + 1e-12)
    fail("uplink carrier pushes antenna spacing beyond half a wavelength");
  for (Method m : cfg.methods) {
    const bool is_fdd = m == Method::kScPhbFddRescaled || m == Method::kScPhbFddRaw;
    if (is_fdd && !cfg.duplex.fdd) fail("FDD methods require duplex.mode = fdd");
    if (m == Method::kScPhb && cfg.duplex.fdd)
      fail("sc_phb is the same-carrier path; use the fdd variants");
    if (m == Method::kPhbPhaseGroup1 && cfg.n_groups < 2)
      fail("phb_phase_group1 needs at least two groups");
  }
  const int sector_checks = (cfg.sector.phi_min < cfg.sector.phi_max) &&
                            (cfg.sector.theta_min < cfg.sector.theta_max);
  if (!sector_checks) fail("sector bounds must be ordered");
  if (cfg.sector.phi_min < 0.0 || cfg.sector.phi_max > M_PI || cfg.sector.theta_min < 0.0 ||
      cfg.sector.theta_max > M_PI)
    fail("sector angles must be within [0, pi]");
  if (cfg.channel_params.n_cl < 1 || cfg.channel_params.n_ray < 1)
    fail("cluster counts must be >= 1");
  const int max_delay = cfg.channel_params.max_delay < 0 ? cfg.cp_length - 1
                                                         : cfg.channel_params.max_delay;
  if (max_delay >= cfg.cp_length) fail("max_delay must stay below the CP length");
}

std::vector<SubBand> schedule_groups(const ScenarioConfig& cfg) {
  validate_config(cfg);
  const int width = cfg.l_used / cfg.n_groups;
  std::vector<SubBand> bands(cfg.n_groups);
  for (int g = 0; g < cfg.n_groups; ++g) bands[g] = {g * width + 1, width};
  return bands;
}

namespace {

constexpr std::uint64_t kTagProfile = 0x70726f66;  // rng stream tags
constexpr std::uint64_t kTagMeasure = 0x6d656173;

struct SeedResult {
  // [method][snr] -> band rate, group rates, diagnostics
  std::vector<std::vector<double>> rate;
  std::vector<std::vector<std::vector<double>>> group_rates;
  std::vector<std::vector<int>> unservable;
};

ClusterParams resolved_channel_params(const ScenarioConfig& cfg) {
  ClusterParams p = cfg.channel_params;
  if (p.max_delay < 0) p.max_delay = cfg.cp_length - 1;
  return p;
}

// Per-seed worker: one set of channel realizations, every method and SNR.
SeedResult run_seed(const ScenarioConfig& cfg, std::uint64_t seed) {
  const int n_methods = static_cast<int>(cfg.methods.size());
  const int n_snrs = static_cast<int>(cfg.snr_grid_db.size());
  const int n_ues = cfg.n_groups * cfg.ues_per_group;
  const int k_l = cfg.ues_per_group;
  const std::vector<SubBand> bands = schedule_groups(cfg);
  const ClusterParams chan = resolved_channel_params(cfg);

  SeedResult res;
  res.rate.assign(n_methods, std::vector<double>(n_snrs, 0.0));
  res.group_rates.assign(
      n_methods, std::vector<std::vector<double>>(n_snrs, std::vector<double>(cfg.n_groups, 0.0)));
  res.unservable.assign(n_methods, std::vector<int>(n_snrs, 0));

  // fresh channel realizations for this seed
  std::vector<UeChannelProfile> profiles(n_ues);
  for (int u = 0; u < n_ues; ++u) {
    Rng rng(mix64(seed, kTagProfile, static_cast<std::uint64_t>(u)));
    profiles[u] = generate_profile(rng, cfg.geom, cfg.sector, chan);
  }

  bool need_true_scm = false, need_sc = false, need_fdd = false;
  for (Method m : cfg.methods) {
    if (m == Method::kPhbIdeal || m == Method::kPhbPhase || m == Method::kPhbPhaseGroup1)
      need_true_scm = true;
    if (m == Method::kScPhb) need_sc = true;
    if (m == Method::kScPhbFddRescaled || m == Method::kScPhbFddRaw) need_fdd = true;
  }

  std::vector<CMat> true_scms(n_ues);
  if (need_true_scm)
    for (int u = 0; u < n_ues; ++u)
      true_scms[u] = true_scm(true_subspace(profiles[u], cfg.geom)).matrix;

  const RfSufficiency kappa = sufficient_rf_chains(cfg.geom, cfg.sector);

  auto estimator_inputs = [&](int u, const ArrayGeometry& meas_geom) {
    EstimationInputs in;
    in.profile = &profiles[u];
    in.geom = meas_geom;
    in.conn = make_partial_connection(meas_geom);
    const SubBand& band = bands[u / k_l];
    for (int l = band.first; l < band.first + band.count; l += cfg.sc_params.stride)
      in.subcarriers.push_back(l);
    in.fft_size = cfg.fft_size;
    in.params = cfg.sc_params;
    in.kappa_h = kappa.kappa_h;
    in.kappa_v = kappa.kappa_v;
    in.err.zeta = cfg.csi_error;
    return in;
  };

  std::vector<CMat> sc_scms(n_ues), fdd_scms_rescaled(n_ues), fdd_scms_raw(n_ues);
  if (need_sc) {
    for (int u = 0; u < n_ues; ++u) {
      Rng rng(mix64(seed, kTagMeasure, static_cast<std::uint64_t>(u)));
      sc_scms[u] = estimate_ue_scm(estimator_inputs(u, cfg.geom), rng).matrix;
    }
  }
  if (need_fdd) {
    const ArrayGeometry ul_geom = cfg.geom.at_carrier_ratio(cfg.duplex.eta);
    const FddConfig fdd{cfg.duplex.eta, 1.0};  // f_ul = eta * f_dl (normalized)
    for (int u = 0; u < n_ues; ++u) {
      Rng rng(mix64(seed, kTagMeasure, static_cast<std::uint64_t>(u)));
      auto pair = estimate_ue_scm_fdd_pair(estimator_inputs(u, ul_geom), fdd, rng);
      fdd_scms_rescaled[u] = std::move(pair.first.matrix);
      fdd_scms_raw[u] = std::move(pair.second.matrix);
    }
  }

  // Aggregate SCM per Eq.-style double sum: each UE's (subcarrier-constant)
  // SCM weighted by its group's sub-band size.
  auto aggregate = [&](const std::vector<CMat>& scms, bool group1_only) {
    std::vector<const CMat*> ptrs;
    std::vector<double> weights;
    for (int u = 0; u < n_ues; ++u) {
      const int g = u / k_l;
      if (group1_only && g != 0) continue;
      ptrs.push_back(&scms[u]);
      weights.push_back(static_cast<double>(bands[g].count));
    }
    return aggregate_scm_weighted(ptrs, weights);
  };

  // analog beamformers per method (shared across SNRs and blocks)
  std::vector<AnalogBeamformer> abs_per_method(n_methods);
  std::vector<bool> has_ab(n_methods, false);
  for (int mi = 0; mi < n_methods; ++mi) {
    switch (cfg.methods[mi]) {
      case Method::kPhbIdeal:
        abs_per_method[mi] = unified_ab_ideal(aggregate(true_scms, false), cfg.r_chains);
        has_ab[mi] = true;
        break;
      case Method::kPhbPhase:
        abs_per_method[mi] = unified_ab_phase_only(aggregate(true_scms, false), cfg.r_chains);
        has_ab[mi] = true;
        break;
      case Method::kPhbPhaseGroup1:
        abs_per_method[mi] = unified_ab_phase_only(aggregate(true_scms, true), cfg.r_chains);
        has_ab[mi] = true;
        break;
      case Method::kScPhb:
        abs_per_method[mi] = unified_ab_phase_only(aggregate(sc_scms, false), cfg.r_chains);
        has_ab[mi] = true;
        break;
      case Method::kScPhbFddRescaled:
        abs_per_method[mi] =
            unified_ab_phase_only(aggregate(fdd_scms_rescaled, false), cfg.r_chains);
        has_ab[mi] = true;
        break;
      case Method::kScPhbFddRaw:
        abs_per_method[mi] = unified_ab_phase_only(aggregate(fdd_scms_raw, false), cfg.r_chains);
        has_ab[mi] = true;
        break;
      default:
        break;
    }
  }

  // block-center channels, one per (group, block)
  const int blocks_per_band = bands.front().count / cfg.precoder_granularity;
  std::vector<std::vector<CMat>> block_h(cfg.n_groups, std::vector<CMat>(blocks_per_band));
  for (int g = 0; g < cfg.n_groups; ++g) {
    for (int b = 0; b < blocks_per_band; ++b) {
      const int center = bands[g].first + b * cfg.precoder_granularity +
                         cfg.precoder_granularity / 2;
      CMat h(cfg.geom.antennas(), k_l);
      for (int k = 0; k < k_l; ++k) {
        const CVec col = freq_channel(profiles[g * k_l + k], cfg.geom, center, cfg.fft_size);
        h.set_column(k, col);
      }
      block_h[g][b] = std::move(h);
    }
  }

  // per-block betas (SNR independent); negative marks an unservable block
  std::vector<std::vector<std::vector<double>>> betas(
      n_methods, std::vector<std::vector<double>>(cfg.n_groups,
                                                  std::vector<double>(blocks_per_band, -1.0)));
  // ZF-THP per-block triangular gains (squared), SNR independent
  std::vector<std::vector<std::vector<double>>> thp_gains(
      cfg.n_groups, std::vector<std::vector<double>>(blocks_per_band));
  bool need_thp = false;
  for (Method m : cfg.methods) need_thp |= (m == Method::kFcZfThp);

  for (int g = 0; g < cfg.n_groups; ++g) {
    for (int b = 0; b < blocks_per_band; ++b) {
      const CMat& h = block_h[g][b];
      for (int mi = 0; mi < n_methods; ++mi) {
        try {
          if (cfg.methods[mi] == Method::kFcZf) {
            betas[mi][g][b] = zf_full(h, cfg.l_used).beta;
          } else if (has_ab[mi]) {
            betas[mi][g][b] = zf_hybrid(h, abs_per_method[mi], cfg.l_used).beta;
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kIllConditioned) throw;
          betas[mi][g][b] = -1.0;
        }
      }
      if (need_thp) {
        try {
          const QrResult qr = qr_decompose(transpose(h));
          std::vector<double>& gains = thp_gains[g][b];
          gains.resize(qr.g.rows());
          for (int i = 0; i < qr.g.rows(); ++i) {
            const double d = qr.g(i, i).real();
            gains[i] = d * d;
          }
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::kRankDeficient) throw;
          thp_gains[g][b].clear();
        }
      }
    }
  }

  const double budget = 1.0 / static_cast<double>(cfg.l_used);
  for (int si = 0; si < n_snrs; ++si) {
    const double snr_lin = std::pow(10.0, cfg.snr_grid_db[si] / 10.0);
    const double sigma2 = budget / snr_lin;  // SNR := per-subcarrier power over noise
    for (int mi = 0; mi < n_methods; ++mi) {
      double band_sum = 0.0;
      for (int g = 0; g < cfg.n_groups; ++g) {
        double group_sum = 0.0;
        for (int b = 0; b < blocks_per_band; ++b) {
          double rate = 0.0;
          if (cfg.methods[mi] == Method::kFcZfThp) {
            if (!thp_gains[g][b].empty()) {
              std::vector<double> gn = thp_gains[g][b];
              for (double& x : gn) x /= sigma2;
              const WaterFilling wf = water_fill(gn, budget);
              for (size_t i = 0; i < gn.size(); ++i)
                rate += std::log2(1.0 + wf.levels[i] * gn[i]);
            } else {
              res.unservable[mi][si]++;
            }
          } else {
            const double beta = betas[mi][g][b];
            if (beta >= 0.0) {
              rate = sum_rate_zf(beta, k_l, sigma2);
            } else {
              res.unservable[mi][si]++;
            }
          }
          group_sum += rate;
        }
        const double group_rate = group_sum / static_cast<double>(blocks_per_band);
        res.group_rates[mi][si][g] = group_rate;
        band_sum += group_rate;
      }
      res.rate[mi][si] = band_sum / static_cast<double>(cfg.n_groups);
    }
  }
  return res;
}

}  // namespace

const RunEntry* RunRecord::find(Method m, double snr_db, std::uint64_t seed) const {
  for (const RunEntry& e : entries)
    if (e.method == m && e.snr_db == snr_db && e.seed == seed) return &e;
  return nullptr;
}

double RunRecord::mean_rate(Method m, double snr_db) const {
  double sum = 0.0;
  int n = 0;
  for (const RunEntry& e : entries)
    if (e.method == m && e.snr_db == snr_db) {
      sum += e.sum_rate;
      ++n;
    }
  if (n == 0) throw Error(ErrorKind::kEmpty, "mean_rate: no matching entries");
  return sum / n;
}

std::vector<double> RunRecord::mean_group_rates(Method m, double snr_db) const {
  std::vector<double> sum;
  int n = 0;
  for (const RunEntry& e : entries)
    if (e.method == m && e.snr_db == snr_db) {
      if (sum.empty()) sum.assign(e.group_rates.size(), 0.0);
      for (size_t g = 0; g < e.group_rates.size(); ++g) sum[g] += e.group_rates[g];
      ++n;
    }
  if (n == 0) throw Error(ErrorKind::kEmpty, "mean_group_rates: no matching entries");
  for (double& s : sum) s /= n;
  return sum;
}

RunRecord run_scenario(const ScenarioConfig& cfg, int n_threads) {
  validate_config(cfg);
  const auto t0 = std::chrono::steady_clock::now();

  const int n_seeds = static_cast<int>(cfg.seeds.size());
  std::vector<SeedResult> results(n_seeds);

  const int workers = std::max(1, std::min(n_threads, n_seeds));
  if (workers == 1) {
    for (int i = 0; i < n_seeds; ++i) results[i] = run_seed(cfg, cfg.seeds[i]);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int i = w; i < n_seeds; i += workers) results[i] = run_seed(cfg, cfg.seeds[i]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors)
      if (e) std::rethrow_exception(e);
  }

  RunRecord rec;
  rec.cfg = cfg;
  for (size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    for (size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
      for (int i = 0; i < n_seeds; ++i) {
        RunEntry e;
        e.method = cfg.methods[mi];
        e.snr_db = cfg.snr_grid_db[si];
        e.seed = cfg.seeds[i];
        e.sum_rate = results[i].rate[mi][si];
        e.group_rates = results[i].group_rates[mi][si];
        e.unservable_blocks = results[i].unservable[mi][si];
        rec.entries.push_back(std::move(e));
      }
    }
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::string render_csv(const RunRecord& rec) {
  const ScenarioConfig& cfg = rec.cfg;
  const bool have_zf =
      std::find(cfg.methods.begin(), cfg.methods.end(), Method::kFcZf) != cfg.methods.end();
  const bool have_thp =
      std::find(cfg.methods.begin(), cfg.methods.end(), Method::kFcZfThp) != cfg.methods.end();

  std::string out = "method,snr_db,seed,sum_rate_bps_hz,ratio_vs_fczf,ratio_vs_fczfthp\n";
  for (Method m : cfg.methods) {
    for (double snr : cfg.snr_grid_db) {
      double mean = 0.0, mean_zf = 0.0, mean_thp = 0.0;
      for (std::uint64_t seed : cfg.seeds) {
        const RunEntry* e = rec.find(m, snr, seed);
        const double zf = have_zf ? rec.find(Method::kFcZf, snr, seed)->sum_rate : 0.0;
        const double thp = have_thp ? rec.find(Method::kFcZfThp, snr, seed)->sum_rate : 0.0;
        mean += e->sum_rate;
        mean_zf += zf;
        mean_thp += thp;
        out += method_name(m);
        out += ',';
        out += fmt_double(snr);
        out += ',';
        out += std::to_string(seed);
        out += ',';
        out += fmt_double(e->sum_rate);
        out += ',';
        if (have_zf) out += fmt_double(zf > 0.0 ? e->sum_rate / zf : 0.0);
        out += ',';
        if (have_thp) out += fmt_double(thp > 0.0 ? e->sum_rate / thp : 0.0);
        out += '\n';
      }
      const double n = static_cast<double>(cfg.seeds.size());
      mean /= n;
      mean_zf /= n;
      mean_thp /= n;
      out += method_name(m);
      out += ',';
      out += fmt_double(snr);
      out += ",mean,";
      out += fmt_double(mean);
      out += ',';
      if (have_zf) out += fmt_double(mean_zf > 0.0 ? mean / mean_zf : 0.0);
      out += ',';
      if (have_thp) out += fmt_double(mean_thp > 0.0 ? mean / mean_thp : 0.0);
      out += '\n';
    }
  }
  return out;
}

void write_csv(const RunRecord& rec, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIoError, "cannot open for writing: " + path);
  const std::string body = render_csv(rec);
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!f) throw Error(ErrorKind::kIoError, "write failed: " + path);
}

std::string render_manifest(const RunRecord& rec) {
  const std::string cfg_json = scenario_to_json(rec.cfg);
  json j;
  j["version"] = version_string();
  char hash[32];
  std::snprintf(hash, sizeof(hash), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(cfg_json)));
  j["config_hash"] = hash;
  j["seeds"] = rec.cfg.seeds;
  j["wall_seconds"] = rec.wall_seconds;
  j["config"] = json::parse(cfg_json);
  return j.dump(2) + "\n";
}

void write_manifest(const RunRecord& rec, const std::string& csv_path) {
  const std::string path = csv_path + ".manifest.json";
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIoError, "cannot open for writing: " + path);
  const std::string body = render_manifest(rec);
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!f) throw Error(ErrorKind::kIoError, "write failed: " + path);
}

}  // namespace hbsim
