// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nfsgvb/baselines.hpp"
#include "nfsgvb/channel_model.hpp"
#include "nfsgvb/evaluation.hpp"
#include "nfsgvb/sgvb.hpp"

namespace nfsgvb {

enum class SweepVariable { Snr, Distance, GridSize };
enum class EstimatorKind { Ls, OracleLs, Sgvb, Psomp, Sbl };

std::string_view to_string(SweepVariable v);
std::string_view to_string(EstimatorKind k);
std::string_view to_string(ChannelMode m);

struct ExperimentConfig {
  // geometry
  ArrayKind kind = ArrayKind::Ula;
  int n = 256;
  int n_h = 16;
  int n_v = 16;
  double carrier_hz = 100e9;
  double spacing_wavelengths = 0.5;

  // scene
  SceneConfig scene;
  ChannelMode channel_mode = ChannelMode::Exact;

  // sweep
  SweepVariable variable = SweepVariable::Snr;
  std::vector<double> values{0, 5, 10, 15, 20, 25, 30};
  double snr_db = 20.0;       // fixed SNR when the sweep variable is not snr
  double grid_size = 3.0;     // codebook angular size in multiples of N

  std::vector<EstimatorKind> estimators{EstimatorKind::Ls, EstimatorKind::OracleLs,
                                        EstimatorKind::Sgvb, EstimatorKind::Psomp};

  // Explicit SG-VB overrides; unset fields take the geometry defaults.
  std::optional<int> sgvb_max_iters;
  SgvbConfig sgvb_overrides;
  SblConfig sbl;
  double coherence = 0.5;
  bool codebook_cache = true;
  std::string codebook_cache_dir;  // empty: <output_dir>/cache

  MetricOptions metrics;
  bool record_wall_time = false;

  int trials = 100;
  std::uint64_t master_seed = 1;
  std::string output_dir = "results";
  int workers = 0;  // 0: hardware concurrency

  // Effective key/value pairs in canonical order, for the manifest.
  std::vector<std::pair<std::string, std::string>> echo() const;

  ArrayGeometry geometry() const;
  SgvbConfig sgvb_config() const;
  // Largest distance a path can take in this experiment.
  double distance_ceiling() const;
  bool has(EstimatorKind k) const;
  void validate() const;
};

// Flat "key = value" text with '#' comments and optional "defaults <preset>" lines.
// Errors are InvalidConfig carrying "<source>:<line>: ..." messages.
ExperimentConfig parse_config(std::string_view text, std::string_view source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& file);

std::vector<std::string> preset_names();
// Throws InvalidConfig for an unknown name.
std::string preset_text(std::string_view name);

}  // namespace nfsgvb
