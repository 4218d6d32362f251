#pragma once

// Declarative description of one experiment: transmitter, link, noise,
// receiver and the single sweep axis.

#include <cstdint>
#include <string>
#include <vector>

#include "kktx/channel.hpp"
#include "kktx/config.hpp"
#include "kktx/modem.hpp"
#include "kktx/receiver.hpp"

namespace kktx {

enum class SchemeKind { KkPamSsb, TwoSidedPolMux, CoherentQam16 };
enum class CdCompensation { Optical, Digital };
enum class LinkModel { BackToBack, Linear, Manakov };
enum class SweepAxis { Osnr, Cd };

struct LinkScenario {
  std::string name = "scenario";
  SchemeKind scheme = SchemeKind::KkPamSsb;

  double baud_hz = 48e9;
  double rolloff = 0.05;
  int order = 4;
  Index n_symbols = Index{1} << 15;
  int samples_per_symbol = 16;

  /// A^2 / P_s for KK-PAM. For TS-KK, P_LO per receiver branch over the
  /// zero-mean signal power of one polarization.
  std::vector<double> bias_or_lo_ratio{10.0};

  LinkModel link_model = LinkModel::Linear;
  std::vector<FiberSpanParams> spans{FiberSpanParams{}};
  bool nonlinear = true;
  /// Per-channel launch power: P_s for KK-PAM (bias excluded), the whole
  /// channel (both sidebands and polarizations) otherwise.
  double launch_dbm = 3.0;
  StepConfig steps{};

  int n_wdm = 1;
  double spacing_hz = 80e9;

  double gap_hz = 8.6e9;
  FilterSpec interleaver{FilterShape::SuperGaussian, 4, 0.0, 36e9};
  double interleaver_offset_hz = 18.8e9;
  bool tx_interleaver = true;

  SweepAxis axis = SweepAxis::Osnr;
  std::vector<double> osnr_sweep_db;
  std::vector<double> cd_sweep_ps_nm;
  /// OSNR used when the sweep axis is dispersion.
  double fixed_osnr_db = 17.0;
  std::vector<CdCompensation> cd_compensation{CdCompensation::Digital};

  NoiseSpec noise{};
  bool rx_filter_enabled = true;
  FilterSpec rx_filter{FilterShape::SuperGaussian, 12, 16e9, 26e9};
  KkConfig kk{};
  Index training_symbols = 256;

  int n_runs = 10;
  std::uint64_t base_seed = 1;
  /// Adds the 16-QAM coherent reference to a TS-KK sweep.
  bool coherent_baseline = false;

  std::string axis_name() const;
  const std::vector<double>& axis_values() const;
  double total_dispersion_ps_nm() const;
  double sample_rate_hz() const { return baud_hz * samples_per_symbol; }
  PulseShape pulse() const { return PulseShape{PulseKind::RaisedCosine, rolloff, baud_hz}; }
  InterleaverPair interleavers() const;
  /// Throws ConfigError describing the first inconsistency.
  void validate() const;
};

/// Builds and validates a scenario. Unknown keys are rejected.
LinkScenario scenario_from_config(const Config& cfg);

std::string to_string(SchemeKind scheme);

}  // namespace kktx
