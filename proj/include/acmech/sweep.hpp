#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "acmech/model.hpp"

// Configuration handling, parameter sweeps and spectra for the command-line
// front end.  Everything here is deterministic: fixed 9-digit formatting, no
// timestamps, and grid points assembled in index order regardless of how many
// workers computed them.

namespace acmech::sweep {

using nlohmann::json;

// Reference operating point: calibrated 100 nm sphere, chi = 10^-2 tuning,
// b_g = 2e3 T/m, room-temperature baths, Q_x = 1e5, Q_p = 1e6.
json default_config();

// Shallow-merges `file` (JSON object, possibly nested) into `config`.
void merge_config(json& config, const json& file);
json load_config_file(const std::string& path);

// Applies one `--set key=value` override with a dotted path.  The path must
// exist in the config (catches typos); values parse as number, bool or
// string.  The pseudo-key bath.T_K fans out to all three temperatures.
void apply_override(json& config, const std::string& key_eq_value);

struct Resolved {
  MagnetParams magnet;
  FieldDrive drive;
  BathParams baths;
  bool tuned = false;   // drive came from tune_fields rather than explicit fields
  double chi_target = 0.0;
};

// Turns a config into concrete parameter records.  omega_p and g default to
// the calibrated radius scaling; magnet.acoustics = "lamb" derives omega_p
// from the elastic mode solver instead.  B0/omega_d of zero mean "tune".
Resolved resolve_config(const json& config);

struct SweepAxis {
  std::string key;
  double from = 0.0;
  double to = 0.0;
  int points = 1;
  bool log_spacing = false;
  std::vector<double> values() const;
};

struct SweepSpec {
  json base;
  std::vector<SweepAxis> axes;  // one or two
  std::vector<std::string> observables;
  std::string out_path;
};

SweepSpec sweep_spec_from_config(const json& config);

struct Table {
  std::vector<std::string> comments;  // emitted with a leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::string to_csv() const;
};

// One row per grid point (axis1 outer, axis2 inner).  A grid point whose
// drift matrix is not Hurwitz gets nan observables and status not_hurwitz
// instead of failing the run.
Table run_sweep(const SweepSpec& spec, int workers = 1);

struct PeakSummary {
  double b_g = 0.0;
  bool stable = true;
  int count = 0;
  double peak_lo = 0.0, peak_hi = 0.0;  // two tallest peaks, ascending
  double splitting = 0.0;               // peak_hi - peak_lo when count >= 2
  double fwhm = 0.0;                    // of the tallest peak
  double height = 0.0;
};

// Scans a window around omega_x capped away from the negative-frequency
// image doublet, then refines peak positions and widths on the continuous
// spectrum so results do not inherit the scan resolution.
PeakSummary find_peaks(const gauss::SpectrumEvaluator& S, double omega_x, double gamma_2,
                       double G_x2);

struct PsdResult {
  Table table;  // omega column plus one S_xx column per gradient
  std::vector<PeakSummary> peaks;
};

// Displacement spectra for each b_g in psd.b_g_list_T_m on a grid spanning
// at least omega_x +- 10 gamma_2; peak summaries ride along as comments.
PsdResult run_psd(const json& config, int workers = 1);

// Subcommand bodies; each returns the text that goes to stdout.
std::string cmd_tune(const json& config);
std::string cmd_modes(const json& config, const std::string& out_path);
std::string cmd_report(const json& config);

// Companion gnuplot script next to a CSV (plot emission is optional; the
// CSV is the contract).
void write_plot_script(const std::string& csv_path, const Table& table, bool psd_style);

int worker_count_from_env();

}  // namespace acmech::sweep
