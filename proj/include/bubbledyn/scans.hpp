#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bubbledyn/config.hpp"
#include "bubbledyn/experiment.hpp"

namespace bubbledyn {

struct ScanOptions {
  int jobs = 1;               // runs executed concurrently
  bool persist_runs = true;   // write every run below base.out_dir
};

/// Independent quenches, up to `jobs` at a time; results in input order.
std::vector<QuenchResult> run_jobs(const std::vector<QuenchConfig>& configs, const ScanOptions& options);

// --- critical size -----------------------------------------------------------

struct SizeScanRow {
  int L = 0;
  Fate fate = Fate::undecided;
  double window_mean = 0.0;
  bool failed = false;
};

struct SizeScan {
  std::vector<SizeScanRow> rows;  // ascending L
  bool monotone = false;          // Shrinking below the first Expanding, Expanding from there on
  std::optional<int> critical_size;
};

/// Shrinking/Expanding pattern -> critical size; pure function of the rows.
SizeScan summarize_sizes(std::vector<SizeScanRow> rows);
SizeScan critical_size_scan(const QuenchConfig& base, const std::vector<int>& sizes, const ScanOptions& options = {});
nlohmann::json to_json(const SizeScan& scan, const QuenchConfig& base);

// --- shape scatter -------------------------------------------------------------

struct ShapePoint {
  std::string shape_id;
  ShapeStats stats;
  Fate fate = Fate::undecided;
  double window_mean = 0.0;
  bool failed = false;
};

struct ShapeDataset {
  double h_par = 0.0;
  std::vector<ShapePoint> points;
};

std::vector<ShapeDataset> shape_scatter_scan(const QuenchConfig& base, const std::vector<ShapeSpec>& shapes,
                                             const std::vector<double>& h_par_values,
                                             const ScanOptions& options = {});
nlohmann::json to_json(const std::vector<ShapeDataset>& scan, const QuenchConfig& base);

// --- patch confinement ------------------------------------------------------------

struct ProbeTrace {
  GridPoint site;
  bool inside = false;
  std::vector<double> values;     // bubble run
  std::vector<double> reference;  // empty-mask run, same parameters
};

struct PatchRow {
  double h_perp = 0.0;
  double metric = 0.0;  // max over time and outside probes of |<X> - reference|
  std::vector<double> times;
  std::vector<ProbeTrace> probes;
  bool failed = false;
};

struct PatchScan {
  Patch patch;
  std::vector<PatchRow> rows;
};

/// Empty probe lists default to every patch site (inside) and every site at
/// least two steps from the patch (outside; all non-patch sites if none are).
PatchScan patch_confinement_scan(const QuenchConfig& base, const std::vector<double>& h_perp_values,
                                 std::vector<GridPoint> inside, std::vector<GridPoint> outside,
                                 const ScanOptions& options = {});
nlohmann::json to_json(const PatchScan& scan, const QuenchConfig& base);

// --- convergence ------------------------------------------------------------------

struct ConvergenceSetting {
  int chi = 0;
  double dt = 0.0;
  double c4_asymmetry = 0.0;  // max over time; 0 for non-square lattices
  bool failed = false;
};

struct ConvergenceScan {
  bool symmetric = false;  // the initial mask is invariant under 90-degree rotation
  std::vector<ConvergenceSetting> settings;
  /// differences[i]: max over shared times and sites of |<X>_i - <X>_{i+1}|.
  std::vector<double> differences;
};

/// Max over shared sample times and sites of |a - b|.
double max_local_difference(const QuenchResult& a, const QuenchResult& b);

/// Settings are every (chi, dt) pair, chi-major; at least two are required.
ConvergenceScan convergence_scan(const QuenchConfig& base, const std::vector<int>& chis,
                                 const std::vector<double>& dts, const ScanOptions& options = {});
nlohmann::json to_json(const ConvergenceScan& scan, const QuenchConfig& base);

// --- background -------------------------------------------------------------------

struct BackgroundRow {
  double h_perp = 0.0;
  std::vector<double> times;
  std::vector<double> avg_x;
  double long_time_mean = 0.0;  // over the final window_fraction * t_max
  bool failed = false;
};

/// Requires the empty shape and h_par = 0.
std::vector<BackgroundRow> background_scan(const QuenchConfig& base, const std::vector<double>& h_perp_values,
                                           const ScanOptions& options = {});
nlohmann::json to_json(const std::vector<BackgroundRow>& scan, const QuenchConfig& base);

/// Directory-safe form of a shape label ("rectangle:3x5" -> "rectangle_3x5").
std::string label_slug(const std::string& label);

}  // namespace bubbledyn
