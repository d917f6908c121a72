#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bubbledyn/hamiltonian.hpp"
#include "bubbledyn/shapes.hpp"
#include "bubbledyn/tdvp.hpp"

namespace bubbledyn {

enum class Backend { ttn, exact };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& name);

/// Inputs of the scan subcommands; a single quench ignores them.
struct ScanSettings {
  std::vector<int> sizes;                  // scan-size: square sides L
  std::vector<ShapeSpec> shapes;           // scan-shapes / shapes
  std::vector<double> h_par_values;        // scan-shapes: one dataset each (empty: base h_par)
  std::vector<double> h_perp_values;       // scan-patch, scan-background
  std::vector<GridPoint> probes_inside;    // scan-patch (empty: every site of the patch)
  std::vector<GridPoint> probes_outside;   // scan-patch (empty: sites two or more steps from it)
  std::vector<int> chis;                   // scan-convergence
  std::vector<double> dts;                 // scan-convergence (empty: base dt)
};

struct QuenchConfig {
  int width = 4;
  int height = 4;
  ShapeSpec shape;  // center defaults to (width/2, height/2)
  IsingParams params{1.0, 1.2, -0.15};
  TdvpConfig tdvp;
  double t_max = 1.0;
  std::vector<double> snapshot_times;
  Backend backend = Backend::ttn;
  std::filesystem::path out_dir = "runs/default";
  bool checkpoint = false;  // write the final TTN next to the results
  double window_fraction = 0.2;
  double threshold = 0.1;
  ScanSettings scan;

  LatticeGeometry geometry() const { return LatticeGeometry(width, height); }
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// INI text with sections [lattice] [shape] [hamiltonian] [tdvp] [run]
/// [classify] [scan]. Relative mask paths are resolved against base_dir;
/// out_dir stays relative to the working directory.
QuenchConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
QuenchConfig load_config(const std::filesystem::path& path);

/// Canonical INI rendering; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const QuenchConfig& config);

/// 16 hex digits (FNV-1a over to_ini), stable across platforms and builds.
std::string config_hash(const QuenchConfig& config);

/// "1, 2.5, 3" -> {1, 2.5, 3}; blank -> {}.
std::vector<double> parse_number_list(const std::string& text);
/// "1:2; 3:0" -> {(1,2), (3,0)}.
std::vector<GridPoint> parse_point_list(const std::string& text);

}  // namespace bubbledyn
