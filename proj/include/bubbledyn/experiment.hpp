#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bubbledyn/config.hpp"
#include "bubbledyn/shapes.hpp"
#include "bubbledyn/ttn.hpp"

namespace bubbledyn {

enum class Fate { expanding, shrinking, undecided };

std::string to_string(Fate f);
Fate fate_from_string(const std::string& name);

struct SeriesPoint {
  double t = 0.0;
  double avg_x = 0.0;
  double energy = 0.0;
  double norm = 1.0;
  double max_entropy = 0.0;

  bool operator==(const SeriesPoint&) const = default;
};

/// <X_r> on the lattice at one time; values[x + width * y].
struct Snapshot {
  double t = 0.0;
  int width = 0;
  int height = 0;
  std::vector<double> values;

  double at(int x, int y) const { return values.at(static_cast<std::size_t>(x + width * y)); }
  bool operator==(const Snapshot&) const = default;
};

struct Provenance {
  std::string config_hash;
  std::string code_version;
  double wall_time_s = 0.0;
  bool failed = false;
  std::string failure;  // diagnostic when failed

  bool operator==(const Provenance&) const = default;
};

struct QuenchResult {
  int width = 0;
  int height = 0;
  std::string shape_label;
  ShapeStats shape;
  IsingParams params;
  Backend backend = Backend::ttn;
  std::vector<SeriesPoint> series;
  std::vector<std::vector<double>> local_x;  // one row per series point, canonical sites
  std::vector<Snapshot> snapshots;
  Fate fate = Fate::undecided;
  double window_mean = 0.0;  // mean avg_x over the classification window
  double window = 0.0;       // its length in time
  double threshold = 0.0;
  Provenance provenance;
};

bool operator==(const QuenchResult& a, const QuenchResult& b);

/// Mean of avg_x over the final `window` of the series: above +threshold the
/// false vacuum wins (Shrinking), below -threshold the bubble has taken over
/// (Expanding). Throws when the window is longer than the series.
Fate classify_fate(const std::vector<SeriesPoint>& series, double window, double threshold,
                   double* window_mean = nullptr);

/// Largest spread of a site field over the orbits of 90-degree rotations
/// about the lattice center. Requires a square lattice.
double c4_asymmetry(const std::vector<double>& values, const LatticeGeometry& geometry);

/// Product state from the configured shape, evolved with the configured
/// backend. A non-converging step stops the run and the partial result is
/// returned with provenance.failed set. Writes nothing. With the ttn backend
/// the final state is handed back through `final_state` when given.
QuenchResult run_quench(const QuenchConfig& config, std::optional<TreeState>* final_state = nullptr);

/// run_quench followed by write_result into config.out_dir (plus state.ttn
/// when config.checkpoint is set and the backend is ttn).
QuenchResult run_and_persist(const QuenchConfig& config);

}  // namespace bubbledyn
