#include "bubbledyn/result_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bubbledyn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kResultVersion = 1;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::vector<std::vector<double>> read_csv(const fs::path& path, bool header, std::string* header_line = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  if (header) {
    std::getline(in, line);
    if (header_line) *header_line = line;
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.c_str();
    while (*p) {
      char* end = nullptr;
      row.push_back(std::strtod(p, &end));
      if (end == p) throw std::runtime_error("malformed number in '" + path.string() + "'");
      p = end;
      if (*p == ',') ++p;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string snapshot_filename(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "snapshot_t%g.csv", t);
  return buf;
}

json shape_stats_json(const ShapeStats& s) {
  return {{"area", s.area},
          {"P_b", s.bond_perimeter},
          {"P_s", s.site_perimeter},
          {"patch", {{"x0", s.patch.x0}, {"y0", s.patch.y0}, {"width", s.patch.width}, {"height", s.patch.height}}}};
}

void write_json(const json& doc, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  return json::parse(in);
}

void write_result(const QuenchResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "series.csv");
    out << "t,avg_x,energy,norm,max_entropy\n";
    for (const auto& p : r.series) {
      out << num(p.t) << ',' << num(p.avg_x) << ',' << num(p.energy) << ',' << num(p.norm) << ','
          << num(p.max_entropy) << '\n';
    }
  }
  {
    auto out = open_out(dir / "local_x.csv");
    out << "t";
    for (int s = 0; s < r.width * r.height; ++s) out << ",x" << s;
    out << '\n';
    for (std::size_t k = 0; k < r.local_x.size(); ++k) {
      out << num(r.series.at(k).t);
      for (double v : r.local_x[k]) out << ',' << num(v);
      out << '\n';
    }
  }
  json snaps = json::array();
  for (const auto& s : r.snapshots) {
    const std::string name = snapshot_filename(s.t);
    auto out = open_out(dir / name);
    for (int y = 0; y < s.height; ++y) {
      for (int x = 0; x < s.width; ++x) out << (x ? "," : "") << num(s.at(x, y));
      out << '\n';
    }
    snaps.push_back({{"t", s.t}, {"file", name}});
  }

  json doc = {
      {"format", "bubbledyn.result"},
      {"version", kResultVersion},
      {"lattice", {{"width", r.width}, {"height", r.height}}},
      {"shape", shape_stats_json(r.shape)},
      {"hamiltonian", {{"J", r.params.J}, {"h_perp", r.params.h_perp}, {"h_par", r.params.h_par}}},
      {"backend", to_string(r.backend)},
      {"fate", to_string(r.fate)},
      {"window_mean", r.window_mean},
      {"window", r.window},
      {"threshold", r.threshold},
      {"steps", r.series.size()},
      {"snapshots", snaps},
      {"provenance",
       {{"config_hash", r.provenance.config_hash},
        {"code_version", r.provenance.code_version},
        {"wall_time_s", r.provenance.wall_time_s},
        {"failed", r.provenance.failed},
        {"failure", r.provenance.failure}}},
  };
  doc["shape"]["label"] = r.shape_label;
  write_json(doc, dir / "result.json");
}

QuenchResult read_result(const fs::path& dir) {
  const json doc = read_json(dir / "result.json");
  if (doc.value("format", "") != "bubbledyn.result") throw std::runtime_error("not a result file");
  if (doc.at("version").get<int>() != kResultVersion) throw std::runtime_error("unsupported result version");
  QuenchResult r;
  r.width = doc.at("lattice").at("width");
  r.height = doc.at("lattice").at("height");
  const auto& sh = doc.at("shape");
  r.shape_label = sh.at("label");
  r.shape.area = sh.at("area");
  r.shape.bond_perimeter = sh.at("P_b");
  r.shape.site_perimeter = sh.at("P_s");
  r.shape.patch = {sh.at("patch").at("x0"), sh.at("patch").at("y0"), sh.at("patch").at("width"),
                   sh.at("patch").at("height")};
  r.params = {doc.at("hamiltonian").at("J"), doc.at("hamiltonian").at("h_perp"), doc.at("hamiltonian").at("h_par")};
  r.backend = backend_from_string(doc.at("backend"));
  r.fate = fate_from_string(doc.at("fate"));
  r.window_mean = doc.at("window_mean");
  r.window = doc.at("window");
  r.threshold = doc.at("threshold");
  const auto& pv = doc.at("provenance");
  r.provenance = {pv.at("config_hash"), pv.at("code_version"), pv.at("wall_time_s"), pv.at("failed"), pv.at("failure")};

  std::string header;
  for (const auto& row : read_csv(dir / "series.csv", true, &header)) {
    if (row.size() != 5) throw std::runtime_error("series.csv rows need 5 columns");
    r.series.push_back({row[0], row[1], row[2], row[3], row[4]});
  }
  if (header != "t,avg_x,energy,norm,max_entropy") throw std::runtime_error("unexpected series.csv header");
  for (auto& row : read_csv(dir / "local_x.csv", true)) {
    row.erase(row.begin());
    r.local_x.push_back(std::move(row));
  }
  for (const auto& s : doc.at("snapshots")) {
    Snapshot snap{s.at("t"), r.width, r.height, {}};
    for (const auto& row : read_csv(dir / s.at("file").get<std::string>(), false)) {
      if (static_cast<int>(row.size()) != r.width) throw std::runtime_error("snapshot row has the wrong width");
      snap.values.insert(snap.values.end(), row.begin(), row.end());
    }
    if (static_cast<int>(snap.values.size()) != r.width * r.height) throw std::runtime_error("snapshot size mismatch");
    r.snapshots.push_back(std::move(snap));
  }
  return r;
}

}  // namespace bubbledyn
