#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "slch/experiment.hpp"

namespace slch {

namespace fs = std::filesystem;

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const std::string& file) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw MissingArtifactError("column '" + name + "' missing in " + file, file);
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw MissingArtifactError("cannot read " + p.string(), p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Table read_csv(const fs::path& p) {
  std::istringstream in(slurp(p));
  Table t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (t.header.empty()) t.header = split(line);
    else t.rows.push_back(split(line));
  }
  if (t.header.empty()) throw MissingArtifactError(p.string() + " has no header", p.string());
  return t;
}

// Long-format .dat: header comment, then the selected columns separated by spaces.
std::string to_dat(const Table& t, const std::vector<std::string>& cols, const std::string& file) {
  std::vector<std::size_t> idx;
  std::string out = "#";
  for (const auto& c : cols) {
    idx.push_back(t.column(c, file));
    out += " " + c;
  }
  out += "\n";
  for (const auto& r : t.rows) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] >= r.size()) throw MissingArtifactError("short row in " + file, file);
      out += (k ? " " : "") + r[idx[k]];
    }
    out += "\n";
  }
  return out;
}

struct PlotSpec {
  const char* csv;
  const char* dat;
  std::vector<std::string> cols;
  const char* plot;
};

const std::vector<PlotSpec>& plot_specs() {
  static const std::vector<PlotSpec> specs = {
      {"absorption.csv", "absorption.dat", {"pullback_time", "arrival_norm", "initial_norm", "seed", "member"},
       "set logscale y; set xlabel 'pullback time'; set ylabel '|u(tau)|'\n"
       "plot 'absorption.dat' using 1:2 with points title 'arrival norm'\n"},
      {"tails.csv", "tails.dat", {"I", "tail_mass", "relative_tail", "seed"},
       "set logscale y; set xlabel 'I'; set ylabel 'tail mass'\n"
       "plot 'tails.dat' using 1:2 with linespoints title 'sum_{|i|>I} v_i^2'\n"},
      {"invariance.csv", "invariance.dat", {"window", "residual", "seed", "observable"},
       "set logscale xy; set xlabel 'window'; set ylabel 'invariance residual'\n"
       "plot 'invariance.dat' using 1:2 with points title 'residual'\n"},
      {"ito.csv", "ito.dat", {"dt", "abs_residual", "seed", "test_function"},
       "set logscale xy; set xlabel 'dt'; set ylabel '|Ito residual|'\n"
       "plot 'ito.dat' using 1:2 with points title 'Ito residual'\n"},
      {"liouville.csv", "liouville.dat", {"dt", "window", "relative", "seed", "test_function"},
       "set logscale xy; set xlabel 'dt'; set ylabel 'relative Liouville residual'\n"
       "plot 'liouville.dat' using 1:3 with points title 'relative residual'\n"},
  };
  return specs;
}

}  // namespace

std::vector<std::string> emit_plotdata(const fs::path& dir) {
  const fs::path manifest = dir / "manifest.json";
  if (!fs::exists(manifest)) throw MissingArtifactError("no manifest.json in " + dir.string(), manifest.string());
  nlohmann::json man;
  try {
    man = nlohmann::json::parse(slurp(manifest));
  } catch (const nlohmann::json::exception&) {
    throw MissingArtifactError("manifest.json is unreadable", manifest.string());
  }
  std::vector<std::string> listed;
  for (const auto& f : man.value("files", nlohmann::json::array())) listed.push_back(f.value("name", ""));
  for (const auto& name : listed)
    if (!fs::exists(dir / name)) throw MissingArtifactError("artifact " + name + " listed but missing", (dir / name).string());

  std::vector<std::string> written;
  std::string script = "# gnuplot stub; run from this directory\nset terminal pngcairo size 900,600\n";
  for (const auto& s : plot_specs()) {
    if (std::find(listed.begin(), listed.end(), s.csv) == listed.end()) continue;
    const Table t = read_csv(dir / s.csv);
    write_atomic(dir / s.dat, to_dat(t, s.cols, s.csv));
    written.push_back(s.dat);
    script += "\nset output '" + std::string(s.dat).substr(0, std::string(s.dat).size() - 4) + ".png'\nreset\n" + s.plot;
  }
  write_atomic(dir / "plots.gp", script);
  written.push_back("plots.gp");
  return written;
}

}  // namespace slch
