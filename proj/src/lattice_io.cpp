#include <json.hpp>
#include <ostream>

#include "slch/error.hpp"
#include "slch/format.hpp"
#include "slch/lattice.hpp"

namespace slch {

std::string to_json(const LatticeState& u) {
  nlohmann::json j;
  j["window_radius"] = u.window_radius();
  j["boundary"] = boundary_name(u.boundary());
  j["values"] = u.vector();
  return j.dump();
}

LatticeState lattice_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    return LatticeState(j.at("window_radius").get<int>(),
                        parse_boundary(j.at("boundary").get<std::string>()),
                        j.at("values").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed lattice state JSON: ") + e.what());
  }
}

void write_csv(std::ostream& os, std::span<const LatticeState> states) {
  if (states.empty()) return;
  const LatticeState& first = states.front();
  const int r = first.window_radius();
  for (int i = -r; i <= r; ++i) {
    if (i > -r) os << ',';
    os << "site_" << i;
  }
  os << '\n';
  for (const auto& s : states) {
    require_same_shape(first, s, "csv export");
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (k > 0) os << ',';
      os << fmt_double(s.values()[k]);
    }
    os << '\n';
  }
}

}  // namespace slch
