#pragma once

#include <map>
#include <string>

#include "tensrig/common.hpp"

namespace tensrig::sizing {

struct Material {
  std::string name;
  double density = 0.0;         // kg/m^3
  double yield_strength = 0.0;  // Pa
  double youngs_modulus = 0.0;  // Pa

  void check() const {
    if (density <= 0.0 || yield_strength <= 0.0 || youngs_modulus <= 0.0) {
      throw ConfigError("material '" + name +
                        "': density, yield strength and Young's modulus must be > 0");
    }
  }
};

using MaterialTable = std::map<std::string, Material>;

// Built-in stock: 6061-ish aluminum for bars, Spectra (UHMWPE) for strings.
inline Material aluminum() { return {"aluminum", 2700.0, 110.0e6, 60.0e9}; }
inline Material uhmwpe() { return {"uhmwpe", 970.0, 2.7e9, 120.0e9}; }

inline MaterialTable default_materials() {
  MaterialTable t;
  t["aluminum"] = aluminum();
  t["uhmwpe"] = uhmwpe();
  return t;
}

inline const Material& lookup(const MaterialTable& table, const std::string& name) {
  const auto it = table.find(name);
  if (it == table.end()) {
    throw ConfigError("no material named '" + name + "' in the material table");
  }
  return it->second;
}

}  // namespace tensrig::sizing
