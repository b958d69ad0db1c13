#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tsim/protocol.hpp"

namespace tsim {

struct OutputOptions {
  std::string out_dir = "out";
  bool dump_states = false;
  bool dump_phases = false;

  friend bool operator==(const OutputOptions&, const OutputOptions&) = default;
};

struct RunConfig {
  ProtocolConfig protocol;
  OutputOptions output;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parse or validation failure; `path()` is the dotted key path at fault.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path.empty() ? message : path + ": " + message),
        path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

namespace detail::config {

using json = nlohmann::json;

inline std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

inline const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  return j;
}

inline void reject_unknown(const json& j, const std::string& path,
                           std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(join(path, key), "unknown key");
  }
}

inline double get_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

inline std::uint64_t get_u64(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    if (j.get<std::int64_t>() < 0) throw ConfigError(path, "must be non-negative");
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  throw ConfigError(path, "expected a non-negative integer");
}

inline unsigned get_unsigned(const json& j, const std::string& path) {
  const auto v = get_u64(j, path);
  if (v > 0xffffffffu) throw ConfigError(path, "value too large");
  return static_cast<unsigned>(v);
}

inline bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw ConfigError(path, "expected true or false");
  return j.get<bool>();
}

inline std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path, "expected a string");
  return j.get<std::string>();
}

inline std::vector<double> get_doubles(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(get_double(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline Species get_species(const json& j, const std::string& path) {
  const auto s = get_string(j, path);
  if (s == "tau") return Species::tau;
  if (s == "upsilon") return Species::upsilon;
  throw ConfigError(path, "expected \"tau\" or \"upsilon\", got \"" + s + "\"");
}

template <typename F>
void if_present(const json& obj, const char* key, F&& f) {
  if (auto it = obj.find(key); it != obj.end()) f(*it);
}

}  // namespace detail::config

/// Parse a JSON configuration document. Missing keys take their defaults;
/// unknown keys and constraint violations raise ConfigError naming the key.
inline RunConfig parse_config(const std::string& text) {
  using namespace detail::config;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed document: ") + e.what());
  }
  require_object(doc, "");
  reject_unknown(doc, "",
                 {"lattice", "particles", "params", "protocol", "erasure", "initial", "controls",
                  "output"});

  RunConfig cfg;
  auto& p = cfg.protocol;

  // lattice
  if (!doc.contains("lattice")) throw ConfigError("lattice", "missing required section");
  const auto& lat = require_object(doc["lattice"], "lattice");
  reject_unknown(lat, "lattice", {"sites", "edges", "chain"});
  if (!lat.contains("sites")) throw ConfigError("lattice.sites", "missing required key");
  const unsigned sites = get_unsigned(lat["sites"], "lattice.sites");
  if (sites == 0 || sites > kMaxSites) throw ConfigError("lattice.sites", "must be in [1, 63]");
  const bool chain = lat.contains("chain") ? get_bool(lat["chain"], "lattice.chain") : true;
  if (lat.contains("edges")) {
    if (lat.contains("chain") && chain) {
      throw ConfigError("lattice.edges", "cannot be combined with chain: true");
    }
    const auto& edges = lat["edges"];
    if (!edges.is_array()) throw ConfigError("lattice.edges", "expected an array of pairs");
    p.lattice = LatticeSpec{sites, {}};
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const auto path = "lattice.edges[" + std::to_string(i) + "]";
      if (!edges[i].is_array() || edges[i].size() != 2) {
        throw ConfigError(path, "expected a pair of site indices");
      }
      p.lattice.edges.emplace_back(get_unsigned(edges[i][0], path),
                                   get_unsigned(edges[i][1], path));
    }
  } else if (chain) {
    p.lattice = LatticeSpec::chain(sites);
  } else {
    throw ConfigError("lattice", "chain: false requires an explicit edges list");
  }
  try {
    p.lattice.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("lattice.edges", e.what());
  }

  // particles
  if (!doc.contains("particles")) throw ConfigError("particles", "missing required section");
  const auto& parts = require_object(doc["particles"], "particles");
  reject_unknown(parts, "particles", {"tau", "upsilon"});
  for (const char* key : {"tau", "upsilon"}) {
    const auto path = join("particles", key);
    if (!parts.contains(key)) throw ConfigError(path, "missing required key");
    const unsigned n = get_unsigned(parts[key], path);
    if (n > sites) {
      throw ConfigError(path, std::to_string(n) + " exceeds lattice.sites (" +
                                  std::to_string(sites) + ")");
    }
    (std::string(key) == "tau" ? p.n_tau : p.n_upsilon) = n;
  }

  // params
  p.params = ModelParams::defaults(sites);
  if_present(doc, "params", [&](const json& j) {
    require_object(j, "params");
    reject_unknown(j, "params", {"j_tau", "j_upsilon", "u_tau", "u_upsilon", "u_cross"});
    if_present(j, "j_tau", [&](const json& v) { p.params.j_tau = get_double(v, "params.j_tau"); });
    if_present(j, "j_upsilon",
               [&](const json& v) { p.params.j_upsilon = get_double(v, "params.j_upsilon"); });
    if_present(j, "u_cross",
               [&](const json& v) { p.params.u_cross = get_double(v, "params.u_cross"); });
    for (const char* key : {"u_tau", "u_upsilon"}) {
      if_present(j, key, [&](const json& v) {
        const auto path = join("params", key);
        auto values = get_doubles(v, path);
        if (values.size() != sites) {
          throw ConfigError(path, "expected " + std::to_string(sites) + " entries, got " +
                                      std::to_string(values.size()));
        }
        (std::string(key) == "u_tau" ? p.params.u_tau : p.params.u_upsilon) = std::move(values);
      });
    }
  });

  // protocol
  if_present(doc, "protocol", [&](const json& j) {
    require_object(j, "protocol");
    reject_unknown(j, "protocol", {"t1", "t2", "cycles", "seed"});
    if_present(j, "t1", [&](const json& v) { p.t1 = get_double(v, "protocol.t1"); });
    if_present(j, "t2", [&](const json& v) { p.t2 = get_double(v, "protocol.t2"); });
    if_present(j, "cycles", [&](const json& v) { p.cycles = get_unsigned(v, "protocol.cycles"); });
    if_present(j, "seed", [&](const json& v) { p.master_seed = get_u64(v, "protocol.seed"); });
  });
  if (!(p.t1 > 0.0)) throw ConfigError("protocol.t1", "must be > 0");
  if (!(p.t2 > 0.0)) throw ConfigError("protocol.t2", "must be > 0");
  if (p.cycles < 1) throw ConfigError("protocol.cycles", "must be >= 1");

  // erasure
  if_present(doc, "erasure", [&](const json& j) {
    require_object(j, "erasure");
    reject_unknown(j, "erasure", {"kind", "species", "site", "theta", "alternate_species"});
    if_present(j, "kind", [&](const json& v) {
      const auto kind = get_string(v, "erasure.kind");
      if (kind == "random_phase") {
        p.erasure.kind = ErasureKind::random_phase;
      } else if (kind == "site_phase") {
        p.erasure.kind = ErasureKind::site_phase;
      } else if (kind == "none") {
        p.erasure.kind = ErasureKind::none;
      } else {
        throw ConfigError("erasure.kind",
                          "expected random_phase, site_phase or none, got \"" + kind + "\"");
      }
    });
    if_present(j, "species",
               [&](const json& v) { p.erasure.species = get_species(v, "erasure.species"); });
    if_present(j, "site", [&](const json& v) { p.erasure.site = get_unsigned(v, "erasure.site"); });
    if_present(j, "theta", [&](const json& v) { p.erasure.theta = get_double(v, "erasure.theta"); });
    if_present(j, "alternate_species", [&](const json& v) {
      p.erasure.alternate_species = get_bool(v, "erasure.alternate_species");
    });
  });
  if (p.erasure.site >= sites) throw ConfigError("erasure.site", "outside the lattice");

  // initial
  if_present(doc, "initial", [&](const json& j) {
    require_object(j, "initial");
    reject_unknown(j, "initial", {"preset", "amplitudes"});
    if (j.contains("preset") && j.contains("amplitudes")) {
      throw ConfigError("initial", "give either preset or amplitudes, not both");
    }
    if_present(j, "preset", [&](const json& v) {
      const auto preset = get_string(v, "initial.preset");
      if (preset != "domain_wall") {
        throw ConfigError("initial.preset", "unknown preset \"" + preset + "\"");
      }
      p.initial.kind = InitialStateSpec::Kind::domain_wall;
    });
    if_present(j, "amplitudes", [&](const json& v) {
      if (!v.is_array()) throw ConfigError("initial.amplitudes", "expected an array of [re, im]");
      p.initial.kind = InitialStateSpec::Kind::amplitudes;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const auto path = "initial.amplitudes[" + std::to_string(i) + "]";
        if (!v[i].is_array() || v[i].size() != 2) throw ConfigError(path, "expected [re, im]");
        p.initial.amplitudes.emplace_back(get_double(v[i][0], path), get_double(v[i][1], path));
      }
    });
  });
  if (p.initial.kind == InitialStateSpec::Kind::amplitudes) {
    const auto expected = binomial(sites, p.n_tau) * binomial(sites, p.n_upsilon);
    if (p.initial.amplitudes.size() != expected) {
      throw ConfigError("initial.amplitudes", "expected " + std::to_string(expected) +
                                                  " entries, got " +
                                                  std::to_string(p.initial.amplitudes.size()));
    }
  }

  // controls
  if_present(doc, "controls", [&](const json& j) {
    require_object(j, "controls");
    reject_unknown(j, "controls", {"no_erasure_run", "full_hamiltonian_run", "trotter_steps"});
    if_present(j, "no_erasure_run", [&](const json& v) {
      p.controls.no_erasure_run = get_bool(v, "controls.no_erasure_run");
    });
    if_present(j, "full_hamiltonian_run", [&](const json& v) {
      p.controls.full_hamiltonian_run = get_bool(v, "controls.full_hamiltonian_run");
    });
    if_present(j, "trotter_steps", [&](const json& v) {
      p.controls.trotter_steps = get_unsigned(v, "controls.trotter_steps");
    });
  });
  if (p.controls.trotter_steps < 1) throw ConfigError("controls.trotter_steps", "must be >= 1");

  // output
  if_present(doc, "output", [&](const json& j) {
    require_object(j, "output");
    reject_unknown(j, "output", {"out_dir", "dump_states", "dump_phases"});
    if_present(j, "out_dir",
               [&](const json& v) { cfg.output.out_dir = get_string(v, "output.out_dir"); });
    if_present(j, "dump_states",
               [&](const json& v) { cfg.output.dump_states = get_bool(v, "output.dump_states"); });
    if_present(j, "dump_phases",
               [&](const json& v) { cfg.output.dump_phases = get_bool(v, "output.dump_phases"); });
  });

  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  return cfg;
}

/// Fully resolved document; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& cfg, int indent = 2) {
  using nlohmann::json;
  const auto& p = cfg.protocol;
  json doc;
  doc["lattice"]["sites"] = p.lattice.sites;
  if (p.lattice == LatticeSpec::chain(p.lattice.sites)) {
    doc["lattice"]["chain"] = true;
  } else {
    doc["lattice"]["chain"] = false;
    json edges = json::array();
    for (const auto& [a, b] : p.lattice.edges) edges.push_back({a, b});
    doc["lattice"]["edges"] = edges;
  }
  doc["particles"] = {{"tau", p.n_tau}, {"upsilon", p.n_upsilon}};
  doc["params"] = {{"j_tau", p.params.j_tau},
                   {"j_upsilon", p.params.j_upsilon},
                   {"u_tau", p.params.u_tau},
                   {"u_upsilon", p.params.u_upsilon},
                   {"u_cross", p.params.u_cross}};
  doc["protocol"] = {{"t1", p.t1}, {"t2", p.t2}, {"cycles", p.cycles}, {"seed", p.master_seed}};
  doc["erasure"] = {{"kind", to_string(p.erasure.kind)},
                    {"species", to_string(p.erasure.species)},
                    {"site", p.erasure.site},
                    {"theta", p.erasure.theta},
                    {"alternate_species", p.erasure.alternate_species}};
  if (p.initial.kind == InitialStateSpec::Kind::domain_wall) {
    doc["initial"] = {{"preset", "domain_wall"}};
  } else {
    json amps = json::array();
    for (const auto& a : p.initial.amplitudes) amps.push_back({a.real(), a.imag()});
    doc["initial"] = {{"amplitudes", amps}};
  }
  doc["controls"] = {{"no_erasure_run", p.controls.no_erasure_run},
                     {"full_hamiltonian_run", p.controls.full_hamiltonian_run},
                     {"trotter_steps", p.controls.trotter_steps}};
  doc["output"] = {{"out_dir", cfg.output.out_dir},
                   {"dump_states", cfg.output.dump_states},
                   {"dump_phases", cfg.output.dump_phases}};
  return doc.dump(indent);
}

}  // namespace tsim
