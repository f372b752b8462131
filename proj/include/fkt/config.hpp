#ifndef FKT_CONFIG_HPP
#define FKT_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fkt/dynamics.hpp"
#include "fkt/presets.hpp"

namespace fkt {

struct InitialSpec {
  /// "zero", "stationary", "interior-bump", "random-seeded" or "explicit".
  std::string preset = "zero";
  std::optional<std::uint64_t> seed;
  int margin = 0;
  std::vector<cplx> explicit_coefs[4];
};

struct OrderSpec {
  int moment = 4;          // n <= moment in the corner-power and moment laws
  int polynomial = 3;      // m <= polynomial in the polynomial laws
  int reconstruction = 3;  // m <= reconstruction in the spectral-path cross-check
  int moment_count = 0;    // block moments fed to exp_evolve; 0 = automatic
};

struct RunConfig {
  InitialSpec initial;
  int truncation = 8;
  FlowConfig flow;
  ContourSpec contour{0.0, 0.0, 256};  // radius 0 = 2 x norm bound of the initial state
  std::vector<cplx> z_samples;         // empty = 8 points on |z| = 2 x norm bound
  OrderSpec orders;
  std::string output_dir = "out";
  std::set<std::string> formats{"csv", "json"};

  LatticeState initial_state() const {
    const InitialSpec& in = initial;
    if (in.preset == "zero") return preset_zero(truncation);
    if (in.preset == "stationary") return preset_stationary(truncation);
    if (in.preset == "interior-bump") return preset_interior_bump(truncation);
    if (in.preset == "random-seeded") return preset_random(truncation, in.seed.value(), in.margin);
    LatticeState s = LatticeState::zero(truncation);
    for (Coef k : kAllCoefs) {
      const auto& v = in.explicit_coefs[static_cast<int>(k)];
      for (std::size_t n = 0; n < v.size(); ++n) s.set(k, static_cast<int>(n) + 1, v[n]);
    }
    return s;
  }

  ContourSpec contour_for(const BlockJacobi& j) const {
    ContourSpec c = contour;
    if (c.radius <= 0.0) c.radius = 2.0 * std::max(operator_norm_bound(j), 1e-3);
    return c;
  }

  std::vector<cplx> z_samples_for(const BlockJacobi& j) const {
    if (!z_samples.empty()) return z_samples;
    return circle_points(8, 2.0 * std::max(operator_norm_bound(j), 1e-3));
  }
};

namespace detail {

using json = nlohmann::json;

inline std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(join(path, it.key()), "unknown key");
  }
}

inline double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
  return x;
}

inline long long get_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<long long>();
}

/// A number or a [re, im] pair.
inline cplx get_complex(const json& v, const std::string& path) {
  if (v.is_number()) return get_number(v, path);
  if (v.is_array() && v.size() == 2) return {get_number(v[0], path + "[0]"), get_number(v[1], path + "[1]")};
  throw ConfigError(path, "expected a number or a [re, im] pair");
}

inline void parse_initial(const json& v, RunConfig& cfg) {
  InitialSpec& in = cfg.initial;
  if (v.is_string()) {
    in.preset = v.get<std::string>();
  } else if (v.is_object() && v.contains("preset")) {
    reject_unknown(v, "initial", {"preset", "seed", "margin"});
    if (!v["preset"].is_string()) throw ConfigError("initial.preset", "expected a string");
    in.preset = v["preset"].get<std::string>();
    if (v.contains("seed")) {
      const long long seed = get_integer(v["seed"], "initial.seed");
      if (seed < 0) throw ConfigError("initial.seed", "must be nonnegative");
      in.seed = static_cast<std::uint64_t>(seed);
    }
    if (v.contains("margin")) in.margin = static_cast<int>(get_integer(v["margin"], "initial.margin"));
  } else if (v.is_object()) {
    reject_unknown(v, "initial", {"a", "b", "c", "d"});
    in.preset = "explicit";
    for (Coef k : kAllCoefs) {
      const std::string key = coef_name(k);
      if (!v.contains(key)) continue;
      const std::string path = "initial." + key;
      if (!v[key].is_array()) throw ConfigError(path, "expected an array of coefficients");
      for (std::size_t n = 0; n < v[key].size(); ++n) {
        in.explicit_coefs[static_cast<int>(k)].push_back(get_complex(v[key][n], path + "[" + std::to_string(n) + "]"));
      }
    }
  } else {
    throw ConfigError("initial", "expected a preset name, a preset object or explicit coefficient lists");
  }

  static const std::set<std::string> known{"zero", "stationary", "interior-bump", "random-seeded", "explicit"};
  if (!known.count(in.preset)) throw ConfigError("initial.preset", "unknown preset '" + in.preset + "'");
  if (in.preset == "random-seeded" && !in.seed) throw ConfigError("initial.seed", "required for preset random-seeded");
  if (in.preset != "random-seeded" && (in.seed || in.margin != 0)) {
    throw ConfigError("initial", "seed and margin apply only to preset random-seeded");
  }
  if (in.preset == "random-seeded" && (in.margin < 0 || in.margin >= cfg.truncation)) {
    throw ConfigError("initial.margin", "must lie in [0, truncation)");
  }
  if (in.preset == "interior-bump" && cfg.truncation < 4) {
    throw ConfigError("truncation", "preset interior-bump needs truncation >= 4");
  }
  if (in.preset == "explicit") {
    for (Coef k : kAllCoefs) {
      const auto size = static_cast<int>(in.explicit_coefs[static_cast<int>(k)].size());
      if (size > LatticeState::length(k, cfg.truncation)) {
        throw ConfigError(std::string("initial.") + coef_name(k),
                          "has " + std::to_string(size) + " entries, truncation allows " +
                              std::to_string(LatticeState::length(k, cfg.truncation)));
      }
    }
  }
}

}  // namespace detail

/// Parses a JSON run configuration, filling every omitted field with its
/// default. Unknown keys are rejected.
inline RunConfig parse_config(const std::string& text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "top level must be an object");
  detail::reject_unknown(doc, "", {"initial", "truncation", "flow", "contour", "z_samples", "orders", "output_dir",
                                   "formats"});
  RunConfig cfg;
  if (doc.contains("truncation")) {
    const long long n = detail::get_integer(doc["truncation"], "truncation");
    if (n < 2 || n > 512) throw ConfigError("truncation", "must lie in [2, 512]");
    cfg.truncation = static_cast<int>(n);
  }
  if (!doc.contains("initial")) throw ConfigError("initial", "required");
  detail::parse_initial(doc["initial"], cfg);

  if (doc.contains("flow")) {
    const json& f = doc["flow"];
    if (!f.is_object()) throw ConfigError("flow", "expected an object");
    detail::reject_unknown(f, "flow", {"h", "t_end", "record_every", "interior_margin", "blowup_guard"});
    if (f.contains("h")) cfg.flow.h = detail::get_number(f["h"], "flow.h");
    if (f.contains("t_end")) cfg.flow.t_end = detail::get_number(f["t_end"], "flow.t_end");
    if (f.contains("record_every")) cfg.flow.record_every = static_cast<int>(detail::get_integer(f["record_every"], "flow.record_every"));
    if (f.contains("interior_margin")) {
      cfg.flow.interior_margin = static_cast<int>(detail::get_integer(f["interior_margin"], "flow.interior_margin"));
    }
    if (f.contains("blowup_guard")) cfg.flow.blowup_guard = detail::get_number(f["blowup_guard"], "flow.blowup_guard");
  }
  try {
    cfg.flow.validate();
    cfg.flow.steps();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("flow", e.what());
  }

  if (doc.contains("contour")) {
    const json& c = doc["contour"];
    if (!c.is_object()) throw ConfigError("contour", "expected an object");
    detail::reject_unknown(c, "contour", {"center", "radius", "nodes"});
    if (c.contains("center")) cfg.contour.center = detail::get_complex(c["center"], "contour.center");
    if (c.contains("radius")) {
      cfg.contour.radius = detail::get_number(c["radius"], "contour.radius");
      if (!(cfg.contour.radius > 0.0)) throw ConfigError("contour.radius", "must be positive");
    }
    if (c.contains("nodes")) cfg.contour.nodes = static_cast<int>(detail::get_integer(c["nodes"], "contour.nodes"));
    if (cfg.contour.nodes < 64 || cfg.contour.nodes % 2 != 0) throw ConfigError("contour.nodes", "must be even and >= 64");
  }

  if (doc.contains("z_samples")) {
    const json& z = doc["z_samples"];
    if (!z.is_array()) throw ConfigError("z_samples", "expected an array");
    for (std::size_t k = 0; k < z.size(); ++k) {
      cfg.z_samples.push_back(detail::get_complex(z[k], "z_samples[" + std::to_string(k) + "]"));
    }
  }

  if (doc.contains("orders")) {
    const json& o = doc["orders"];
    if (!o.is_object()) throw ConfigError("orders", "expected an object");
    detail::reject_unknown(o, "orders", {"moment", "polynomial", "reconstruction", "moment_count"});
    auto read = [&](const char* key, int& dst, int lo) {
      if (!o.contains(key)) return;
      const long long v = detail::get_integer(o[key], std::string("orders.") + key);
      if (v < lo) throw ConfigError(std::string("orders.") + key, "must be >= " + std::to_string(lo));
      dst = static_cast<int>(v);
    };
    read("moment", cfg.orders.moment, 0);
    read("polynomial", cfg.orders.polynomial, 0);
    read("reconstruction", cfg.orders.reconstruction, 0);
    read("moment_count", cfg.orders.moment_count, 0);
  }

  if (doc.contains("output_dir")) {
    if (!doc["output_dir"].is_string()) throw ConfigError("output_dir", "expected a string");
    cfg.output_dir = doc["output_dir"].get<std::string>();
  }
  if (doc.contains("formats")) {
    const json& f = doc["formats"];
    if (!f.is_array()) throw ConfigError("formats", "expected an array");
    cfg.formats.clear();
    for (std::size_t k = 0; k < f.size(); ++k) {
      const std::string path = "formats[" + std::to_string(k) + "]";
      if (!f[k].is_string()) throw ConfigError(path, "expected a string");
      const std::string name = f[k].get<std::string>();
      if (name != "csv" && name != "json" && name != "plotdata") throw ConfigError(path, "unknown format '" + name + "'");
      cfg.formats.insert(name);
    }
  }
  return cfg;
}

}  // namespace fkt

#endif  // FKT_CONFIG_HPP
