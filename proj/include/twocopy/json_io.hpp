#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "twocopy/channels.hpp"
#include "twocopy/errors.hpp"
#include "twocopy/qmath.hpp"
#include "twocopy/states.hpp"

namespace twocopy::json_io {

using nlohmann::json;

/// Throws ConfigError naming the first key of `object` outside `allowed`.
inline void reject_unknown_keys(const json& object, const std::set<std::string>& allowed, const std::string& where) {
  if (!object.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

inline const json& require(const json& object, const std::string& key, const std::string& where) {
  if (!object.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
  return object.at(key);
}

inline double number(const json& value, const std::string& what) {
  if (!value.is_number()) throw ConfigError(what + " must be a number");
  return value.get<double>();
}

/// A complex entry is a bare number or an [re, im] pair.
inline Complex complex_entry(const json& value, const std::string& what) {
  if (value.is_number()) return {value.get<double>(), 0.0};
  if (value.is_array() && value.size() == 2 && value[0].is_number() && value[1].is_number()) {
    return {value[0].get<double>(), value[1].get<double>()};
  }
  throw ConfigError(what + " entries must be numbers or [re, im] pairs");
}

/// Reads a d x d complex matrix given either as d rows of d entries or as
/// a flat row-major list of d^2 entries.
inline ComplexMatrix complex_matrix(const json& value, int d, const std::string& what) {
  if (!value.is_array()) throw ConfigError(what + " must be an array");
  ComplexMatrix m(d, d);
  const auto n = static_cast<std::size_t>(d);
  if (value.size() == n * n) {
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) m(r, c) = complex_entry(value[r * d + c], what);
    }
    return m;
  }
  if (value.size() == n) {
    for (int r = 0; r < d; ++r) {
      if (!value[r].is_array() || value[r].size() != n) throw ConfigError(what + " rows must have " + std::to_string(d) + " entries");
      for (int c = 0; c < d; ++c) m(r, c) = complex_entry(value[r][c], what);
    }
    return m;
  }
  throw ConfigError(what + " must have " + std::to_string(d) + " rows or " + std::to_string(d * d) + " entries");
}

inline json complex_matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Builds a channel from its JSON description:
///   {"type": "explicit", "d", "omega", "basis"?}
///   {"type": "double_commutator", "energies", "gamma", "hbar"?, "time"?}
///   {"type": "qubit_mixture", "p", "a", "b"}
/// Physically invalid parameters are reported as ConfigError.
inline PureDecoherenceChannel channel_from_json(const json& spec) {
  if (!spec.is_object()) throw ConfigError("channel must be a JSON object");
  const auto type_value = require(spec, "type", "channel");
  if (!type_value.is_string()) throw ConfigError("channel type must be a string");
  const std::string type = type_value.get<std::string>();
  try {
    if (type == "explicit") {
      reject_unknown_keys(spec, {"type", "d", "omega", "basis"}, "explicit channel");
      const json& d_value = require(spec, "d", "explicit channel");
      if (!d_value.is_number_integer()) throw ConfigError("channel d must be an integer");
      const int d = d_value.get<int>();
      if (d < 2 || d > kMaxDimension) throw ConfigError("channel d out of range");
      ComplexMatrix omega = complex_matrix(require(spec, "omega", "explicit channel"), d, "omega");
      if (spec.contains("basis")) return PureDecoherenceChannel(omega, complex_matrix(spec["basis"], d, "basis"));
      return PureDecoherenceChannel(omega);
    }
    if (type == "double_commutator") {
      reject_unknown_keys(spec, {"type", "energies", "gamma", "hbar", "time"}, "double_commutator channel");
      const json& energies = require(spec, "energies", "double_commutator channel");
      if (!energies.is_array()) throw ConfigError("energies must be an array");
      DoubleCommutatorModel model;
      for (const auto& e : energies) model.energies.push_back(number(e, "energy"));
      if (model.energies.size() > static_cast<std::size_t>(kMaxDimension)) throw ConfigError("too many energies");
      model.gamma = number(require(spec, "gamma", "double_commutator channel"), "gamma");
      if (spec.contains("hbar")) model.hbar = number(spec["hbar"], "hbar");
      if (spec.contains("time")) model.time = number(spec["time"], "time");
      return channel_from_master_equation(model);
    }
    if (type == "qubit_mixture") {
      reject_unknown_keys(spec, {"type", "p", "a", "b"}, "qubit_mixture channel");
      return qubit_channel_from_mixture(number(require(spec, "p", "qubit_mixture channel"), "p"),
                                        number(require(spec, "a", "qubit_mixture channel"), "a"),
                                        number(require(spec, "b", "qubit_mixture channel"), "b"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid channel: ") + e.what());
  }
  throw ConfigError("unknown channel type '" + type + "'");
}

/// Single-system state from a probability list (diagonal) or a matrix.
inline DensityMatrix state_from_json(const json& value) {
  if (!value.is_array() || value.empty()) throw ConfigError("state must be a non-empty array");
  try {
    if (value[0].is_number()) {
      std::vector<double> probs;
      for (const auto& p : value) probs.push_back(number(p, "probability"));
      return diagonal_state(probs);
    }
    const int d = static_cast<int>(value.size());
    return DensityMatrix(complex_matrix(value, d, "state"));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid state: ") + e.what());
  }
}

}  // namespace twocopy::json_io
