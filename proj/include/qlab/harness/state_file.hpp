#pragma once

// State-description files:
//   {"dim": 2, "amplitudes": [[re, im], [re, im]],
//    "basis": [[[re, im], ...], ...]}          // optional, one entry per vector

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "qlab/state.hpp"

namespace qlab::harness {

struct StateFile {
  StateVector state;
  std::optional<OrthonormalBasis> basis;
};

namespace detail {

struct Position {
  std::size_t line = 1;
  std::size_t column = 1;
};

inline Position position_of(const std::string& text, std::size_t offset) {
  Position p;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++p.line;
      p.column = 1;
    } else {
      ++p.column;
    }
  }
  return p;
}

/// Position of the first occurrence of "key", or 1:1 when absent.
inline Position position_of_key(const std::string& text, const std::string& key) {
  const auto at = text.find("\"" + key + "\"");
  return at == std::string::npos ? Position{} : position_of(text, at);
}

inline ParseError structure_error(const std::string& text, const std::string& key, const std::string& what) {
  const auto p = position_of_key(text, key);
  return ParseError("state file: " + what, p.line, p.column);
}

inline CVector read_amplitudes(const nlohmann::json& array, const std::string& text, const std::string& key) {
  if (!array.is_array()) throw structure_error(text, key, "'" + key + "' must be an array of [re, im] pairs");
  CVector v(static_cast<Eigen::Index>(array.size()));
  for (std::size_t i = 0; i < array.size(); ++i) {
    const auto& pair = array[i];
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      throw structure_error(text, key, "entry " + std::to_string(i) + " of '" + key + "' is not a [re, im] pair");
    }
    v[static_cast<Eigen::Index>(i)] = Complex(pair[0].get<double>(), pair[1].get<double>());
  }
  return v;
}

}  // namespace detail

inline StateFile parse_state_text(const std::string& text, bool normalize = false,
                                  const Tolerances& tol = kDefaultTolerances) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    const auto p = detail::position_of(text, offset);
    throw ParseError("state file: malformed syntax", p.line, p.column);
  }
  if (!doc.is_object()) throw ParseError("state file: top level must be an object", 1, 1);
  if (!doc.contains("dim") || !doc["dim"].is_number_integer()) {
    throw detail::structure_error(text, "dim", "'dim' must be an integer");
  }
  const auto dim = doc["dim"].get<long long>();
  if (dim < 1) throw DimensionError("state file: dim must be >= 1");
  if (!doc.contains("amplitudes")) throw detail::structure_error(text, "amplitudes", "missing 'amplitudes'");

  CVector amps = detail::read_amplitudes(doc["amplitudes"], text, "amplitudes");
  if (amps.size() != dim) throw DimensionError("state file: amplitude count differs from dim");
  StateVector state = normalize ? StateVector::normalized(std::move(amps), tol) : StateVector(std::move(amps), tol);

  std::optional<OrthonormalBasis> basis;
  if (doc.contains("basis")) {
    const auto& b = doc["basis"];
    if (!b.is_array()) throw detail::structure_error(text, "basis", "'basis' must be an array of vectors");
    if (static_cast<long long>(b.size()) != dim) throw DimensionError("state file: basis needs dim vectors");
    CMatrix m(dim, dim);
    for (std::size_t j = 0; j < b.size(); ++j) {
      CVector col = detail::read_amplitudes(b[j], text, "basis");
      if (col.size() != dim) throw DimensionError("state file: basis vector length differs from dim");
      m.col(static_cast<Eigen::Index>(j)) = col;
    }
    basis.emplace(std::move(m), tol);
  }
  return StateFile{std::move(state), std::move(basis)};
}

inline StateFile parse_state_file(const std::string& path, bool normalize = false,
                                  const Tolerances& tol = kDefaultTolerances) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read state file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_state_text(buf.str(), normalize, tol);
}

}  // namespace qlab::harness
