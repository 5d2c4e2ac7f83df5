#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "pdc/dispersion.hpp"

namespace pdc {

/// Parses {name, sellmeier_o:{A,B,C,D}, sellmeier_e:{A,B,C,D}, validity_um:[min,max]}.
/// Length and cut angle are not part of the document and are left at zero.
inline CrystalSpec crystal_from_json(const nlohmann::json& doc) {
  const auto window = doc.at("validity_um");
  if (!window.is_array() || window.size() != 2) {
    throw Error(ErrorCode::InvalidArgument, "validity_um must be a two-element array");
  }
  const double lo = window.at(0).get<double>();
  const double hi = window.at(1).get<double>();
  auto read_set = [&](const nlohmann::json& j) {
    SellmeierSet s;
    s.A = j.at("A").get<double>();
    s.B = j.at("B").get<double>();
    s.C = j.at("C").get<double>();
    s.D = j.at("D").get<double>();
    s.lambda_min_um = lo;
    s.lambda_max_um = hi;
    validate(s);
    return s;
  };
  CrystalSpec c;
  c.name = doc.value("name", std::string("unnamed"));
  c.sellmeier_o = read_set(doc.at("sellmeier_o"));
  c.sellmeier_e = read_set(doc.at("sellmeier_e"));
  return c;
}

inline nlohmann::json crystal_to_json(const CrystalSpec& c) {
  auto set = [](const SellmeierSet& s) {
    return nlohmann::json{{"A", s.A}, {"B", s.B}, {"C", s.C}, {"D", s.D}};
  };
  return {{"name", c.name},
          {"sellmeier_o", set(c.sellmeier_o)},
          {"sellmeier_e", set(c.sellmeier_e)},
          {"validity_um", {c.sellmeier_o.lambda_min_um, c.sellmeier_o.lambda_max_um}}};
}

/// Throws nlohmann::json exceptions on malformed documents and pdc::Error on
/// physically invalid coefficients.
inline CrystalSpec load_crystal(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open crystal file " + path);
  return crystal_from_json(nlohmann::json::parse(in));
}

}  // namespace pdc
