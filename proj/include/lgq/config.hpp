#pragma once

// JSON run configuration shared by every subcommand. Unknown keys are
// rejected and every error names the offending field.

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "lgq/errors.hpp"
#include "lgq/kernels.hpp"
#include "lgq/quasiprob.hpp"
#include "lgq/scanner.hpp"

namespace lgq {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

enum class TimeUnit { Natural, InvEll, L };

inline std::string to_string(TimeUnit u) {
  switch (u) {
    case TimeUnit::Natural: return "natural";
    case TimeUnit::InvEll: return "inv_ell";
    case TimeUnit::L: return "L";
  }
  return "?";
}

struct OutputSpec {
  std::string format = "csv";  // scan output: csv or json
  std::string path;
};

struct ScanSpec {
  AxisSpec x;
  AxisSpec y;
  int threads = 0;
};

struct RunConfig {
  FieldModel model;
  StateSpec state;
  ProjectionScheme scheme = SignThreshold{};
  bool w_in_units_of_L = false;  // scheme given as wL rather than w
  double w_as_written = 0.0;
  int s1 = 1;
  int s2 = 1;
  double t1 = 0.0;  // as written, in time_unit
  double t2 = 0.0;
  TimeUnit time_unit = TimeUnit::Natural;
  QuadratureConfig quadrature;
  OutputSpec output;
  std::optional<ScanSpec> scan;

  double time_scale() const {
    switch (time_unit) {
      case TimeUnit::Natural: return 1.0;
      case TimeUnit::InvEll: return 1.0 / state.ell;
      case TimeUnit::L: return model.L;
    }
    return 1.0;
  }
  QuasiProbQuery query() const { return {s1, s2, t1 * time_scale(), t2 * time_scale()}; }

  ScanBase base() const {
    ScanBase b;
    b.model = model;
    b.state = state;
    b.scheme = scheme;
    b.query = query();
    b.quadrature = quadrature;
    return b;
  }
};

namespace config_detail {

inline void require_object(const json& j, const std::string& where,
                           std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw ConfigError("unknown key '" + (where.empty() ? k : where + "." + k) + "'");
  }
}

inline std::string path(const std::string& where, const char* key) {
  return where.empty() ? key : where + "." + key;
}

inline double number(const json& j, const std::string& where, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(path(where, key) + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path(where, key) + " must be finite");
  return d;
}

inline int integer(const json& j, const std::string& where, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(path(where, key) + " must be an integer");
  return v.get<int>();
}

inline std::string text(const json& j, const std::string& where, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError(path(where, key) + " must be a string");
  return v.get<std::string>();
}

inline bool boolean(const json& j, const std::string& where, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(path(where, key) + " must be true or false");
  return v.get<bool>();
}

inline Engine engine_from(const std::string& s, const std::string& where) {
  if (s == "cartesian") return Engine::Cartesian;
  if (s == "polar") return Engine::Polar;
  if (s == "auto") return Engine::Auto;
  throw ConfigError(where + " must be cartesian, polar or auto (got '" + s + "')");
}

inline AxisSpec axis_from(const json& j, const std::string& where) {
  require_object(j, where, {"param", "min", "max", "n"});
  if (!j.contains("param")) throw ConfigError(where + ".param is required");
  AxisSpec a;
  a.param = axis_param_from(text(j, where, "param", ""));
  a.min = number(j, where, "min", 0.0);
  a.max = number(j, where, "max", 1.0);
  a.n = integer(j, where, "n", 2);
  a.validate(where);
  return a;
}

inline json axis_to_json(const AxisSpec& a) {
  return {{"param", to_string(a.param)}, {"min", a.min}, {"max", a.max}, {"n", a.n}};
}

}  // namespace config_detail

inline RunConfig config_from_json(const json& root) {
  using namespace config_detail;
  // Sidecars wrap the configuration; accept them directly.
  if (root.is_object() && root.contains("config") && root.contains("tool_version")) {
    return config_from_json(root.at("config"));
  }
  require_object(root, "", {"model", "state", "scheme", "query", "quadrature", "output", "scan"});
  RunConfig c;

  if (!root.contains("model")) throw ConfigError("model is required");
  const auto& m = root.at("model");
  require_object(m, "model", {"field", "L"});
  const std::string field = text(m, "model", "field", "scalar3d");
  if (field == "scalar3d") {
    c.model.kind = FieldKind::Scalar3D;
  } else if (field == "chiral1d") {
    c.model.kind = FieldKind::Chiral1D;
  } else {
    throw ConfigError("model.field must be scalar3d or chiral1d (got '" + field + "')");
  }
  c.model.L = number(m, "model", "L", 1.0);
  c.model.validate();

  if (root.contains("state")) {
    const auto& s = root.at("state");
    require_object(s, "state", {"xi", "ell", "alpha", "r", "theta"});
    c.state.xi = number(s, "state", "xi", 0.0);
    c.state.ell = number(s, "state", "ell", 1.0);
    c.state.alpha = number(s, "state", "alpha", 0.0);
    c.state.r = number(s, "state", "r", 0.0);
    c.state.theta = number(s, "state", "theta", 0.0);
  }
  c.state.validate();

  if (root.contains("scheme")) {
    const auto& s = root.at("scheme");
    require_object(s, "scheme", {"kind", "reference", "w", "wL"});
    const std::string kind = text(s, "scheme", "kind", "sign");
    if (kind == "sign") {
      if (s.contains("w") || s.contains("wL")) throw ConfigError("scheme.w only applies to the window scheme");
      SignThreshold sign;
      if (s.contains("reference")) {
        const auto& r = s.at("reference");
        require_object(r, "scheme.reference", {"kind", "xi", "ell", "alpha", "phi1", "phi2"});
        const std::string rk = text(r, "scheme.reference", "kind", "zero");
        if (rk == "zero") {
          sign.reference = ZeroReference{};
        } else if (rk == "minus_e") {
          sign.reference = MinusEReference{number(r, "scheme.reference", "xi", 0.0),
                                           number(r, "scheme.reference", "ell", 1.0),
                                           number(r, "scheme.reference", "alpha", 0.0)};
        } else if (rk == "tabulated") {
          sign.reference = TabulatedReference{number(r, "scheme.reference", "phi1", 0.0),
                                              number(r, "scheme.reference", "phi2", 0.0)};
        } else {
          throw ConfigError("scheme.reference.kind must be zero, minus_e or tabulated (got '" + rk + "')");
        }
      }
      c.scheme = sign;
    } else if (kind == "window") {
      if (s.contains("reference")) throw ConfigError("scheme.reference only applies to the sign scheme");
      if (s.contains("w") && s.contains("wL")) throw ConfigError("scheme: give either w or wL, not both");
      c.w_in_units_of_L = s.contains("wL");
      c.w_as_written = c.w_in_units_of_L ? number(s, "scheme", "wL", 0.0) : number(s, "scheme", "w", 0.0);
      const double w = c.w_in_units_of_L ? c.w_as_written / c.model.L : c.w_as_written;
      if (!(w >= 0.0)) throw ConfigError(std::string("scheme.") + (c.w_in_units_of_L ? "wL" : "w") + " must be >= 0");
      c.scheme = WindowBand{w};
    } else {
      throw ConfigError("scheme.kind must be sign or window (got '" + kind + "')");
    }
  }
  validate(c.scheme);

  if (root.contains("query")) {
    const auto& q = root.at("query");
    require_object(q, "query", {"s1", "s2", "t1", "t2", "time_unit"});
    c.s1 = integer(q, "query", "s1", 1);
    c.s2 = integer(q, "query", "s2", 1);
    c.t1 = number(q, "query", "t1", 0.0);
    c.t2 = number(q, "query", "t2", 0.0);
    const std::string unit = text(q, "query", "time_unit", "natural");
    if (unit == "natural") {
      c.time_unit = TimeUnit::Natural;
    } else if (unit == "inv_ell") {
      c.time_unit = TimeUnit::InvEll;
    } else if (unit == "L") {
      c.time_unit = TimeUnit::L;
    } else {
      throw ConfigError("query.time_unit must be natural, inv_ell or L (got '" + unit + "')");
    }
  }
  c.query().validate();

  if (root.contains("quadrature")) {
    const auto& q = root.at("quadrature");
    require_object(q, "quadrature", {"engine", "abs_tol", "rel_tol", "trunc_sigmas", "max_subdiv", "eps_det",
                                     "degenerate_shift", "degenerate_eps"});
    auto& d = c.quadrature;
    d.engine = engine_from(text(q, "quadrature", "engine", "auto"), "quadrature.engine");
    d.abs_tol = number(q, "quadrature", "abs_tol", d.abs_tol);
    d.rel_tol = number(q, "quadrature", "rel_tol", d.rel_tol);
    d.trunc_sigmas = number(q, "quadrature", "trunc_sigmas", d.trunc_sigmas);
    d.max_subdiv = integer(q, "quadrature", "max_subdiv", d.max_subdiv);
    d.eps_det = number(q, "quadrature", "eps_det", d.eps_det);
    d.degenerate_shift = boolean(q, "quadrature", "degenerate_shift", d.degenerate_shift);
    d.degenerate_shift_L = number(q, "quadrature", "degenerate_eps", d.degenerate_shift_L);
  }
  c.quadrature.validate();

  if (root.contains("output")) {
    const auto& o = root.at("output");
    require_object(o, "output", {"format", "path"});
    c.output.format = text(o, "output", "format", "csv");
    if (c.output.format != "csv" && c.output.format != "json") {
      throw ConfigError("output.format must be csv or json");
    }
    c.output.path = text(o, "output", "path", "");
  }

  if (root.contains("scan")) {
    const auto& s = root.at("scan");
    require_object(s, "scan", {"x", "y", "threads"});
    if (!s.contains("x") || !s.contains("y")) throw ConfigError("scan needs both x and y axes");
    ScanSpec spec;
    spec.x = axis_from(s.at("x"), "scan.x");
    spec.y = axis_from(s.at("y"), "scan.y");
    if (spec.x.param == spec.y.param) throw ConfigError("scan.x and scan.y must bind distinct parameters");
    spec.threads = integer(s, "scan", "threads", 0);
    if (spec.threads < 0) throw ConfigError("scan.threads must be >= 0");
    for (const auto* a : {&spec.x, &spec.y}) {
      if (a->param == AxisParam::WL && !std::holds_alternative<WindowBand>(c.scheme)) {
        throw ConfigError("scan axis wL requires scheme.kind = window");
      }
    }
    c.scan = spec;
  }
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline RunConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot read config file '" + file + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline json to_json(const RunConfig& c) {
  json scheme;
  if (std::holds_alternative<WindowBand>(c.scheme)) {
    scheme = {{"kind", "window"}, {c.w_in_units_of_L ? "wL" : "w", c.w_as_written}};
  } else {
    const auto& ref = std::get<SignThreshold>(c.scheme).reference;
    json r;
    if (std::holds_alternative<ZeroReference>(ref)) {
      r = {{"kind", "zero"}};
    } else if (const auto* me = std::get_if<MinusEReference>(&ref)) {
      r = {{"kind", "minus_e"}, {"xi", me->xi}, {"ell", me->ell}, {"alpha", me->alpha}};
    } else {
      const auto& tab = std::get<TabulatedReference>(ref);
      r = {{"kind", "tabulated"}, {"phi1", tab.phi1}, {"phi2", tab.phi2}};
    }
    scheme = {{"kind", "sign"}, {"reference", r}};
  }
  const auto& q = c.quadrature;
  json j = {
      {"model", {{"field", to_string(c.model.kind)}, {"L", c.model.L}}},
      {"state",
       {{"xi", c.state.xi}, {"ell", c.state.ell}, {"alpha", c.state.alpha}, {"r", c.state.r}, {"theta", c.state.theta}}},
      {"scheme", scheme},
      {"query", {{"s1", c.s1}, {"s2", c.s2}, {"t1", c.t1}, {"t2", c.t2}, {"time_unit", to_string(c.time_unit)}}},
      {"quadrature",
       {{"engine", to_string(q.engine)},
        {"abs_tol", q.abs_tol},
        {"rel_tol", q.rel_tol},
        {"trunc_sigmas", q.trunc_sigmas},
        {"max_subdiv", q.max_subdiv},
        {"eps_det", q.eps_det},
        {"degenerate_shift", q.degenerate_shift},
        {"degenerate_eps", q.degenerate_shift_L}}},
      {"output", {{"format", c.output.format}, {"path", c.output.path}}},
  };
  if (c.scan) {
    j["scan"] = {{"x", config_detail::axis_to_json(c.scan->x)},
                 {"y", config_detail::axis_to_json(c.scan->y)},
                 {"threads", c.scan->threads}};
  }
  return j;
}

}  // namespace lgq
