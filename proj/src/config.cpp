#include "slm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace slm {

const std::map<std::string, std::string>& bundled_config_table();

namespace {

using nlohmann::json;

constexpr const char* kBuiltinPrefix = "builtin:";

// Line of the first occurrence of "key" in the source, 0 when absent.
std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  if (pos == std::string::npos) return 0;
  std::size_t line = 1;
  for (std::size_t i = 0; i < pos; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

class Reader {
 public:
  Reader(const std::string& text, std::string origin) : text_(text), origin_(std::move(origin)) {}

  json parse() const {
    try {
      return json::parse(text_);
    } catch (const json::parse_error& e) {
      std::size_t line = 1, col = 1;
      for (std::size_t i = 0; i < e.byte && i < text_.size(); ++i) {
        if (text_[i] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
      }
      throw ConfigError(origin_ + ":" + std::to_string(line) + ":" + std::to_string(col) +
                        ": invalid JSON: " + e.what());
    }
  }

  [[noreturn]] void fail(const std::string& top_key, const std::string& field,
                         const std::string& message) const {
    std::string where = origin_;
    if (const std::size_t line = line_of_key(text_, top_key); line > 0)
      where += ":" + std::to_string(line);
    throw ConfigError(where + ": field '" + field + "': " + message);
  }

  void require_object(const json& j, const std::string& top, const std::string& field) const {
    if (!j.is_object()) fail(top, field, "expected an object");
  }

  void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& top,
                      const std::string& prefix) const {
    for (const auto& [key, value] : j.items())
      if (!allowed.count(key))
        fail(top.empty() ? key : top, prefix + key, "unknown field");
  }

  const json& required(const json& j, const std::string& key, const std::string& top,
                       const std::string& field) const {
    if (!j.contains(key)) fail(top, field, "required field is missing");
    return j.at(key);
  }

  std::string string(const json& j, const std::string& top, const std::string& field) const {
    if (!j.is_string()) fail(top, field, "expected a string");
    return j.get<std::string>();
  }

  double number(const json& j, const std::string& top, const std::string& field) const {
    if (!j.is_number()) fail(top, field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(top, field, "must be finite");
    return v;
  }

  ConstantMap constants(const json& j, const std::string& top) const {
    require_object(j, top, top);
    ConstantMap out;
    for (const auto& [key, value] : j.items()) out[key] = number(value, top, top + "." + key);
    return out;
  }

  // Parses once to report syntax errors against the field.
  void check_expression(const std::string& source, std::size_t dimension,
                        const ConstantMap& constants, const std::string& top,
                        const std::string& field) const {
    try {
      (void)Expression::parse(source, dimension, constants);
    } catch (const ParseError& e) {
      fail(top, field, "expression \"" + source + "\": " + e.what());
    }
  }

 private:
  const std::string& text_;
  std::string origin_;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Returns (text, origin) for a file path or a builtin reference.
std::pair<std::string, std::string> resolve(const std::string& ref, const std::string& kind) {
  if (ref.rfind(kBuiltinPrefix, 0) == 0) {
    const std::string name = ref.substr(std::string(kBuiltinPrefix).size());
    const auto& table = bundled_configs();
    const auto it = table.find(kind + "/" + name + ".json");
    if (it == table.end()) throw ConfigError(ref + ": no bundled " + kind + " config of that name");
    return {it->second, ref};
  }
  return {read_file(ref), ref};
}

}  // namespace

const std::map<std::string, std::string>& bundled_configs() { return bundled_config_table(); }

SystemConfig parse_system_config(const std::string& text, const std::string& origin) {
  const Reader r(text, origin);
  const json root = r.parse();
  if (!root.is_object()) throw ConfigError(origin + ":1:1: top level must be an object");
  r.reject_unknown(root,
                   {"name", "description", "note", "d", "component_names", "constants",
                    "sigma_diag", "sigma_bar", "b", "correlation", "initial_state", "T",
                    "v_absorbing", "claimed_outcome"},
                   "", "");

  SystemConfig cfg;
  SystemSpec& s = cfg.spec;
  s.name = r.string(r.required(root, "name", "name", "name"), "name", "name");
  if (root.contains("description"))
    cfg.description = r.string(root["description"], "description", "description");
  if (root.contains("note")) cfg.note = r.string(root["note"], "note", "note");

  const json& jd = r.required(root, "d", "d", "d");
  if (!jd.is_number_integer() || jd.get<long long>() < 1)
    r.fail("d", "d", "expected a positive integer");
  s.d = static_cast<std::size_t>(jd.get<long long>());
  const std::size_t n = s.d + 1;

  if (root.contains("constants")) s.constants = r.constants(root["constants"], "constants");

  const json& jsig = r.required(root, "sigma_diag", "sigma_diag", "sigma_diag");
  if (!jsig.is_array() || jsig.size() != s.d)
    r.fail("sigma_diag", "sigma_diag", "expected an array of d = " + std::to_string(s.d) +
                                           " expression strings");
  for (std::size_t i = 0; i < s.d; ++i) {
    const std::string field = "sigma_diag[" + std::to_string(i) + "]";
    s.sigma_diag.push_back(r.string(jsig[i], "sigma_diag", field));
    r.check_expression(s.sigma_diag.back(), n, s.constants, "sigma_diag", field);
  }
  s.sigma_bar = r.string(r.required(root, "sigma_bar", "sigma_bar", "sigma_bar"), "sigma_bar",
                         "sigma_bar");
  r.check_expression(s.sigma_bar, n, s.constants, "sigma_bar", "sigma_bar");
  s.b = r.string(r.required(root, "b", "b", "b"), "b", "b");
  r.check_expression(s.b, n, s.constants, "b", "b");

  if (root.contains("correlation")) {
    const json& jc = root["correlation"];
    if (!jc.is_array() || jc.size() != n)
      r.fail("correlation", "correlation",
             "expected a " + std::to_string(n) + "x" + std::to_string(n) + " array");
    for (std::size_t i = 0; i < n; ++i) {
      const std::string row = "correlation[" + std::to_string(i) + "]";
      if (!jc[i].is_array() || jc[i].size() != n)
        r.fail("correlation", row, "expected " + std::to_string(n) + " numbers");
      for (std::size_t k = 0; k < n; ++k)
        s.correlation.push_back(
            r.number(jc[i][k], "correlation", row + "[" + std::to_string(k) + "]"));
    }
  }

  if (root.contains("initial_state")) {
    const json& jx = root["initial_state"];
    if (!jx.is_array() || jx.size() != n)
      r.fail("initial_state", "initial_state",
             "expected " + std::to_string(n) + " numbers (M^1..M^d, v)");
    for (std::size_t i = 0; i < n; ++i) {
      const std::string field = "initial_state[" + std::to_string(i) + "]";
      const double v = r.number(jx[i], "initial_state", field);
      if (i < s.d && v <= 0.0) r.fail("initial_state", field, "M components must start positive");
      s.initial_state.push_back(v);
    }
  }

  if (root.contains("T")) {
    s.horizon = r.number(root["T"], "T", "T");
    if (s.horizon <= 0.0) r.fail("T", "T", "horizon must be positive");
  }
  if (root.contains("v_absorbing")) {
    if (!root["v_absorbing"].is_boolean()) r.fail("v_absorbing", "v_absorbing", "expected a boolean");
    s.v_absorbing = root["v_absorbing"].get<bool>();
  }

  if (root.contains("component_names")) {
    const json& jn = root["component_names"];
    if (!jn.is_array() || jn.size() != s.d)
      r.fail("component_names", "component_names", "expected d strings");
    for (std::size_t i = 0; i < s.d; ++i)
      cfg.component_names.push_back(
          r.string(jn[i], "component_names", "component_names[" + std::to_string(i) + "]"));
  } else {
    for (std::size_t i = 1; i <= s.d; ++i) cfg.component_names.push_back("M" + std::to_string(i));
  }

  if (root.contains("claimed_outcome")) {
    const json& jo = root["claimed_outcome"];
    if (!jo.is_array() || jo.size() != s.d)
      r.fail("claimed_outcome", "claimed_outcome", "expected d labels");
    for (std::size_t i = 0; i < s.d; ++i) {
      const std::string field = "claimed_outcome[" + std::to_string(i) + "]";
      std::string label = r.string(jo[i], "claimed_outcome", field);
      if (label != "Martingale" && label != "StrictLocalMartingale")
        r.fail("claimed_outcome", field, "expected \"Martingale\" or \"StrictLocalMartingale\"");
      cfg.claimed_outcome.push_back(std::move(label));
    }
  }

  try {
    (void)SdeSystem::from_spec(s);
  } catch (const ModelError& e) {
    const std::string what = e.what();
    const std::string top = what.find("orrelation") != std::string::npos ? "correlation" : "d";
    r.fail(top, top, what);
  }
  return cfg;
}

std::vector<ComponentCriterion> CriteriaConfig::build(const ConstantMap& system_constants) const {
  ConstantMap merged = system_constants;
  for (const auto& [k, v] : constants) merged[k] = v;
  std::vector<ComponentCriterion> out;
  for (const auto& c : components)
    out.push_back({TestFunctionPair::parse(c.A, c.B, c.r, merged), c.side});
  return out;
}

CriteriaConfig parse_criteria_config(const std::string& text, const std::string& origin,
                                     const SystemConfig& system) {
  const Reader r(text, origin);
  const json root = r.parse();
  if (!root.is_object()) throw ConfigError(origin + ":1:1: top level must be an object");
  r.reject_unknown(root, {"constants", "components", "lyapunov"}, "", "");

  CriteriaConfig cfg;
  if (root.contains("constants")) cfg.constants = r.constants(root["constants"], "constants");
  ConstantMap merged = system.spec.constants;
  for (const auto& [k, v] : cfg.constants) merged[k] = v;

  const std::size_t d = system.spec.d;
  const json jc = root.contains("components") ? root["components"] : json::array();
  if (root.contains("components") && (!jc.is_array() || jc.size() != d))
    r.fail("components", "components", "expected one entry per component (d = " +
                                           std::to_string(d) + ")");
  for (std::size_t i = 0; i < jc.size(); ++i) {
    const std::string base = "components[" + std::to_string(i) + "]";
    const json& e = jc[i];
    r.require_object(e, "components", base);
    r.reject_unknown(e, {"A", "B", "r", "side"}, "components", base + ".");
    CriteriaConfig::Component c;
    c.A = r.string(r.required(e, "A", "components", base + ".A"), "components", base + ".A");
    c.B = r.string(r.required(e, "B", "components", base + ".B"), "components", base + ".B");
    if (e.contains("r")) {
      c.r = r.number(e["r"], "components", base + ".r");
      if (c.r <= 0.5) r.fail("components", base + ".r", "r must exceed 1/2");
    }
    const std::string side =
        r.string(r.required(e, "side", "components", base + ".side"), "components", base + ".side");
    if (side == "nonexplosion")
      c.side = BoundSide::UpperA_LowerTrace;
    else if (side == "explosion")
      c.side = BoundSide::LowerA_UpperTrace;
    else
      r.fail("components", base + ".side", "expected \"nonexplosion\" or \"explosion\"");
    try {
      (void)TestFunctionPair::parse(c.A, c.B, c.r, merged);
    } catch (const ParseError& err) {
      r.fail("components", base, std::string("A/B expression: ") + err.what());
    }
    cfg.components.push_back(std::move(c));
  }

  if (root.contains("lyapunov")) {
    const json& jl = root["lyapunov"];
    if (!jl.is_array()) r.fail("lyapunov", "lyapunov", "expected an array");
    for (std::size_t i = 0; i < jl.size(); ++i) {
      const std::string base = "lyapunov[" + std::to_string(i) + "]";
      const json& e = jl[i];
      r.require_object(e, "lyapunov", base);
      r.reject_unknown(e, {"V", "lambda", "kind", "measure"}, "lyapunov", base + ".");
      LyapunovCriterion l;
      l.V = r.string(r.required(e, "V", "lyapunov", base + ".V"), "lyapunov", base + ".V");
      r.check_expression(l.V, d + 1, merged, "lyapunov", base + ".V");
      l.lambda = r.number(r.required(e, "lambda", "lyapunov", base + ".lambda"), "lyapunov",
                          base + ".lambda");
      if (l.lambda <= 0.0) r.fail("lyapunov", base + ".lambda", "must be positive");
      const std::string kind = r.string(r.required(e, "kind", "lyapunov", base + ".kind"),
                                        "lyapunov", base + ".kind");
      if (kind != "nonexplosion" && kind != "explosion")
        r.fail("lyapunov", base + ".kind", "expected \"nonexplosion\" or \"explosion\"");
      l.explosion = kind == "explosion";
      if (e.contains("measure")) {
        try {
          l.measure = MeasureTag::parse(r.string(e["measure"], "lyapunov", base + ".measure"));
        } catch (const std::invalid_argument& err) {
          r.fail("lyapunov", base + ".measure", err.what());
        }
        if (l.measure.component() > d)
          r.fail("lyapunov", base + ".measure", "component exceeds d");
      }
      cfg.lyapunov.push_back(std::move(l));
    }
  }
  return cfg;
}

SystemConfig load_system_config(const std::string& ref) {
  const auto [text, origin] = resolve(ref, "systems");
  return parse_system_config(text, origin);
}

CriteriaConfig load_criteria_config(const std::string& ref, const SystemConfig& system) {
  const auto [text, origin] = resolve(ref, "criteria");
  return parse_criteria_config(text, origin, system);
}

std::optional<std::string> bundled_criteria_ref(const std::string& system_ref) {
  if (system_ref.rfind(kBuiltinPrefix, 0) != 0) return std::nullopt;
  const std::string name = system_ref.substr(std::string(kBuiltinPrefix).size());
  if (!bundled_configs().count("criteria/" + name + ".json")) return std::nullopt;
  return system_ref;
}

SdeSystem build_system(const SystemConfig& config) { return SdeSystem::from_spec(config.spec); }

}  // namespace slm
