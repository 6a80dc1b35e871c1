#include "laycon/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace laycon::config {

using nlohmann::ordered_json;

namespace {

const char* kPresetA = R"({
  "base": "a",
  "plant": {
    "C_bus": 1.0, "lambda_S": 0.0025, "lambda_B_energy": 0.0025, "lambda_B_gain": 20.0,
    "k1": 25.0, "k2": 11.0, "V_nom": 400.0, "V_min": 380.0, "V_max": 420.0,
    "I_S_max": 12.0, "I_B_max": 1.5, "U_S_max": 80.0, "U_B_max": 30.0, "rho_d": 6.0,
    "d_bar_max": 0.0, "d_bar_dot_max": 0.0, "kappa_bar": 0.0
  },
  "lyapunov": {"R": [[50.0, 0.0], [0.0, 1.0]]},
  "iss": {
    "m": 2.94, "settling_mode": "relative", "V_bar_h_override": null, "r_low": 1.0,
    "feedforward_residual": 0.0, "r_bar_V": 0.0
  },
  "erg": {
    "enabled": false, "kappa": 10.0, "eta": 1.0, "eta_rep": [],
    "constraint_set": "full", "reference_grid": [400.0]
  },
  "planner": {
    "enabled": false, "horizon": 20, "q_weight": 1.0, "E_B_goal": 5.0,
    "E_B_range": [-10.0, 20.0], "E_S_range": [-100.0, 100.0], "tighten_eps_E": 0.05,
    "slew_bound": null, "lambda_min_P": 1.0, "lambda_max_P": 1.0, "L_V": null,
    "lipschitz_samples": 200, "lipschitz_radius": 2.0, "lipschitz_seed": 0
  },
  "contract": {"eps_H": 1.0, "delta": 0.1},
  "load": {
    "segments": [{"kind": "constant", "t_start": 0.0, "t_end": 1000.0, "level": 0.0}]
  },
  "sim": {
    "h": 0.001, "T_end": 4.0, "T_s": 0.1, "seed": 0, "disturbance": "mixed", "W_max": 3.0,
    "r_V": 400.0, "r_IB": 0.0, "v0": 400.0,
    "x0": {"V_gr": 403.0, "I_S": 0.0, "I_B": 0.0, "E_S": 0.0, "E_B": 0.0}
  }
})";

const char* kPresetB = R"({
  "base": "b",
  "plant": {
    "C_bus": 1.0, "lambda_S": 0.0025, "lambda_B_energy": 0.0025, "lambda_B_gain": 20.0,
    "k1": 35.0, "k2": 12.0, "V_nom": 400.0, "V_min": 380.0, "V_max": 420.0,
    "I_S_max": 12.0, "I_B_max": 1.5, "U_S_max": 50.0, "U_B_max": 30.0, "rho_d": 6.0,
    "d_bar_max": 0.0, "d_bar_dot_max": 0.0, "kappa_bar": 0.0
  },
  "lyapunov": {"R": [[100.0, 0.0], [0.0, 10.0]]},
  "iss": {
    "m": 2.94, "settling_mode": "relative", "V_bar_h_override": 0.5, "r_low": 1.0,
    "feedforward_residual": 0.0, "r_bar_V": 0.0
  },
  "erg": {
    "enabled": true, "kappa": 10.0, "eta": 1.0, "eta_rep": [],
    "constraint_set": "scenario_b_input_only", "reference_grid": [400.0]
  },
  "planner": {
    "enabled": true, "horizon": 20, "q_weight": 1.0, "E_B_goal": 5.0,
    "E_B_range": [-10.0, 20.0], "E_S_range": [-100.0, 100.0], "tighten_eps_E": 0.05,
    "slew_bound": null, "lambda_min_P": 1.0, "lambda_max_P": 1.0, "L_V": null,
    "lipschitz_samples": 200, "lipschitz_radius": 2.0, "lipschitz_seed": 0
  },
  "contract": {"eps_H": 1.0, "delta": 0.1},
  "load": {
    "segments": [
      {"kind": "constant", "t_start": 0.0, "t_end": 0.5, "level": 0.0},
      {"kind": "cubic_ramp", "t_start": 0.5, "t_end": 0.8, "from": 0.0, "to": -5.0,
       "osc_amplitude": 0.5, "osc_frequency": 2.0},
      {"kind": "constant", "t_start": 0.8, "t_end": 1000.0, "level": -5.0}
    ]
  },
  "sim": {
    "h": 0.001, "T_end": 6.0, "T_s": 0.1, "seed": 0, "disturbance": "mixed", "W_max": 3.0,
    "r_V": 400.0, "r_IB": 0.0, "v0": 400.0,
    "x0": {"V_gr": 400.0, "I_S": 0.0, "I_B": 0.0, "E_S": 0.0, "E_B": 0.0}
  }
})";

std::string escape_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

struct Position {
  int line = 1;
  int column = 1;
};

// Maps JSON pointers to where their value (or key) starts in the text. Runs
// on text the parser already accepted, so it only tracks structure.
class Locator {
 public:
  Locator(std::string_view text, const std::string& origin) : origin_(origin) { scan(text); }

  std::string where(const std::string& pointer) const {
    std::string p = pointer;
    while (true) {
      const auto it = pos_.find(p);
      if (it != pos_.end()) {
        return origin_ + ":" + std::to_string(it->second.line) + ":" +
               std::to_string(it->second.column) + ": " + (pointer.empty() ? "/" : pointer);
      }
      if (p.empty()) break;
      p = p.substr(0, p.rfind('/'));
    }
    return origin_ + ": " + (pointer.empty() ? "/" : pointer);
  }

  const std::string& duplicate() const { return duplicate_; }

 private:
  struct Frame {
    bool object = false;
    std::string path;
    int index = 0;
    std::string key;
    bool expect_key = false;
  };

  void record(const std::string& path, Position at, bool is_key) {
    if (is_key && pos_.count(path) != 0 && duplicate_.empty()) duplicate_ = path;
    pos_[path] = at;
  }

  void scan(std::string_view s) {
    std::vector<Frame> frames;
    Position at;
    std::size_t i = 0;
    auto advance = [&] {
      if (s[i] == '\n') {
        ++at.line;
        at.column = 1;
      } else {
        ++at.column;
      }
      ++i;
    };
    auto read_string = [&] {
      std::string out;
      advance();  // opening quote
      while (i < s.size() && s[i] != '"') {
        if (s[i] == '\\') {
          advance();
          if (i < s.size()) out += s[i];
          advance();
          continue;
        }
        out += s[i];
        advance();
      }
      if (i < s.size()) advance();
      return out;
    };
    while (i < s.size()) {
      const char c = s[i];
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ':') {
        advance();
        continue;
      }
      if (!frames.empty() && frames.back().object && frames.back().expect_key && c == '"') {
        const Position key_at = at;
        Frame& f = frames.back();
        f.key = read_string();
        f.expect_key = false;
        record(f.path + "/" + escape_token(f.key), key_at, true);
        continue;
      }
      if (c == ',') {
        if (!frames.empty()) {
          if (frames.back().object) {
            frames.back().expect_key = true;
          } else {
            ++frames.back().index;
          }
        }
        advance();
        continue;
      }
      if (c == '}' || c == ']') {
        if (!frames.empty()) frames.pop_back();
        advance();
        continue;
      }
      // A value starts here.
      std::string path;
      if (!frames.empty()) {
        const Frame& f = frames.back();
        if (f.object) {
          path = f.path + "/" + escape_token(f.key);
        } else {
          path = f.path + "/" + std::to_string(f.index);
          record(path, at, false);
        }
      }
      if (c == '{' || c == '[') {
        frames.push_back({c == '{', path, 0, {}, c == '{'});
        advance();
      } else if (c == '"') {
        read_string();
      } else {
        while (i < s.size() && std::string_view(",]} \t\r\n").find(s[i]) == std::string_view::npos) {
          advance();
        }
      }
    }
  }

  std::string origin_;
  std::map<std::string, Position> pos_;
  std::string duplicate_;
};

const char* type_name(const ordered_json& j) {
  if (j.is_null()) return "null";
  if (j.is_boolean()) return "boolean";
  if (j.is_number_integer()) return "integer";
  if (j.is_number()) return "number";
  if (j.is_string()) return "string";
  if (j.is_array()) return "array";
  return "object";
}

// Checks the user document against the preset's shape.
void check_shape(const ordered_json& user, const ordered_json& schema, const std::string& path,
                 const Locator& loc) {
  auto fail = [&](const std::string& what) { throw ConfigError(loc.where(path), what); };
  if (schema.is_object()) {
    if (!user.is_object()) fail(std::string("expected an object, found ") + type_name(user));
    for (const auto& [key, value] : user.items()) {
      const std::string child = path + "/" + escape_token(key);
      if (!schema.contains(key)) throw ConfigError(loc.where(child), "unknown key '" + key + "'");
      check_shape(value, schema.at(key), child, loc);
    }
  } else if (schema.is_null()) {
    if (!user.is_null() && !user.is_number()) fail("expected a number or null");
  } else if (schema.is_boolean()) {
    if (!user.is_boolean()) fail(std::string("expected a boolean, found ") + type_name(user));
  } else if (schema.is_number_integer()) {
    if (!user.is_number_integer()) {
      fail(std::string("expected an integer, found ") + type_name(user));
    }
  } else if (schema.is_number()) {
    if (!user.is_number()) fail(std::string("expected a number, found ") + type_name(user));
  } else if (schema.is_string()) {
    if (!user.is_string()) fail(std::string("expected a string, found ") + type_name(user));
  } else if (schema.is_array()) {
    if (!user.is_array()) fail(std::string("expected an array, found ") + type_name(user));
  }
}

void overlay(ordered_json& target, const ordered_json& patch) {
  if (patch.is_object() && target.is_object()) {
    for (const auto& [key, value] : patch.items()) overlay(target[key], value);
  } else {
    target = patch;
  }
}

// Typed accessors that report failures at the value's location.
class Reader {
 public:
  Reader(const ordered_json& doc, const Locator& loc) : doc_(doc), loc_(loc) {}

  [[noreturn]] void fail(const std::string& pointer, const std::string& what) const {
    throw ConfigError(loc_.where(pointer), what);
  }

  const ordered_json& at(const std::string& pointer) const {
    return doc_.at(ordered_json::json_pointer(pointer));
  }

  double number(const std::string& pointer) const {
    const auto& v = at(pointer);
    if (!v.is_number()) fail(pointer, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(pointer, "value is not finite");
    return d;
  }

  double positive(const std::string& pointer) const {
    const double d = number(pointer);
    if (!(d > 0)) fail(pointer, "must be positive");
    return d;
  }

  double nonnegative(const std::string& pointer) const {
    const double d = number(pointer);
    if (d < 0) fail(pointer, "must be nonnegative");
    return d;
  }

  std::optional<double> optional_number(const std::string& pointer) const {
    if (at(pointer).is_null()) return std::nullopt;
    return number(pointer);
  }

  std::int64_t integer(const std::string& pointer) const {
    const auto& v = at(pointer);
    if (!v.is_number_integer()) fail(pointer, "expected an integer");
    return v.get<std::int64_t>();
  }

  bool boolean(const std::string& pointer) const { return at(pointer).get<bool>(); }

  std::string string(const std::string& pointer) const { return at(pointer).get<std::string>(); }

  std::vector<double> numbers(const std::string& pointer) const {
    const auto& v = at(pointer);
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(pointer + "/" + std::to_string(i)));
    return out;
  }

  mpc::Interval interval(const std::string& pointer) const {
    const auto v = numbers(pointer);
    if (v.size() != 2) fail(pointer, "expected [lo, hi]");
    if (!(v[0] <= v[1])) fail(pointer, "lo must not exceed hi");
    return {v[0], v[1]};
  }

 private:
  const ordered_json& doc_;
  const Locator& loc_;
};

hess::LoadSegment read_segment(const Reader& rd, const ordered_json& seg, const std::string& p) {
  if (!seg.is_object()) rd.fail(p, "expected a segment object");
  hess::LoadSegment s;
  const std::string kind = seg.contains("kind") && seg["kind"].is_string()
                               ? seg["kind"].get<std::string>()
                               : std::string();
  if (kind != "constant" && kind != "cubic_ramp") {
    rd.fail(p + "/kind", "kind must be \"constant\" or \"cubic_ramp\"");
  }
  const bool ramp = kind == "cubic_ramp";
  const std::vector<std::string> allowed =
      ramp ? std::vector<std::string>{"kind", "t_start", "t_end", "from", "to", "osc_amplitude",
                                      "osc_frequency"}
           : std::vector<std::string>{"kind", "t_start", "t_end", "level", "osc_amplitude",
                                      "osc_frequency"};
  for (const auto& [key, value] : seg.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      rd.fail(p + "/" + escape_token(key), "unknown key '" + key + "' for a " + kind + " segment");
    }
  }
  auto need = [&](const std::string& key) {
    if (!seg.contains(key)) rd.fail(p, "segment is missing '" + key + "'");
    return rd.number(p + "/" + key);
  };
  s.kind = ramp ? hess::LoadSegment::Kind::kCubicRamp : hess::LoadSegment::Kind::kConstant;
  s.t_start = need("t_start");
  s.t_end = need("t_end");
  if (ramp) {
    s.from = need("from");
    s.to = need("to");
  } else {
    s.from = need("level");
  }
  if (seg.contains("osc_amplitude")) s.osc_amplitude = rd.number(p + "/osc_amplitude");
  if (seg.contains("osc_frequency")) s.osc_frequency = rd.nonnegative(p + "/osc_frequency");
  return s;
}

RunConfig convert(const ordered_json& doc, const Locator& loc) {
  const Reader rd(doc, loc);
  RunConfig rc;
  rc.base = rd.string("/base");
  auto& lc = rc.layered;

  auto& pl = lc.plant;
  pl.c_bus = rd.positive("/plant/C_bus");
  pl.lambda_s = rd.positive("/plant/lambda_S");
  pl.lambda_b_energy = rd.positive("/plant/lambda_B_energy");
  pl.lambda_b_gain = rd.positive("/plant/lambda_B_gain");
  pl.k1 = rd.positive("/plant/k1");
  pl.k2 = rd.positive("/plant/k2");
  pl.v_nom = rd.positive("/plant/V_nom");
  pl.v_min = rd.number("/plant/V_min");
  pl.v_max = rd.number("/plant/V_max");
  if (!(pl.v_min < pl.v_max)) rd.fail("/plant/V_max", "V_max must exceed V_min");
  pl.i_s_max = rd.positive("/plant/I_S_max");
  pl.i_b_max = rd.positive("/plant/I_B_max");
  pl.u_s_max = rd.positive("/plant/U_S_max");
  pl.u_b_max = rd.positive("/plant/U_B_max");
  pl.rho_d = rd.nonnegative("/plant/rho_d");
  pl.d_bar_max = rd.nonnegative("/plant/d_bar_max");
  pl.d_bar_dot_max = rd.nonnegative("/plant/d_bar_dot_max");
  pl.kappa_bar = rd.nonnegative("/plant/kappa_bar");
  try {
    pl.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    rd.fail("/plant", e.what());
  }

  const auto& r = rd.at("/lyapunov/R");
  if (r.size() != 2 || !r[0].is_array() || !r[1].is_array() || r[0].size() != 2 ||
      r[1].size() != 2) {
    rd.fail("/lyapunov/R", "expected a 2x2 array");
  }
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      lc.lyap_r(i, j) = rd.number("/lyapunov/R/" + std::to_string(i) + "/" + std::to_string(j));
    }
  }
  try {
    numkit::SpdMatrix check(lc.lyap_r);
  } catch (const Error& e) {
    rd.fail("/lyapunov/R", e.what());
  }

  auto& is = rc.iss;
  is.m = rd.number("/iss/m");
  if (is.m < 1.0) rd.fail("/iss/m", "overshoot m must be at least 1");
  const std::string mode = rd.string("/iss/settling_mode");
  if (mode == "relative") {
    is.settling_mode = iss::SettlingMode::kRelative;
  } else if (mode == "absolute") {
    is.settling_mode = iss::SettlingMode::kAbsolute;
  } else {
    rd.fail("/iss/settling_mode", "expected \"relative\" or \"absolute\"");
  }
  is.v_bar_h_override = rd.optional_number("/iss/V_bar_h_override");
  if (is.v_bar_h_override && *is.v_bar_h_override < 0) {
    rd.fail("/iss/V_bar_h_override", "must be nonnegative");
  }
  is.r_low = rd.positive("/iss/r_low");
  is.feedforward_residual = rd.nonnegative("/iss/feedforward_residual");
  is.r_bar_v = rd.nonnegative("/iss/r_bar_V");

  lc.sim.erg_enabled = rd.boolean("/erg/enabled");
  lc.erg.kappa_erg = rd.positive("/erg/kappa");
  lc.erg.eta = rd.positive("/erg/eta");
  lc.erg.eta_rep = rd.numbers("/erg/eta_rep");
  try {
    lc.constraint_set = hess::erg_mode_from_string(rd.string("/erg/constraint_set"));
  } catch (const Error& e) {
    rd.fail("/erg/constraint_set", e.what());
  }
  try {
    lc.erg.validate();
  } catch (const Error& e) {
    rd.fail("/erg/eta_rep", e.what());
  }
  const std::size_t rows = hess::hess_constraints(pl, lc.constraint_set).size();
  if (lc.erg.eta_rep.size() > rows) {
    rd.fail("/erg/eta_rep", "more repulsion strengths than constraint rows (" +
                                std::to_string(rows) + ")");
  }
  rc.reference_grid = rd.numbers("/erg/reference_grid");
  if (rc.reference_grid.empty()) rd.fail("/erg/reference_grid", "must not be empty");

  auto& sc = lc.sim;
  sc.h = rd.positive("/sim/h");
  sc.t_end = rd.positive("/sim/T_end");
  sc.t_s = rd.positive("/sim/T_s");
  if (sc.t_s < sc.h) rd.fail("/sim/T_s", "T_s must be at least h");
  const double periods = sc.t_s / sc.h;
  if (std::abs(periods - std::round(periods)) > 1e-9 * periods) {
    rd.fail("/sim/T_s", "T_s must be a whole multiple of h");
  }
  const auto seed = rd.integer("/sim/seed");
  if (seed < 0) rd.fail("/sim/seed", "seed must be nonnegative");
  sc.seed = static_cast<std::uint64_t>(seed);
  try {
    sc.disturbance = sim::disturbance_mode_from_string(rd.string("/sim/disturbance"));
  } catch (const Error& e) {
    rd.fail("/sim/disturbance", e.what());
  }
  sc.w_max = rd.nonnegative("/sim/W_max");
  sc.r_v = rd.number("/sim/r_V");
  sc.r_i_b = rd.number("/sim/r_IB");
  sc.v0 = rd.number("/sim/v0");
  sc.x0(hess::kVgr) = rd.number("/sim/x0/V_gr");
  sc.x0(hess::kIs) = rd.number("/sim/x0/I_S");
  sc.x0(hess::kIb) = rd.number("/sim/x0/I_B");
  sc.x0(hess::kEs) = rd.number("/sim/x0/E_S");
  sc.x0(hess::kEb) = rd.number("/sim/x0/E_B");

  sc.mpc_enabled = rd.boolean("/planner/enabled");
  auto& pc = lc.planner;
  const auto horizon = rd.integer("/planner/horizon");
  if (horizon < 1 || horizon > 200) rd.fail("/planner/horizon", "horizon must be in 1..200");
  pc.horizon = static_cast<int>(horizon);
  pc.t_s = sc.t_s;
  pc.q_weight = rd.nonnegative("/planner/q_weight");
  pc.e_b_goal = rd.number("/planner/E_B_goal");
  pc.v_nom = pl.v_nom;
  pc.lambda_b = pl.lambda_b_energy;
  pc.lambda_s = pl.lambda_s;
  pc.i_b_max = pl.i_b_max;
  pc.i_s_max = pl.i_s_max;
  pc.e_b_range = rd.interval("/planner/E_B_range");
  pc.e_s_range = rd.interval("/planner/E_S_range");
  pc.tighten_eps_e = rd.nonnegative("/planner/tighten_eps_E");
  const hess::BatteryBounds bb = hess::battery_interface_bounds(pl, sc.t_s);
  const auto slew = rd.optional_number("/planner/slew_bound");
  if (slew && *slew < 0) rd.fail("/planner/slew_bound", "must be nonnegative");
  pc.slew_bound = slew.value_or(bb.r_bar_b);
  pc.r_bar = Eigen::Vector2d(is.r_bar_v, pc.slew_bound);

  lc.planner_iss.lambda_min_p = rd.positive("/planner/lambda_min_P");
  lc.planner_iss.lambda_max_p = rd.positive("/planner/lambda_max_P");
  if (lc.planner_iss.lambda_max_p < lc.planner_iss.lambda_min_p) {
    rd.fail("/planner/lambda_max_P", "must not be below lambda_min_P");
  }
  lc.planner_iss.lambda_min_q = pc.q_weight;
  auto& lip = rc.lipschitz;
  lip.l_v = rd.optional_number("/planner/L_V");
  if (lip.l_v && *lip.l_v < 0) rd.fail("/planner/L_V", "must be nonnegative");
  const auto samples = rd.integer("/planner/lipschitz_samples");
  if (samples < 2) rd.fail("/planner/lipschitz_samples", "need at least 2 samples");
  lip.samples = static_cast<int>(samples);
  lip.radius = rd.positive("/planner/lipschitz_radius");
  const auto lseed = rd.integer("/planner/lipschitz_seed");
  if (lseed < 0) rd.fail("/planner/lipschitz_seed", "seed must be nonnegative");
  lip.seed = static_cast<std::uint64_t>(lseed);

  auto& spec = lc.spec;
  spec.eps_h = rd.nonnegative("/contract/eps_H");
  spec.delta = rd.positive("/contract/delta");
  spec.r_bar = pc.r_bar;
  spec.w_max = sc.w_max;
  spec.t_s = sc.t_s;
  spec.x_safe.lo = Eigen::Vector3d(pl.v_min, -pl.i_s_max, -pl.i_b_max);
  spec.x_safe.hi = Eigen::Vector3d(pl.v_max, pl.i_s_max, pl.i_b_max);
  spec.u_bounds = Eigen::Vector2d(pl.u_s_max, pl.u_b_max);
  spec.y_goal = pc.e_b_goal;
  spec.eps_l = Eigen::Vector2d(0.0, bb.eps_l_ib);

  const auto& segs = rd.at("/load/segments");
  std::vector<hess::LoadSegment> parsed;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    parsed.push_back(read_segment(rd, segs[i], "/load/segments/" + std::to_string(i)));
  }
  try {
    lc.load = hess::LoadProfile(std::move(parsed));
  } catch (const Error& e) {
    rd.fail("/load/segments", e.what());
  }
  if (lc.load.t_begin() > 0.0 || lc.load.t_end() < sc.t_end) {
    rd.fail("/load/segments", "load profile must cover [0, T_end]");
  }
  return rc;
}

}  // namespace

ordered_json preset(const std::string& base) {
  if (base == "a") return ordered_json::parse(kPresetA);
  if (base == "b") return ordered_json::parse(kPresetB);
  throw ConfigError("scenario", "unknown scenario '" + base + "' (expected a or b)");
}

RunConfig parse_config(std::string_view text, const std::string& origin,
                       const std::string& scenario) {
  ordered_json user;
  try {
    user = ordered_json::parse(text.begin(), text.end(), nullptr, true, false);
  } catch (const ordered_json::parse_error& e) {
    // e.byte is 1-based and points past the offending character.
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string msg = e.what();
    const auto colon = msg.find(": ", msg.find("parse error"));
    if (colon != std::string::npos) msg = msg.substr(colon + 2);
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col), msg);
  }
  const Locator loc(text, origin);
  if (!loc.duplicate().empty()) {
    throw ConfigError(loc.where(loc.duplicate()), "duplicate key");
  }
  if (!user.is_object()) throw ConfigError(loc.where(""), "top level must be an object");

  std::string base = scenario;
  if (user.contains("base")) {
    if (!user["base"].is_string()) throw ConfigError(loc.where("/base"), "expected a string");
    const std::string declared = user["base"].get<std::string>();
    if (declared != "a" && declared != "b") {
      throw ConfigError(loc.where("/base"), "base must be \"a\" or \"b\"");
    }
    if (!base.empty() && declared != base) {
      throw ConfigError(loc.where("/base"),
                        "document declares base '" + declared + "' but scenario is '" + base + "'");
    }
    base = declared;
  }
  if (base.empty()) base = "b";

  ordered_json doc = preset(base);
  check_shape(user, doc, "", loc);
  overlay(doc, user);
  return convert(doc, loc);
}

RunConfig load_config(const std::string& path, const std::string& scenario) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path, scenario);
}

RunConfig scenario_config(const std::string& base) {
  const std::string text = preset(base).dump();
  return parse_config(text, "<preset " + base + ">", base);
}

}  // namespace laycon::config
