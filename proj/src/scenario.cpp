#include "kitepilot/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "kitepilot/errors.hpp"

namespace kitepilot {

namespace {

struct BadValue {
  std::string reason;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_real(std::string_view v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end || !std::isfinite(out))
    throw BadValue{"expected a finite number, got '" + std::string(v) + "'"};
  return out;
}

long long parse_integer(std::string_view v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || ptr != end) throw BadValue{"expected an integer, got '" + std::string(v) + "'"};
  return out;
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw BadValue{"expected true or false, got '" + std::string(v) + "'"};
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(Scenario&, std::string_view)> set;
  std::function<std::optional<std::string>(const Scenario&)> get;
};

template <class Ref>
Field real(std::string section, std::string key, Ref ref) {
  return {std::move(section), std::move(key), [ref](Scenario& s, std::string_view v) { ref(s) = parse_real(v); },
          [ref](const Scenario& s) -> std::optional<std::string> { return format_real(ref(s)); }};
}

template <class Ref>
Field optional_real(std::string section, std::string key, Ref ref) {
  return {std::move(section), std::move(key), [ref](Scenario& s, std::string_view v) { ref(s) = parse_real(v); },
          [ref](const Scenario& s) -> std::optional<std::string> {
            const auto& o = ref(s);
            if (!o) return std::nullopt;
            return format_real(*o);
          }};
}

template <class Ref>
Field integer(std::string section, std::string key, Ref ref) {
  return {std::move(section), std::move(key),
          [ref](Scenario& s, std::string_view v) {
            using T = std::remove_reference_t<decltype(ref(s))>;
            const long long x = parse_integer(v);
            if constexpr (std::is_unsigned_v<T>) {
              if (x < 0) throw BadValue{"expected a non-negative integer"};
            }
            ref(s) = static_cast<T>(x);
          },
          [ref](const Scenario& s) -> std::optional<std::string> { return std::to_string(ref(s)); }};
}

template <class Ref>
Field boolean(std::string section, std::string key, Ref ref) {
  return {std::move(section), std::move(key), [ref](Scenario& s, std::string_view v) { ref(s) = parse_bool(v); },
          [ref](const Scenario& s) -> std::optional<std::string> { return ref(s) ? "true" : "false"; }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"scenario", "name", [](Scenario& s, std::string_view v) { s.name = std::string(v); },
                 [](const Scenario& s) -> std::optional<std::string> { return s.name; }});
    f.push_back({"scenario", "mode", [](Scenario& s, std::string_view v) {
                   try {
                     s.mode = mode_from_string(v);
                   } catch (const ParseError& e) {
                     throw BadValue{e.what()};
                   }
                 },
                 [](const Scenario& s) -> std::optional<std::string> { return std::string(to_string(s.mode)); }});
    f.push_back(real("scenario", "duration", [](auto& s) -> auto& { return s.duration; }));
    f.push_back(integer("scenario", "seed", [](auto& s) -> auto& { return s.seed; }));
    f.push_back(real("scenario", "dt_inner", [](auto& s) -> auto& { return s.dt_inner; }));
    f.push_back({"scenario", "replay_log", [](Scenario& s, std::string_view v) { s.replay_log = std::string(v); },
                 [](const Scenario& s) -> std::optional<std::string> {
                   if (s.replay_log.empty()) return std::nullopt;
                   return s.replay_log;
                 }});

    f.push_back(real("aero", "E", [](auto& s) -> auto& { return s.aero.glide_ratio; }));
    f.push_back(real("aero", "g", [](auto& s) -> auto& { return s.aero.steer_gain; }));
    f.push_back(real("aero", "M", [](auto& s) -> auto& { return s.aero.mass_term; }));
    f.push_back(real("aero", "L", [](auto& s) -> auto& { return s.aero.line_length; }));

    f.push_back(real("actuator", "rate_limit", [](auto& s) -> auto& { return s.actuator.rate_limit; }));

    f.push_back(real("wind", "v0", [](auto& s) -> auto& { return s.wind.mean; }));
    f.push_back(real("wind", "gust_amplitude", [](auto& s) -> auto& { return s.wind.gust_amplitude; }));
    f.push_back(real("wind", "gust_period", [](auto& s) -> auto& { return s.wind.gust_period; }));
    f.push_back(real("wind", "turbulence", [](auto& s) -> auto& { return s.wind.turbulence; }));
    f.push_back(integer("wind", "seed", [](auto& s) -> auto& { return s.wind.seed; }));

    f.push_back(integer("sensor", "delay_steps", [](auto& s) -> auto& { return s.sensor.delay_steps; }));
    f.push_back(real("sensor", "sigma_psi", [](auto& s) -> auto& { return s.sensor.sigma_psi; }));
    f.push_back(real("sensor", "sigma_psi_dot", [](auto& s) -> auto& { return s.sensor.sigma_psi_dot; }));
    f.push_back(real("sensor", "sigma_va", [](auto& s) -> auto& { return s.sensor.sigma_va; }));
    f.push_back(real("sensor", "sigma_phi", [](auto& s) -> auto& { return s.sensor.sigma_phi; }));
    f.push_back(real("sensor", "sample_dt", [](auto& s) -> auto& { return s.sensor.sample_dt; }));
    f.push_back(boolean("sensor", "rate_correction", [](auto& s) -> auto& { return s.sensor.rate_correction; }));

    f.push_back(real("plant", "theta_min", [](auto& s) -> auto& { return s.plant.theta_min; }));
    f.push_back(real("plant", "va_min", [](auto& s) -> auto& { return s.plant.va_min; }));
    f.push_back(real("plant", "crash_elevation", [](auto& s) -> auto& { return s.plant.crash_elevation; }));
    f.push_back(boolean("plant", "rate_correction", [](auto& s) -> auto& { return s.plant.rate_correction; }));

    f.push_back(optional_real("controller", "g_hat", [](auto& s) -> auto& { return s.g_hat; }));
    f.push_back(optional_real("controller", "M_hat", [](auto& s) -> auto& { return s.M_hat; }));
    f.push_back(optional_real("controller", "rate_limit", [](auto& s) -> auto& { return s.controller_rate_limit; }));
    f.push_back(real("controller", "delta_ff_limit", [](auto& s) -> auto& { return s.controller.delta_ff_limit; }));
    f.push_back(
        real("controller", "delta_total_limit", [](auto& s) -> auto& { return s.controller.delta_total_limit; }));
    f.push_back(integer("controller", "delay_n", [](auto& s) -> auto& { return s.controller.delay_n; }));
    f.push_back(real("controller", "outer_P", [](auto& s) -> auto& { return s.controller.outer_P; }));
    f.push_back(
        real("controller", "outer_lowpass_tau", [](auto& s) -> auto& { return s.controller.outer_lowpass_tau; }));
    f.push_back(
        real("controller", "outer_rate_limit", [](auto& s) -> auto& { return s.controller.outer_rate_limit; }));
    f.push_back(real("controller", "inner_Kp", [](auto& s) -> auto& { return s.controller.inner_Kp; }));
    f.push_back(real("controller", "inner_Ki", [](auto& s) -> auto& { return s.controller.inner_Ki; }));
    f.push_back(
        real("controller", "inner_lowpass_tau", [](auto& s) -> auto& { return s.controller.inner_lowpass_tau; }));
    f.push_back(real("controller", "psi_c_limit", [](auto& s) -> auto& { return s.controller.psi_c_limit; }));
    f.push_back(real("controller", "va_min", [](auto& s) -> auto& { return s.controller.va_min; }));

    f.push_back(real("pattern", "phi_0", [](auto& s) -> auto& { return s.pattern.phi_0; }));
    f.push_back(real("pattern", "phi_a", [](auto& s) -> auto& { return s.pattern.phi_a; }));
    f.push_back(real("pattern", "psi_0", [](auto& s) -> auto& { return s.pattern.psi_0; }));
    f.push_back(integer("pattern", "initial_state", [](auto& s) -> auto& { return s.pattern_initial_state; }));

    f.push_back(real("bangbang", "delta_0", [](auto& s) -> auto& { return s.bangbang.delta_0; }));
    f.push_back(real("bangbang", "psi_threshold", [](auto& s) -> auto& { return s.bangbang.psi_threshold; }));

    f.push_back(real("neutral", "phi_set", [](auto& s) -> auto& { return s.neutral.phi_set; }));
    f.push_back(real("neutral", "kp", [](auto& s) -> auto& { return s.neutral.kp; }));
    f.push_back(real("neutral", "ki", [](auto& s) -> auto& { return s.neutral.ki; }));
    f.push_back(real("neutral", "kd", [](auto& s) -> auto& { return s.neutral.kd; }));
    f.push_back(real("neutral", "d_filter_tau", [](auto& s) -> auto& { return s.neutral.d_filter_tau; }));
    f.push_back(real("neutral", "psi_limit", [](auto& s) -> auto& { return s.neutral.psi_limit; }));

    f.push_back(real("step", "amplitude", [](auto& s) -> auto& { return s.step.amplitude; }));
    f.push_back(real("step", "start_time", [](auto& s) -> auto& { return s.step.start_time; }));
    f.push_back(real("step", "period", [](auto& s) -> auto& { return s.step.period; }));

    f.push_back(real("initial", "phi", [](auto& s) -> auto& { return s.initial.phi; }));
    f.push_back(optional_real("initial", "theta", [](auto& s) -> auto& { return s.initial.theta; }));
    f.push_back(real("initial", "psi", [](auto& s) -> auto& { return s.initial.psi; }));

    f.push_back(boolean("sysid", "enabled", [](auto& s) -> auto& { return s.sysid.enabled; }));
    f.push_back(real("sysid", "lambda", [](auto& s) -> auto& { return s.sysid.lambda; }));
    return f;
  }();
  return table;
}

const Field* find_field(std::string_view section, std::string_view key) {
  for (const auto& f : fields())
    if (f.section == section && f.key == key) return &f;
  return nullptr;
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Step: return "step";
    case Mode::BangBang: return "bangbang";
    case Mode::Pattern: return "pattern";
    case Mode::Neutral: return "neutral";
    case Mode::SysidReplay: return "sysid-replay";
  }
  return "step";
}

Mode mode_from_string(std::string_view text) {
  for (Mode m : {Mode::Step, Mode::BangBang, Mode::Pattern, Mode::Neutral, Mode::SysidReplay})
    if (to_string(m) == text) return m;
  throw ParseError("unknown mode '" + std::string(text) + "'", 0);
}

ControllerConfig Scenario::resolved_controller() const {
  ControllerConfig c = controller;
  c.g_hat = g_hat.value_or(aero.steer_gain);
  c.M_hat = M_hat.value_or(aero.mass_term);
  c.rate_limit = controller_rate_limit.value_or(actuator.rate_limit);
  c.sample_dt = sensor.sample_dt;
  return c;
}

Angles Scenario::initial_angles() const {
  return {initial.phi, initial.theta.value_or(steady_state_theta(initial.psi, aero.glide_ratio)), initial.psi};
}

void Scenario::validate() const {
  if (!(duration > 0.0)) throw ValidationError("duration must be positive");
  if (!(dt_inner > 0.0)) throw ValidationError("dt_inner must be positive");
  aero.validate();
  actuator.validate();
  wind.validate();
  sensor.validate();
  plant.validate();
  const double ratio = sensor.sample_dt / dt_inner;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0)
    throw ValidationError("dt_inner must divide sample_dt");
  resolved_controller().validate();
  pattern.validate();
  if (pattern_initial_state != 1 && pattern_initial_state != 2)
    throw ValidationError("pattern initial_state must be 1 or 2");
  bangbang.validate();
  neutral.validate();
  step.validate();
  const Angles a = initial_angles();
  if (!(std::isfinite(a.phi) && std::isfinite(a.psi) && std::isfinite(a.theta)))
    throw ValidationError("initial angles must be finite");
  if (!(a.theta >= plant.theta_min)) throw ValidationError("initial theta must be at least theta_min");
  if (!(sysid.lambda > 0.9 && sysid.lambda <= 1.0)) throw ValidationError("sysid lambda must lie in (0.9, 1]");
  if (mode == Mode::SysidReplay && replay_log.empty())
    throw ValidationError("sysid-replay mode needs scenario.replay_log");
}

void set_scenario_value(Scenario& s, std::string_view dotted_key, std::string_view value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string_view::npos) throw ParseError("key '" + std::string(dotted_key) + "' needs a section", 0);
  const Field* f = find_field(dotted_key.substr(0, dot), dotted_key.substr(dot + 1));
  if (!f) throw ParseError("unknown key '" + std::string(dotted_key) + "'", 0);
  try {
    f->set(s, trim(value));
  } catch (const BadValue& e) {
    throw ParseError(std::string(dotted_key) + ": " + e.reason, 0);
  }
}

std::vector<std::string> scenario_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.section + "." + f.key);
  return keys;
}

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  std::vector<std::string> errors;
  int first_bad_line = 0;
  auto fail = [&](int line, const std::string& msg) {
    if (first_bad_line == 0) first_bad_line = line;
    errors.push_back("line " + std::to_string(line) + ": " + msg);
  };

  std::string section;
  std::set<std::string> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        fail(line_no, "unterminated section header");
        continue;
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      bool known = false;
      for (const auto& f : fields()) known = known || f.section == section;
      if (!known) fail(line_no, "unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(line_no, "expected 'key = value'");
      continue;
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section.empty()) {
      fail(line_no, "key '" + key + "' outside of any section");
      continue;
    }
    const Field* f = find_field(section, key);
    if (!f) {
      fail(line_no, "unknown key '" + key + "' in [" + section + "]");
      continue;
    }
    if (!seen.insert(section + "." + key).second) {
      fail(line_no, "duplicate key '" + key + "' in [" + section + "]");
      continue;
    }
    try {
      f->set(s, value);
    } catch (const BadValue& e) {
      fail(line_no, section + "." + key + ": " + e.reason);
    }
  }

  if (!errors.empty()) {
    std::string msg;
    for (const auto& e : errors) msg += (msg.empty() ? "" : "\n") + e;
    throw ParseError(msg, first_bad_line);
  }
  s.validate();
  return s;
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  std::string section;
  for (const auto& f : fields()) {
    const auto value = f.get(s);
    if (!value) continue;
    if (f.section != section) {
      if (!section.empty()) out << '\n';
      section = f.section;
      out << '[' << section << "]\n";
    }
    out << f.key << " = " << *value << '\n';
  }
  return out.str();
}

}  // namespace kitepilot
