#include "emhd/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace emhd {

RunMode mode_from_string(const std::string& s) {
  if (s == "cascade") return RunMode::Cascade;
  if (s == "direct") return RunMode::Direct;
  if (s == "crosscheck") return RunMode::Crosscheck;
  if (s == "diagnose") return RunMode::Diagnose;
  if (s == "root") return RunMode::Root;
  if (s == "hilbert-selftest") return RunMode::HilbertSelftest;
  throw ConfigError("unknown mode '" + s + "'");
}

std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::Cascade: return "cascade";
    case RunMode::Direct: return "direct";
    case RunMode::Crosscheck: return "crosscheck";
    case RunMode::Diagnose: return "diagnose";
    case RunMode::Root: return "root";
    case RunMode::HilbertSelftest: return "hilbert-selftest";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

void set_key(RunConfig& cfg, const std::string& dotted, const std::string& raw) {
  const std::string val = strip_quotes(trim(raw));
  auto as_d = [&]() { return std::stod(val); };
  auto as_i = [&]() { return std::stoi(val); };
  auto as_b = [&]() {
    if (val == "true" || val == "on" || val == "1") return true;
    if (val == "false" || val == "off" || val == "0") return false;
    throw ConfigError("config: bad boolean '" + val + "' for " + dotted);
  };

  if (dotted == "mode") { cfg.mode = mode_from_string(val); return; }
  if (dotted == "seed") { cfg.seed = static_cast<unsigned>(std::stoul(val)); return; }

  if (dotted == "params.b") cfg.params.b = as_d();
  else if (dotted == "params.A") cfg.params.A = as_d();
  else if (dotted == "params.r") cfg.params.r = as_d();
  else if (dotted == "params.n") cfg.params.n = as_i();
  else if (dotted == "params.epsilon") cfg.params.epsilon = as_d();
  else if (dotted == "params.c") cfg.params.exponents.c = as_d();
  else if (dotted == "params.d") cfg.params.exponents.d = as_d();
  else if (dotted == "params.T") cfg.params.T = as_d();
  else if (dotted == "params.mu") cfg.params.mu = as_d();
  else if (dotted == "params.alpha") cfg.params.alpha = as_d();
  else if (dotted == "params.include_b_in_ode") cfg.params.include_b_in_ode = as_b();
  else if (dotted == "params.pts_per_bubble") cfg.params.pts_per_bubble = as_i();
  else if (dotted == "params.margin") cfg.params.margin = as_d();
  else if (dotted == "numerics.checkpoints_per_decade") cfg.numerics.checkpoints_per_decade = as_i();
  else if (dotted == "numerics.ode_n") cfg.numerics.ode_n = as_i();
  else if (dotted == "numerics.ode_delta") cfg.numerics.ode_delta = as_d();
  else if (dotted == "numerics.fit_decades_lo") cfg.numerics.fit_decades_lo = as_d();
  else if (dotted == "numerics.fit_decades_hi") cfg.numerics.fit_decades_hi = as_d();
  else if (dotted == "numerics.coupled_steps") cfg.numerics.coupled_steps = as_i();
  else if (dotted == "numerics.crosscheck_window") cfg.numerics.crosscheck_window = as_d();
  else if (dotted == "numerics.direct_points") cfg.numerics.direct_points = as_i();
  else if (dotted == "numerics.direct_length") cfg.numerics.direct_length = as_d();
  else if (dotted == "numerics.probe_per_decade") cfg.numerics.probe_per_decade = as_i();
  else if (dotted == "output.dir") cfg.output.dir = val;
  else if (dotted == "output.plots") cfg.output.plots = as_b();
  else if (dotted == "output.goldens") cfg.output.goldens = as_b();
  else throw ConfigError("config: unknown key '" + dotted + "'");
}

RunConfig from_json_text(const std::string& text) {
  RunConfig cfg;
  nlohmann::json j = nlohmann::json::parse(text);
  for (auto sec = j.begin(); sec != j.end(); ++sec) {
    if (sec.value().is_object()) {
      for (auto it = sec.value().begin(); it != sec.value().end(); ++it) {
        const nlohmann::json& v = it.value();
        const std::string raw = v.is_string() ? v.get<std::string>() : v.dump();
        set_key(cfg, sec.key() + "." + it.key(), raw);
      }
    } else {
      const nlohmann::json& v = sec.value();
      const std::string raw = v.is_string() ? v.get<std::string>() : v.dump();
      set_key(cfg, sec.key(), raw);
    }
  }
  return cfg;
}

RunConfig from_toml_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    set_key(cfg, section.empty() ? key : section + "." + key, val);
  }
  return cfg;
}

}  // namespace

RunConfig config_from_text(const std::string& text) {
  for (char c : text) {
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') continue;
    return (c == '{') ? from_json_text(text) : from_toml_text(text);
  }
  return RunConfig{};
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_text(ss.str());
}

void apply_override(RunConfig& cfg, const std::string& keyval) {
  const auto eq = keyval.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must look like key=value, got '" + keyval + "'");
  set_key(cfg, trim(keyval.substr(0, eq)), keyval.substr(eq + 1));
}

std::string config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["mode"] = to_string(cfg.mode);
  j["seed"] = cfg.seed;
  j["params"] = {{"b", cfg.params.b}, {"A", cfg.params.A}, {"r", cfg.params.r},
                 {"n", cfg.params.n}, {"epsilon", cfg.params.epsilon},
                 {"c", cfg.params.exponents.c}, {"d", cfg.params.exponents.d},
                 {"T", cfg.params.T}, {"mu", cfg.params.mu}, {"alpha", cfg.params.alpha},
                 {"include_b_in_ode", cfg.params.include_b_in_ode},
                 {"pts_per_bubble", cfg.params.pts_per_bubble},
                 {"margin", cfg.params.margin}};
  j["numerics"] = {{"checkpoints_per_decade", cfg.numerics.checkpoints_per_decade},
                   {"ode_n", cfg.numerics.ode_n}, {"ode_delta", cfg.numerics.ode_delta},
                   {"fit_decades_lo", cfg.numerics.fit_decades_lo},
                   {"fit_decades_hi", cfg.numerics.fit_decades_hi},
                   {"coupled_steps", cfg.numerics.coupled_steps},
                   {"crosscheck_window", cfg.numerics.crosscheck_window},
                   {"direct_points", cfg.numerics.direct_points},
                   {"direct_length", cfg.numerics.direct_length},
                   {"probe_per_decade", cfg.numerics.probe_per_decade}};
  j["output"] = {{"dir", cfg.output.dir}, {"plots", cfg.output.plots},
                 {"goldens", cfg.output.goldens}};
  return j.dump(2);
}

}  // namespace emhd
