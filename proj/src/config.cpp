#include "calabi/config.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace calabi {

ConfigError::ConfigError(const std::string& what, std::string key, int line)
    : std::runtime_error(what), key_(std::move(key)), line_(line) {}

std::string to_string(CtVariant v) { return v == CtVariant::Literal ? "literal" : "log"; }

CtVariant parse_ct_variant(const std::string& s) {
  if (s == "log") return CtVariant::Log;
  if (s == "literal") return CtVariant::Literal;
  throw std::invalid_argument("ct must be 'log' or 'literal', got '" + s + "'");
}

void RunConfig::validate() const {
  auto wrap = [](const std::function<void()>& f) {
    try {
      f();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  };
  wrap([&] { params.validate(); });
  wrap([&] { (void)RhoGrid(L, N); });
  wrap([&] { ctl.validate(); });
  wrap([&] { monitors.validate(); });
  if (checkpoints < 0) throw ConfigError("checkpoints must be >= 0", "checkpoints");
  if (output_dir.empty()) throw ConfigError("output dir must not be empty", "dir");
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  c.params = {2, 1, 1.0, 4.0};
  if (name == "contract") {
  } else if (name == "collapse") {
    c.params.b0 = 2.0;
  } else if (name == "shrink") {
    c.params.b0 = 3.0;
  } else {
    throw ConfigError("unknown preset '" + name + "' (contract, collapse, shrink)", "preset");
  }
  c.output_dir = "out/" + name;
  return c;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double to_num(const std::string& v, const std::string& key, int line) {
  std::size_t used = 0;
  double x = 0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size())
    throw ConfigError("line " + std::to_string(line) + ": '" + key + "' expects a number, got '" + v + "'", key, line);
  return x;
}

int to_int(const std::string& v, const std::string& key, int line) {
  const double x = to_num(v, key, line);
  if (x != static_cast<int>(x))
    throw ConfigError("line " + std::to_string(line) + ": '" + key + "' expects an integer, got '" + v + "'", key, line);
  return static_cast<int>(x);
}

bool to_bool(const std::string& v, const std::string& key, int line) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError("line " + std::to_string(line) + ": '" + key + "' expects true/false, got '" + v + "'", key, line);
}

}  // namespace

RunConfig parse_config(const std::string& text, RunConfig c) {
  using Setter = std::function<void(const std::string&, const std::string&, int)>;
  auto num = [](double& f) -> Setter {
    return [&f](const std::string& v, const std::string& k, int l) { f = to_num(v, k, l); };
  };
  auto integer = [](int& f) -> Setter {
    return [&f](const std::string& v, const std::string& k, int l) { f = to_int(v, k, l); };
  };
  auto flag = [](bool& f) -> Setter {
    return [&f](const std::string& v, const std::string& k, int l) { f = to_bool(v, k, l); };
  };
  auto text_field = [](std::string& f) -> Setter {
    return [&f](const std::string& v, const std::string&, int) { f = v; };
  };
  std::map<std::string, Setter> keys = {
      {"flow.n", integer(c.params.n)},
      {"flow.k", integer(c.params.k)},
      {"flow.a0", num(c.params.a0)},
      {"flow.b0", num(c.params.b0)},
      {"flow.ct",
       [&c](const std::string& v, const std::string& k, int l) {
         try {
           c.ct = parse_ct_variant(v);
         } catch (const std::invalid_argument& e) {
           throw ConfigError("line " + std::to_string(l) + ": " + e.what(), k, l);
         }
       }},
      {"grid.L", num(c.L)},
      {"grid.N", integer(c.N)},
      {"step.dt_init", num(c.ctl.dt_init)},
      {"step.dt_min", num(c.ctl.dt_min)},
      {"step.dt_max", num(c.ctl.dt_max)},
      {"step.tol_newton", num(c.ctl.tol_newton)},
      {"step.tol_step", num(c.ctl.tol_step)},
      {"step.stop_frac", num(c.ctl.t_stop_fraction)},
      {"step.floor_u2", num(c.ctl.floor_u2)},
      {"step.max_newton", integer(c.ctl.max_newton)},
      {"monitors.cadence", integer(c.monitors.cadence)},
      {"monitors.curvature", flag(c.monitors.curvature)},
      {"monitors.divisor", flag(c.monitors.divisor)},
      {"monitors.lemma", flag(c.monitors.lemma)},
      {"monitors.volume", flag(c.monitors.volume)},
      {"monitors.diameter", flag(c.monitors.diameter)},
      {"output.dir", text_field(c.output_dir)},
      {"output.checkpoints", integer(c.checkpoints)},
      {"seed.profile", text_field(c.seed)},
  };

  std::istringstream is(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']')
        throw ConfigError("line " + std::to_string(line) + ": malformed section header", s, line);
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'", s, line);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;
    auto it = keys.find(full);
    if (it == keys.end())
      throw ConfigError("line " + std::to_string(line) + ": unknown key '" + full + "'", full, line);
    if (value.empty())
      throw ConfigError("line " + std::to_string(line) + ": empty value for '" + full + "'", full, line);
    it->second(value, full, line);
  }
  return c;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

}  // namespace calabi
