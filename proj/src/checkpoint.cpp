#include "calabi/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "json.hpp"

namespace calabi {

std::string checkpoint_filename(int j) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "checkpoint_j%02d.json", j);
  return buf;
}

std::string checkpoint_json(const Checkpoint& c) {
  const CalabiProfile& p = c.profile;
  std::ostringstream os;
  os << "{\"version\":1,\"n\":" << c.n << ",\"k\":" << c.k << ",\"t\":" << format_real(p.t)
     << ",\"a\":" << format_real(p.cls.a) << ",\"b\":" << format_real(p.cls.b)
     << ",\"L\":" << format_real(p.grid.half_width()) << ",\"N\":" << p.grid.size()
     << ",\"u\":[";
  for (std::size_t i = 0; i < p.u.size(); ++i) os << (i ? "," : "") << format_real(p.u[i]);
  os << "]}\n";
  return os.str();
}

void write_checkpoint(const Checkpoint& c, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw CheckpointError("cannot open '" + path + "' for writing");
  os << checkpoint_json(c);
  if (!os) throw CheckpointError("write failed for '" + path + "'");
}

namespace {

// Collects top-level scalars as their raw text so reals keep full precision.
struct Collector : nlohmann::json_sax<nlohmann::json> {
  std::map<std::string, std::string> scalars;
  std::optional<std::vector<std::string>> u;
  std::string current;
  int depth = 0;
  bool in_u = false;
  std::string error;

  bool take(const std::string& raw) {
    if (in_u) {
      u->push_back(raw);
      return true;
    }
    if (depth != 1) return fail("unexpected nesting");
    scalars[current] = raw;
    return true;
  }
  bool fail(const std::string& what) {
    error = what;
    return false;
  }

  bool null() override { return fail("null value for '" + current + "'"); }
  bool boolean(bool) override { return fail("boolean value for '" + current + "'"); }
  bool number_integer(number_integer_t v) override { return take(std::to_string(v)); }
  bool number_unsigned(number_unsigned_t v) override { return take(std::to_string(v)); }
  bool number_float(number_float_t, const string_t& s) override { return take(s); }
  bool string(string_t&) override { return fail("string value for '" + current + "'"); }
  bool binary(binary_t&) override { return fail("binary value"); }
  bool start_object(std::size_t) override {
    if (depth != 0) return fail("unexpected nested object");
    ++depth;
    return true;
  }
  bool key(string_t& k) override {
    current = k;
    return true;
  }
  bool end_object() override {
    --depth;
    return true;
  }
  bool start_array(std::size_t) override {
    if (depth != 1 || current != "u" || in_u) return fail("unexpected array");
    in_u = true;
    u.emplace();
    return true;
  }
  bool end_array() override {
    in_u = false;
    return true;
  }
  bool parse_error(std::size_t pos, const std::string&, const nlohmann::detail::exception& e) override {
    return fail("syntax error at byte " + std::to_string(pos) + ": " + e.what());
  }
};

}  // namespace

Checkpoint parse_checkpoint(const std::string& text) {
  Collector col;
  const bool ok = nlohmann::json::sax_parse(text, &col);
  if (!ok || !col.error.empty())
    throw CheckpointError("checkpoint: " + (col.error.empty() ? std::string("parse error") : col.error));
  auto field = [&](const char* name) -> const std::string& {
    auto it = col.scalars.find(name);
    if (it == col.scalars.end()) throw CheckpointError(std::string("checkpoint: missing '") + name + "'");
    return it->second;
  };
  auto integer = [&](const char* name) {
    const std::string& s = field(name);
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw CheckpointError(std::string("checkpoint: '") + name + "' must be an integer");
    return v;
  };
  auto real = [&](const char* name) {
    try {
      return parse_real(field(name));
    } catch (const std::invalid_argument&) {
      throw CheckpointError(std::string("checkpoint: bad number for '") + name + "'");
    }
  };
  if (integer("version") != 1) throw CheckpointError("checkpoint: unsupported version " + field("version"));
  if (!col.u) throw CheckpointError("checkpoint: missing 'u'");

  Checkpoint c;
  c.n = integer("n");
  c.k = integer("k");
  if (c.n < 2 || c.k < 1) throw CheckpointError("checkpoint: need n >= 2 and k >= 1");
  const int N = integer("N");
  const double L = to_double(real("L"));
  std::optional<RhoGrid> grid;
  try {
    grid.emplace(L, N);
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
  if (static_cast<int>(col.u->size()) != N)
    throw CheckpointError("checkpoint: u has " + std::to_string(col.u->size()) + " entries, expected N = " + std::to_string(N));
  RealVector u;
  u.reserve(col.u->size());
  for (const auto& s : *col.u) {
    try {
      u.push_back(parse_real(s));
    } catch (const std::invalid_argument&) {
      throw CheckpointError("checkpoint: bad number in 'u'");
    }
  }
  const KahlerClass cls{real("a"), real("b")};
  if (!cls.in_cone()) throw CheckpointError("checkpoint: class outside the Kahler cone");
  c.profile = make_profile(*grid, std::move(u), cls, to_double(real("t")), c.k);
  return c;
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw CheckpointError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace calabi
