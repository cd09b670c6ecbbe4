#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "qbattery/cli.hpp"

namespace qb {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  const char* begin = s.data();
  if (begin != end && *begin == '+') ++begin;
  const auto r = std::from_chars(begin, end, out);
  return r.ec == std::errc() && r.ptr == end;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

enum class Section { Run, Trajectories, Sweep };

// Location of the value on the current line, for diagnostics.
struct Loc {
  int line;
  int column;
  int key_column;
};

double as_double(const std::string& key, const std::string& v, Loc at) {
  double d;
  if (!parse_number(v, d)) throw ParseError(at.line, at.column, "expected a number for '" + key + "', got '" + v + "'");
  return d;
}

long as_long(const std::string& key, const std::string& v, Loc at) {
  long n;
  if (!parse_number(v, n)) throw ParseError(at.line, at.column, "expected an integer for '" + key + "', got '" + v + "'");
  return n;
}

int as_int(const std::string& key, const std::string& v, Loc at) {
  const long n = as_long(key, v, at);
  if (n < -1000000000L || n > 1000000000L) throw ParseError(at.line, at.column, "'" + key + "' out of range");
  return static_cast<int>(n);
}

bool as_bool(const std::string& key, const std::string& v, Loc at) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ParseError(at.line, at.column, "expected true or false for '" + key + "', got '" + v + "'");
}

void set_run_key(Scenario& s, const std::string& key, const std::string& v, Loc at) {
  Params& p = s.params;
  if (key == "name") s.name = v;
  else if (key == "task") s.task = task_from_string(v);
  else if (key == "model") s.model = model_kind_from_string(v);
  else if (key == "solver") s.solver = solver_from_string(v);
  else if (key == "observables") s.observables = split(v, ',');
  else if (key == "n_batteries") s.n_batteries = as_int(key, v, at);
  else if (key == "cutoff") s.cutoff = as_int(key, v, at);
  else if (key == "omega_B") p.omega_B = as_double(key, v, at);
  else if (key == "F") p.F = as_double(key, v, at);
  else if (key == "g") p.g = as_double(key, v, at);
  else if (key == "gamma_C") p.gamma_C = as_double(key, v, at);
  else if (key == "delta_Cd") p.delta_Cd = as_double(key, v, at);
  else if (key == "delta_Bd") p.delta_Bd = as_double(key, v, at);
  else if (key == "t_max") s.t_max = as_double(key, v, at);
  else if (key == "dt") s.dt = as_double(key, v, at);
  else if (key == "n") s.n = as_int(key, v, at);
  else if (key == "output") s.output = v;
  else throw ParseError(at.line, at.key_column, "unknown key '" + key + "'");
  if (key == "observables" && std::count(s.observables.begin(), s.observables.end(), ""))
    throw ParseError(at.line, at.column, "empty entry in observables");
}

void set_trajectory_key(TrajectoryConfig& c, const std::string& key, const std::string& v, Loc at) {
  if (key == "dt") c.dt = as_double(key, v, at);
  else if (key == "n_steps") c.n_steps = as_long(key, v, at);
  else if (key == "n_traj") c.n_traj = as_int(key, v, at);
  else if (key == "seed") {
    if (!parse_number(v, c.seed)) throw ParseError(at.line, at.column, "expected an unsigned integer for 'seed'");
  } else if (key == "scheme") c.scheme = scheme_from_string(v);
  else if (key == "renormalize") c.renormalize = as_bool(key, v, at);
  else if (key == "threads") c.threads = as_int(key, v, at);
  else throw ParseError(at.line, at.key_column, "unknown key '" + key + "' in [trajectories]");
}

bool is_identifier(const std::string& k) {
  return !k.empty() && std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec) {
  static const std::regex re(R"(^\s*(linspace|logspace|list)\s*\((.*)\)\s*$)");
  std::smatch m;
  if (!std::regex_match(spec, m, re))
    throw ValidationError("sweep", "expected linspace(a, b, n), logspace(a, b, n) or list(...), got '" + spec + "'");
  const std::string kind = m[1];
  const auto args = split(m[2], ',');
  std::vector<double> x;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (kind != "list" && i == 2) break;
    double d;
    if (!parse_number(args[i], d) || !std::isfinite(d))
      throw ValidationError("sweep", "bad number '" + args[i] + "' in " + kind);
    x.push_back(d);
  }
  if (kind == "list") {
    if (x.empty()) throw ValidationError("sweep", "empty list");
    return x;
  }
  long n;
  if (args.size() != 3 || !parse_number(args[2], n) || n < 1)
    throw ValidationError("sweep", kind + " needs (a, b, n) with integer n >= 1");
  if (kind == "logspace" && !(x[0] > 0 && x[1] > 0))
    throw ValidationError("sweep", "logspace endpoints must be positive");
  return kind == "linspace" ? linspace(x[0], x[1], n) : logspace(x[0], x[1], n);
}

Scenario parse_config_text(const std::string& text) {
  Scenario s;
  Section sec = Section::Run;
  std::set<std::string> seen_keys, seen_sections;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string body = raw.substr(0, raw.find('#'));
    const auto p = body.find_first_not_of(" \t\r");
    if (p == std::string::npos) continue;

    if (body[p] == '[') {
      const auto close = body.find(']', p);
      if (close == std::string::npos) throw ParseError(line, static_cast<int>(p) + 1, "unterminated section header");
      if (!trim(body.substr(close + 1)).empty())
        throw ParseError(line, static_cast<int>(close) + 2, "unexpected text after section header");
      const std::string name = trim(body.substr(p + 1, close - p - 1));
      if (name == "run") sec = Section::Run;
      else if (name == "trajectories") sec = Section::Trajectories;
      else if (name == "sweep") sec = Section::Sweep;
      else throw ParseError(line, static_cast<int>(p) + 2, "unknown section '" + name + "'");
      if (!seen_sections.insert(name).second)
        throw ParseError(line, static_cast<int>(p) + 1, "section [" + name + "] repeated");
      continue;
    }

    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(line, static_cast<int>(p) + 1, "expected key = value");
    const std::string key = trim(body.substr(p, eq - p));
    if (!is_identifier(key)) throw ParseError(line, static_cast<int>(p) + 1, "bad key '" + key + "'");
    const std::string value = trim(body.substr(eq + 1));
    const auto vpos = body.find_first_not_of(" \t", eq + 1);
    const Loc at{line, static_cast<int>(vpos == std::string::npos ? eq + 2 : vpos + 1), static_cast<int>(p) + 1};

    const std::string scoped = std::to_string(static_cast<int>(sec)) + "." + key;
    if (!seen_keys.insert(scoped).second) throw ParseError(line, static_cast<int>(p) + 1, "duplicate key '" + key + "'");

    switch (sec) {
      case Section::Run: set_run_key(s, key, value, at); break;
      case Section::Trajectories: set_trajectory_key(s.trajectories, key, value, at); break;
      case Section::Sweep: {
        if (s.sweep) throw ParseError(line, static_cast<int>(p) + 1, "[sweep] takes a single variable");
        std::vector<double> values;
        try {
          values = parse_grid(value);
        } catch (const ValidationError& e) {
          throw ParseError(at.line, at.column, e.what());
        }
        s.sweep = SweepSpec{key, std::move(values), value};
        break;
      }
    }
  }
  s.validate();
  return s;
}

Scenario parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("config", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

std::string emit_config(const Scenario& s) {
  auto text = [](const std::string& field, const std::string& v) {
    if (v != trim(v) || v.find_first_of("#\n") != std::string::npos)
      throw ValidationError(field, "value cannot be written to a config: '" + v + "'");
    return v;
  };
  std::ostringstream os;
  os << "name = " << text("name", s.name) << "\n";
  os << "task = " << to_string(s.task) << "\n";
  os << "model = " << to_string(s.model) << "\n";
  os << "solver = " << to_string(s.solver) << "\n";
  os << "observables = ";
  for (std::size_t i = 0; i < s.observables.size(); ++i)
    os << (i ? ", " : "") << text("observables", s.observables[i]);
  os << "\n";
  os << "n_batteries = " << s.n_batteries << "\n";
  os << "cutoff = " << s.cutoff << "\n";
  os << "omega_B = " << shortest(s.params.omega_B) << "\n";
  os << "F = " << shortest(s.params.F) << "\n";
  os << "g = " << shortest(s.params.g) << "\n";
  os << "gamma_C = " << shortest(s.params.gamma_C) << "\n";
  os << "delta_Cd = " << shortest(s.params.delta_Cd) << "\n";
  os << "delta_Bd = " << shortest(s.params.delta_Bd) << "\n";
  os << "t_max = " << shortest(s.t_max) << "\n";
  os << "dt = " << shortest(s.dt) << "\n";
  os << "n = " << s.n << "\n";
  os << "output = " << text("output", s.output) << "\n";

  const TrajectoryConfig& c = s.trajectories;
  os << "\n[trajectories]\n";
  os << "dt = " << shortest(c.dt) << "\n";
  os << "n_steps = " << c.n_steps << "\n";
  os << "n_traj = " << c.n_traj << "\n";
  os << "seed = " << c.seed << "\n";
  os << "scheme = " << to_string(c.scheme) << "\n";
  os << "renormalize = " << (c.renormalize ? "true" : "false") << "\n";
  os << "threads = " << c.threads << "\n";

  if (s.sweep) {
    os << "\n[sweep]\n" << s.sweep->variable << " = ";
    bool reproducible = false;
    try {
      reproducible = s.sweep->grid.find_first_of("#\n") == std::string::npos && s.sweep->grid == trim(s.sweep->grid) &&
                     parse_grid(s.sweep->grid) == s.sweep->values;
    } catch (const ValidationError&) {
    }
    if (reproducible) {
      os << s.sweep->grid;
    } else {
      os << "list(";
      for (std::size_t i = 0; i < s.sweep->values.size(); ++i) os << (i ? ", " : "") << shortest(s.sweep->values[i]);
      os << ")";
    }
    os << "\n";
  }
  return os.str();
}

std::string config_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qb
