#include "dsii/config.hpp"

#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <set>
#include <sstream>

#include "dsii/errors.hpp"

namespace dsii {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  double out = 0.0;
  const char* last = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), last, out);
  if (ec != std::errc{} || ptr != last)
    throw ConfigError("key '" + key + "': not a number: '" + value + "'");
  return out;
}

long parse_int(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  long out = 0;
  const char* last = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), last, out);
  if (ec != std::errc{} || ptr != last)
    throw ConfigError("key '" + key + "': not an integer: '" + value + "'");
  return out;
}

struct KeySpec {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

KeySpec dkey(const char* name, double RunConfig::* m, double lo, double hi) {
  std::string n = name;
  return {n,
          [n, m, lo, hi](RunConfig& c, const std::string& v) {
            const double x = parse_double(n, v);
            if (!std::isfinite(x) || x < lo || x > hi)
              throw ConfigError("key '" + n + "': value " + v + " outside [" +
                                format_float(lo) + ", " + format_float(hi) + "]");
            c.*m = x;
          },
          [m](const RunConfig& c) { return format_float(c.*m); }};
}

KeySpec ikey(const char* name, int RunConfig::* m, long lo, long hi) {
  std::string n = name;
  return {n,
          [n, m, lo, hi](RunConfig& c, const std::string& v) {
            const long x = parse_int(n, v);
            if (x < lo || x > hi)
              throw ConfigError("key '" + n + "': value " + v + " outside [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
            c.*m = static_cast<int>(x);
          },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

KeySpec signkey(const char* name, int RunConfig::* m) {
  std::string n = name;
  return {n,
          [n, m](RunConfig& c, const std::string& v) {
            const long x = parse_int(n, v);
            if (x != 1 && x != -1) throw ConfigError("key '" + n + "': must be 1 or -1");
            c.*m = static_cast<int>(x);
          },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = [] {
    std::vector<KeySpec> t;
    t.push_back(dkey("omega", &RunConfig::omega, 1e-6, 100.0));
    t.push_back(dkey("alpha", &RunConfig::alpha, -1e6, 1e6));
    t.push_back(dkey("beta", &RunConfig::beta, -1e6, 1e6));
    t.push_back(dkey("epsilon", &RunConfig::epsilon, 0.0, 1.0));
    t.push_back(dkey("kappa1", &RunConfig::kappa1, 1e-6, 100.0));
    t.push_back(dkey("kappa2", &RunConfig::kappa2, 1e-6, 100.0));
    t.push_back(dkey("rho", &RunConfig::rho, -1e6, 1e6));
    t.push_back(dkey("rho_hat", &RunConfig::rho_hat, -1e6, 1e6));
    t.push_back(dkey("gamma", &RunConfig::gamma, -1e6, 1e6));
    t.push_back(signkey("sign_x", &RunConfig::sign_x));
    t.push_back(signkey("sign_y", &RunConfig::sign_y));
    t.push_back(dkey("orbit_t", &RunConfig::orbit_t, -1e6, 1e6));
    t.push_back(ikey("nx", &RunConfig::nx, 4, 4096));
    t.push_back(ikey("ny", &RunConfig::ny, 4, 4096));
    t.push_back(dkey("panel_width", &RunConfig::panel_width, 1e-3, 10.0));
    t.push_back(dkey("tail", &RunConfig::tail, 1e-16, 1e-2));
    t.push_back(dkey("dt", &RunConfig::dt, 1e-9, 1.0));
    t.push_back(dkey("t_final", &RunConfig::t_final, 1e-9, 1e4));
    t.push_back(ikey("snapshot_stride", &RunConfig::snapshot_stride, 1, 1000000000L));
    t.push_back({"scheme",
                 [](RunConfig& c, const std::string& v) {
                   const std::string s = trim(v);
                   if (s == "etdrk4")
                     c.scheme = Scheme::ExponentialRk4;
                   else if (s == "strang")
                     c.scheme = Scheme::StrangSplit;
                   else
                     throw ConfigError("key 'scheme': expected etdrk4 or strang, got '" + v + "'");
                 },
                 [](const RunConfig& c) {
                   return std::string(c.scheme == Scheme::ExponentialRk4 ? "etdrk4" : "strang");
                 }});
    t.push_back(ikey("spectrum_kmax", &RunConfig::spectrum_kmax, 1, 1024));
    t.push_back(ikey("kmax", &RunConfig::kmax, 4, 64));
    t.push_back({"sim_source",
                 [](RunConfig& c, const std::string& v) {
                   const std::string s = trim(v);
                   if (s != "orbit" && s != "plane")
                     throw ConfigError("key 'sim_source': expected orbit or plane, got '" + v + "'");
                   c.sim_source = s;
                 },
                 [](const RunConfig& c) { return c.sim_source; }});
    t.push_back(dkey("sim_t0", &RunConfig::sim_t0, -1e6, 1e6));
    t.push_back(ikey("sim_k1", &RunConfig::sim_k1, 0, 2048));
    t.push_back(ikey("sim_k2", &RunConfig::sim_k2, 0, 2048));
    t.push_back(dkey("sim_amplitude", &RunConfig::sim_amplitude, 1e-300, 1e-3));
    t.push_back(dkey("omega_min", &RunConfig::omega_min, 1e-6, 100.0));
    t.push_back(dkey("omega_max", &RunConfig::omega_max, 1e-6, 100.0));
    t.push_back(ikey("omega_count", &RunConfig::omega_count, 1, 10000));
    t.push_back(dkey("drho_min", &RunConfig::drho_min, -1e6, 1e6));
    t.push_back(dkey("drho_max", &RunConfig::drho_max, -1e6, 1e6));
    t.push_back(ikey("drho_count", &RunConfig::drho_count, 1, 10000));
    t.push_back(dkey("gamma_min", &RunConfig::gamma_min, -1e6, 1e6));
    t.push_back(dkey("gamma_max", &RunConfig::gamma_max, -1e6, 1e6));
    t.push_back(ikey("gamma_count", &RunConfig::gamma_count, 1, 10000));
    t.push_back({"out_dir",
                 [](RunConfig& c, const std::string& v) {
                   const std::string s = trim(v);
                   if (s.empty()) throw ConfigError("key 'out_dir': empty path");
                   c.out_dir = s;
                 },
                 [](const RunConfig& c) { return c.out_dir; }});
    t.push_back({"format",
                 [](RunConfig& c, const std::string& v) {
                   const std::string s = trim(v);
                   if (s == "csv")
                     c.format = OutputFormat::Csv;
                   else if (s == "json")
                     c.format = OutputFormat::Json;
                   else
                     throw ConfigError("key 'format': expected csv or json, got '" + v + "'");
                 },
                 [](const RunConfig& c) {
                   return std::string(c.format == OutputFormat::Csv ? "csv" : "json");
                 }});
    return t;
  }();
  return table;
}

const KeySpec* find_key(const std::string& name) {
  for (const KeySpec& k : key_table())
    if (k.name == name) return &k;
  return nullptr;
}

// Quote a CSV cell only when it needs it; quotes are doubled inside.
std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void escape_json_string(std::string& out, const std::string& s) {
  out += '"';
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const KeySpec* spec = find_key(key);
    if (!spec) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    spec->set(cfg, value);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open config '" + path + "': " + std::strerror(errno));
  std::string text;
  char buf[4096];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
  const bool bad = std::ferror(f) != 0;
  std::fclose(f);
  if (bad) throw IoError("cannot read config '" + path + "'");
  return parse_config(text);
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  const KeySpec* spec = find_key(key);
  if (!spec) throw ConfigError("unknown key '" + key + "'");
  spec->set(cfg, value);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  out.reserve(key_table().size());
  for (const KeySpec& k : key_table()) out.push_back(k.name);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<std::string, std::string>> config_items(const RunConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(key_table().size());
  for (const KeySpec& k : key_table()) out.emplace_back(k.name, k.get(cfg));
  return out;
}

std::string dump_config(const RunConfig& cfg) {
  std::string out;
  for (const KeySpec& k : key_table()) {
    out += k.name;
    out += " = ";
    out += k.get(cfg);
    out += '\n';
  }
  return out;
}

ModelParams model_of(const RunConfig& cfg) {
  ModelParams p;
  p.omega = cfg.omega;
  p.alpha_damp = cfg.alpha;
  p.beta_drive = cfg.beta;
  p.epsilon = cfg.epsilon;
  p.kappa1 = cfg.kappa1;
  p.kappa2 = cfg.kappa2;
  return p;
}

DarbouxParams orbit_of(const RunConfig& cfg) {
  return derive_params(cfg.omega, cfg.kappa1, cfg.kappa2, cfg.rho, cfg.rho_hat, cfg.gamma,
                       cfg.sign_x, cfg.sign_y);
}

std::string format_float(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  std::string tmp = path + ".tmpXXXXXX";
  const int fd = mkstemp(tmp.data());
  if (fd < 0) throw IoError("cannot create temp file for '" + path + "': " + std::strerror(errno));
  size_t off = 0;
  while (off < text.size()) {
    const ssize_t w = ::write(fd, text.data() + off, text.size() - off);
    if (w < 0) {
      ::close(fd);
      std::remove(tmp.c_str());
      throw IoError("write failed for '" + path + "': " + std::strerror(errno));
    }
    off += static_cast<size_t>(w);
  }
  ::close(fd);
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("rename failed for '" + path + "': " + std::strerror(errno));
  }
}

std::string spectrum_csv(const std::vector<SpectrumEntry>& rows) {
  std::string out = "k1,k2,xi1,xi2,mu_plus,mu_minus\n";
  for (const SpectrumEntry& r : rows) {
    out += std::to_string(r.k1);
    out += ',';
    out += std::to_string(r.k2);
    out += ',';
    out += format_float(r.xi1);
    out += ',';
    out += format_float(r.xi2);
    out += ',';
    out += format_float(r.mu_plus);
    out += ',';
    out += format_float(r.mu_minus);
    out += '\n';
  }
  return out;
}

std::string field_csv(const TorusField& f) {
  const TorusGrid& g = f.grid;
  std::string out = "nx,ny,kappa1,kappa2\n";
  out += std::to_string(g.nx);
  out += ',';
  out += std::to_string(g.ny);
  out += ',';
  out += format_float(g.kappa1);
  out += ',';
  out += format_float(g.kappa2);
  out += "\nx,y,re_q,im_q\n";
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix < g.nx; ++ix) {
      const cplx v = f.at(ix, iy);
      out += format_float(g.x(ix));
      out += ',';
      out += format_float(g.y(iy));
      out += ',';
      out += format_float(v.real());
      out += ',';
      out += format_float(v.imag());
      out += '\n';
    }
  return out;
}

std::string scan_csv(const std::vector<ScanCell>& cells) {
  std::string out = "omega,delta_rho,gamma,alpha,beta,admissible,flags\n";
  for (const ScanCell& c : cells) {
    out += format_float(c.omega);
    out += ',';
    out += format_float(c.delta_rho);
    out += ',';
    out += format_float(c.gamma);
    out += ',';
    out += format_float(c.alpha);
    out += ',';
    out += format_float(c.beta);
    out += ',';
    out += c.admissible ? '1' : '0';
    out += ',';
    out += csv_cell(c.flags);
    out += '\n';
  }
  return out;
}

std::string normalform_csv(const std::vector<PairRecord>& records) {
  std::string out = "k1,k2,l1,l2,cond,residual,maxK\n";
  for (const PairRecord& r : records) {
    out += std::to_string(r.k[0]);
    out += ',';
    out += std::to_string(r.k[1]);
    out += ',';
    out += std::to_string(r.ell[0]);
    out += ',';
    out += std::to_string(r.ell[1]);
    out += ',';
    out += format_float(r.cond);
    out += ',';
    out += format_float(r.residual);
    out += ',';
    out += format_float(r.max_coeff);
    out += '\n';
  }
  return out;
}

JsonValue JsonValue::str(const std::string& s) {
  JsonValue v;
  v.kind_ = Kind::String;
  v.scalar_ = s;
  return v;
}

JsonValue JsonValue::num(double x) {
  JsonValue v;
  v.kind_ = Kind::Scalar;
  if (std::isfinite(x))
    v.scalar_ = format_float(x);
  else  // JSON has no inf/nan literals; keep them readable as strings
    return str(format_float(x));
  return v;
}

JsonValue JsonValue::integer(long long x) {
  JsonValue v;
  v.kind_ = Kind::Scalar;
  v.scalar_ = std::to_string(x);
  return v;
}

JsonValue JsonValue::boolean(bool b) {
  JsonValue v;
  v.kind_ = Kind::Scalar;
  v.scalar_ = b ? "true" : "false";
  return v;
}

JsonValue JsonValue::array() {
  JsonValue v;
  v.kind_ = Kind::Array;
  return v;
}

JsonValue JsonValue::object() {
  JsonValue v;
  v.kind_ = Kind::Object;
  return v;
}

JsonValue& JsonValue::set(const std::string& key, JsonValue v) {
  if (kind_ != Kind::Object) throw std::logic_error("JsonValue::set on non-object");
  members_.emplace_back(key, std::move(v));
  return *this;
}

JsonValue& JsonValue::push(JsonValue v) {
  if (kind_ != Kind::Array) throw std::logic_error("JsonValue::push on non-array");
  items_.push_back(std::move(v));
  return *this;
}

void JsonValue::dump_to(std::string& out, int indent, int depth) const {
  const std::string pad(static_cast<size_t>(indent) * depth, ' ');
  const std::string pad1(static_cast<size_t>(indent) * (depth + 1), ' ');
  switch (kind_) {
    case Kind::Scalar:
      out += scalar_;
      break;
    case Kind::String:
      escape_json_string(out, scalar_);
      break;
    case Kind::Array: {
      if (items_.empty()) {
        out += "[]";
        break;
      }
      out += "[\n";
      for (size_t i = 0; i < items_.size(); ++i) {
        out += pad1;
        items_[i].dump_to(out, indent, depth + 1);
        if (i + 1 < items_.size()) out += ',';
        out += '\n';
      }
      out += pad;
      out += ']';
      break;
    }
    case Kind::Object: {
      if (members_.empty()) {
        out += "{}";
        break;
      }
      out += "{\n";
      for (size_t i = 0; i < members_.size(); ++i) {
        out += pad1;
        escape_json_string(out, members_[i].first);
        out += ": ";
        members_[i].second.dump_to(out, indent, depth + 1);
        if (i + 1 < members_.size()) out += ',';
        out += '\n';
      }
      out += pad;
      out += '}';
      break;
    }
  }
}

std::string JsonValue::dump(int indent) const {
  std::string out;
  dump_to(out, indent, 0);
  out += '\n';
  return out;
}

}  // namespace dsii
