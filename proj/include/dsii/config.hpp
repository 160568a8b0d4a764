#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dsii/darboux.hpp"
#include "dsii/evolve.hpp"
#include "dsii/melnikov.hpp"
#include "dsii/normalform.hpp"
#include "dsii/params.hpp"

namespace dsii {

enum class OutputFormat { Csv, Json };

// Every knob of every subcommand, flat. Defaults are the reference
// configuration: kappa1 = 1, kappa2 = sqrt(2), omega = sqrt(2)/2 + 0.11,
// delta_rho = 1.1 (as rho_hat with rho = 0), gamma = pi/2, and the published
// reference forcing pair (alpha, beta) = (5.645, 11.336) at epsilon = 0.01.
struct RunConfig {
  // model
  double omega = 0.81710678118654755;
  double alpha = 5.645;
  double beta = 11.336;
  double epsilon = 0.01;
  double kappa1 = 1.0;
  double kappa2 = 1.4142135623730951;
  // orbit
  double rho = 0.0;
  double rho_hat = 1.1;
  double gamma = 1.5707963267948966;
  int sign_x = 1;
  int sign_y = 1;
  double orbit_t = 0.0;
  // numerics
  int nx = 64;
  int ny = 64;
  double panel_width = 0.5;
  double tail = 1e-12;
  double dt = 1e-3;
  double t_final = 1.0;
  int snapshot_stride = 100;
  Scheme scheme = Scheme::ExponentialRk4;
  int spectrum_kmax = 8;
  int kmax = 8;  // normal-form lattice bound
  // simulate seed: "orbit" starts from the homoclinic orbit at sim_t0,
  // "plane" from the plane wave perturbed along mode (sim_k1, sim_k2)
  std::string sim_source = "orbit";
  double sim_t0 = -1.0;
  int sim_k1 = 1;
  int sim_k2 = 0;
  double sim_amplitude = 1e-7;
  // scan-domain lattice
  double omega_min = 0.75;
  double omega_max = 0.85;
  int omega_count = 5;
  double drho_min = 0.7;
  double drho_max = 1.5;
  int drho_count = 5;
  double gamma_min = 0.0;
  double gamma_max = 1.5707963267948966;
  int gamma_count = 5;
  // output
  std::string out_dir = "out";
  OutputFormat format = OutputFormat::Csv;
};

// "key = value" per line, '#' starts a comment; unknown keys, duplicate keys,
// and malformed values throw ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);  // IoError when unreadable

// Single-key assignment with the same validation as parse_config.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

std::vector<std::string> config_keys();  // every accepted key, sorted

// (key, formatted value) for every key, declaration order.
std::vector<std::pair<std::string, std::string>> config_items(const RunConfig& cfg);

// Emits every key; parse_config(dump_config(c)) reproduces c exactly.
std::string dump_config(const RunConfig& cfg);

ModelParams model_of(const RunConfig& cfg);    // plain field copy, not validated
DarbouxParams orbit_of(const RunConfig& cfg);  // derive_params on the orbit keys

// 17-significant-digit decimal; the fixed width every emitter uses, so equal
// configs reproduce byte-identical files.
std::string format_float(double v);

// Whole-file write via temp + rename in the target directory.
void write_text_atomic(const std::string& path, const std::string& text);

// Documented CSV layouts.
std::string spectrum_csv(const std::vector<SpectrumEntry>& rows);
// Header names + values (nx,ny,kappa1,kappa2), then x,y,re_q,im_q rows.
std::string field_csv(const TorusField& f);
std::string scan_csv(const std::vector<ScanCell>& cells);
std::string normalform_csv(const std::vector<PairRecord>& records);

// Insertion-ordered JSON with format_float numbers; scalars are frozen to
// text at construction so dumps are reproducible byte for byte.
class JsonValue {
 public:
  static JsonValue str(const std::string& s);
  static JsonValue num(double v);
  static JsonValue integer(long long v);
  static JsonValue boolean(bool v);
  static JsonValue array();
  static JsonValue object();

  JsonValue& set(const std::string& key, JsonValue v);  // object only
  JsonValue& push(JsonValue v);                         // array only
  std::string dump(int indent = 2) const;

 private:
  enum class Kind { Scalar, String, Array, Object };
  Kind kind_ = Kind::Scalar;
  std::string scalar_;  // pre-formatted for Scalar, raw for String
  std::vector<JsonValue> items_;
  std::vector<std::pair<std::string, JsonValue>> members_;
  void dump_to(std::string& out, int indent, int depth) const;
};

}  // namespace dsii
