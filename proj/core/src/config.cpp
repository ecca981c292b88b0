// SPDX-License-Identifier: Apache-2.0
#include "nfsgvb/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "nfsgvb/error.hpp"

namespace nfsgvb {

std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::Snr: return "snr";
    case SweepVariable::Distance: return "distance";
    case SweepVariable::GridSize: return "grid_size";
  }
  return "?";
}

std::string_view to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Ls: return "ls";
    case EstimatorKind::OracleLs: return "oracle_ls";
    case EstimatorKind::Sgvb: return "sgvb";
    case EstimatorKind::Psomp: return "psomp";
    case EstimatorKind::Sbl: return "sbl";
  }
  return "?";
}

std::string_view to_string(ChannelMode m) { return m == ChannelMode::Exact ? "exact" : "fresnel"; }

namespace {

// Errors raised while converting a single value; the caller adds the location.
struct ValueError {
  std::string message;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ValueError{"expected a number, got '" + std::string(s) + "'"};
  }
  return v;
}

long long parse_integer(std::string_view s) {
  s = trim(s);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ValueError{"expected an integer, got '" + std::string(s) + "'"};
  }
  return v;
}

int parse_int(std::string_view s) {
  const long long v = parse_integer(s);
  if (v < -2147483647LL || v > 2147483647LL) throw ValueError{"integer out of range"};
  return static_cast<int>(v);
}

std::uint64_t parse_u64(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ValueError{"expected a non-negative 64-bit integer, got '" + std::string(s) + "'"};
  }
  return v;
}

bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ValueError{"expected true or false, got '" + std::string(s) + "'"};
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(',');
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

// Comma-separated numbers; an item "lo:step:hi" expands to lo, lo+step, ..., hi.
std::vector<double> parse_doubles(std::string_view s) {
  std::vector<double> out;
  for (std::string_view item : split_list(s)) {
    const auto c1 = item.find(':');
    if (c1 == std::string_view::npos) {
      out.push_back(parse_double(item));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw ValueError{"expected a range 'lo:step:hi'"};
    const double lo = parse_double(item.substr(0, c1));
    const double step = parse_double(item.substr(c1 + 1, c2 - c1 - 1));
    const double hi = parse_double(item.substr(c2 + 1));
    if (!(step > 0.0) || !(hi >= lo)) throw ValueError{"range needs step > 0 and hi >= lo"};
    const long long count = std::llround(std::floor((hi - lo) / step + 1e-9)) + 1;
    if (count > 100000) throw ValueError{"range has too many points"};
    for (long long i = 0; i < count; ++i) out.push_back(lo + static_cast<double>(i) * step);
  }
  return out;
}

std::array<double, 2> parse_range(std::string_view s) {
  const std::vector<double> v = parse_doubles(s);
  if (v.size() != 2) throw ValueError{"expected 'lo, hi'"};
  return {v[0], v[1]};
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view)>;

const std::vector<std::pair<std::string, Setter>>& key_table() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"geometry.kind",
       [](ExperimentConfig& c, std::string_view v) {
         v = trim(v);
         if (v == "ula") c.kind = ArrayKind::Ula;
         else if (v == "upa") c.kind = ArrayKind::Upa;
         else throw ValueError{"expected ula or upa"};
       }},
      {"geometry.n", [](ExperimentConfig& c, std::string_view v) { c.n = parse_int(v); }},
      {"geometry.n_h", [](ExperimentConfig& c, std::string_view v) { c.n_h = parse_int(v); }},
      {"geometry.n_v", [](ExperimentConfig& c, std::string_view v) { c.n_v = parse_int(v); }},
      {"geometry.carrier_hz", [](ExperimentConfig& c, std::string_view v) { c.carrier_hz = parse_double(v); }},
      {"geometry.spacing_wavelengths",
       [](ExperimentConfig& c, std::string_view v) { c.spacing_wavelengths = parse_double(v); }},
      {"scene.l_paths", [](ExperimentConfig& c, std::string_view v) { c.scene.l_paths = parse_int(v); }},
      {"scene.r_min", [](ExperimentConfig& c, std::string_view v) { c.scene.r_min = parse_double(v); }},
      {"scene.r_max", [](ExperimentConfig& c, std::string_view v) { c.scene.r_max = parse_double(v); }},
      {"scene.theta_range_deg",
       [](ExperimentConfig& c, std::string_view v) { c.scene.theta_range_deg = parse_range(v); }},
      {"scene.phi_range_deg",
       [](ExperimentConfig& c, std::string_view v) { c.scene.phi_range_deg = parse_range(v); }},
      {"scene.min_angle_sep_deg",
       [](ExperimentConfig& c, std::string_view v) { c.scene.min_angle_sep_deg = parse_double(v); }},
      {"scene.channel_mode",
       [](ExperimentConfig& c, std::string_view v) {
         v = trim(v);
         if (v == "exact") c.channel_mode = ChannelMode::Exact;
         else if (v == "fresnel") c.channel_mode = ChannelMode::Fresnel;
         else throw ValueError{"expected exact or fresnel"};
       }},
      {"sweep.variable",
       [](ExperimentConfig& c, std::string_view v) {
         v = trim(v);
         if (v == "snr") c.variable = SweepVariable::Snr;
         else if (v == "distance") c.variable = SweepVariable::Distance;
         else if (v == "grid_size") c.variable = SweepVariable::GridSize;
         else throw ValueError{"expected snr, distance or grid_size"};
       }},
      {"sweep.values", [](ExperimentConfig& c, std::string_view v) { c.values = parse_doubles(v); }},
      {"sweep.snr_db", [](ExperimentConfig& c, std::string_view v) { c.snr_db = parse_double(v); }},
      {"sweep.grid_size", [](ExperimentConfig& c, std::string_view v) { c.grid_size = parse_double(v); }},
      {"estimators.enabled",
       [](ExperimentConfig& c, std::string_view v) {
         c.estimators.clear();
         for (std::string_view item : split_list(v)) {
           EstimatorKind k{};
           if (item == "ls") k = EstimatorKind::Ls;
           else if (item == "oracle_ls") k = EstimatorKind::OracleLs;
           else if (item == "sgvb") k = EstimatorKind::Sgvb;
           else if (item == "psomp") k = EstimatorKind::Psomp;
           else if (item == "sbl") k = EstimatorKind::Sbl;
           else throw ValueError{"unknown estimator '" + std::string(item) + "'"};
           if (std::find(c.estimators.begin(), c.estimators.end(), k) == c.estimators.end()) {
             c.estimators.push_back(k);
           }
         }
       }},
      {"sgvb.max_iters", [](ExperimentConfig& c, std::string_view v) { c.sgvb_max_iters = parse_int(v); }},
      {"sgvb.grid_points_k",
       [](ExperimentConfig& c, std::string_view v) { c.sgvb_overrides.grid_points_k = parse_int(v); }},
      {"sgvb.newton_step",
       [](ExperimentConfig& c, std::string_view v) { c.sgvb_overrides.newton_step = parse_double(v); }},
      {"sgvb.newton_tol",
       [](ExperimentConfig& c, std::string_view v) { c.sgvb_overrides.newton_tol = parse_double(v); }},
      {"sgvb.newton_max_steps",
       [](ExperimentConfig& c, std::string_view v) { c.sgvb_overrides.newton_max_steps = parse_int(v); }},
      {"sgvb.conv_tol", [](ExperimentConfig& c, std::string_view v) { c.sgvb_overrides.conv_tol = parse_double(v); }},
      {"sgvb.a_beta", [](ExperimentConfig& c, std::string_view v) { c.sgvb_overrides.a_beta = parse_double(v); }},
      {"sgvb.b_beta", [](ExperimentConfig& c, std::string_view v) { c.sgvb_overrides.b_beta = parse_double(v); }},
      {"sgvb.a_gamma", [](ExperimentConfig& c, std::string_view v) { c.sgvb_overrides.a_gamma = parse_double(v); }},
      {"sgvb.b_gamma", [](ExperimentConfig& c, std::string_view v) { c.sgvb_overrides.b_gamma = parse_double(v); }},
      {"sgvb.prune_tol", [](ExperimentConfig& c, std::string_view v) { c.sgvb_overrides.prune_tol = parse_double(v); }},
      {"sgvb.detect_threshold",
       [](ExperimentConfig& c, std::string_view v) { c.sgvb_overrides.detect_threshold = parse_double(v); }},
      {"sbl.max_em_iters", [](ExperimentConfig& c, std::string_view v) { c.sbl.max_em_iters = parse_int(v); }},
      {"sbl.prune_tol", [](ExperimentConfig& c, std::string_view v) { c.sbl.prune_tol = parse_double(v); }},
      {"sbl.tol", [](ExperimentConfig& c, std::string_view v) { c.sbl.tol = parse_double(v); }},
      {"codebook.coherence", [](ExperimentConfig& c, std::string_view v) { c.coherence = parse_double(v); }},
      {"codebook.cache", [](ExperimentConfig& c, std::string_view v) { c.codebook_cache = parse_bool(v); }},
      {"codebook.cache_dir",
       [](ExperimentConfig& c, std::string_view v) { c.codebook_cache_dir = std::string(trim(v)); }},
      {"metrics.angles_in_degrees",
       [](ExperimentConfig& c, std::string_view v) { c.metrics.angles_in_degrees = parse_bool(v); }},
      {"metrics.normalize_by_paths",
       [](ExperimentConfig& c, std::string_view v) { c.metrics.normalize_by_paths = parse_bool(v); }},
      {"output.record_wall_time",
       [](ExperimentConfig& c, std::string_view v) { c.record_wall_time = parse_bool(v); }},
      {"trials", [](ExperimentConfig& c, std::string_view v) { c.trials = parse_int(v); }},
      {"master_seed", [](ExperimentConfig& c, std::string_view v) { c.master_seed = parse_u64(v); }},
      {"output_dir", [](ExperimentConfig& c, std::string_view v) { c.output_dir = std::string(trim(v)); }},
      {"workers", [](ExperimentConfig& c, std::string_view v) { c.workers = parse_int(v); }},
  };
  return table;
}

const Setter* find_setter(std::string_view key) {
  for (const auto& [name, setter] : key_table()) {
    if (name == key) return &setter;
  }
  return nullptr;
}

struct Entry {
  std::string value;
  std::string location;  // "source:line"
  int order = 0;
};

void collect(std::string_view text, std::string_view source, std::map<std::string, Entry>& table,
             int depth, int& order) {
  if (depth > 4) throw InvalidConfig(std::string(source) + ": defaults nested too deeply");
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      if (line.substr(0, 9) == "defaults " || line.substr(0, 9) == "defaults\t") {
        const std::string name(trim(line.substr(9)));
        std::string body;
        try {
          body = preset_text(name);
        } catch (const InvalidConfig&) {
          throw InvalidConfig(where + ": unknown preset '" + name + "'");
        }
        collect(body, "preset " + name, table, depth + 1, order);
        continue;
      }
      throw InvalidConfig(where + ": expected 'key = value' or 'defaults <preset>'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw InvalidConfig(where + ": missing key before '='");
    if (!find_setter(key)) throw InvalidConfig(where + ": unknown key '" + key + "'");
    table[key] = Entry{value, where, order++};
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  std::map<std::string, Entry> table;
  int order = 0;
  collect(text, source, table, 0, order);

  ExperimentConfig cfg;
  // Geometry-dependent defaults must not depend on key order, so apply in table order.
  for (const auto& [name, setter] : key_table()) {
    const auto it = table.find(name);
    if (it == table.end()) continue;
    try {
      setter(cfg, it->second.value);
    } catch (const ValueError& e) {
      throw InvalidConfig(it->second.location + ": key '" + name + "': " + e.message);
    }
  }
  try {
    cfg.validate();
  } catch (const InvalidConfig& e) {
    // Messages start with the offending key; attach its location when it was set explicitly.
    const std::string msg = e.what();
    const std::string key = msg.substr(0, msg.find(':'));
    const auto it = table.find(key);
    const std::string where = it != table.end() ? it->second.location : std::string(source);
    throw InvalidConfig(where + ": " + msg);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw InvalidConfig(file.string() + ": cannot open config file");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), file.string());
}

std::vector<std::string> preset_names() { return {"ula-table2", "upa-table3"}; }

std::string preset_text(std::string_view name) {
  if (name == "ula-table2") {
    return "# ULA simulation configuration\n"
           "geometry.kind = ula\n"
           "geometry.n = 256\n"
           "geometry.carrier_hz = 100e9\n"
           "geometry.spacing_wavelengths = 0.5\n"
           "scene.l_paths = 6\n"
           "scene.r_min = 3\n"
           "scene.r_max = 90\n"
           "scene.theta_range_deg = -60, 60\n"
           "scene.channel_mode = exact\n"
           "sweep.variable = snr\n"
           "sweep.values = 0, 5, 10, 15, 20, 25, 30\n"
           "sweep.grid_size = 3\n"
           "sgvb.max_iters = 150\n"
           "sgvb.grid_points_k = 256\n"
           "sgvb.newton_step = 0.01\n"
           "trials = 100\n";
  }
  if (name == "upa-table3") {
    return "# UPA simulation configuration\n"
           "geometry.kind = upa\n"
           "geometry.n_h = 16\n"
           "geometry.n_v = 16\n"
           "geometry.carrier_hz = 3e9\n"
           "geometry.spacing_wavelengths = 0.5\n"
           "scene.l_paths = 3\n"
           "scene.r_min = 5\n"
           "scene.r_max = 25\n"
           "scene.theta_range_deg = -60, 60\n"
           "scene.phi_range_deg = -80, 80\n"
           "scene.channel_mode = fresnel\n"
           "sweep.variable = snr\n"
           "sweep.values = 0, 5, 10, 15, 20, 25, 30\n"
           "sweep.grid_size = 3\n"
           "sgvb.max_iters = 200\n"
           "sgvb.grid_points_k = 256\n"
           "sgvb.newton_step = 0.01\n"
           "trials = 100\n";
  }
  throw InvalidConfig("unknown preset '" + std::string(name) + "'");
}

ArrayGeometry ExperimentConfig::geometry() const {
  return kind == ArrayKind::Ula ? ArrayGeometry::ula(n, carrier_hz, spacing_wavelengths)
                                : ArrayGeometry::upa(n_h, n_v, carrier_hz, spacing_wavelengths);
}

double ExperimentConfig::distance_ceiling() const {
  double r = scene.r_max;
  if (variable == SweepVariable::Distance) {
    for (double v : values) r = std::max(r, v);
  }
  return r;
}

SgvbConfig ExperimentConfig::sgvb_config() const {
  const ArrayGeometry geom = geometry();
  SgvbConfig cfg = sgvb_overrides;
  cfg.l_paths = scene.l_paths;
  cfg.max_iters = sgvb_max_iters.value_or(kind == ArrayKind::Ula ? 150 : 200);
  double r_lo = scene.r_min;
  if (variable == SweepVariable::Distance) {
    for (double v : values) r_lo = std::min(r_lo, v);
  }
  cfg.set_distance_range(geom, r_lo, distance_ceiling());
  return cfg;
}

bool ExperimentConfig::has(EstimatorKind k) const {
  return std::find(estimators.begin(), estimators.end(), k) != estimators.end();
}

void ExperimentConfig::validate() const {
  if (kind == ArrayKind::Ula && n < 1) throw InvalidConfig("geometry.n: must be >= 1");
  if (kind == ArrayKind::Upa && (n_h < 1 || n_v < 1)) throw InvalidConfig("geometry.n_h: n_h and n_v must be >= 1");
  if (!(carrier_hz > 0.0)) throw InvalidConfig("geometry.carrier_hz: must be positive");
  if (!(spacing_wavelengths > 0.0)) throw InvalidConfig("geometry.spacing_wavelengths: must be positive");
  if (scene.l_paths < 1) throw InvalidConfig("scene.l_paths: must be >= 1");
  const int n_total = kind == ArrayKind::Ula ? n : n_h * n_v;
  if (scene.l_paths > n_total) throw InvalidConfig("scene.l_paths: must not exceed the antenna count");
  if (!(scene.r_min > 0.0)) throw InvalidConfig("scene.r_min: must be positive");
  if (!(scene.r_min <= scene.r_max)) throw InvalidConfig("scene.r_max: must be >= scene.r_min");
  try {
    scene.validate();
  } catch (const InvalidConfig& e) {
    throw InvalidConfig(std::string("scene.theta_range_deg: ") + e.what());
  }
  if (values.empty()) throw InvalidConfig("sweep.values: must not be empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool noiseless = variable == SweepVariable::Snr && values[i] == std::numeric_limits<double>::infinity();
    if (!std::isfinite(values[i]) && !noiseless) throw InvalidConfig("sweep.values: must be finite");
    if (i > 0 && !(values[i] > values[i - 1])) throw InvalidConfig("sweep.values: must be strictly increasing");
  }
  if (variable == SweepVariable::Distance) {
    for (double v : values) {
      if (!(v > 0.0)) throw InvalidConfig("sweep.values: distances must be positive");
    }
  }
  if (variable == SweepVariable::GridSize) {
    for (double v : values) {
      if (!(v >= 1.0)) throw InvalidConfig("sweep.values: grid sizes must be >= 1 (multiples of N)");
    }
  }
  if (!(grid_size >= 1.0)) throw InvalidConfig("sweep.grid_size: must be >= 1 (multiples of N)");
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    throw InvalidConfig("sweep.snr_db: must be a number or inf");
  }
  if (estimators.empty()) throw InvalidConfig("estimators.enabled: must list at least one estimator");
  if (trials < 1) throw InvalidConfig("trials: must be >= 1");
  if (workers < 0) throw InvalidConfig("workers: must be >= 0");
  if (sgvb_max_iters && *sgvb_max_iters < 0) throw InvalidConfig("sgvb.max_iters: must be >= 0");
  if (!(coherence > 0.0 && coherence < 1.0)) throw InvalidConfig("codebook.coherence: must be in (0, 1)");
  if (output_dir.empty()) throw InvalidConfig("output_dir: must not be empty");
  try {
    sgvb_config().validate();
  } catch (const InvalidConfig& e) {
    throw InvalidConfig(std::string("sgvb.grid_points_k: ") + e.what());
  }
  try {
    sbl.validate();
  } catch (const InvalidConfig& e) {
    throw InvalidConfig(std::string("sbl.max_em_iters: ") + e.what());
  }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  auto add = [&](std::string k, std::string v) { out.emplace_back(std::move(k), std::move(v)); };
  add("geometry.kind", kind == ArrayKind::Ula ? "ula" : "upa");
  if (kind == ArrayKind::Ula) {
    add("geometry.n", std::to_string(n));
  } else {
    add("geometry.n_h", std::to_string(n_h));
    add("geometry.n_v", std::to_string(n_v));
  }
  add("geometry.carrier_hz", fmt(carrier_hz));
  add("geometry.spacing_wavelengths", fmt(spacing_wavelengths));
  add("scene.l_paths", std::to_string(scene.l_paths));
  add("scene.r_min", fmt(scene.r_min));
  add("scene.r_max", fmt(scene.r_max));
  add("scene.theta_range_deg", fmt(scene.theta_range_deg[0]) + ", " + fmt(scene.theta_range_deg[1]));
  if (kind == ArrayKind::Upa) {
    add("scene.phi_range_deg", fmt(scene.phi_range_deg[0]) + ", " + fmt(scene.phi_range_deg[1]));
  }
  add("scene.min_angle_sep_deg", fmt(scene.min_angle_sep_deg));
  add("scene.channel_mode", std::string(to_string(channel_mode)));
  add("sweep.variable", std::string(to_string(variable)));
  add("sweep.values", fmt_list(values));
  add("sweep.snr_db", fmt(snr_db));
  add("sweep.grid_size", fmt(grid_size));
  std::string est;
  for (std::size_t i = 0; i < estimators.size(); ++i) {
    if (i) est += ", ";
    est += to_string(estimators[i]);
  }
  add("estimators.enabled", est);
  const SgvbConfig s = sgvb_config();
  add("sgvb.max_iters", std::to_string(s.max_iters));
  add("sgvb.grid_points_k", std::to_string(s.grid_points_k));
  add("sgvb.newton_step", fmt(s.newton_step));
  add("sgvb.newton_tol", fmt(s.newton_tol));
  add("sgvb.newton_max_steps", std::to_string(s.newton_max_steps));
  add("sgvb.conv_tol", fmt(s.conv_tol));
  add("sgvb.a_beta", fmt(s.a_beta));
  add("sgvb.b_beta", fmt(s.b_beta));
  add("sgvb.a_gamma", fmt(s.a_gamma));
  add("sgvb.b_gamma", fmt(s.b_gamma));
  add("sgvb.prune_tol", fmt(s.prune_tol));
  add("sgvb.detect_threshold", fmt(s.detect_threshold));
  add("sbl.max_em_iters", std::to_string(sbl.max_em_iters));
  add("sbl.prune_tol", fmt(sbl.prune_tol));
  add("sbl.tol", fmt(sbl.tol));
  add("codebook.coherence", fmt(coherence));
  add("codebook.cache", codebook_cache ? "true" : "false");
  add("metrics.angles_in_degrees", metrics.angles_in_degrees ? "true" : "false");
  add("metrics.normalize_by_paths", metrics.normalize_by_paths ? "true" : "false");
  add("output.record_wall_time", record_wall_time ? "true" : "false");
  add("trials", std::to_string(trials));
  add("master_seed", std::to_string(master_seed));
  return out;
}

}  // namespace nfsgvb
