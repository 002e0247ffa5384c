#include "okt/harness/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

namespace okt::harness {

namespace {

std::string canon(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0;
  try {
    d = std::stod(v, &pos);
  } catch (...) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ConfigError("option " + key + ": not a number: '" + v + "'");
  return d;
}

long long to_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long d = 0;
  try {
    d = std::stoll(v, &pos);
  } catch (...) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ConfigError("option " + key + ": not an integer: '" + v + "'");
  return d;
}

std::string fmt(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

const char* refine_name(RestartRefine r) {
  switch (r) {
    case RestartRefine::None: return "none";
    case RestartRefine::All: return "all";
    case RestartRefine::Scenario: return "scenario";
  }
  return "none";
}

struct Option {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Option int_opt(T RunConfig::*m) {
  return {[m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = static_cast<T>(to_int(k, v)); },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

Option dbl_opt(double RunConfig::*m) {
  return {[m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_double(k, v); },
          [m](const RunConfig& c) { return fmt(c.*m); }};
}

Option str_opt(std::string RunConfig::*m) {
  return {[m](RunConfig& c, const std::string&, const std::string& v) { c.*m = v; },
          [m](const RunConfig& c) { return c.*m; }};
}

const std::map<std::string, Option>& options() {
  static const std::map<std::string, Option> table = [] {
    std::map<std::string, Option> t;
    t["scenario"] = str_opt(&RunConfig::scenario);
    t["levels"] = int_opt(&RunConfig::levels);
    t["n"] = int_opt(&RunConfig::n);
    t["theta"] = dbl_opt(&RunConfig::theta);
    t["order"] = int_opt(&RunConfig::order);
    t["G"] = dbl_opt(&RunConfig::G);
    t["localities"] = int_opt(&RunConfig::localities);
    t["workers"] = int_opt(&RunConfig::workers);
    t["streams"] = int_opt(&RunConfig::streams);
    t["streams_per_worker"] = int_opt(&RunConfig::streams_per_worker);
    t["parcelport"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                         try {
                           c.parcelport = parcel::backend_from_string(v);
                         } catch (const std::exception&) {
                           throw ConfigError("option " + k + ": expected twosided or onesided, got '" + v + "'");
                         }
                       },
                       [](const RunConfig& c) { return parcel::to_string(c.parcelport); }};
    t["eager_threshold"] = int_opt(&RunConfig::eager_threshold);
    t["steps"] = int_opt(&RunConfig::steps);
    t["end_time"] = dbl_opt(&RunConfig::end_time);
    t["seed"] = int_opt(&RunConfig::seed);
    t["cfl"] = dbl_opt(&RunConfig::cfl);
    t["gamma"] = dbl_opt(&RunConfig::gamma);
    t["halo_timeout"] = dbl_opt(&RunConfig::halo_timeout);
    t["output"] = str_opt(&RunConfig::output);
    t["output_every"] = int_opt(&RunConfig::output_every);
    t["checkpoint"] = str_opt(&RunConfig::checkpoint);
    t["checkpoint_step"] = int_opt(&RunConfig::checkpoint_step);
    t["restart"] = str_opt(&RunConfig::restart);
    t["restart_refine"] = {[](RunConfig& c, const std::string& k, const std::string& v) {
                             if (v == "none") c.restart_refine = RestartRefine::None;
                             else if (v == "all") c.restart_refine = RestartRefine::All;
                             else if (v == "scenario") c.restart_refine = RestartRefine::Scenario;
                             else throw ConfigError("option " + k + ": expected none, all or scenario, got '" + v + "'");
                           },
                           [](const RunConfig& c) { return std::string(refine_name(c.restart_refine)); }};
    t["e0"] = dbl_opt(&RunConfig::e0);
    t["refine_fraction"] = dbl_opt(&RunConfig::refine_fraction);
    t["star_radius"] = dbl_opt(&RunConfig::star_radius);
    t["star_rho"] = dbl_opt(&RunConfig::star_rho);
    t["star_speed"] = dbl_opt(&RunConfig::star_speed);
    t["blob_separation"] = dbl_opt(&RunConfig::blob_separation);
    t["blob_sigma"] = dbl_opt(&RunConfig::blob_sigma);
    t["blob_mass"] = dbl_opt(&RunConfig::blob_mass);
    t["sod_rho_l"] = dbl_opt(&RunConfig::sod_rho_l);
    t["sod_p_l"] = dbl_opt(&RunConfig::sod_p_l);
    t["sod_rho_r"] = dbl_opt(&RunConfig::sod_rho_r);
    t["sod_p_r"] = dbl_opt(&RunConfig::sod_p_r);
    return t;
  }();
  return table;
}

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (levels < 1 || levels > 8) fail("levels must lie in [1, 8]");
  if (n < 2 || n % 2 != 0) fail("n must be even and at least 2");
  if (!(theta > 0 && theta <= 1)) fail("theta must lie in (0, 1]");
  if (order < 2 || order > 3) fail("order must be 2 or 3");
  if (localities < 1 || localities > 64) fail("localities must lie in [1, 64]");
  if (workers < 1) fail("workers must be at least 1");
  if (streams < 0) fail("streams must be non-negative");
  if (steps < 0) fail("steps must be non-negative");
  if (!(cfl > 0 && cfl <= 1)) fail("cfl must lie in (0, 1]");
  if (gamma != 0 && !(gamma > 1)) fail("gamma must exceed 1");
  if (!(halo_timeout > 0)) fail("halo_timeout must be positive");
  if (output_every < 0) fail("output_every must be non-negative");
}

void set_option(RunConfig& cfg, const std::string& key, const std::string& value) {
  const std::string k = canon(key);
  const auto& t = options();
  auto it = t.find(k);
  if (it == t.end()) throw ConfigError("unknown option '" + key + "'");
  it->second.set(cfg, k, trim(value));
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream is(text);
  std::string line;
  int no = 0;
  while (std::getline(is, line)) {
    ++no;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(no) + ": expected key=value");
    out[canon(trim(line.substr(0, eq)))] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_kv(ss.str());
}

RunConfig layered_config(const std::map<std::string, std::string>& file,
                         const std::map<std::string, std::string>& cli) {
  RunConfig cfg;
  for (const auto& [k, v] : file) set_option(cfg, k, v);
  for (const auto& [k, v] : cli) set_option(cfg, k, v);
  cfg.validate();
  return cfg;
}

std::map<std::string, std::string> to_kv(const RunConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const auto& [k, o] : options()) out[k] = o.get(cfg);
  return out;
}

std::string to_kv_text(const RunConfig& cfg) {
  std::string s;
  for (const auto& [k, v] : to_kv(cfg)) s += k + "=" + v + "\n";
  return s;
}

std::vector<std::string> option_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, o] : options()) keys.push_back(k);
  return keys;
}

}  // namespace okt::harness
