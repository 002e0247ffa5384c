#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "okt/parcel/network.hpp"

namespace okt::harness {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class RestartRefine { None, All, Scenario };

// Every run parameter. Layering: defaults, then a key=value file, then CLI
// flags; keys are the long flag names with '-' or '_'.
struct RunConfig {
  std::string scenario = "sod";
  int levels = 2;
  int n = 8;
  double theta = 0.5;
  int order = 3;
  double G = 1.0;
  int localities = 1;
  int workers = 1;
  int streams = 128;
  int streams_per_worker = 0;
  parcel::Backend parcelport = parcel::Backend::OneSided;
  std::size_t eager_threshold = 4096;
  int steps = 10;            // total step index to reach, counting restored steps
  double end_time = 0.0;     // 0: no time limit
  std::uint64_t seed = 1;
  double cfl = 0.4;
  double gamma = 0.0;        // 0: scenario default
  double halo_timeout = 120; // seconds a step may wait on remote data
  std::string output;        // directory; empty disables file output
  int output_every = 0;      // field dump cadence in steps; 0: final only
  std::string checkpoint;    // file written at checkpoint_step (or the end)
  int checkpoint_step = -1;
  std::string restart;
  RestartRefine restart_refine = RestartRefine::None;

  // scenario knobs
  double e0 = 1.0;              // sedov deposit
  double refine_fraction = 0.35;
  double star_radius = 0.25;
  double star_rho = 1.0;
  double star_speed = 0.0;      // star_in_motion overrides with its default
  double blob_separation = 0.4;
  double blob_sigma = 0.06;
  double blob_mass = 1.0;
  double sod_rho_l = 1.0, sod_p_l = 1.0, sod_rho_r = 0.125, sod_p_r = 0.1;

  void validate() const;
};

// Sets one key. Throws ConfigError naming the key on unknown keys or bad
// values.
void set_option(RunConfig& cfg, const std::string& key, const std::string& value);

// key=value lines; '#' starts a comment; blank lines ignored.
std::map<std::string, std::string> parse_kv(const std::string& text);
std::map<std::string, std::string> read_kv_file(const std::string& path);

RunConfig layered_config(const std::map<std::string, std::string>& file,
                         const std::map<std::string, std::string>& cli);

// All keys and their current values, in a form set_option accepts.
std::map<std::string, std::string> to_kv(const RunConfig& cfg);
std::string to_kv_text(const RunConfig& cfg);

std::vector<std::string> option_keys();

}  // namespace okt::harness
