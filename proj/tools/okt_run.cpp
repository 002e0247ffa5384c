// okt_run: drive one scenario through the simulated cluster.
//
//   okt_run --scenario sod --levels 3 --localities 2 --workers 4 --steps 20 --output out/
//
// Every config key is also a flag (underscores become dashes). Values layer as
// defaults < --config FILE < --set key=value < explicit flags.
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "okt/grid/checkpoint.hpp"
#include "okt/harness/cluster.hpp"
#include "okt/harness/config.hpp"
#include "okt/harness/reference.hpp"
#include "okt/harness/run.hpp"
#include "okt/harness/scenario.hpp"

using namespace okt::harness;

namespace {

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

std::vector<int> parse_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stoi(tok));
  if (out.empty()) throw ConfigError("empty list '" + s + "'");
  return out;
}

void print_summary(const RunResult& r) {
  const auto& m = r.metrics;
  std::printf("scenario %s: steps %zu (from %llu), t = %.6g\n", m.scenario.c_str(), m.steps.size(),
              static_cast<unsigned long long>(m.first_step), m.final_time);
  std::printf("localities %d, workers %d, parcelport %s, stencil %zu\n", m.config.localities, m.config.workers,
              okt::parcel::to_string(m.config.parcelport).c_str(), m.stencil_size);
  for (std::size_t l = 0; l < m.level_nodes.size(); ++l)
    std::printf("  level %zu: %zu nodes, %zu leaves\n", l, m.level_nodes[l],
                l < m.level_leaves.size() ? m.level_leaves[l] : std::size_t{0});
  std::printf("leaf updates %llu in %.3f s: %.1f sub-grids/s\n", static_cast<unsigned long long>(m.leaf_updates),
              m.elapsed_s, m.subgrids_per_s);
  if (!m.steps.empty()) {
    const auto& s = m.steps.back();
    std::printf("mass rel %.3e, energy rel %.3e", s.mass_rel, s.energy_rel);
    if (find_scenario(m.scenario).gravity)
      std::printf(", gravity force rel %.3e, torque rel %.3e", s.gravity_force_rel, s.gravity_torque_rel);
    std::printf("\n");
  }
  std::printf("parcel bytes %llu in %llu messages (matching path %llu), simulated network %.1f us\n",
              static_cast<unsigned long long>(m.bytes.total_bytes()),
              static_cast<unsigned long long>(m.bytes.messages),
              static_cast<unsigned long long>(m.bytes.matching_path_bytes), m.simulated_network_us);
  if (m.refined_on_restart) {
    double worst = 0;
    for (double c : m.refine_change) worst = std::max(worst, c);
    std::printf("refined on restart: max relative change of totals %.3e\n", worst);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Octree AMR hydro + FMM gravity on simulated localities"};
  app.set_config();  // disable CLI11's own config handling; --config is ours

  std::string config_file;
  std::vector<std::string> sets;
  std::string scale_loc, scale_work;
  bool list = false, reference = false;
  app.add_option("--config", config_file, "key=value file layered under the flags");
  app.add_option("--set", sets, "extra key=value, may repeat");
  app.add_option("--scaling-localities", scale_loc, "comma list; runs a scaling sweep");
  app.add_option("--scaling-workers", scale_work, "comma list; runs a scaling sweep");
  app.add_flag("--list-scenarios", list, "print the scenario library and exit");
  app.add_flag("--reference", reference, "compare the final state with the scenario's reference");

  const auto keys = option_keys();
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> opts;
  const RunConfig defaults;
  const auto dkv = to_kv(defaults);
  for (const auto& k : keys) {
    auto it = dkv.find(k);
    opts[k] = app.add_option(flag_name(k), values[k], "default " + (it != dkv.end() ? it->second : ""));
  }

  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& s : scenario_library())
      std::printf("%-16s %s\n", s.name.c_str(), s.summary.c_str());
    return 0;
  }

  try {
    std::map<std::string, std::string> file;
    if (!config_file.empty()) file = read_kv_file(config_file);
    std::map<std::string, std::string> cli;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      cli[s.substr(0, eq)] = s.substr(eq + 1);
    }
    for (const auto& [k, o] : opts)
      if (o->count() > 0) cli[k] = values[k];
    const RunConfig cfg = layered_config(file, cli);

    if (!scale_loc.empty() || !scale_work.empty()) {
      const auto locs = scale_loc.empty() ? std::vector<int>{cfg.localities} : parse_list(scale_loc);
      const auto work = scale_work.empty() ? std::vector<int>{cfg.workers} : parse_list(scale_work);
      const auto rows = scaling_sweep(cfg, locs, work);
      std::printf("localities,workers,subgrids_per_s,speedup\n");
      for (const auto& r : rows) std::printf("%d,%d,%.3f,%.3f\n", r.localities, r.workers, r.subgrids_per_s, r.speedup);
      if (!cfg.output.empty()) write_scaling_csv(cfg.output + "/scaling.csv", rows);
      return 0;
    }

    const RunResult r = run(cfg);
    print_summary(r);
    if (reference && !find_scenario(cfg.scenario).has_reference) {
      std::printf("no reference solution for %s\n", cfg.scenario.c_str());
    } else if (reference) {
      const auto rep = compare_to_reference(r.tree, cfg, r.metrics.final_time);
      for (const auto& n : rep.norms) std::printf("  %-5s L1 %.4e  Linf %.4e\n", n.field.c_str(), n.l1, n.linf);
      if (rep.norms.empty()) std::printf("  octant symmetry deviation %.3e\n", rep.symmetry);
    }
  } catch (const ConfigError& e) {
    std::cerr << "okt_run: " << e.what() << '\n';
    return 2;
  } catch (const UnknownScenario& e) {
    std::cerr << "okt_run: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "okt_run: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
