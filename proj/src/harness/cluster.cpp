#include "okt/harness/cluster.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <set>
#include <tuple>

#include "okt/fmm/multipole.hpp"
#include "okt/grid/halo.hpp"
#include "okt/parcel/serialize.hpp"
#include "okt/runtime/channel.hpp"
#include "okt/runtime/scheduler.hpp"

namespace okt::harness {

using grid::Octree;
using grid::State;
using grid::SubGrid;
using grid::TreeKey;
using parcel::Bytes;
using parcel::Reader;
using parcel::Writer;
using runtime::Future;
using runtime::Unit;

namespace {

// A fine leaf face that a coarse leaf on another locality reads for reflux.
struct FaceNeed {
  TreeKey key;
  int dir;
  int face;
  auto operator<=>(const FaceNeed&) const = default;
};

struct Plan {
  std::map<int, std::set<TreeKey>> halo_send;  // dest -> own leaves it reads
  std::map<int, std::set<TreeKey>> halo_recv;  // source -> its leaves read here
  std::map<int, std::set<FaceNeed>> flux_send;
  std::map<int, std::set<FaceNeed>> flux_recv;
};

void put_key(Writer& w, const TreeKey& k) {
  w.put<std::uint32_t>(k.level);
  for (int d = 0; d < 3; ++d) w.put<std::uint32_t>(k.idx[d]);
}

TreeKey get_key(Reader& r) {
  const auto level = r.get<std::uint32_t>();
  grid::Index3 idx;
  for (int d = 0; d < 3; ++d) idx[d] = r.get<std::uint32_t>();
  return TreeKey(level, idx);
}

std::vector<int> keys_of(const auto& m) {
  std::vector<int> v;
  for (const auto& [k, x] : m) v.push_back(k);
  return v;
}

std::vector<Plan> make_plans(const Octree& t, int P) {
  std::vector<Plan> plans(P);
  const int n = t.config().n;
  for (const auto& [k, nd] : t.nodes()) {
    if (!nd.leaf) continue;
    const int o = nd.locality;
    for (const TreeKey& d : grid::halo_dependencies(t, k)) {
      const int q = t.node(d).locality;
      if (q == o) continue;
      plans[q].halo_send[o].insert(d);
      plans[o].halo_recv[q].insert(d);
    }
    for (int dir = 0; dir < 3; ++dir)
      for (int side : {-1, 1}) {
        int off[3] = {0, 0, 0};
        off[dir] = side;
        const auto nk = t.neighbor_key(k, off[0], off[1], off[2]);
        if (!nk) continue;
        const grid::TreeNode* nb = t.find(*nk);
        if (!nb || nb->leaf) continue;
        const int dbit = side > 0 ? 0 : 1;
        const int ff = side > 0 ? 0 : n;
        const int a_ax = dir == 0 ? 1 : 0, b_ax = dir == 2 ? 1 : 2;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            const TreeKey ck = nk->child((dbit << dir) | (a << a_ax) | (b << b_ax));
            const grid::TreeNode* cn = t.find(ck);
            if (!cn || !cn->leaf) throw grid::GradednessError("fine neighbor " + ck.str() + " is not a leaf");
            const int q = cn->locality;
            if (q == o) continue;
            plans[q].flux_send[o].insert({ck, dir, ff});
            plans[o].flux_recv[q].insert({ck, dir, ff});
          }
      }
  }
  return plans;
}

std::string from_key(int src) { return "from:" + std::to_string(src); }

}  // namespace

class Locality {
  template <class F>
  auto spawn(F f) {
    return runtime::make_ready_future(Unit{}, sched_.get()).then([f = std::move(f)](Unit) mutable { return f(); });
  }
  Future<Unit> ready() { return runtime::make_ready_future(Unit{}, sched_.get()); }

 public:
  Locality(int id, const Octree& layout, const ClusterConfig& cfg, parcel::Network& net, const fmm::Stencil& st,
           Plan plan, int workers)
      : id_(id), cfg_(cfg), net_(net), st_(st), plan_(std::move(plan)), tree_(layout) {
    sched_ = std::make_unique<runtime::Scheduler>(workers, cfg.seed * 0x9e3779b97f4a7c15ULL + id + 1);
    runtime::StreamPoolConfig pc;
    pc.slots = cfg.streams;
    pc.workers = workers;
    pc.streams_per_worker = cfg.streams_per_worker;
    pool_ = std::make_unique<runtime::StreamPool>(*sched_, pc);
    inbox_.set_executor(sched_.get());
    for (int s = 0; s < net.localities(); ++s)
      if (s != id) {
        inbox_.register_key(from_key(s));
        peers_.push_back(s);
      }
    net.attach_executor(id, sched_.get());
    sched_->add_progress_hook(net.progress_hook(id));
    deliver_ = net.register_action(id, "okt.deliver", [this](const parcel::ActionContext& ctx, Bytes args) {
      // trailer: u64 phase
      if (args.size() < 8) throw parcel::SerializationError("deliver: truncated");
      std::uint64_t phase;
      std::memcpy(&phase, args.data() + args.size() - 8, 8);
      args.resize(args.size() - 8);
      inbox_.send(from_key(ctx.source), phase, std::move(args));
      return Bytes{};
    });

    for (auto& [k, nd] : tree_.nodes()) {
      if (nd.leaf && nd.locality == id) {
        owned_.push_back(k);
      } else {
        nd.grid = SubGrid();
      }
    }
    for (const auto& [src, keys] : plan_.halo_recv)
      for (const auto& k : keys) remote_.emplace(k, layout.make_grid(k));
    const int n = layout.config().n;
    for (const auto& [src, needs] : plan_.flux_recv)
      for (const auto& f : needs) {
        auto& fs = remote_flux_[f.key];
        fs.dims = {n, n, n};
        fs.F[f.dir].assign(static_cast<std::size_t>(n + 1) * n * n, State{});
      }
    for (const auto& k : owned_) {
      fluxes_[k];
      u0_[k];
      floors_[k];
      gravity_[k];
      gres_[k];
      moments_[k];
    }
    // nodes whose expansions this locality computes: own leaves and ancestors
    std::set<TreeKey> need;
    for (const auto& k : owned_) {
      TreeKey a = k;
      need.insert(a);
      while (a.level > 0) {
        a = a.parent();
        need.insert(a);
      }
    }
    for (const auto& k : need) {
      if (k.level >= by_level_.size()) by_level_.resize(k.level + 1);
      by_level_[k.level].push_back(k);
      taylor_[k];
      node_counters_[k];
    }
    for (const auto& [k, nd] : layout.nodes()) {
      if (nd.leaf) continue;
      if (k.level >= interior_by_level_.size()) interior_by_level_.resize(k.level + 1);
      interior_by_level_[k.level].push_back(k);
    }
  }

  ~Locality() {
    try {
      sched_->wait_quiescent();
    } catch (...) {
    }
    pool_.reset();
    sched_.reset();
  }

  runtime::Scheduler& sched() { return *sched_; }
  const runtime::StreamPool& pool() const { return *pool_; }
  const Octree& tree() const { return tree_; }
  const std::vector<TreeKey>& owned() const { return owned_; }
  const std::map<TreeKey, fmm::GravityBlock>& gravity_blocks() const { return gravity_; }
  const std::map<TreeKey, fmm::ConservationResiduals>& gravity_residuals() const { return gres_; }

  // With gravity the field of the current state also bounds dt; it is kept
  // for the first stage of the following step.
  Future<double> cfl_dt() {
    auto field = ready();
    if (cfg_.gravity && cfg_.hydro_enabled && !gravity_fresh_)
      field = spawn([this] {
        for (auto& [k, c] : node_counters_) c = {};
        return solve_gravity();
      });
    return std::move(field).then([this](Unit) {
      if (cfg_.gravity && cfg_.hydro_enabled) gravity_fresh_ = true;
      double dt = std::numeric_limits<double>::infinity();
      for (const auto& k : owned_) {
        const auto& g = tree_.node(k).grid;
        dt = std::min(dt, hydro::cfl_dt(g, cfg_.hydro.eos, cfg_.hydro.cfl));
        if (gravity_fresh_) dt = std::min(dt, hydro::gravity_dt(gravity_.at(k), g.h(), cfg_.hydro.cfl));
      }
      Writer w;
      w.put<double>(dt);
      std::map<int, Bytes> out;
      for (int p : peers_) out[p] = w.bytes();
      return exchange(std::move(out), peers_).then([dt](std::vector<Bytes> in) {
        double m = dt;
        for (const auto& b : in) {
          Reader r(b);
          m = std::min(m, r.get<double>());
        }
        return m;
      });
    });
  }

  Future<StepResult> step(double dt) {
    auto result = std::make_shared<StepResult>();
    result->dt = dt;
    if (!cfg_.hydro_enabled) {
      return spawn([this] {
               for (auto& [k, c] : node_counters_) c = {};
               return solve_gravity();
             })
          .then([this, result](Unit) {
        result->leaf_updates = owned_.size();
        collect_counters(*result);
        return std::move(*result);
      });
    }
    return spawn([this] {
             for (const auto& k : owned_) u0_[k] = tree_.node(k).grid;
             if (!gravity_fresh_)
               for (auto& [k, c] : node_counters_) c = {};
             for (auto& [k, f] : floors_) f = {};
             return stage(0.0);
           })
        .then([this](Unit) { return stage(0.5); })
        .then([this, result](Unit) {
          result->leaf_updates = owned_.size();
          for (const auto& [k, f] : floors_) result->floors.merge(f);
          collect_counters(*result);
          return std::move(*result);
        });
  }

  Future<Unit> gravity_only() {
    return spawn([this] {
      for (auto& [k, c] : node_counters_) c = {};
      return solve_gravity();
    });
  }

  fmm::InteractionCounters owned_counters() const {
    fmm::InteractionCounters c;
    for (const auto& [k, v] : node_counters_)
      if (tree_.node(k).locality == id_) c.merge(v);
    return c;
  }

 private:
  // Sends out[d] to every d and gathers one payload from each of `from`, in
  // `from` order; completes once the sends are acknowledged too.
  Future<std::vector<Bytes>> exchange(std::map<int, Bytes> out, const std::vector<int>& from) {
    const std::uint64_t phase = phase_++;
    std::vector<Future<Bytes>> acks;
    for (auto& [dest, body] : out) {
      body.resize(body.size() + 8);
      std::memcpy(body.data() + body.size() - 8, &phase, 8);
      acks.push_back(net_.send_action(id_, dest, deliver_, std::move(body)));
    }
    std::vector<Future<Bytes>> in;
    for (int s : from) in.push_back(inbox_.get_future(from_key(s), phase));
    auto all_acks = runtime::when_all(std::move(acks), sched_.get());
    return runtime::when_all(std::move(in), sched_.get())
        .then([acks = std::move(all_acks)](std::vector<Bytes> v) mutable {
          return std::move(acks).then([v = std::move(v)](std::vector<Bytes>) mutable { return std::move(v); });
        });
  }

  // Runs fn(key) for every key through the stream pool; device and local
  // paths are the same code.
  template <class F>
  Future<Unit> for_each(const std::string& kernel, const std::vector<TreeKey>& keys, double work, F fn) {
    std::vector<Future<Unit>> fs;
    fs.reserve(keys.size());
    for (const auto& k : keys) {
      auto body = [fn, k]() {
        fn(k);
        return Unit{};
      };
      fs.push_back(pool_->submit(kernel, work, body, body));
    }
    return runtime::when_all(std::move(fs), sched_.get()).then([](std::vector<Unit>) { return Unit{}; });
  }

  double block_work() const { return static_cast<double>(tree_.config().n) * tree_.config().n * tree_.config().n; }

  grid::NodeRef source(const TreeKey& k) const {
    const grid::TreeNode* nd = tree_.find(k);
    if (!nd) return {};
    grid::NodeRef r{true, nd->leaf, nullptr};
    if (!nd->leaf) return r;
    if (nd->locality == id_) {
      r.grid = &nd->grid;
    } else if (auto it = remote_.find(k); it != remote_.end()) {
      r.grid = &it->second;
    }
    return r;
  }

  Future<Unit> stage(double w0) {
    return halo_exchange()
        .then([this](Unit) {
          // each task writes its own ghosts and flux set, reading only interiors
          return for_each("hydro_flux", owned_, block_work(), [this](const TreeKey& k) {
            auto& g = tree_.node(k).grid;
            const grid::FieldSource src = [this](const TreeKey& q) { return source(q); };
            grid::fill_ghosts(g, k, tree_.config(), src);
            fluxes_[k] = hydro::compute_fluxes(g, cfg_.hydro.eos, k.str());
          });
        })
        .then([this](Unit) { return flux_exchange(); })
        .then([this](Unit) {
          const hydro::FluxLookup lookup = [this](const TreeKey& q) -> const hydro::FluxSet* {
            if (auto it = fluxes_.find(q); it != fluxes_.end()) return &it->second;
            if (auto it = remote_flux_.find(q); it != remote_flux_.end()) return &it->second;
            return nullptr;
          };
          for (const auto& k : owned_) hydro::reflux_block(tree_, k, fluxes_.at(k), lookup);
          const bool solve = cfg_.gravity && !gravity_fresh_;
          gravity_fresh_ = false;  // the update below changes the state
          if (solve) return solve_gravity();
          return ready();
        })
        .then([this, w0](Unit) {
          return for_each("hydro_update", owned_, block_work(), [this, w0](const TreeKey& k) {
            const fmm::GravityBlock* gb = cfg_.gravity ? &gravity_.at(k) : nullptr;
            hydro::stage_update(tree_.node(k).grid, &u0_.at(k), w0, fluxes_.at(k), gb, dt_, cfg_.hydro.eos,
                                floors_.at(k));
          });
        });
  }

 public:
  void set_dt(double dt) { dt_ = dt; }

 private:
  Future<Unit> halo_exchange() {
    const int n = tree_.config().n;
    std::map<int, Bytes> out;
    for (const auto& [dest, keys] : plan_.halo_send) {
      Writer w;
      w.put<std::uint64_t>(keys.size());
      for (const auto& k : keys) {
        put_key(w, k);
        const SubGrid& g = tree_.node(k).grid;
        for (int f = 0; f < grid::kNumFields; ++f)
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) w.put_raw(g.field(f) + g.index(i, j, 0), sizeof(double) * n);
      }
      out[dest] = std::move(w).take();
    }
    const auto from = keys_of(plan_.halo_recv);
    return exchange(std::move(out), from).then([this, n](std::vector<Bytes> in) {
      for (const auto& b : in) {
        Reader r(b);
        const auto count = r.get<std::uint64_t>();
        for (std::uint64_t c = 0; c < count; ++c) {
          const TreeKey k = get_key(r);
          SubGrid& g = remote_.at(k);
          for (int f = 0; f < grid::kNumFields; ++f)
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j) r.get_raw(&g.at(f, i, j, 0), sizeof(double) * n);
        }
      }
      return Unit{};
    });
  }

  Future<Unit> flux_exchange() {
    const int n = tree_.config().n;
    std::map<int, Bytes> out;
    for (const auto& [dest, needs] : plan_.flux_send) {
      Writer w;
      w.put<std::uint64_t>(needs.size());
      for (const auto& f : needs) {
        put_key(w, f.key);
        w.put<std::uint8_t>(static_cast<std::uint8_t>(f.dir));
        w.put<std::uint32_t>(static_cast<std::uint32_t>(f.face));
        const auto& fs = fluxes_.at(f.key);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) w.put_raw(fs.at(f.dir, f.face, a, b).data(), sizeof(State));
      }
      out[dest] = std::move(w).take();
    }
    const auto from = keys_of(plan_.flux_recv);
    return exchange(std::move(out), from).then([this, n](std::vector<Bytes> in) {
      for (const auto& b : in) {
        Reader r(b);
        const auto count = r.get<std::uint64_t>();
        for (std::uint64_t c = 0; c < count; ++c) {
          const TreeKey k = get_key(r);
          const int dir = r.get<std::uint8_t>();
          const int face = static_cast<int>(r.get<std::uint32_t>());
          auto& fs = remote_flux_.at(k);
          for (int a = 0; a < n; ++a)
            for (int bb = 0; bb < n; ++bb) r.get_raw(fs.at(dir, face, a, bb).data(), sizeof(State));
        }
      }
      return Unit{};
    });
  }

  // Moments of own leaves, all-gathered; every locality then builds the whole
  // moment tree and evaluates the expansions on the paths to its leaves.
  Future<Unit> solve_gravity() {
    return for_each("multipole", owned_, block_work(),
                    [this](const TreeKey& k) {
                      moments_[k] = std::make_shared<const fmm::MultipoleSet>(
                          fmm::leaf_moments(tree_.node(k).grid, k));
                    })
        .then([this](Unit) {
          Writer w;
          w.put<std::uint64_t>(owned_.size());
          for (const auto& k : owned_) {
            put_key(w, k);
            const auto& m = *moments_.at(k);
            w.put<std::uint64_t>(m.size());
            w.put_raw(m.data(), m.size() * sizeof(fmm::CellMultipole));
          }
          std::map<int, Bytes> out;
          for (int p : peers_) out[p] = w.bytes();
          return exchange(std::move(out), peers_);
        })
        .then([this](std::vector<Bytes> in) {
          mt_ = std::make_shared<fmm::MultipoleTree>(tree_.config(), cfg_.fmm.p);
          for (const auto& k : owned_) mt_->set(k, true, moments_.at(k));
          for (const auto& b : in) {
            Reader r(b);
            const auto count = r.get<std::uint64_t>();
            for (std::uint64_t c = 0; c < count; ++c) {
              const TreeKey k = get_key(r);
              const auto cells = r.get<std::uint64_t>();
              auto m = std::make_shared<fmm::MultipoleSet>(cells);
              r.get_raw(m->data(), cells * sizeof(fmm::CellMultipole));
              mt_->set(k, true, std::move(m));
            }
          }
          return combine_level(static_cast<int>(interior_by_level_.size()) - 1);
        })
        .then([this](Unit) { return expand_level(0); });
  }

  Future<Unit> combine_level(int level) {
    if (level < 0) return ready();
    const auto& keys = interior_by_level_[level];
    auto out = std::make_shared<std::vector<std::shared_ptr<const fmm::MultipoleSet>>>(keys.size());
    std::map<TreeKey, std::size_t> pos;
    for (std::size_t i = 0; i < keys.size(); ++i) pos[keys[i]] = i;
    return for_each("multipole", keys, block_work(),
                    [this, out, pos](const TreeKey& k) {
                      std::array<const fmm::MultipoleSet*, 8> ch;
                      for (int c = 0; c < 8; ++c) ch[c] = mt_->find(k.child(c))->mp.get();
                      (*out)[pos.at(k)] = std::make_shared<const fmm::MultipoleSet>(
                          fmm::combine_moments(k, ch, tree_.config(), cfg_.fmm.p));
                    })
        .then([this, out, level](Unit) {
          const auto& keys = interior_by_level_[level];
          for (std::size_t i = 0; i < keys.size(); ++i) mt_->set(keys[i], false, (*out)[i]);
          return combine_level(level - 1);
        });
  }

  Future<Unit> expand_level(std::size_t level) {
    if (level >= by_level_.size()) return ready();
    return for_each("fmm", by_level_[level], block_work(),
                    [this](const TreeKey& k) {
                      const bool mine = tree_.node(k).locality == id_;
                      fmm::TaylorSet own =
                          fmm::node_interactions_all(*mt_, k, st_, mine ? &node_counters_.at(k) : nullptr);
                      const fmm::TaylorSet* parent = k.level > 0 ? taylor_.at(k.parent()).get() : nullptr;
                      auto t = std::make_shared<const fmm::TaylorSet>(
                          fmm::propagate_node(*mt_, k, std::move(own), parent));
                      if (tree_.node(k).leaf) {
                        gravity_.at(k) = fmm::extract_field(*t, cfg_.fmm.G);
                        const auto& m = *moments_.at(k);
                        std::vector<fmm::PointMass> pts;
                        pts.reserve(m.size());
                        for (std::size_t l = 0; l < m.size(); ++l)
                          pts.push_back({k, static_cast<int>(l), m[l].M[0], m[l].X});
                        gres_.at(k) = fmm::conservation_residuals(pts, gravity_.at(k));
                      }
                      taylor_.at(k) = std::move(t);
                    })
        .then([this, level](Unit) { return expand_level(level + 1); });
  }

  void collect_counters(StepResult& r) const { r.interactions.merge(owned_counters()); }

  int id_;
  const ClusterConfig& cfg_;
  parcel::Network& net_;
  const fmm::Stencil& st_;
  Plan plan_;
  Octree tree_;
  std::vector<int> peers_;
  std::vector<TreeKey> owned_;
  std::uint32_t deliver_ = 0;
  std::uint64_t phase_ = 0;
  double dt_ = 0;
  runtime::Channel<Bytes> inbox_;

  std::map<TreeKey, SubGrid> remote_;
  std::map<TreeKey, hydro::FluxSet> fluxes_;
  std::map<TreeKey, hydro::FluxSet> remote_flux_;
  std::map<TreeKey, SubGrid> u0_;
  std::map<TreeKey, hydro::FloorCounts> floors_;
  std::map<TreeKey, fmm::GravityBlock> gravity_;
  bool gravity_fresh_ = false;  // gravity_ matches the current state
  std::map<TreeKey, fmm::ConservationResiduals> gres_;
  std::map<TreeKey, std::shared_ptr<const fmm::MultipoleSet>> moments_;
  std::map<TreeKey, std::shared_ptr<const fmm::TaylorSet>> taylor_;
  std::map<TreeKey, fmm::InteractionCounters> node_counters_;
  std::vector<std::vector<TreeKey>> by_level_;
  std::vector<std::vector<TreeKey>> interior_by_level_;
  std::shared_ptr<fmm::MultipoleTree> mt_;

  std::unique_ptr<runtime::Scheduler> sched_;
  std::unique_ptr<runtime::StreamPool> pool_;
};

Cluster::Cluster(const Octree& tree, ClusterConfig cfg) : cfg_(std::move(cfg)), layout_(tree) {
  if (cfg_.localities < 1) throw std::invalid_argument("cluster needs at least one locality");
  if (cfg_.workers < 1) throw std::invalid_argument("cluster needs at least one worker");
  if (!layout_.is_graded()) throw grid::GradednessError("cluster requires a graded tree");
  cfg_.fmm.validate();
  cfg_.hydro.eos.validate();
  stencil_ = fmm::generate_stencil(cfg_.fmm);
  leaves_per_loc_ = grid::partition(layout_, cfg_.localities);
  net_ = std::make_unique<parcel::Network>(cfg_.localities, cfg_.network);
  auto plans = make_plans(layout_, cfg_.localities);
  const auto wpl = workers_per_locality();
  for (int l = 0; l < cfg_.localities; ++l)
    locs_.push_back(std::make_unique<Locality>(l, layout_, cfg_, *net_, stencil_, std::move(plans[l]), wpl[l]));
}

Cluster::~Cluster() {
  // drain every locality before tearing any down: late acknowledgments
  // may still be in flight between them
  for (auto& l : locs_) {
    try {
      l->sched().wait_quiescent();
    } catch (...) {
    }
  }
  locs_.clear();
}

std::vector<int> Cluster::workers_per_locality() const {
  const int P = cfg_.localities;
  std::vector<int> w(P, cfg_.workers / P);
  for (int l = 0; l < cfg_.workers % P; ++l) ++w[l];
  for (auto& x : w) x = std::max(x, 1);
  return w;
}

template <class T>
std::vector<T> Cluster::collect(std::vector<Future<T>> fs, const std::string& what) {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(cfg_.timeout_s);
  for (std::size_t l = 0; l < fs.size(); ++l) {
    const auto left = deadline - std::chrono::steady_clock::now();
    if (!fs[l].wait_for(std::max(left, decltype(left)::zero()))) {
      std::string unready;
      for (std::size_t q = 0; q < locs_.size(); ++q)
        for (const auto& o : locs_[q]->sched().unready_origins())
          unready += "\n  locality " + std::to_string(q) + ": " + o;
      throw HaloTimeout(what + ": locality " + std::to_string(l) + " not done after " +
                        std::to_string(cfg_.timeout_s) + " s; waiting on:" + (unready.empty() ? " (none)" : unready));
    }
  }
  std::vector<T> out;
  for (auto& f : fs) out.push_back(f.get());
  return out;
}

double Cluster::cfl_dt() {
  std::vector<Future<double>> fs;
  for (auto& l : locs_) fs.push_back(l->cfl_dt());
  const auto v = collect(std::move(fs), "cfl reduction");
  // every locality reduced the same values
  for (double d : v)
    if (d != v.front()) throw std::logic_error("cfl reduction disagrees between localities");
  return v.front();
}

StepResult Cluster::step(double dt) {
  std::vector<Future<StepResult>> fs;
  for (auto& l : locs_) {
    l->set_dt(dt);
    fs.push_back(l->step(dt));
  }
  const auto v = collect(std::move(fs), "step");
  StepResult r;
  r.dt = dt;
  for (const auto& s : v) {
    r.leaf_updates += s.leaf_updates;
    r.floors.merge(s.floors);
    r.interactions.merge(s.interactions);
  }
  return r;
}

fmm::GravityField Cluster::gravity() {
  std::vector<Future<Unit>> fs;
  for (auto& l : locs_) fs.push_back(l->gravity_only());
  collect(std::move(fs), "gravity");
  fmm::GravityField out;
  for (auto& l : locs_) {
    for (const auto& [k, b] : l->gravity_blocks()) out.leaves.emplace(k, b);
    out.counters.merge(l->owned_counters());
  }
  return out;
}

Octree Cluster::gather() const {
  Octree t = layout_;
  for (const auto& l : locs_)
    for (const auto& k : l->owned()) t.node(k).grid = l->tree().node(k).grid;
  t.restrict_all();
  return t;
}

std::map<TreeKey, LeafReport> Cluster::reports() const {
  std::map<TreeKey, LeafReport> out;
  for (const auto& l : locs_) {
    const int n = layout_.config().n;
    for (const auto& k : l->owned()) {
      const auto& g = l->tree().node(k).grid;
      auto& r = out[k];
      r.totals = g.totals();
      for (int d = 0; d < 3; ++d)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int q = 0; q < n; ++q) r.momentum_abs += std::fabs(g.at(grid::kSx + d, i, j, q)) * g.cell_volume();
    }
    for (const auto& [k, g] : l->gravity_residuals()) out[k].gravity = g;
  }
  return out;
}

std::vector<std::map<std::string, runtime::KernelCounters>> Cluster::stream_counters() const {
  std::vector<std::map<std::string, runtime::KernelCounters>> out;
  for (const auto& l : locs_) out.push_back(l->pool().counters());
  return out;
}

}  // namespace okt::harness
