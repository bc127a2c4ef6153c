#include "mecmfg/des.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <future>
#include <queue>
#include <thread>

namespace mecmfg::des {

namespace {

// ---------------------------------------------------------------------------
// Deterministic per-stream RNG: xoshiro256++ seeded via splitmix64 from a
// (seed, ue, class, purpose) key, so changing one rate never perturbs the
// other streams (common random numbers across sweeps).
// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    for (auto& word : state_) word = splitmix64(seed);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform on (0, 1]
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform01()) / rate; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

enum Purpose : std::uint64_t { kArrival = 0, kRouting = 1, kLocalService = 2, kEsService = 3 };

std::uint64_t mix_key(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  return splitmix64(h);
}

Xoshiro256pp make_stream(std::uint64_t seed, std::uint64_t ue, std::uint64_t cls,
                         std::uint64_t purpose) {
  return Xoshiro256pp(mix_key(mix_key(mix_key(seed, ue), cls), purpose));
}

// ---------------------------------------------------------------------------

enum class EventKind : std::uint8_t { Arrival, LocalDone, EsDone };

struct Event {
  double time;
  std::uint64_t seq;  // insertion order; deterministic tie-break
  EventKind kind;
  std::uint32_t ue;
  std::uint32_t cls;
  std::uint64_t epoch;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

struct Packet {
  int cls = 0;
  int owner = 0;
  double gen = 0.0;
};

struct Server {
  bool occupied = false;
  Packet packet;
  std::uint64_t epoch = 0;
  double busy_since = 0.0;
};

struct StreamAccum {
  double fresh_gen = 0.0;
  double seg_start = 0.0;
  double integral = 0.0;              // post-warmup total
  std::vector<double> batch_integral; // per batch
};

void check_config(const SimConfig& config) {
  const int n = config.system.num_ues;
  if (n < 1) throw InvalidConfigError("num_ues must be >= 1");
  if (!(config.system.es_rate > 0.0)) throw InvalidConfigError("es_rate must be positive");
  if (config.horizon.has_value() == config.event_budget.has_value()) {
    throw InvalidConfigError("exactly one stopping rule (horizon or event budget) required");
  }
  if (config.horizon && !(*config.horizon > 0.0)) {
    throw InvalidConfigError("horizon must be positive");
  }
  if (config.event_budget && *config.event_budget < 1) {
    throw InvalidConfigError("event budget must be positive");
  }
  if (!(config.warmup_fraction >= 0.0 && config.warmup_fraction < 1.0)) {
    throw InvalidConfigError("warmup_fraction must lie in [0, 1)");
  }
  if (config.batches < 1) throw InvalidConfigError("batches must be >= 1");
  if (static_cast<int>(config.policies.size()) != n ||
      static_cast<int>(config.ue_profile.size()) != n) {
    throw InvalidConfigError("one policy and one profile index per UE required");
  }
  for (int i = 0; i < n; ++i) {
    const int prof = config.ue_profile[static_cast<std::size_t>(i)];
    if (prof < 0 || prof >= static_cast<int>(config.system.profiles.size())) {
      throw InvalidConfigError("ue_profile index out of range");
    }
    const auto& policy = config.policies[static_cast<std::size_t>(i)];
    const auto& profile = config.system.profiles[static_cast<std::size_t>(prof)];
    for (TaskClass c : kTaskClasses) {
      if (!(profile.arrival_rates[c] > 0.0)) {
        throw InvalidConfigError("arrival rates must be positive");
      }
      if (!(policy.p[c] >= 0.0 && policy.p[c] <= 1.0)) {
        throw InvalidConfigError("local probabilities must lie in [0, 1]");
      }
    }
    if (!(policy.mu0 >= 0.0 && policy.mu0 <= profile.f_max)) {
      throw InvalidConfigError("mu0 must lie in [0, f_max]");
    }
  }
}

class Simulation {
 public:
  explicit Simulation(const SimConfig& config) : cfg_(config), n_(config.system.num_ues) {
    const int b = cfg_.batches;
    locals_.assign(static_cast<std::size_t>(n_), Server{});
    streams_.assign(static_cast<std::size_t>(n_) * 3, StreamAccum{});
    for (auto& s : streams_) s.batch_integral.assign(static_cast<std::size_t>(b), 0.0);
    local_busy_.assign(static_cast<std::size_t>(n_) * 3, 0.0);
    batch_local_busy_.assign(static_cast<std::size_t>(n_) * 3 * static_cast<std::size_t>(b), 0.0);
    delivered_.assign(static_cast<std::size_t>(n_) * 3, 0);
    preempted_.assign(static_cast<std::size_t>(n_) * 3, 0);
    blocked_.assign(static_cast<std::size_t>(n_) * 3, 0);
    es_busy_.assign(3, 0.0);
    batch_bounds_.assign(static_cast<std::size_t>(b), 0.0);
    for (int u = 0; u < n_; ++u) {
      for (int c = 0; c < 3; ++c) {
        arrival_rng_.push_back(make_stream(cfg_.rng_seed, static_cast<std::uint64_t>(u),
                                           static_cast<std::uint64_t>(c), kArrival));
        routing_rng_.push_back(make_stream(cfg_.rng_seed, static_cast<std::uint64_t>(u),
                                           static_cast<std::uint64_t>(c), kRouting));
        local_service_rng_.push_back(make_stream(cfg_.rng_seed, static_cast<std::uint64_t>(u),
                                                 static_cast<std::uint64_t>(c), kLocalService));
        es_service_rng_.push_back(make_stream(cfg_.rng_seed, static_cast<std::uint64_t>(u),
                                              static_cast<std::uint64_t>(c), kEsService));
      }
    }
  }

  SimStats run() {
    const bool time_mode = cfg_.horizon.has_value();
    const double horizon = time_mode ? *cfg_.horizon : 0.0;
    const std::uint64_t budget = time_mode ? 0 : *cfg_.event_budget;
    const double warm_time = time_mode ? cfg_.warmup_fraction * horizon : 0.0;
    const std::uint64_t warm_events =
        time_mode ? 0
                  : static_cast<std::uint64_t>(cfg_.warmup_fraction *
                                               static_cast<double>(budget));

    for (int u = 0; u < n_; ++u) {
      for (int c = 0; c < 3; ++c) {
        schedule_arrival(u, c, 0.0);
      }
    }

    double now = 0.0;
    std::uint64_t counted = 0;
    bool stats_on = false;

    while (!queue_.empty()) {
      Event ev = queue_.top();
      if (time_mode && ev.time > horizon) break;
      queue_.pop();
      assert(ev.time >= now);  // event order sanity
      now = ev.time;

      if (!stats_on) {
        const bool warm_done = time_mode ? now >= warm_time : counted >= warm_events;
        if (warm_done) {
          const double t0 = time_mode ? warm_time : now;
          start_stats(t0, time_mode, horizon, budget, warm_events);
          stats_on = true;
        }
      }
      if (stats_on && time_mode) advance_time_batches(now);

      bool real_event = true;
      switch (ev.kind) {
        case EventKind::Arrival:
          on_arrival(static_cast<int>(ev.ue), static_cast<int>(ev.cls), now);
          break;
        case EventKind::LocalDone:
          real_event = on_local_done(static_cast<int>(ev.ue), ev.epoch, now);
          break;
        case EventKind::EsDone:
          real_event = on_es_done(ev.epoch, now);
          break;
      }
      if (real_event) {
        ++counted;
        if (stats_on && !time_mode) advance_event_batches(counted, now);
        if (!time_mode && counted >= budget) break;
      }
    }

    const double end_time = time_mode ? horizon : now;
    if (!stats_on || !(end_time > stat_t0_)) {
      throw InvalidConfigError("empty measurement window after warmup");
    }
    flush_all(end_time);
    return collect(end_time, counted);
  }

 private:
  static double area(double gen, double from, double to) {
    // integral of (t - gen) over [from, to]
    return (to - from) * ((from - gen) + (to - gen)) * 0.5;
  }

  int idx(int u, int c) const { return u * 3 + c; }

  void schedule_arrival(int u, int c, double now) {
    const auto& profile =
        cfg_.system.profiles[static_cast<std::size_t>(cfg_.ue_profile[static_cast<std::size_t>(u)])];
    const double rate = profile.arrival_rates[static_cast<TaskClass>(c)];
    const double dt = arrival_rng_[static_cast<std::size_t>(idx(u, c))].exponential(rate);
    queue_.push(Event{now + dt, seq_++, EventKind::Arrival, static_cast<std::uint32_t>(u),
                      static_cast<std::uint32_t>(c), 0});
  }

  void flush_local_busy(int u, double to) {
    Server& srv = locals_[static_cast<std::size_t>(u)];
    if (!srv.occupied || !stats_started_) return;
    const double from = std::max(srv.busy_since, stat_t0_);
    if (to <= from) return;
    local_busy_[static_cast<std::size_t>(idx(u, srv.packet.cls))] += to - from;
    batch_local_busy_[static_cast<std::size_t>(
        (idx(u, srv.packet.cls)) * cfg_.batches + cur_batch_)] += to - from;
    srv.busy_since = to;
  }

  void flush_es_busy(double to) {
    if (!es_.occupied || !stats_started_) return;
    const double from = std::max(es_.busy_since, stat_t0_);
    if (to <= from) return;
    es_busy_[static_cast<std::size_t>(es_.packet.cls)] += to - from;
    es_.busy_since = to;
  }

  void flush_stream(int u, int c, double to) {
    StreamAccum& s = streams_[static_cast<std::size_t>(idx(u, c))];
    if (!stats_started_ || to <= s.seg_start) return;
    const double add = area(s.fresh_gen, s.seg_start, to);
    s.integral += add;
    s.batch_integral[static_cast<std::size_t>(cur_batch_)] += add;
    s.seg_start = to;
  }

  void flush_all(double to) {
    for (int u = 0; u < n_; ++u) {
      flush_local_busy(u, to);
      for (int c = 0; c < 3; ++c) flush_stream(u, c, to);
    }
    flush_es_busy(to);
  }

  void start_stats(double t0, bool time_mode, double horizon, std::uint64_t budget,
                   std::uint64_t warm_events) {
    stat_t0_ = t0;
    stats_started_ = true;
    cur_batch_ = 0;
    for (auto& s : streams_) s.seg_start = t0;
    for (auto& srv : locals_) srv.busy_since = std::max(srv.busy_since, t0);
    es_.busy_since = std::max(es_.busy_since, t0);
    if (time_mode) {
      const double width = (horizon - t0) / cfg_.batches;
      for (int k = 0; k < cfg_.batches; ++k) {
        batch_bounds_[static_cast<std::size_t>(k)] = t0 + width * (k + 1);
      }
    } else {
      const std::uint64_t span = budget - warm_events;
      for (int k = 0; k < cfg_.batches; ++k) {
        batch_event_bounds_.push_back(
            warm_events + span * static_cast<std::uint64_t>(k + 1) / cfg_.batches);
      }
    }
    batch_start_time_.assign(static_cast<std::size_t>(cfg_.batches), 0.0);
    batch_start_time_[0] = t0;
    batch_end_time_.assign(static_cast<std::size_t>(cfg_.batches), 0.0);
  }

  void advance_time_batches(double now) {
    while (cur_batch_ + 1 < cfg_.batches &&
           now > batch_bounds_[static_cast<std::size_t>(cur_batch_)]) {
      const double tb = batch_bounds_[static_cast<std::size_t>(cur_batch_)];
      flush_all(tb);
      batch_end_time_[static_cast<std::size_t>(cur_batch_)] = tb;
      ++cur_batch_;
      batch_start_time_[static_cast<std::size_t>(cur_batch_)] = tb;
    }
  }

  void advance_event_batches(std::uint64_t counted, double now) {
    while (cur_batch_ + 1 < cfg_.batches &&
           counted >= batch_event_bounds_[static_cast<std::size_t>(cur_batch_)]) {
      flush_all(now);
      batch_end_time_[static_cast<std::size_t>(cur_batch_)] = now;
      ++cur_batch_;
      batch_start_time_[static_cast<std::size_t>(cur_batch_)] = now;
    }
  }

  void on_arrival(int u, int c, double now) {
    schedule_arrival(u, c, now);
    const auto& policy = cfg_.policies[static_cast<std::size_t>(u)];
    const bool to_local =
        routing_rng_[static_cast<std::size_t>(idx(u, c))].uniform01() <=
        policy.p[static_cast<TaskClass>(c)];
    const Packet pkt{c, u, now};
    if (to_local) {
      Server& srv = locals_[static_cast<std::size_t>(u)];
      if (!srv.occupied || priority_of(static_cast<TaskClass>(c)) >=
                               priority_of(static_cast<TaskClass>(srv.packet.cls))) {
        if (srv.occupied) {
          ++preempted_[static_cast<std::size_t>(idx(u, srv.packet.cls))];
          flush_local_busy(u, now);
        }
        start_local_service(u, pkt, now);
      } else {
        ++blocked_[static_cast<std::size_t>(idx(u, c))];
      }
    } else {
      if (!es_.occupied || priority_of(static_cast<TaskClass>(c)) >=
                               priority_of(static_cast<TaskClass>(es_.packet.cls))) {
        if (es_.occupied) {
          ++preempted_[static_cast<std::size_t>(idx(es_.packet.owner, es_.packet.cls))];
          flush_es_busy(now);
        }
        start_es_service(pkt, now);
      } else {
        ++blocked_[static_cast<std::size_t>(idx(u, c))];
      }
    }
  }

  void start_local_service(int u, Packet pkt, double now) {
    Server& srv = locals_[static_cast<std::size_t>(u)];
    srv.occupied = true;
    srv.packet = pkt;
    srv.busy_since = now;
    ++srv.epoch;
    const double mu0 = cfg_.policies[static_cast<std::size_t>(u)].mu0;
    if (mu0 > 0.0) {
      const double dt =
          local_service_rng_[static_cast<std::size_t>(idx(u, pkt.cls))].exponential(mu0);
      queue_.push(Event{now + dt, seq_++, EventKind::LocalDone,
                        static_cast<std::uint32_t>(u), 0, srv.epoch});
    }
  }

  void start_es_service(Packet pkt, double now) {
    es_.occupied = true;
    es_.packet = pkt;
    es_.busy_since = now;
    ++es_.epoch;
    const double dt =
        es_service_rng_[static_cast<std::size_t>(idx(pkt.owner, pkt.cls))].exponential(
            cfg_.system.es_rate);
    queue_.push(Event{now + dt, seq_++, EventKind::EsDone, 0, 0, es_.epoch});
  }

  void deliver(const Packet& pkt, double now) {
    assert(pkt.gen <= now);
    StreamAccum& s = streams_[static_cast<std::size_t>(idx(pkt.owner, pkt.cls))];
    if (pkt.gen > s.fresh_gen) {  // stale deliveries never raise the age
      flush_stream(pkt.owner, pkt.cls, now);
      s.fresh_gen = pkt.gen;
    }
    ++delivered_[static_cast<std::size_t>(idx(pkt.owner, pkt.cls))];
  }

  bool on_local_done(int u, std::uint64_t epoch, double now) {
    Server& srv = locals_[static_cast<std::size_t>(u)];
    if (!srv.occupied || srv.epoch != epoch) return false;  // stale completion
    flush_local_busy(u, now);
    const Packet pkt = srv.packet;
    srv.occupied = false;
    deliver(pkt, now);
    return true;
  }

  bool on_es_done(std::uint64_t epoch, double now) {
    if (!es_.occupied || es_.epoch != epoch) return false;
    flush_es_busy(now);
    const Packet pkt = es_.packet;
    es_.occupied = false;
    deliver(pkt, now);
    return true;
  }

  SimStats collect(double end_time, std::uint64_t events) {
    batch_end_time_[static_cast<std::size_t>(cur_batch_)] = end_time;
    // merge trailing unopened batches into the last opened one
    const int used_batches = cur_batch_ + 1;
    const double span = end_time - stat_t0_;

    SimStats stats;
    stats.sim_time = end_time;
    stats.stat_time = span;
    stats.events = events;
    stats.ues.resize(static_cast<std::size_t>(n_));
    for (int c = 0; c < 3; ++c) {
      stats.es_busy_fraction[static_cast<TaskClass>(c)] =
          es_busy_[static_cast<std::size_t>(c)] / span;
    }
    for (int u = 0; u < n_; ++u) {
      UeStats& ue = stats.ues[static_cast<std::size_t>(u)];
      const auto& policy = cfg_.policies[static_cast<std::size_t>(u)];
      const auto& profile =
          cfg_.system.profiles[static_cast<std::size_t>(cfg_.ue_profile[static_cast<std::size_t>(u)])];
      double busy_total = 0.0;
      for (int c = 0; c < 3; ++c) {
        ClassStats& cs = ue.per_class[static_cast<TaskClass>(c)];
        const StreamAccum& s = streams_[static_cast<std::size_t>(idx(u, c))];
        cs.aoi = s.integral / span;
        cs.busy_fraction = local_busy_[static_cast<std::size_t>(idx(u, c))] / span;
        cs.delivered = delivered_[static_cast<std::size_t>(idx(u, c))];
        cs.preempted = preempted_[static_cast<std::size_t>(idx(u, c))];
        cs.blocked = blocked_[static_cast<std::size_t>(idx(u, c))];
        busy_total += cs.busy_fraction;

        if (used_batches >= 2) {
          cs.aoi_halfwidth = halfwidth([&](int k) {
            const double d = batch_duration(k);
            return d > 0.0 ? s.batch_integral[static_cast<std::size_t>(k)] / d : 0.0;
          }, used_batches);
          cs.busy_halfwidth = halfwidth([&](int k) {
            const double d = batch_duration(k);
            return d > 0.0
                       ? batch_local_busy_[static_cast<std::size_t>(idx(u, c) * cfg_.batches + k)] / d
                       : 0.0;
          }, used_batches);
        }
      }
      ue.busy_any = busy_total;
      ue.power = profile.eta * policy.mu0 * policy.mu0 * policy.mu0 * busy_total;
    }
    return stats;
  }

  double batch_duration(int k) const {
    return batch_end_time_[static_cast<std::size_t>(k)] -
           batch_start_time_[static_cast<std::size_t>(k)];
  }

  template <typename F>
  double halfwidth(F batch_value, int b) const {
    double mean = 0.0;
    for (int k = 0; k < b; ++k) mean += batch_value(k);
    mean /= b;
    double var = 0.0;
    for (int k = 0; k < b; ++k) {
      const double d = batch_value(k) - mean;
      var += d * d;
    }
    var /= (b - 1);
    // 97.5% Student-t quantiles for 1..30 degrees of freedom
    static constexpr double kT[31] = {
        0,      12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
        2.201,  2.179,  2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080,
        2.074,  2.069,  2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
    const int df = std::min(b - 1, 30);
    return kT[df] * std::sqrt(var / b);
  }

  SimConfig cfg_;
  int n_;
  std::priority_queue<Event, std::vector<Event>, EventLater> queue_;
  std::uint64_t seq_ = 0;
  std::vector<Server> locals_;
  Server es_;
  std::vector<Xoshiro256pp> arrival_rng_, routing_rng_, local_service_rng_, es_service_rng_;
  std::vector<StreamAccum> streams_;
  std::vector<double> local_busy_;
  std::vector<double> batch_local_busy_;
  std::vector<double> es_busy_;
  std::vector<std::uint64_t> delivered_, preempted_, blocked_;
  double stat_t0_ = 0.0;
  bool stats_started_ = false;
  int cur_batch_ = 0;
  std::vector<double> batch_bounds_;
  std::vector<std::uint64_t> batch_event_bounds_;
  std::vector<double> batch_start_time_, batch_end_time_;
};

}  // namespace

SimConfig make_symmetric_config(const SystemConfig& system,
                                const std::vector<Policy>& per_profile_policies) {
  if (per_profile_policies.size() != system.profiles.size()) {
    throw InvalidConfigError("one policy per profile required");
  }
  SimConfig config;
  config.system = system;
  const auto counts = apportion_ues(system.profiles, system.num_ues);
  for (std::size_t t = 0; t < system.profiles.size(); ++t) {
    for (int k = 0; k < counts[t]; ++k) {
      config.ue_profile.push_back(static_cast<int>(t));
      config.policies.push_back(per_profile_policies[t]);
    }
  }
  return config;
}

SimStats simulate(const SimConfig& config) {
  check_config(config);
  Simulation sim(config);
  return sim.run();
}

namespace {

void accumulate(SimStats& mean, SimStats& m2, const SimStats& x, int count) {
  // Welford over whole stat structs
  auto upd = [count](double& m, double& s, double v) {
    const double d = v - m;
    m += d / count;
    s += d * (v - m);
  };
  if (count == 1) {
    mean = x;
    m2 = x;
    // zero the m2 accumulator, reusing the layout
    for (auto& ue : m2.ues) {
      for (TaskClass c : kTaskClasses) {
        ue.per_class[c] = ClassStats{};
      }
      ue.busy_any = 0.0;
      ue.power = 0.0;
    }
    m2.es_busy_fraction = PerClass<double>{};
    m2.sim_time = m2.stat_time = 0.0;
    return;
  }
  for (std::size_t u = 0; u < mean.ues.size(); ++u) {
    for (TaskClass c : kTaskClasses) {
      auto& m = mean.ues[u].per_class[c];
      auto& s = m2.ues[u].per_class[c];
      const auto& v = x.ues[u].per_class[c];
      upd(m.aoi, s.aoi, v.aoi);
      upd(m.busy_fraction, s.busy_fraction, v.busy_fraction);
      m.aoi_halfwidth += (v.aoi_halfwidth - m.aoi_halfwidth) / count;
      m.busy_halfwidth += (v.busy_halfwidth - m.busy_halfwidth) / count;
      m.delivered += v.delivered;
      m.preempted += v.preempted;
      m.blocked += v.blocked;
    }
    upd(mean.ues[u].busy_any, m2.ues[u].busy_any, x.ues[u].busy_any);
    upd(mean.ues[u].power, m2.ues[u].power, x.ues[u].power);
  }
  for (TaskClass c : kTaskClasses) {
    upd(mean.es_busy_fraction[c], m2.es_busy_fraction[c], x.es_busy_fraction[c]);
  }
  mean.sim_time += (x.sim_time - mean.sim_time) / count;
  mean.stat_time += (x.stat_time - mean.stat_time) / count;
  mean.events += x.events;
}

void finalize_sem(SimStats& m2, int count) {
  if (count < 2) return;
  const double scale = 1.0 / (static_cast<double>(count) * (count - 1));
  auto sem = [scale](double s) { return std::sqrt(s * scale); };
  for (auto& ue : m2.ues) {
    for (TaskClass c : kTaskClasses) {
      auto& cs = ue.per_class[c];
      cs.aoi = sem(cs.aoi);
      cs.busy_fraction = sem(cs.busy_fraction);
    }
    ue.busy_any = sem(ue.busy_any);
    ue.power = sem(ue.power);
  }
  for (TaskClass c : kTaskClasses) {
    m2.es_busy_fraction[c] = sem(m2.es_busy_fraction[c]);
  }
}

}  // namespace

ReplicationSummary replicate(const SimConfig& config, int replications, int jobs) {
  if (replications < 1) throw InvalidConfigError("replications must be >= 1");
  check_config(config);
  std::vector<SimStats> runs(static_cast<std::size_t>(replications));
  const int workers = std::max(1, std::min(jobs, replications));
  if (workers == 1) {
    for (int r = 0; r < replications; ++r) {
      SimConfig rc = config;
      rc.rng_seed = config.rng_seed + static_cast<std::uint64_t>(r);
      runs[static_cast<std::size_t>(r)] = simulate(rc);
    }
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        while (true) {
          const int r = next.fetch_add(1);
          if (r >= replications) return;
          SimConfig rc = config;
          rc.rng_seed = config.rng_seed + static_cast<std::uint64_t>(r);
          runs[static_cast<std::size_t>(r)] = simulate(rc);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  ReplicationSummary summary;
  summary.replications = replications;
  for (int r = 0; r < replications; ++r) {
    accumulate(summary.mean, summary.std_error, runs[static_cast<std::size_t>(r)], r + 1);
  }
  finalize_sem(summary.std_error, replications);
  return summary;
}

}  // namespace mecmfg::des
