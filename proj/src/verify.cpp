#include "pnclab/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "pnclab/random.hpp"

namespace pnclab {

using nlohmann::json;

// ---------------------------------------------------------------------------

EquivalenceResult check_simulation_equivalence(const Schedule& s, const gf::Field& field, const gf::Matrix& messages,
                                               std::uint64_t seed) {
  return check_simulation_equivalence(s, field, messages, seed, CoefficientOracle(field, seed));
}

EquivalenceResult check_simulation_equivalence(const Schedule& s, const gf::Field& field, const gf::Matrix& messages,
                                               std::uint64_t seed, const CoefficientOracle& circuit_oracle) {
  const SimulatorTrace trace = run(s, Protocol::pnc(), field, messages, seed);
  const TimeExpandedHypergraph g = build_hypergraph(s);
  const Circuit circuit = pnc_transform(g);
  const std::vector<gf::Packet> values = evaluate(circuit, messages, circuit_oracle);

  EquivalenceResult result;
  auto diverge = [&](std::string what) {
    result.pass = false;
    result.first_divergence = std::move(what);
  };

  // Copies in (tick, node) order; the same vertex ids index both graphs.
  for (VertexId c = 1; c < g.vertices.size() && result.pass; ++c) {
    const Vertex& v = g.vertices[c];
    const std::vector<gf::Packet> store = trace.knowledge(v.node, v.tick);
    const auto& inputs = circuit.inputs[c];
    if (store.size() != inputs.size()) {
      diverge("store of " + v.label() + " holds " + std::to_string(store.size()) + " packets, circuit has " +
              std::to_string(inputs.size()) + " in-edges");
      break;
    }
    for (std::size_t j = 0; j < store.size(); ++j) {
      ++result.packets_compared;
      if (store[j] != values[inputs[j]]) {
        diverge("store of " + v.label() + " differs at position " + std::to_string(j));
        break;
      }
    }
    if (!result.pass) break;
    for (EdgeId e : circuit.outputs[c]) {
      const Hyperedge& h = circuit.graph.edges[e];
      ++result.packets_compared;
      if (trace.emitted.at(h.tag) != values[e]) {
        diverge("packet of event " + std::to_string(h.tag) + " sent by " + v.label() + " differs");
        break;
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

CutEquivalenceResult check_mincut_equivalences(const Schedule& s, Memory mu) {
  const TimeExpandedHypergraph g = build_hypergraph(s);
  CutEquivalenceResult result;
  result.mu = mu.is_unbounded() ? std::max<std::size_t>(s.k, 1) : *mu.packets;
  const Memory bounded = Memory::bounded(result.mu);

  const auto ginf = all_min_cuts(info_flow_graph(g, Memory::unbounded()));
  const auto gpnc = all_min_cuts(pnc_transform(g).graph);
  const auto gmu = all_min_cuts(info_flow_graph(g, bounded));
  const auto grec = all_min_cuts(recombinator_transform(g, result.mu).graph);
  const auto gacc = all_min_cuts(accumulator_transform(g, result.mu).graph);

  for (std::size_t i = 0; i < ginf.size(); ++i) {
    CutComparison row{ginf[i].node, ginf[i].tick, ginf[i].value, gpnc.at(i).value,
                      gmu.at(i).value, grec.at(i).value, gacc.at(i).value, true};
    row.equal = row.ginf == row.gpnc && row.gmu == row.grecomb && row.gmu == row.gacc;
    result.pass = result.pass && row.equal;
    result.rows.push_back(row);
  }
  return result;
}

// ---------------------------------------------------------------------------

Schedule GeneratorSpec::generate(std::uint64_t seed) const {
  Rng rng(seed);
  switch (kind) {
    case Kind::Line: {
      const auto n = static_cast<std::size_t>(rng.between(2, static_cast<std::int64_t>(n_max)));
      const auto k = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(k_max)));
      return gen_line(n, k, reps, l);
    }
    case Kind::Gossip: {
      const auto n = static_cast<std::size_t>(rng.between(2, static_cast<std::int64_t>(n_max)));
      const auto k = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(k_max)));
      return gen_gossip(n, k, rounds, fanout, rng.next(), l);
    }
    case Kind::Random: {
      const auto n = static_cast<std::size_t>(rng.between(2, static_cast<std::int64_t>(n_max)));
      const auto k = static_cast<std::size_t>(rng.between(1, static_cast<std::int64_t>(k_max)));
      const auto lo = static_cast<std::int64_t>(std::min(n, events_max));
      const auto events = static_cast<std::size_t>(rng.between(lo, static_cast<std::int64_t>(events_max)));
      return gen_random_dynamic(n, k, events, max_delay, rng.next(), l);
    }
  }
  throw std::logic_error("unknown generator kind");
}

json GeneratorSpec::to_json() const {
  const char* name = kind == Kind::Random ? "random" : kind == Kind::Gossip ? "gossip" : "line";
  return {{"kind", name},           {"n_max", n_max}, {"k_max", k_max},   {"events_max", events_max},
          {"max_delay", max_delay}, {"rounds", rounds}, {"fanout", fanout}, {"reps", reps},
          {"l", l}};
}

Memory MuSpec::resolve(std::size_t k) const {
  switch (kind) {
    case Kind::Fixed: return Memory::bounded(value);
    case Kind::EqualK: return Memory::bounded(std::max<std::size_t>(k, 1));
    case Kind::Unbounded: return Memory::unbounded();
  }
  return Memory::unbounded();
}

std::string MuSpec::name() const {
  switch (kind) {
    case Kind::Fixed: return std::to_string(value);
    case Kind::EqualK: return "k";
    case Kind::Unbounded: return "inf";
  }
  return "?";
}

MuSpec parse_mu(const std::string& text) {
  if (text == "inf") return MuSpec::unbounded();
  if (text == "k") return MuSpec::equal_k();
  std::size_t pos = 0;
  unsigned long v = 0;
  try {
    v = std::stoul(text, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad mu '" + text + "'");
  }
  if (pos != text.size() || v < 1) throw std::invalid_argument("bad mu '" + text + "'");
  return MuSpec::fixed(v);
}

std::optional<double> default_epsilon_target(unsigned m) {
  if (m == 16) return 0.01;
  if (m == 8) return 0.05;
  return std::nullopt;
}

json CampaignConfig::to_json() const {
  json j = {{"generator", generator.to_json()},
            {"protocol", Protocol{protocol, 0}.name()},
            {"mu", mu.name()},
            {"field", field_m},
            {"trials", trials},
            {"master_seed", master_seed},
            {"final_only", final_only},
            {"destinations", destinations}};
  j["epsilon_target"] = epsilon_target ? json(*epsilon_target) : json(nullptr);
  return j;
}

Interval wilson95(std::size_t successes, std::size_t trials) {
  if (trials == 0) return {0, 1};
  const double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1 + z * z / n;
  const double centre = (p + z * z / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double VerificationReport::success_rate() const {
  return trials == 0 ? 0.0 : static_cast<double>(trial_successes) / static_cast<double>(trials);
}

double VerificationReport::point_success_rate() const {
  return query_points == 0 ? 0.0 : static_cast<double>(point_successes) / static_cast<double>(query_points);
}

bool VerificationReport::passed() const {
  if (violations() != 0) return false;
  if (epsilon_target && success_rate() < 1.0 - *epsilon_target) return false;
  return true;
}

json VerificationReport::summary() const {
  const Interval ci = ci95();
  json j = {{"config", config},
            {"trials", trials},
            {"success_rate", success_rate()},
            {"epsilon_hat", epsilon_hat()},
            {"point_success_rate", point_success_rate()},
            {"query_points", query_points},
            {"bound_observations", bound_observations},
            {"violations", violations()},
            {"bound_violations", bound_violations},
            {"consistency_violations", consistency_violations},
            {"ci95", {ci.lo, ci.hi}},
            {"passed", passed()}};
  return j;
}

std::string VerificationReport::records_csv() const {
  std::ostringstream os;
  os << "# config: " << config.dump() << '\n';
  os << "trial,seed,protocol,mu,field,node,tick,rank,min_cut,equal\n";
  for (const TrialRecord& r : records)
    os << r.trial << ',' << r.seed << ',' << r.protocol << ',' << r.mu << ',' << r.field_m << ',' << r.node << ','
       << r.tick << ',' << r.rank << ',' << r.min_cut << ',' << (r.equal ? 1 : 0) << '\n';
  return os.str();
}

namespace {

struct TrialOutcome {
  std::vector<TrialRecord> records;
  bool success = true;
  std::size_t observations = 0;
  std::size_t bound_violations = 0;
  std::size_t consistency_violations = 0;
};

TrialOutcome run_trial(const CampaignConfig& cfg, const gf::Field& field, std::size_t index) {
  const std::uint64_t seed = derive_seed(cfg.master_seed, index);
  const Schedule s = cfg.generator.generate(derive_seed(seed, 1));
  const gf::Matrix messages = random_messages(field, s.k, s.l, derive_seed(seed, 2));
  const Memory memory = cfg.protocol == ProtocolKind::Pnc ? Memory::unbounded() : cfg.mu.resolve(s.k);
  const Protocol protocol{cfg.protocol, memory.packets.value_or(0)};
  const SimulatorTrace trace = run(s, protocol, field, messages, derive_seed(seed, 3));

  const TimeExpandedHypergraph g = build_hypergraph(s);
  const auto cuts = all_min_cuts(info_flow_graph(g, memory));

  TrialOutcome out;
  for (const CutRow& row : cuts) {
    const CopyRecord& rec = trace.at(row.node, row.tick);
    ++out.observations;
    if (static_cast<std::int64_t>(rec.rank) > row.value) ++out.bound_violations;
    for (const gf::Packet& p : trace.knowledge(row.node, row.tick))
      if (!gf::is_consistent(field, p, messages)) ++out.consistency_violations;

    if (!cfg.destinations.empty() &&
        std::find(cfg.destinations.begin(), cfg.destinations.end(), row.node) == cfg.destinations.end())
      continue;
    if (cfg.final_only && g.vertices[g.copies_of(row.node).back()].tick != row.tick) continue;

    TrialRecord r;
    r.trial = index;
    r.seed = seed;
    r.protocol = protocol.name();
    r.mu = memory.packets.value_or(0);
    r.field_m = cfg.field_m;
    r.node = row.node;
    r.tick = row.tick;
    r.rank = rec.rank;
    r.min_cut = row.value;
    r.equal = static_cast<std::int64_t>(rec.rank) == row.value;
    out.success = out.success && r.equal;
    out.records.push_back(r);
  }
  for (const auto& p : trace.emitted)
    if (p && !gf::is_consistent(field, *p, messages)) ++out.consistency_violations;
  return out;
}

template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  if (workers <= 1) {
    body();
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
}

}  // namespace

VerificationReport optimality_campaign(const CampaignConfig& config) {
  const gf::Field& field = gf::Field::standard(config.field_m);
  std::vector<TrialOutcome> outcomes(config.trials);
  parallel_for(config.trials, config.workers, [&](std::size_t i) { outcomes[i] = run_trial(config, field, i); });

  VerificationReport report;
  report.config = config.to_json();
  report.epsilon_target = config.epsilon_target;
  report.trials = config.trials;
  for (TrialOutcome& o : outcomes) {
    report.trial_successes += o.success ? 1 : 0;
    report.bound_observations += o.observations;
    report.bound_violations += o.bound_violations;
    report.consistency_violations += o.consistency_violations;
    for (TrialRecord& r : o.records) {
      ++report.query_points;
      report.point_successes += r.equal ? 1 : 0;
      report.records.push_back(std::move(r));
    }
  }
  return report;
}

SimulationCampaignResult simulation_campaign(std::size_t schedules, std::size_t seeds, std::uint64_t master_seed,
                                             const GeneratorSpec& generator) {
  SimulationCampaignResult result;
  const gf::Field& field = gf::Field::standard(16);
  for (std::size_t i = 0; i < schedules; ++i) {
    const std::uint64_t sseed = derive_seed(master_seed, i);
    const Schedule s = drop_uninformed_sends(generator.generate(sseed));
    for (std::size_t j = 0; j < seeds; ++j) {
      const std::uint64_t seed = derive_seed(sseed, 100 + j);
      const gf::Matrix messages = random_messages(field, s.k, s.l, derive_seed(seed, 2));
      const EquivalenceResult r = check_simulation_equivalence(s, field, messages, seed);
      ++result.runs;
      result.packets_compared += r.packets_compared;
      if (r.pass) {
        ++result.passed;
      } else if (result.first_failure.empty()) {
        result.first_failure = "schedule " + std::to_string(i) + ", seed " + std::to_string(j) + ": " +
                               r.first_divergence;
      }
    }
  }
  return result;
}

CutsCampaignResult cuts_campaign(std::size_t schedules, const std::vector<Memory>& mus, std::uint64_t master_seed,
                                 const GeneratorSpec& generator) {
  CutsCampaignResult result;
  for (std::size_t i = 0; i < schedules; ++i) {
    const Schedule s = generator.generate(derive_seed(master_seed, i));
    ++result.schedules;
    for (const Memory& mu : mus) {
      const CutEquivalenceResult r = check_mincut_equivalences(s, mu);
      for (const CutComparison& row : r.rows) {
        ++result.comparisons;
        if (row.equal) continue;
        ++result.mismatches;
        if (result.first_failure.empty()) {
          std::ostringstream os;
          os << "schedule " << i << " mu=" << mu.name() << " at " << row.node << "@" << row.tick << ": ginf=" << row.ginf
             << " gpnc=" << row.gpnc << " gmu=" << row.gmu << " grecomb=" << row.grecomb << " gacc=" << row.gacc;
          result.first_failure = os.str();
        }
      }
    }
  }
  return result;
}

}  // namespace pnclab
