#include "pnclab/schedule.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>

#include "pnclab/random.hpp"

namespace pnclab {

using nlohmann::json;

std::string to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::NodeOutOfRange: return "NodeOutOfRange";
    case Violation::Kind::MessageOutOfRange: return "MessageOutOfRange";
    case Violation::Kind::NegativeTick: return "NegativeTick";
    case Violation::Kind::NonPositiveDelay: return "NonPositiveDelay";
    case Violation::Kind::EmptyHeads: return "EmptyHeads";
    case Violation::Kind::EmptyOrigins: return "EmptyOrigins";
    case Violation::Kind::DuplicateRecipient: return "DuplicateRecipient";
    case Violation::Kind::SelfTransmission: return "SelfTransmission";
    case Violation::Kind::SimultaneousSendReceive: return "SimultaneousSendReceive";
    case Violation::Kind::MessageNeverGenerated: return "MessageNeverGenerated";
    case Violation::Kind::DuplicateGeneration: return "DuplicateGeneration";
  }
  return "Unknown";
}

std::string Violation::describe() const {
  std::ostringstream os;
  os << to_string(kind);
  switch (kind) {
    case Kind::SimultaneousSendReceive: os << "(node " << node << ", tick " << tick << ")"; break;
    case Kind::MessageNeverGenerated: os << "(message " << message << ")"; break;
    case Kind::DuplicateGeneration:
      os << "(message " << message << " at node " << node << ", tick " << tick << ")";
      break;
    default: os << " in event " << event; break;
  }
  return os.str();
}

namespace {

std::string join_violations(const std::vector<Violation>& vs) {
  std::string out = "invalid schedule:";
  for (const auto& v : vs) out += " " + v.describe() + ";";
  return out;
}

}  // namespace

InvalidSchedule::InvalidSchedule(std::vector<Violation> violations)
    : std::runtime_error(join_violations(violations)), violations_(std::move(violations)) {}

std::vector<Violation> validate(const Schedule& s) {
  using Kind = Violation::Kind;
  std::vector<Violation> out;
  std::set<std::pair<NodeId, Tick>> sends;
  std::set<std::pair<NodeId, Tick>> receives;
  std::set<std::tuple<MessageId, NodeId, Tick>> generated;
  std::vector<bool> has_origin(s.k, false);

  for (std::size_t i = 0; i < s.events.size(); ++i) {
    if (const auto* tx = std::get_if<TransmitEvent>(&s.events[i])) {
      bool sender_ok = tx->sender < s.n;
      if (!sender_ok) out.push_back({Kind::NodeOutOfRange, i, tx->sender, tx->time, 0});
      if (tx->time < 0) out.push_back({Kind::NegativeTick, i, tx->sender, tx->time, 0});
      if (tx->heads.empty()) out.push_back({Kind::EmptyHeads, i, tx->sender, tx->time, 0});
      std::set<NodeId> seen;
      for (const Head& h : tx->heads) {
        if (h.to >= s.n) out.push_back({Kind::NodeOutOfRange, i, h.to, tx->time, 0});
        if (h.delay < 1) out.push_back({Kind::NonPositiveDelay, i, h.to, tx->time, 0});
        if (h.to == tx->sender) out.push_back({Kind::SelfTransmission, i, h.to, tx->time, 0});
        if (!seen.insert(h.to).second) out.push_back({Kind::DuplicateRecipient, i, h.to, tx->time, 0});
        if (h.delay >= 1) receives.insert({h.to, tx->time + h.delay});
      }
      if (sender_ok) sends.insert({tx->sender, tx->time});
    } else {
      const auto& gen = std::get<GenerateEvent>(s.events[i]);
      const bool msg_ok = gen.message < s.k;
      if (!msg_ok) out.push_back({Kind::MessageOutOfRange, i, 0, 0, gen.message});
      if (gen.origins.empty()) out.push_back({Kind::EmptyOrigins, i, 0, 0, gen.message});
      for (const Origin& o : gen.origins) {
        if (o.node >= s.n) out.push_back({Kind::NodeOutOfRange, i, o.node, o.time, gen.message});
        if (o.time < 0) out.push_back({Kind::NegativeTick, i, o.node, o.time, gen.message});
        if (!generated.insert({gen.message, o.node, o.time}).second)
          out.push_back({Kind::DuplicateGeneration, i, o.node, o.time, gen.message});
        receives.insert({o.node, o.time});
        if (msg_ok) has_origin[gen.message] = true;
      }
    }
  }

  for (const auto& st : sends)
    if (receives.contains(st)) out.push_back({Kind::SimultaneousSendReceive, 0, st.first, st.second, 0});

  for (MessageId m = 0; m < s.k; ++m)
    if (!has_origin[m]) out.push_back({Kind::MessageNeverGenerated, 0, 0, 0, m});
  return out;
}

// ---------------------------------------------------------------------------

std::uint64_t Vertex::key() const {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(role) + 1);
  h = hash_combine(h, node);
  h = hash_combine(h, static_cast<std::uint64_t>(tick));
  return hash_combine(h, slot);
}

std::string Vertex::label() const {
  switch (role) {
    case VertexRole::Supersource: return "s";
    case VertexRole::Copy: return std::to_string(node) + "@" + std::to_string(tick);
    case VertexRole::Register:
      return std::to_string(node) + "@" + std::to_string(tick) + "/r" + std::to_string(slot);
    case VertexRole::Transmitter:
      return std::to_string(node) + "@" + std::to_string(tick) + "/x" + std::to_string(slot);
  }
  return "?";
}

std::optional<VertexId> TimeExpandedHypergraph::find(NodeId v, Tick t) const {
  auto it = lookup_.find({v, t});
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

void TimeExpandedHypergraph::index() {
  lookup_.clear();
  per_node_.assign(n, {});
  for (VertexId id = 0; id < vertices.size(); ++id) {
    const Vertex& v = vertices[id];
    if (v.role != VertexRole::Copy) continue;
    lookup_[{v.node, v.tick}] = id;
    per_node_[v.node].push_back(id);
  }
}

TimeExpandedHypergraph build_hypergraph(const Schedule& s) {
  if (auto vs = validate(s); !vs.empty()) throw InvalidSchedule(std::move(vs));

  std::set<std::pair<Tick, NodeId>> copies;
  for (const Event& e : s.events) {
    if (const auto* tx = std::get_if<TransmitEvent>(&e)) {
      copies.insert({tx->time, tx->sender});
      for (const Head& h : tx->heads) copies.insert({tx->time + h.delay, h.to});
    } else {
      for (const Origin& o : std::get<GenerateEvent>(e).origins) copies.insert({o.time, o.node});
    }
  }

  TimeExpandedHypergraph g;
  g.n = s.n;
  g.k = s.k;
  g.vertices.push_back(Vertex::supersource());
  for (const auto& [t, v] : copies) g.vertices.push_back(Vertex::copy(v, t));
  g.index();

  std::vector<std::set<VertexId>> origin_heads(s.k);
  for (const Event& e : s.events)
    if (const auto* gen = std::get_if<GenerateEvent>(&e))
      for (const Origin& o : gen->origins) origin_heads[gen->message].insert(*g.find(o.node, o.time));

  for (MessageId m = 0; m < s.k; ++m) {
    TimedHyperedge h;
    h.tail = TimeExpandedHypergraph::supersource;
    h.heads.assign(origin_heads[m].begin(), origin_heads[m].end());
    h.from_supersource = true;
    h.message = m;
    g.hyperedges.push_back(std::move(h));
  }
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto* tx = std::get_if<TransmitEvent>(&s.events[i]);
    if (!tx) continue;
    TimedHyperedge h;
    h.tail = *g.find(tx->sender, tx->time);
    for (const Head& hd : tx->heads) h.heads.push_back(*g.find(hd.to, tx->time + hd.delay));
    h.event = i;
    g.hyperedges.push_back(std::move(h));
  }
  return g;
}

// ---------------------------------------------------------------------------
// JSON.

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw ScheduleParseError(std::string(where) + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ScheduleParseError(std::string(where) + ": unknown field '" + key + "'");
  }
}

template <typename T>
T required(const json& j, const char* key, const char* where) {
  if (!j.contains(key)) throw ScheduleParseError(std::string(where) + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ScheduleParseError(std::string(where) + ": field '" + key + "': " + e.what());
  }
}

}  // namespace

json to_json(const Schedule& s) {
  json events = json::array();
  for (const Event& e : s.events) {
    if (const auto* tx = std::get_if<TransmitEvent>(&e)) {
      json heads = json::array();
      for (const Head& h : tx->heads) heads.push_back({{"to", h.to}, {"delay", h.delay}});
      events.push_back({{"type", "transmit"}, {"sender", tx->sender}, {"time", tx->time}, {"heads", heads}});
    } else {
      const auto& gen = std::get<GenerateEvent>(e);
      json origins = json::array();
      for (const Origin& o : gen.origins) origins.push_back({{"node", o.node}, {"time", o.time}});
      events.push_back({{"type", "generate"}, {"message", gen.message}, {"origins", origins}});
    }
  }
  json j = {{"n", s.n}, {"k", s.k}, {"l", s.l}, {"events", events}};
  if (s.generator) j["generator"] = *s.generator;
  return j;
}

Schedule schedule_from_json(const json& j) {
  reject_unknown(j, {"n", "k", "l", "events", "generator"}, "schedule");
  Schedule s;
  s.n = required<std::size_t>(j, "n", "schedule");
  s.k = required<std::size_t>(j, "k", "schedule");
  s.l = required<std::size_t>(j, "l", "schedule");
  if (j.contains("generator")) s.generator = j.at("generator");
  const json& events = j.at("events");
  if (!events.is_array()) throw ScheduleParseError("schedule: 'events' must be an array");
  for (const json& e : events) {
    const auto type = required<std::string>(e, "type", "event");
    if (type == "transmit") {
      reject_unknown(e, {"type", "sender", "time", "heads"}, "transmit event");
      TransmitEvent tx;
      tx.sender = required<NodeId>(e, "sender", "transmit event");
      tx.time = required<Tick>(e, "time", "transmit event");
      if (!e.contains("heads") || !e.at("heads").is_array())
        throw ScheduleParseError("transmit event: 'heads' must be an array");
      for (const json& h : e.at("heads")) {
        reject_unknown(h, {"to", "delay"}, "head");
        tx.heads.push_back({required<NodeId>(h, "to", "head"), required<Tick>(h, "delay", "head")});
      }
      s.events.emplace_back(std::move(tx));
    } else if (type == "generate") {
      reject_unknown(e, {"type", "message", "origins"}, "generate event");
      GenerateEvent gen;
      gen.message = required<MessageId>(e, "message", "generate event");
      if (!e.contains("origins") || !e.at("origins").is_array())
        throw ScheduleParseError("generate event: 'origins' must be an array");
      for (const json& o : e.at("origins")) {
        reject_unknown(o, {"node", "time"}, "origin");
        gen.origins.push_back({required<NodeId>(o, "node", "origin"), required<Tick>(o, "time", "origin")});
      }
      s.events.emplace_back(std::move(gen));
    } else {
      throw ScheduleParseError("event: unknown type '" + type + "'");
    }
  }
  return s;
}

Schedule load_schedule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScheduleParseError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ScheduleParseError(path + ": " + e.what());
  }
  return schedule_from_json(j);
}

void save_schedule(const Schedule& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json(s).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Generators.

Schedule gen_line(std::size_t n, std::size_t k, std::size_t repetitions, std::size_t l) {
  if (n < 2 || k < 1 || repetitions < 1) throw std::invalid_argument("gen_line needs n >= 2, k >= 1, repetitions >= 1");
  Schedule s;
  s.n = n;
  s.k = k;
  s.l = l;
  for (MessageId m = 0; m < k; ++m) s.events.emplace_back(GenerateEvent{m, {{0, 0}}});
  // Hop h starts only after hop h-1 has finished delivering, so relays never
  // send and receive in the same tick.
  const auto period = static_cast<Tick>(repetitions + 1);
  for (NodeId h = 0; h + 1 < n; ++h)
    for (std::size_t r = 0; r < repetitions; ++r)
      s.events.emplace_back(TransmitEvent{h, 1 + h * period + static_cast<Tick>(r), {{h + 1, 1}}});
  s.generator = json{{"kind", "line"}, {"n", n}, {"k", k}, {"reps", repetitions}, {"l", l}};
  return s;
}

Schedule gen_gossip(std::size_t n, std::size_t k, std::size_t rounds, std::size_t fanout, std::uint64_t seed,
                    std::size_t l) {
  if (n < 2 || rounds < 1 || k < 1 || fanout < 1)
    throw std::invalid_argument("gen_gossip needs n >= 2, k >= 1, rounds >= 1, fanout >= 1");
  Rng rng(seed);
  Schedule s;
  s.n = n;
  s.k = k;
  s.l = l;
  for (MessageId m = 0; m < k; ++m)
    s.events.emplace_back(GenerateEvent{m, {{static_cast<NodeId>(rng.below(n)), 0}}});

  const std::size_t width = std::min(fanout, n - 1);
  // Sends on odd ticks, deliveries (and generation) on even ticks.
  for (std::size_t r = 0; r < rounds; ++r) {
    for (NodeId v = 0; v < n; ++v) {
      std::vector<NodeId> others;
      for (NodeId u = 0; u < n; ++u)
        if (u != v) others.push_back(u);
      TransmitEvent tx{v, static_cast<Tick>(2 * r + 1), {}};
      for (std::size_t i = 0; i < width; ++i) {
        const auto j = i + rng.below(others.size() - i);
        std::swap(others[i], others[j]);
        tx.heads.push_back({others[i], 1});
      }
      s.events.emplace_back(std::move(tx));
    }
  }
  s.generator = json{{"kind", "gossip"}, {"n", n},   {"k", k},          {"rounds", rounds},
                     {"fanout", fanout}, {"l", l},   {"seed", seed}};
  return s;
}

Schedule gen_random_dynamic(std::size_t n, std::size_t k, std::size_t events, Tick max_delay, std::uint64_t seed,
                            std::size_t l) {
  if (n < 2 || k < 1 || events < 1 || max_delay < 1)
    throw std::invalid_argument("gen_random_dynamic needs n >= 2, k >= 1, events >= 1, max_delay >= 1");
  Rng rng(seed);
  Schedule s;
  s.n = n;
  s.k = k;
  s.l = l;

  const Tick horizon = std::max<Tick>(6, static_cast<Tick>(3 * events / n) + 2 * max_delay);
  std::set<std::pair<NodeId, Tick>> sends;
  std::set<std::pair<NodeId, Tick>> receives;

  for (MessageId m = 0; m < k; ++m) {
    GenerateEvent gen{m, {}};
    const std::size_t count = rng.below(4) == 0 ? 2 : 1;
    for (std::size_t c = 0; c < count; ++c) {
      const Origin o{static_cast<NodeId>(rng.below(n)), rng.between(0, horizon / 4)};
      if (std::find(gen.origins.begin(), gen.origins.end(), o) != gen.origins.end()) continue;
      gen.origins.push_back(o);
      receives.insert({o.node, o.time});
    }
    s.events.emplace_back(std::move(gen));
  }

  std::vector<TransmitEvent> txs;
  const std::size_t max_width = std::min<std::size_t>(3, n - 1);
  for (std::size_t attempt = 0; txs.size() < events && attempt < 50 * events; ++attempt) {
    TransmitEvent tx{static_cast<NodeId>(rng.below(n)), rng.between(0, horizon), {}};
    if (receives.contains({tx.sender, tx.time})) continue;
    const std::size_t width = 1 + rng.below(max_width);
    std::vector<NodeId> others;
    for (NodeId u = 0; u < n; ++u)
      if (u != tx.sender) others.push_back(u);
    bool ok = true;
    for (std::size_t i = 0; i < width && ok; ++i) {
      const auto j = i + rng.below(others.size() - i);
      std::swap(others[i], others[j]);
      const Head h{others[i], rng.between(1, max_delay)};
      ok = !sends.contains({h.to, tx.time + h.delay});
      tx.heads.push_back(h);
    }
    if (!ok) continue;
    sends.insert({tx.sender, tx.time});
    for (const Head& h : tx.heads) receives.insert({h.to, tx.time + h.delay});
    txs.push_back(std::move(tx));
  }
  std::stable_sort(txs.begin(), txs.end(), [](const TransmitEvent& a, const TransmitEvent& b) {
    return std::tie(a.time, a.sender) < std::tie(b.time, b.sender);
  });
  for (auto& tx : txs) s.events.emplace_back(std::move(tx));
  s.generator = json{{"kind", "random"},         {"n", n}, {"k", k},       {"events", events},
                     {"max_delay", max_delay},   {"l", l}, {"seed", seed}};
  return s;
}

Schedule drop_uninformed_sends(const Schedule& s) {
  std::vector<Tick> informed(s.n, std::numeric_limits<Tick>::max());
  for (const Event& e : s.events)
    if (const auto* gen = std::get_if<GenerateEvent>(&e))
      for (const Origin& o : gen->origins)
        if (o.node < s.n) informed[o.node] = std::min(informed[o.node], o.time);

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < s.events.size(); ++i)
    if (std::holds_alternative<TransmitEvent>(s.events[i])) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::get<TransmitEvent>(s.events[a]).time < std::get<TransmitEvent>(s.events[b]).time;
  });

  std::vector<bool> keep(s.events.size(), true);
  for (std::size_t i : order) {
    const auto& tx = std::get<TransmitEvent>(s.events[i]);
    if (informed[tx.sender] >= tx.time) {
      keep[i] = false;
      continue;
    }
    for (const Head& h : tx.heads) informed[h.to] = std::min(informed[h.to], tx.time + h.delay);
  }

  Schedule out = s;
  out.events.clear();
  for (std::size_t i = 0; i < s.events.size(); ++i)
    if (keep[i]) out.events.push_back(s.events[i]);
  return out;
}

}  // namespace pnclab
