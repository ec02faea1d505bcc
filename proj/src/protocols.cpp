#include "pnclab/protocols.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <tuple>

#include "pnclab/random.hpp"

namespace pnclab {

std::string Protocol::name() const {
  switch (kind) {
    case ProtocolKind::Pnc: return "pnc";
    case ProtocolKind::Recombinator: return "recomb";
    case ProtocolKind::Accumulator: return "acc";
  }
  return "?";
}

ProtocolKind parse_protocol_kind(const std::string& name) {
  if (name == "pnc") return ProtocolKind::Pnc;
  if (name == "recomb") return ProtocolKind::Recombinator;
  if (name == "acc") return ProtocolKind::Accumulator;
  throw std::invalid_argument("unknown protocol '" + name + "'");
}

void SimulatorTrace::index() {
  lookup_.clear();
  for (std::size_t i = 0; i < copies.size(); ++i) lookup_[{copies[i].node, copies[i].tick}] = i;
}

const CopyRecord& SimulatorTrace::at(NodeId v, Tick t) const {
  auto it = lookup_.find({v, t});
  if (it == lookup_.end()) throw UnknownVertex("no vertex copy " + std::to_string(v) + "@" + std::to_string(t));
  return copies[it->second];
}

std::vector<gf::Packet> SimulatorTrace::knowledge(NodeId v, Tick t) const {
  const CopyRecord& rec = at(v, t);
  if (protocol.bounded()) return rec.registers;
  const auto& store = stores.at(v);
  return {store.begin(), store.begin() + static_cast<std::ptrdiff_t>(rec.store_size)};
}

namespace {

// One packet arriving at a copy: a generated message or a transmission.
struct Arrival {
  std::tuple<int, std::uint64_t, std::uint64_t> order;
  const TimedHyperedge* edge;
};

class Simulator {
 public:
  Simulator(const Schedule& s, Protocol protocol, const gf::Field& field, const gf::Matrix& messages,
            std::uint64_t seed)
      : s_(s), protocol_(protocol), field_(field), messages_(messages), oracle_(field, seed), g_(build_hypergraph(s)) {
    if (messages.rows() != s.k) throw gf::DimensionMismatch("message matrix must have k rows");
    if (protocol.bounded() && protocol.mu < 1) throw std::invalid_argument("bounded protocols need mu >= 1");
    k_ = s.k;
    l_ = messages.cols();

    arrivals_.resize(g_.vertices.size());
    sends_.resize(g_.vertices.size());
    for (const TimedHyperedge& e : g_.hyperedges) {
      for (VertexId head : e.heads) {
        Arrival a{e.from_supersource ? std::tuple<int, std::uint64_t, std::uint64_t>{1, e.message, 0}
                                     : std::tuple<int, std::uint64_t, std::uint64_t>{2, g_.vertices[e.tail].node, e.event},
                  &e};
        arrivals_[head].push_back(a);
      }
      if (!e.from_supersource) sends_[e.tail].push_back(&e);
    }
    for (auto& list : arrivals_)
      std::sort(list.begin(), list.end(), [](const Arrival& a, const Arrival& b) { return a.order < b.order; });
  }

  SimulatorTrace run() {
    trace_.protocol = protocol_;
    trace_.n = s_.n;
    trace_.k = k_;
    trace_.l = l_;
    trace_.emitted.assign(s_.events.size(), std::nullopt);
    trace_.stores.assign(s_.n, {});
    trace_.final_decodable.assign(s_.n, k_ == 0);
    generated_.assign(s_.n, std::vector<bool>(k_, false));
    registers_.assign(s_.n, {});
    if (protocol_.kind == ProtocolKind::Accumulator)
      for (auto& regs : registers_) regs.assign(protocol_.mu, gf::zero_packet(k_, l_));

    for (VertexId c = 1; c < g_.vertices.size(); ++c) {
      switch (protocol_.kind) {
        case ProtocolKind::Pnc: step_pnc(c); break;
        case ProtocolKind::Recombinator: step_recombinator(c); break;
        case ProtocolKind::Accumulator: step_accumulator(c); break;
      }
    }
    trace_.index();
    for (NodeId v = 0; v < s_.n; ++v) {
      const auto& copies = g_.copies_of(v);
      if (!copies.empty()) trace_.final_decodable[v] = trace_.at(v, g_.vertices[copies.back()].tick).decodable;
    }
    return std::move(trace_);
  }

 private:
  gf::Packet packet_of(const Arrival& a) const {
    if (a.edge->from_supersource) return gf::unit_packet(k_, a.edge->message, messages_.row(a.edge->message));
    return *trace_.emitted[a.edge->event];
  }

  gf::Packet combine(std::uint64_t key, std::uint32_t output, const std::vector<gf::Packet>& inputs) const {
    gf::Packet out = gf::zero_packet(k_, l_);
    for (std::uint32_t j = 0; j < inputs.size(); ++j) gf::axpy(field_, oracle_(key, output, j), inputs[j], out);
    return out;
  }

  void record(VertexId c, const std::vector<gf::Packet>& knowledge, std::size_t store_size,
              std::vector<gf::Packet> registers) {
    const Vertex& v = g_.vertices[c];
    CopyRecord rec;
    rec.node = v.node;
    rec.tick = v.tick;
    rec.rank = gf::header_rank(field_, knowledge, k_);
    rec.decodable = rec.rank == k_;
    rec.store_size = store_size;
    rec.registers = std::move(registers);
    trace_.copies.push_back(std::move(rec));
  }

  // Store every received packet verbatim; send combinations of the whole
  // store with coefficients drawn in reception order.
  void step_pnc(VertexId c) {
    const Vertex& v = g_.vertices[c];
    auto& store = trace_.stores[v.node];
    for (const Arrival& a : arrivals_[c]) {
      if (a.edge->from_supersource) {
        if (generated_[v.node][a.edge->message]) continue;
        generated_[v.node][a.edge->message] = true;
      }
      store.push_back(packet_of(a));
    }
    const std::uint64_t key = v.key();
    for (std::uint32_t o = 0; o < sends_[c].size(); ++o) trace_.emitted[sends_[c][o]->event] = combine(key, o, store);
    record(c, store, store.size(), {});
  }

  // Inputs are the registers (absent before the node's first copy) followed
  // by this tick's arrivals; transmissions and the refreshed registers are
  // independent combinations of the same inputs.
  void step_recombinator(VertexId c) {
    const Vertex& v = g_.vertices[c];
    std::vector<gf::Packet> inputs = registers_[v.node];
    for (const Arrival& a : arrivals_[c]) inputs.push_back(packet_of(a));
    const std::uint64_t key = v.key();
    const auto sent = static_cast<std::uint32_t>(sends_[c].size());
    for (std::uint32_t o = 0; o < sent; ++o) trace_.emitted[sends_[c][o]->event] = combine(key, o, inputs);
    std::vector<gf::Packet> next;
    for (std::uint32_t r = 0; r < protocol_.mu; ++r) next.push_back(combine(key, sent + r, inputs));
    registers_[v.node] = next;
    record(c, next, 0, next);
  }

  // Each arrival is folded into every register with its own coefficient;
  // transmissions combine the registers.
  void step_accumulator(VertexId c) {
    const Vertex& v = g_.vertices[c];
    auto& regs = registers_[v.node];
    const std::uint64_t key = v.key();
    const auto mu = static_cast<std::uint32_t>(protocol_.mu);
    for (std::uint32_t j = 0; j < arrivals_[c].size(); ++j) {
      const gf::Packet p = packet_of(arrivals_[c][j]);
      for (std::uint32_t i = 0; i < mu; ++i) gf::axpy(field_, oracle_(key, i, j), p, regs[i]);
    }
    for (std::uint32_t o = 0; o < sends_[c].size(); ++o) trace_.emitted[sends_[c][o]->event] = combine(key, mu + o, regs);
    record(c, regs, 0, regs);
  }

  const Schedule& s_;
  Protocol protocol_;
  const gf::Field& field_;
  const gf::Matrix& messages_;
  CoefficientOracle oracle_;
  TimeExpandedHypergraph g_;
  std::size_t k_ = 0;
  std::size_t l_ = 0;

  std::vector<std::vector<Arrival>> arrivals_;
  std::vector<std::vector<const TimedHyperedge*>> sends_;
  std::vector<std::vector<bool>> generated_;
  std::vector<std::vector<gf::Packet>> registers_;
  SimulatorTrace trace_;
};

}  // namespace

SimulatorTrace run(const Schedule& s, Protocol protocol, const gf::Field& field, const gf::Matrix& messages,
                   std::uint64_t seed) {
  return Simulator(s, protocol, field, messages, seed).run();
}

std::size_t rank_at(const SimulatorTrace& trace, NodeId v, Tick t) { return trace.at(v, t).rank; }

gf::DecodeResult decode_at(const SimulatorTrace& trace, const gf::Field& field, NodeId v, Tick t) {
  return gf::decode(field, trace.knowledge(v, t), trace.k);
}

gf::Matrix random_messages(const gf::Field& field, std::size_t k, std::size_t l, std::uint64_t seed) {
  Rng rng(seed);
  gf::Matrix m(k, l);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < l; ++j) m.at(i, j) = rng.element(field);
  return m;
}

std::string trace_to_csv(const SimulatorTrace& trace) {
  std::ostringstream os;
  os << "node,tick,rank,decodable\n";
  std::vector<const CopyRecord*> rows;
  for (const CopyRecord& r : trace.copies) rows.push_back(&r);
  std::sort(rows.begin(), rows.end(), [](const CopyRecord* a, const CopyRecord* b) {
    return std::tie(a->node, a->tick) < std::tie(b->node, b->tick);
  });
  for (const CopyRecord* r : rows) os << r->node << ',' << r->tick << ',' << r->rank << ',' << (r->decodable ? 1 : 0) << '\n';
  return os.str();
}

std::string packets_to_csv(const SimulatorTrace& trace, const Schedule& s, const gf::Field& field) {
  std::ostringstream os;
  os << "hyperedge,event,sender,tick,header\n";
  const int width = static_cast<int>(field.degree() / 4);
  std::size_t hyperedge = s.k;
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto* tx = std::get_if<TransmitEvent>(&s.events[i]);
    if (!tx) continue;
    os << hyperedge++ << ',' << i << ',' << tx->sender << ',' << tx->time << ',';
    const auto& p = trace.emitted.at(i);
    for (std::size_t j = 0; p && j < p->header.size(); ++j) {
      if (j) os << ' ';
      os << std::hex << std::setw(width) << std::setfill('0') << p->header[j] << std::dec;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace pnclab
