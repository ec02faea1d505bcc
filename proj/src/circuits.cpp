#include "pnclab/circuits.hpp"

#include <algorithm>
#include <istream>
#include <queue>
#include <sstream>
#include <tuple>

namespace pnclab {

std::string to_string(EdgeKind kind) {
  switch (kind) {
    case EdgeKind::Source: return "src";
    case EdgeKind::Transmission: return "tx";
    case EdgeKind::Memory: return "mem";
    case EdgeKind::Chain: return "chain";
    case EdgeKind::Read: return "read";
  }
  return "?";
}

VertexId CapacitatedHypergraph::add_vertex(const Vertex& v) {
  const auto id = static_cast<VertexId>(vertices.size());
  vertices.push_back(v);
  lookup_.emplace(v, id);
  return id;
}

EdgeId CapacitatedHypergraph::add_edge(Hyperedge e) {
  edges.push_back(std::move(e));
  return static_cast<EdgeId>(edges.size() - 1);
}

std::optional<VertexId> CapacitatedHypergraph::find(const Vertex& v) const {
  auto it = lookup_.find(v);
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

const QueryProbe& CapacitatedHypergraph::query(NodeId v, Tick t) const {
  auto it = queries.find({v, t});
  if (it == queries.end())
    throw UnknownVertex("no vertex copy " + std::to_string(v) + "@" + std::to_string(t));
  return it->second;
}

namespace {

const char* role_name(VertexRole r) {
  switch (r) {
    case VertexRole::Supersource: return "s";
    case VertexRole::Copy: return "copy";
    case VertexRole::Register: return "reg";
    case VertexRole::Transmitter: return "tx";
  }
  return "?";
}

}  // namespace

// Format, one record per line:
//   pnclab-hypergraph 1
//   n <n> k <k>
//   vertex <id> <role> <node> <tick> <slot>
//   edge <tail> <capacity> <head>... <kind>:<tag>
//   query <node> <tick> <vertex>:<combos>:<output_base>...
std::string CapacitatedHypergraph::to_edge_list() const {
  std::ostringstream os;
  os << "pnclab-hypergraph 1\n";
  os << "n " << n << " k " << k << "\n";
  for (VertexId id = 0; id < vertices.size(); ++id) {
    const Vertex& v = vertices[id];
    os << "vertex " << id << ' ' << role_name(v.role) << ' ' << v.node << ' ' << v.tick << ' ' << v.slot << '\n';
  }
  for (const Hyperedge& e : edges) {
    os << "edge " << e.tail << ' ' << e.capacity;
    for (VertexId h : e.heads) os << ' ' << h;
    os << ' ' << to_string(e.kind) << ':' << e.tag << '\n';
  }
  for (const auto& [key, probe] : queries) {
    os << "query " << key.first << ' ' << key.second;
    for (const ProbeTerm& t : probe.terms) os << ' ' << t.vertex << ':' << t.combos << ':' << t.output_base;
    os << '\n';
  }
  return os.str();
}

CapacitatedHypergraph CapacitatedHypergraph::from_edge_list(std::istream& in) {
  CapacitatedHypergraph g;
  std::string line;
  if (!std::getline(in, line) || line.rfind("pnclab-hypergraph", 0) != 0)
    throw EdgeListParseError("missing pnclab-hypergraph header");

  auto fail = [](std::size_t no, const std::string& why) {
    throw EdgeListParseError("line " + std::to_string(no) + ": " + why);
  };
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "n") {
      std::string ktag;
      if (!(ls >> g.n >> ktag >> g.k) || ktag != "k") fail(line_no, "bad size record");
    } else if (tag == "vertex") {
      VertexId id;
      std::string role;
      Vertex v;
      if (!(ls >> id >> role >> v.node >> v.tick >> v.slot)) fail(line_no, "bad vertex record");
      if (role == "s") v.role = VertexRole::Supersource;
      else if (role == "copy") v.role = VertexRole::Copy;
      else if (role == "reg") v.role = VertexRole::Register;
      else if (role == "tx") v.role = VertexRole::Transmitter;
      else fail(line_no, "unknown role " + role);
      if (id != g.vertices.size()) fail(line_no, "vertex ids must be dense and ordered");
      g.add_vertex(v);
    } else if (tag == "edge") {
      Hyperedge e;
      if (!(ls >> e.tail >> e.capacity)) fail(line_no, "bad edge record");
      std::string tok;
      while (ls >> tok) {
        if (auto colon = tok.find(':'); colon != std::string::npos) {
          const std::string kind = tok.substr(0, colon);
          e.tag = static_cast<std::uint32_t>(std::stoul(tok.substr(colon + 1)));
          if (kind == "src") e.kind = EdgeKind::Source;
          else if (kind == "tx") e.kind = EdgeKind::Transmission;
          else if (kind == "mem") e.kind = EdgeKind::Memory;
          else if (kind == "chain") e.kind = EdgeKind::Chain;
          else if (kind == "read") e.kind = EdgeKind::Read;
          else fail(line_no, "unknown edge kind " + kind);
        } else {
          e.heads.push_back(static_cast<VertexId>(std::stoul(tok)));
        }
      }
      if (e.tail >= g.vertices.size()) fail(line_no, "edge tail out of range");
      for (VertexId h : e.heads)
        if (h >= g.vertices.size()) fail(line_no, "edge head out of range");
      g.add_edge(std::move(e));
    } else if (tag == "query") {
      NodeId v;
      Tick t;
      if (!(ls >> v >> t)) fail(line_no, "bad query record");
      QueryProbe probe;
      std::string tok;
      while (ls >> tok) {
        ProbeTerm term;
        char c1, c2;
        std::istringstream ts(tok);
        if (!(ts >> term.vertex >> c1 >> term.combos >> c2 >> term.output_base) || c1 != ':' || c2 != ':')
          fail(line_no, "bad query term " + tok);
        if (term.vertex >= g.vertices.size()) fail(line_no, "query vertex out of range");
        probe.terms.push_back(term);
      }
      g.queries[{v, t}] = std::move(probe);
    } else {
      fail(line_no, "unknown record " + tag);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

namespace {

// Input order within a vertex: (arrival tick, class, a, b). Memory-like inputs
// use class 0, supersource inputs class 1 (a = message id), transmissions
// class 2 (a = sender, b = event index).
using InputKey = std::tuple<Tick, int, std::uint64_t, std::uint64_t>;

class CircuitBuilder {
 public:
  explicit CircuitBuilder(CapacitatedHypergraph g) { c_.graph = std::move(g); }

  CapacitatedHypergraph& graph() { return c_.graph; }

  EdgeId add_edge(Hyperedge e) { return c_.graph.add_edge(std::move(e)); }

  void add_input(VertexId v, EdgeId e, InputKey key) {
    if (pending_.size() <= v) pending_.resize(v + 1);
    pending_[v].push_back({key, e});
  }

  Circuit finish() {
    const std::size_t nv = c_.graph.vertices.size();
    pending_.resize(nv);
    c_.inputs.assign(nv, {});
    c_.outputs.assign(nv, {});
    for (VertexId v = 0; v < nv; ++v) {
      std::sort(pending_[v].begin(), pending_[v].end());
      for (const auto& [key, e] : pending_[v]) c_.inputs[v].push_back(e);
    }
    for (EdgeId e = 0; e < c_.graph.edges.size(); ++e) c_.outputs[c_.graph.edges[e].tail].push_back(e);
    return std::move(c_);
  }

 private:
  Circuit c_;
  std::vector<std::vector<std::pair<InputKey, EdgeId>>> pending_;
};

CapacitatedHypergraph copy_vertices(const TimeExpandedHypergraph& g) {
  CapacitatedHypergraph h;
  h.n = g.n;
  h.k = g.k;
  for (const Vertex& v : g.vertices) h.add_vertex(v);
  return h;
}

InputKey arrival_key(const TimeExpandedHypergraph& g, const TimedHyperedge& e, Tick arrival) {
  if (e.from_supersource) return {arrival, 1, e.message, 0};
  return {arrival, 2, g.vertices[e.tail].node, e.event};
}

Hyperedge plain_edge(const TimedHyperedge& e) {
  Hyperedge h;
  h.tail = e.tail;
  h.heads = e.heads;
  h.capacity = 1;
  h.kind = e.from_supersource ? EdgeKind::Source : EdgeKind::Transmission;
  h.tag = static_cast<std::uint32_t>(e.from_supersource ? e.message : e.event);
  return h;
}

}  // namespace

CapacitatedHypergraph info_flow_graph(const TimeExpandedHypergraph& g, Memory mu) {
  CapacitatedHypergraph h = copy_vertices(g);
  for (const TimedHyperedge& e : g.hyperedges) h.add_edge(plain_edge(e));
  const std::int64_t cap = mu.capacity(g.k);
  for (NodeId v = 0; v < g.n; ++v) {
    const auto& copies = g.copies_of(v);
    for (std::size_t i = 0; i + 1 < copies.size(); ++i)
      h.add_edge({copies[i], {copies[i + 1]}, cap, EdgeKind::Memory, 0});
    for (VertexId c : copies) {
      const auto combos = static_cast<std::uint32_t>(mu.is_unbounded() ? 0 : *mu.packets);
      h.queries[{v, g.vertices[c].tick}] = QueryProbe{{{c, combos, 0}}};
    }
  }
  return h;
}

Circuit pnc_transform(const TimeExpandedHypergraph& g) {
  CircuitBuilder b(copy_vertices(g));
  for (const TimedHyperedge& e : g.hyperedges) {
    Hyperedge h = plain_edge(e);
    h.heads.clear();
    // Earliest landing tick per recipient node; the closure adds every later copy.
    std::map<NodeId, Tick> first;
    for (VertexId head : e.heads) {
      const Vertex& v = g.vertices[head];
      auto [it, inserted] = first.emplace(v.node, v.tick);
      if (!inserted) it->second = std::min(it->second, v.tick);
    }
    std::vector<std::pair<VertexId, Tick>> closure;
    for (const auto& [node, tick] : first)
      for (VertexId c : g.copies_of(node))
        if (g.vertices[c].tick >= tick) closure.push_back({c, tick});
    std::sort(closure.begin(), closure.end());
    for (const auto& [c, _] : closure) h.heads.push_back(c);
    const EdgeId id = b.add_edge(std::move(h));
    for (const auto& [c, arrival] : closure) b.add_input(c, id, arrival_key(g, e, arrival));
  }
  for (NodeId v = 0; v < g.n; ++v)
    for (VertexId c : g.copies_of(v)) b.graph().queries[{v, g.vertices[c].tick}] = QueryProbe{{{c, 0, 0}}};
  return b.finish();
}

Circuit recombinator_transform(const TimeExpandedHypergraph& g, std::size_t mu) {
  if (mu < 1) throw std::invalid_argument("recombinator needs mu >= 1");
  CircuitBuilder b(copy_vertices(g));
  std::vector<std::uint32_t> sent(g.vertices.size(), 0);
  for (const TimedHyperedge& e : g.hyperedges) {
    const EdgeId id = b.add_edge(plain_edge(e));
    for (VertexId head : e.heads) b.add_input(head, id, arrival_key(g, e, g.vertices[head].tick));
    if (!e.from_supersource) ++sent[e.tail];
  }
  for (NodeId v = 0; v < g.n; ++v) {
    const auto& copies = g.copies_of(v);
    for (std::size_t i = 0; i + 1 < copies.size(); ++i)
      for (std::uint32_t slot = 0; slot < mu; ++slot) {
        const EdgeId id = b.add_edge({copies[i], {copies[i + 1]}, 1, EdgeKind::Memory, slot});
        b.add_input(copies[i + 1], id, {g.vertices[copies[i + 1]].tick, 0, slot, 0});
      }
    // Registers after tick t are mu combinations of v_t's inputs; they are
    // exactly the outgoing memory bundle when a next copy exists.
    for (VertexId c : copies)
      b.graph().queries[{v, g.vertices[c].tick}] = QueryProbe{{{c, static_cast<std::uint32_t>(mu), sent[c]}}};
  }
  return b.finish();
}

Circuit accumulator_transform(const TimeExpandedHypergraph& g, std::size_t mu) {
  if (mu < 1) throw std::invalid_argument("accumulator needs mu >= 1");
  CapacitatedHypergraph h;
  h.n = g.n;
  h.k = g.k;
  h.add_vertex(Vertex::supersource());

  // Transmissions by tail copy, in event order.
  std::vector<std::vector<const TimedHyperedge*>> sends(g.vertices.size());
  for (const TimedHyperedge& e : g.hyperedges)
    if (!e.from_supersource) sends[e.tail].push_back(&e);

  // registers[copy][slot]; copies are visited in (tick, node) order so vertex
  // ids remain a topological order.
  std::vector<std::vector<VertexId>> registers(g.vertices.size());
  std::map<std::size_t, VertexId> transmitter;  // event index -> transmitter vertex
  for (VertexId c = 1; c < g.vertices.size(); ++c) {
    const Vertex& v = g.vertices[c];
    for (std::uint32_t slot = 0; slot < mu; ++slot)
      registers[c].push_back(h.add_vertex({VertexRole::Register, v.node, v.tick, slot}));
    for (const TimedHyperedge* e : sends[c])
      transmitter[e->event] =
          h.add_vertex({VertexRole::Transmitter, v.node, v.tick, static_cast<std::uint32_t>(e->event)});
  }

  CircuitBuilder b(std::move(h));
  for (const TimedHyperedge& e : g.hyperedges) {
    Hyperedge out;
    out.kind = e.from_supersource ? EdgeKind::Source : EdgeKind::Transmission;
    out.tag = static_cast<std::uint32_t>(e.from_supersource ? e.message : e.event);
    out.tail = e.from_supersource ? CapacitatedHypergraph::supersource : transmitter.at(e.event);
    for (VertexId head : e.heads)
      for (VertexId r : registers[head]) out.heads.push_back(r);
    const EdgeId id = b.add_edge(std::move(out));
    for (VertexId head : e.heads)
      for (VertexId r : registers[head]) b.add_input(r, id, arrival_key(g, e, g.vertices[head].tick));
  }
  for (VertexId c = 1; c < g.vertices.size(); ++c) {
    const Tick t = g.vertices[c].tick;
    for (const TimedHyperedge* e : sends[c]) {
      const VertexId x = transmitter.at(e->event);
      for (std::uint32_t slot = 0; slot < mu; ++slot) {
        const EdgeId id = b.add_edge({registers[c][slot], {x}, 1, EdgeKind::Read, slot});
        b.add_input(x, id, {t, 0, slot, 0});
      }
    }
  }
  for (NodeId v = 0; v < g.n; ++v) {
    const auto& copies = g.copies_of(v);
    for (std::size_t i = 0; i + 1 < copies.size(); ++i)
      for (std::uint32_t slot = 0; slot < mu; ++slot) {
        const VertexId to = registers[copies[i + 1]][slot];
        const EdgeId id = b.add_edge({registers[copies[i]][slot], {to}, 1, EdgeKind::Chain, slot});
        b.add_input(to, id, {g.vertices[copies[i + 1]].tick, 0, slot, 0});
      }
  }

  Circuit circuit = b.finish();
  for (NodeId v = 0; v < g.n; ++v)
    for (VertexId c : g.copies_of(v)) {
      QueryProbe probe;
      for (VertexId r : registers[c])
        probe.terms.push_back({r, 1, static_cast<std::uint32_t>(circuit.outputs[r].size())});
      circuit.graph.queries[{v, g.vertices[c].tick}] = std::move(probe);
    }
  return circuit;
}

// ---------------------------------------------------------------------------

std::vector<VertexId> topological_order(const Circuit& c) {
  const auto& g = c.graph;
  std::vector<std::size_t> indegree(g.vertices.size(), 0);
  for (const Hyperedge& e : g.edges)
    for (VertexId h : e.heads) ++indegree[h];
  std::vector<VertexId> order;
  std::queue<VertexId> ready;
  for (VertexId v = 0; v < g.vertices.size(); ++v)
    if (indegree[v] == 0) ready.push(v);
  while (!ready.empty()) {
    const VertexId v = ready.front();
    ready.pop();
    order.push_back(v);
    for (EdgeId e : c.outputs[v])
      for (VertexId h : g.edges[e].heads)
        if (--indegree[h] == 0) ready.push(h);
  }
  if (order.size() != g.vertices.size()) throw CyclicCircuit();
  return order;
}

namespace {

gf::Packet combine_inputs(const Circuit& c, std::span<const gf::Packet> values, const CoefficientOracle& oracle,
                          VertexId v, std::uint32_t output, std::size_t k, std::size_t l) {
  const gf::Field& field = oracle.field();
  const std::uint64_t key = c.graph.vertices[v].key();
  gf::Packet out = gf::zero_packet(k, l);
  const auto& in = c.inputs[v];
  for (std::uint32_t j = 0; j < in.size(); ++j) gf::axpy(field, oracle(key, output, j), values[in[j]], out);
  return out;
}

}  // namespace

std::vector<gf::Packet> evaluate(const Circuit& c, const gf::Matrix& messages, const CoefficientOracle& oracle) {
  const std::size_t k = c.graph.k;
  const std::size_t l = messages.cols();
  if (messages.rows() != k) throw gf::DimensionMismatch("message matrix must have k rows");

  std::vector<gf::Packet> values(c.graph.edges.size());
  for (VertexId v : topological_order(c)) {
    const auto& outs = c.outputs[v];
    for (std::uint32_t o = 0; o < outs.size(); ++o) {
      const Hyperedge& e = c.graph.edges[outs[o]];
      if (e.kind == EdgeKind::Source)
        values[outs[o]] = gf::unit_packet(k, e.tag, messages.row(e.tag));
      else
        values[outs[o]] = combine_inputs(c, values, oracle, v, o, k, l);
    }
  }
  return values;
}

std::vector<gf::Packet> probe_packets(const Circuit& c, std::span<const gf::Packet> values,
                                      const CoefficientOracle& oracle, NodeId v, Tick t) {
  const QueryProbe& probe = c.graph.query(v, t);
  const std::size_t k = c.graph.k;
  std::size_t l = 0;
  if (!values.empty()) l = values.front().payload.size();
  std::vector<gf::Packet> out;
  for (const ProbeTerm& term : probe.terms) {
    if (term.combos == 0) {
      for (EdgeId e : c.inputs[term.vertex]) out.push_back(values[e]);
      continue;
    }
    for (std::uint32_t r = 0; r < term.combos; ++r)
      out.push_back(combine_inputs(c, values, oracle, term.vertex, term.output_base + r, k, l));
  }
  return out;
}

gf::Matrix transfer_matrix(const Circuit& c, const CoefficientOracle& oracle, std::span<const EdgeId> edges) {
  const std::size_t k = c.graph.k;
  const auto values = evaluate(c, gf::Matrix(k, 0), oracle);
  gf::Matrix t(k, edges.size());
  for (std::size_t j = 0; j < edges.size(); ++j)
    for (std::size_t i = 0; i < k; ++i) t.at(i, j) = values.at(edges[j]).header[i];
  return t;
}

}  // namespace pnclab
