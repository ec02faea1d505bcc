#include "pnclab/flow.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

namespace pnclab {

void FlowNetwork::add_arc(std::uint32_t from, std::uint32_t to, std::int64_t capacity) {
  if (capacity < 0) throw std::invalid_argument("negative arc capacity");
  if (from >= vertex_count_ || to >= vertex_count_) throw UnknownVertex("arc endpoint out of range");
  if (from == to) return;
  arcs_.push_back({from, to, capacity});
}

LoweredNetwork lower(const CapacitatedHypergraph& h) {
  LoweredNetwork out;
  out.network = FlowNetwork(h.vertices.size());
  out.vertex_of.resize(h.vertices.size());
  for (std::uint32_t v = 0; v < h.vertices.size(); ++v) out.vertex_of[v] = v;
  out.source = CapacitatedHypergraph::supersource;

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::int64_t> direct;
  for (const Hyperedge& e : h.edges) {
    if (e.heads.empty()) continue;
    if (e.heads.size() == 1) {
      direct[{e.tail, e.heads.front()}] += e.capacity;
      continue;
    }
    const std::uint32_t w = out.network.add_vertex();
    out.network.add_arc(e.tail, w, e.capacity);
    for (VertexId head : e.heads) out.network.add_arc(w, head, e.capacity);
  }
  for (const auto& [ends, cap] : direct) out.network.add_arc(ends.first, ends.second, cap);
  return out;
}

namespace {

class Dinic {
 public:
  explicit Dinic(const FlowNetwork& net) : adj_(net.vertex_count()) {
    for (const Arc& a : net.arcs()) {
      adj_[a.from].push_back(static_cast<std::uint32_t>(edges_.size()));
      edges_.push_back({a.to, a.capacity});
      adj_[a.to].push_back(static_cast<std::uint32_t>(edges_.size()));
      edges_.push_back({a.from, 0});
    }
  }

  std::int64_t run(std::uint32_t s, std::uint32_t t) {
    std::int64_t total = 0;
    while (bfs(s, t)) {
      next_.assign(adj_.size(), 0);
      while (std::int64_t f = dfs(s, t, std::numeric_limits<std::int64_t>::max())) total += f;
    }
    return total;
  }

 private:
  struct Residual {
    std::uint32_t to;
    std::int64_t cap;
  };

  bool bfs(std::uint32_t s, std::uint32_t t) {
    level_.assign(adj_.size(), -1);
    std::queue<std::uint32_t> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      for (std::uint32_t id : adj_[v]) {
        const Residual& r = edges_[id];
        if (r.cap > 0 && level_[r.to] < 0) {
          level_[r.to] = level_[v] + 1;
          q.push(r.to);
        }
      }
    }
    return level_[t] >= 0;
  }

  std::int64_t dfs(std::uint32_t v, std::uint32_t t, std::int64_t pushed) {
    if (v == t) return pushed;
    for (std::size_t& i = next_[v]; i < adj_[v].size(); ++i) {
      const std::uint32_t id = adj_[v][i];
      Residual& r = edges_[id];
      if (r.cap <= 0 || level_[r.to] != level_[v] + 1) continue;
      if (std::int64_t f = dfs(r.to, t, std::min(pushed, r.cap)); f > 0) {
        r.cap -= f;
        edges_[id ^ 1u].cap += f;
        return f;
      }
    }
    return 0;
  }

  std::vector<std::vector<std::uint32_t>> adj_;
  std::vector<Residual> edges_;
  std::vector<int> level_;
  std::vector<std::size_t> next_;
};

void check_endpoints(const FlowNetwork& net, std::uint32_t source, std::uint32_t sink) {
  if (source >= net.vertex_count() || sink >= net.vertex_count()) throw UnknownVertex("flow endpoint out of range");
  if (source == sink) throw std::invalid_argument("source and sink coincide");
}

std::int64_t flow_to_probe(const LoweredNetwork& lowered, const QueryProbe& probe, std::size_t k) {
  FlowNetwork net = lowered.network;
  const std::uint32_t sink = net.add_vertex();
  for (const ProbeTerm& term : probe.terms)
    net.add_arc(lowered.vertex_of.at(term.vertex), sink,
                term.combos == 0 ? static_cast<std::int64_t>(k) : static_cast<std::int64_t>(term.combos));
  return max_flow(net, lowered.source, sink);
}

}  // namespace

std::int64_t max_flow(const FlowNetwork& net, std::uint32_t source, std::uint32_t sink) {
  check_endpoints(net, source, sink);
  return Dinic(net).run(source, sink);
}

std::int64_t brute_force_max_flow(const FlowNetwork& net, std::uint32_t source, std::uint32_t sink) {
  check_endpoints(net, source, sink);
  if (net.arcs().size() > 20) throw TooLarge("brute force limited to 20 arcs");

  std::vector<std::uint32_t> free;  // vertices other than source/sink that touch an arc
  for (const Arc& a : net.arcs())
    for (std::uint32_t v : {a.from, a.to})
      if (v != source && v != sink && std::find(free.begin(), free.end(), v) == free.end()) free.push_back(v);
  if (free.size() > 24) throw TooLarge("brute force limited to 24 vertices");

  std::vector<char> source_side(net.vertex_count(), 0);
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free.size()); ++mask) {
    std::fill(source_side.begin(), source_side.end(), 0);
    source_side[source] = 1;
    for (std::size_t i = 0; i < free.size(); ++i)
      if (mask >> i & 1u) source_side[free[i]] = 1;
    std::int64_t cut = 0;
    for (const Arc& a : net.arcs())
      if (source_side[a.from] && !source_side[a.to]) cut += a.capacity;
    best = std::min(best, cut);
  }
  return best;
}

std::int64_t min_cut(const CapacitatedHypergraph& h, NodeId v, Tick t) {
  const QueryProbe& probe = h.query(v, t);
  return flow_to_probe(lower(h), probe, h.k);
}

std::vector<CutRow> all_min_cuts(const CapacitatedHypergraph& h) {
  const LoweredNetwork lowered = lower(h);
  std::vector<CutRow> rows;
  rows.reserve(h.queries.size());
  for (const auto& [key, probe] : h.queries) rows.push_back({key.first, key.second, flow_to_probe(lowered, probe, h.k)});
  return rows;
}

std::string cuts_to_csv(const std::vector<CutRow>& rows) {
  std::ostringstream os;
  os << "node,tick,cut\n";
  for (const CutRow& r : rows) os << r.node << ',' << r.tick << ',' << r.value << '\n';
  return os.str();
}

}  // namespace pnclab
