#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "pnclab/circuits.hpp"
#include "pnclab/flow.hpp"
#include "pnclab/protocols.hpp"

using namespace pnclab;

namespace {

std::vector<const Hyperedge*> of_kind(const CapacitatedHypergraph& h, EdgeKind kind) {
  std::vector<const Hyperedge*> out;
  for (const Hyperedge& e : h.edges)
    if (e.kind == kind) out.push_back(&e);
  return out;
}

std::string label(const CapacitatedHypergraph& h, VertexId v) { return h.vertices[v].label(); }

std::set<std::string> memory_edges(const CapacitatedHypergraph& h) {
  std::set<std::string> out;
  for (const Hyperedge* e : of_kind(h, EdgeKind::Memory))
    out.insert(label(h, e->tail) + ">" + label(h, e->heads.at(0)) + ":" + std::to_string(e->capacity));
  return out;
}

bool tick_monotone(const CapacitatedHypergraph& h) {
  for (const Hyperedge& e : h.edges)
    for (VertexId v : e.heads) {
      if (e.tail == 0) continue;
      const Vertex& a = h.vertices[e.tail];
      const Vertex& b = h.vertices[v];
      if (b.tick < a.tick || (b.tick == a.tick && b.role == VertexRole::Copy && a.role == VertexRole::Copy))
        return false;
    }
  return true;
}

Schedule random_schedule(std::uint64_t seed) {
  return gen_random_dynamic(2 + seed % 7, 1 + seed % 4, 10 + seed % 40, 1 + seed % 3, seed);
}

}  // namespace

TEST_CASE("information flow graph memory edges on three-send line") {
  const TimeExpandedHypergraph g = build_hypergraph(oracle::three_send_line());
  CHECK(memory_edges(info_flow_graph(g, Memory::unbounded())) ==
        std::set<std::string>{"0@0>0@1:2", "0@1>0@2:2", "0@2>0@3:2", "1@2>1@3:2", "1@3>1@4:2"});
  CHECK(memory_edges(info_flow_graph(g, Memory::bounded(1))) ==
        std::set<std::string>{"0@0>0@1:1", "0@1>0@2:1", "0@2>0@3:1", "1@2>1@3:1", "1@3>1@4:1"});
  const auto h = info_flow_graph(g, Memory::bounded(1));
  for (const Hyperedge& e : h.edges)
    if (e.kind != EdgeKind::Memory) CHECK(e.capacity == 1);
}

TEST_CASE("a node with one copy has no memory edges") {
  Schedule s;
  s.n = 2;
  s.k = 1;
  s.events = {GenerateEvent{0, {{0, 0}}}, TransmitEvent{0, 1, {{1, 1}}}};
  const TimeExpandedHypergraph g = build_hypergraph(s);
  const auto h = info_flow_graph(g, Memory::unbounded());
  for (const Hyperedge* e : of_kind(h, EdgeKind::Memory)) CHECK(h.vertices[e->tail].node == 0);
  CHECK(of_kind(recombinator_transform(g, 2).graph, EdgeKind::Memory).size() == 2);
}

TEST_CASE("PNC transform takes the memory closure") {
  const TimeExpandedHypergraph g = build_hypergraph(oracle::three_send_line());
  const Circuit c = pnc_transform(g);
  REQUIRE(c.graph.edges.size() == g.hyperedges.size());
  CHECK(of_kind(c.graph, EdgeKind::Memory).empty());
  auto heads = [&](std::size_t e) {
    std::vector<std::string> out;
    for (VertexId v : c.graph.edges[e].heads) out.push_back(label(c.graph, v));
    return out;
  };
  CHECK(heads(0) == std::vector<std::string>{"0@0", "0@1", "0@2", "0@3"});
  CHECK(heads(2) == std::vector<std::string>{"1@2", "1@3", "1@4"});
  CHECK(heads(4) == std::vector<std::string>{"1@4"});
  CHECK(min_cut(c.graph, 1, 4) == 2);
  CHECK(min_cut(info_flow_graph(g, Memory::unbounded()), 1, 4) == 2);
}

TEST_CASE("recombinator bundles") {
  const TimeExpandedHypergraph g = build_hypergraph(oracle::three_send_line());
  const Circuit c = recombinator_transform(g, 2);
  const auto mem = of_kind(c.graph, EdgeKind::Memory);
  CHECK(mem.size() == 2 * 5);
  for (const Hyperedge* e : mem) CHECK(e->capacity == 1);
  CHECK_THROWS_AS(recombinator_transform(g, 0), std::invalid_argument);

  const TimeExpandedHypergraph gb = build_hypergraph(oracle::two_send_line());
  CHECK(min_cut(recombinator_transform(gb, 1).graph, 1, 3) == 1);
}

TEST_CASE("accumulator template on two-send line") {
  const TimeExpandedHypergraph g = build_hypergraph(oracle::two_send_line());
  const Circuit c = accumulator_transform(g, 1);
  std::size_t registers_at_a = 0;
  for (const Vertex& v : c.graph.vertices)
    if (v.role == VertexRole::Register && v.node == 0) ++registers_at_a;
  CHECK(registers_at_a == g.copies_of(0).size());  // one register per copy: a single chain
  CHECK(of_kind(c.graph, EdgeKind::Chain).size() == 2 + 1);
  CHECK(min_cut(c.graph, 1, 3) == 1);
  CHECK(min_cut(info_flow_graph(g, Memory::bounded(1)), 1, 3) == 1);
  CHECK(min_cut(info_flow_graph(g, Memory::unbounded()), 1, 3) == 2);
}

TEST_CASE("transforms stay acyclic and tick monotone") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const TimeExpandedHypergraph g = build_hypergraph(random_schedule(seed));
    for (const Circuit& c : {pnc_transform(g), recombinator_transform(g, 2), accumulator_transform(g, 2)}) {
      CHECK(topological_order(c).size() == c.graph.vertices.size());
      CHECK(tick_monotone(c.graph));
      std::size_t only_out = 0;
      std::vector<bool> has_in(c.graph.vertices.size(), false);
      for (const Hyperedge& e : c.graph.edges)
        for (VertexId v : e.heads) has_in[v] = true;
      for (VertexId v = 0; v < c.graph.vertices.size(); ++v)
        if (!has_in[v] && !c.outputs[v].empty()) ++only_out;
      // Supersource plus nodes that transmit before ever receiving.
      CHECK(!has_in[0]);
      CHECK(only_out >= 1);
    }
    CHECK(pnc_transform(g).graph.edges.size() == g.hyperedges.size());
  }
}

TEST_CASE("memory never binds once mu >= k") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Schedule s = random_schedule(seed);
    const TimeExpandedHypergraph g = build_hypergraph(s);
    const auto ginf = all_min_cuts(info_flow_graph(g, Memory::unbounded()));
    const std::size_t mu = s.k + seed % 2;
    REQUIRE(all_min_cuts(info_flow_graph(g, Memory::bounded(mu))) == ginf);
    REQUIRE(all_min_cuts(recombinator_transform(g, mu).graph) == ginf);
    REQUIRE(all_min_cuts(accumulator_transform(g, mu).graph) == ginf);
  }
}

TEST_CASE("cyclic circuits are rejected") {
  Circuit c;
  c.graph.k = 1;
  c.graph.add_vertex(Vertex::supersource());
  const VertexId a = c.graph.add_vertex(Vertex::copy(0, 1));
  const VertexId b = c.graph.add_vertex(Vertex::copy(1, 2));
  c.graph.add_edge({0, {a}, 1, EdgeKind::Source, 0});
  c.graph.add_edge({a, {b}, 1, EdgeKind::Transmission, 0});
  c.graph.add_edge({b, {a}, 1, EdgeKind::Transmission, 1});
  c.inputs = {{}, {0, 2}, {1}};
  c.outputs = {{0}, {1}, {2}};
  CHECK_THROWS_AS(topological_order(c), CyclicCircuit);
  CHECK_THROWS_AS(evaluate(c, gf::Matrix(1, 1), CoefficientOracle(gf::Field::standard(4), 1)), CyclicCircuit);
}

TEST_CASE("evaluation basics") {
  const gf::Field& f = gf::Field::standard(16);
  // s -> a -> b relaying message 0 with coefficient 1.
  Circuit c;
  c.graph.n = 2;
  c.graph.k = 1;
  c.graph.add_vertex(Vertex::supersource());
  const VertexId a = c.graph.add_vertex(Vertex::copy(0, 0));
  const VertexId b = c.graph.add_vertex(Vertex::copy(1, 1));
  c.graph.add_edge({0, {a}, 1, EdgeKind::Source, 0});
  c.graph.add_edge({a, {b}, 1, EdgeKind::Transmission, 0});
  c.inputs = {{}, {0}, {1}};
  c.outputs = {{0}, {1}, {}};
  const gf::Matrix messages = gf::Matrix::from_rows({{42, 43}});

  // Find a seed whose single draw for a is 1.
  std::uint64_t seed = 0;
  while (CoefficientOracle(f, seed)(c.graph.vertices[a].key(), 0, 0) != 1) ++seed;
  const auto values = evaluate(c, messages, CoefficientOracle(f, seed));
  CHECK(values[1] == gf::Packet{{1}, {42, 43}});

  // All-zero coefficients: only GF(2^4) makes such a seed easy to find.
  const gf::Field& f4 = gf::Field::standard(4);
  seed = 0;
  while (CoefficientOracle(f4, seed)(c.graph.vertices[a].key(), 0, 0) != 0) ++seed;
  CHECK(evaluate(c, messages, CoefficientOracle(f4, seed))[1].is_zero());
  CHECK_THROWS_AS(evaluate(c, gf::Matrix(2, 1), CoefficientOracle(f, 0)), gf::DimensionMismatch);
}

TEST_CASE("evaluation is deterministic and consistent") {
  const gf::Field& f = gf::Field::standard(8);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Schedule s = random_schedule(seed);
    const TimeExpandedHypergraph g = build_hypergraph(s);
    const gf::Matrix messages = random_messages(f, s.k, 3, seed);
    for (const Circuit& c : {pnc_transform(g), recombinator_transform(g, 2), accumulator_transform(g, 1)}) {
      const CoefficientOracle oracle(f, seed);
      const auto values = evaluate(c, messages, oracle);
      CHECK(values == evaluate(c, messages, oracle));
      for (const gf::Packet& p : values) REQUIRE(gf::is_consistent(f, p, messages));
    }
  }
}

TEST_CASE("transfer matrix") {
  const gf::Field& f = gf::Field::standard(16);
  const TimeExpandedHypergraph g = build_hypergraph(gen_random_dynamic(5, 3, 30, 2, 4));
  const Circuit c = pnc_transform(g);
  const CoefficientOracle oracle(f, 17);

  // Supersource out-edges relay unit vectors.
  const std::vector<EdgeId> sources = {0, 1, 2};
  CHECK(transfer_matrix(c, oracle, sources) == gf::Matrix::identity(3));

  // Column j equals the header of val(e_j).
  const gf::Matrix messages = random_messages(f, 3, 2, 5);
  const auto values = evaluate(c, messages, oracle);
  std::vector<EdgeId> all(c.graph.edges.size());
  for (EdgeId e = 0; e < all.size(); ++e) all[e] = e;
  const gf::Matrix t = transfer_matrix(c, oracle, all);
  for (EdgeId e = 0; e < all.size(); ++e)
    for (std::size_t i = 0; i < 3; ++i) CHECK(t.at(i, e) == values[e].header[i]);
}

TEST_CASE("transfer matrix rank never exceeds the cut and usually meets it") {
  const gf::Field& f = gf::Field::standard(16);
  std::size_t points = 0, met = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const TimeExpandedHypergraph g = build_hypergraph(random_schedule(seed));
    const Circuit c = pnc_transform(g);
    const CoefficientOracle oracle(f, seed);
    const auto cuts = all_min_cuts(c.graph);
    for (const CutRow& row : cuts) {
      const VertexId v = *g.find(row.node, row.tick);
      const gf::Matrix t = transfer_matrix(c, oracle, c.inputs[v]);
      const auto r = static_cast<std::int64_t>(gf::rank(f, t));
      REQUIRE(r <= row.value);
      ++points;
      met += r == row.value ? 1 : 0;
    }
  }
  CHECK(static_cast<double>(met) >= 0.99 * static_cast<double>(points));
}

TEST_CASE("three-send line closure reaches rank 2 at the far end") {
  const gf::Field& f = gf::Field::standard(16);
  const TimeExpandedHypergraph g = build_hypergraph(oracle::three_send_line());
  const Circuit c = pnc_transform(g);
  const VertexId b4 = *g.find(1, 4);
  int full = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed)
    full += gf::rank(f, transfer_matrix(c, CoefficientOracle(f, seed), c.inputs[b4])) == 2 ? 1 : 0;
  CHECK(full >= 990);
}

TEST_CASE("queries") {
  const TimeExpandedHypergraph g = build_hypergraph(oracle::three_send_line());
  const auto h = info_flow_graph(g, Memory::unbounded());
  CHECK(h.query(1, 3).terms.size() == 1);
  CHECK_THROWS_AS(h.query(1, 1), UnknownVertex);
  CHECK_THROWS_AS(min_cut(h, 5, 0), UnknownVertex);
}

TEST_CASE("edge list round trip") {
  const TimeExpandedHypergraph g = build_hypergraph(gen_random_dynamic(4, 2, 20, 2, 8));
  for (const CapacitatedHypergraph& h :
       {info_flow_graph(g, Memory::bounded(2)), pnc_transform(g).graph, accumulator_transform(g, 2).graph}) {
    std::istringstream in(h.to_edge_list());
    const CapacitatedHypergraph back = CapacitatedHypergraph::from_edge_list(in);
    CHECK(back.to_edge_list() == h.to_edge_list());
    CHECK(all_min_cuts(back) == all_min_cuts(h));
  }
  std::istringstream bad("pnclab-hypergraph 1\nn 2 k 1\nvertex 0 bogus\n");
  CHECK_THROWS_AS(CapacitatedHypergraph::from_edge_list(bad), EdgeListParseError);
  std::istringstream wrong("something else\n");
  CHECK_THROWS_AS(CapacitatedHypergraph::from_edge_list(wrong), EdgeListParseError);
}
