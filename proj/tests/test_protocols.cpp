#include <doctest.h>

#include <map>

#include "oracles.hpp"
#include "pnclab/flow.hpp"
#include "pnclab/protocols.hpp"

using namespace pnclab;

namespace {

const gf::Field& f16() { return gf::Field::standard(16); }

Schedule random_schedule(std::uint64_t seed) {
  return gen_random_dynamic(2 + seed % 8, 1 + seed % 4, 15 + seed % 50, 1 + seed % 3, seed, 2);
}

std::vector<Protocol> all_protocols(std::size_t k) {
  return {Protocol::pnc(),          Protocol::recombinator(1), Protocol::recombinator(k),
          Protocol::accumulator(1), Protocol::accumulator(2),  Protocol::accumulator(k)};
}

}  // namespace

TEST_CASE("protocol names") {
  CHECK(parse_protocol_kind("pnc") == ProtocolKind::Pnc);
  CHECK(parse_protocol_kind("recomb") == ProtocolKind::Recombinator);
  CHECK(parse_protocol_kind("acc") == ProtocolKind::Accumulator);
  CHECK_THROWS_AS(parse_protocol_kind("flood"), std::invalid_argument);
  CHECK(Protocol::accumulator(2).name() == "acc");
}

TEST_CASE("three-send line with PNC") {
  const Schedule s = oracle::three_send_line();
  int full = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const gf::Matrix messages = random_messages(f16(), 2, 1, seed + 5000);
    const SimulatorTrace t = run(s, Protocol::pnc(), f16(), messages, seed);
    REQUIRE(rank_at(t, 1, 2) == 1);
    CHECK(rank_at(t, 0, 0) == 2);
    full += rank_at(t, 1, 4) == 2 ? 1 : 0;
    if (rank_at(t, 1, 4) == 2) {
      const auto d = decode_at(t, f16(), 1, 4);
      REQUIRE(d.decoded());
      CHECK((*d.messages)[0][0] == messages.at(0, 0));
      CHECK((*d.messages)[1][0] == messages.at(1, 0));
    }
  }
  CHECK(full >= 990);
}

TEST_CASE("two-send line with a one-register accumulator") {
  const Schedule s = oracle::two_send_line();
  int hit = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const SimulatorTrace t = run(s, Protocol::accumulator(1), f16(), random_messages(f16(), 2, 1, seed), seed);
    hit += rank_at(t, 1, 3) == 1 ? 1 : 0;
  }
  CHECK(hit >= 990);
  CHECK(min_cut(info_flow_graph(build_hypergraph(s), Memory::bounded(1)), 1, 3) == 1);
}

TEST_CASE("rank edge cases") {
  const Schedule s = oracle::three_send_line();
  const gf::Matrix messages = random_messages(f16(), 2, 1, 1);
  const SimulatorTrace t = run(s, Protocol::pnc(), f16(), messages, 1);
  CHECK_THROWS_AS(rank_at(t, 1, 1), UnknownVertex);
  const auto d = decode_at(t, f16(), 0, 0);
  REQUIRE(d.decoded());
  CHECK((*d.messages)[1][0] == messages.at(1, 0));
  CHECK_FALSE(decode_at(t, f16(), 1, 2).decoded());
  CHECK_THROWS_AS(run(s, Protocol::pnc(), f16(), gf::Matrix(3, 1), 1), gf::DimensionMismatch);
  Schedule broken = s;
  broken.events.erase(broken.events.begin());
  CHECK_THROWS_AS(run(broken, Protocol::pnc(), f16(), messages, 1), InvalidSchedule);
}

TEST_CASE("determinism") {
  const Schedule s = random_schedule(3);
  const gf::Matrix messages = random_messages(f16(), s.k, s.l, 9);
  for (const Protocol& p : all_protocols(s.k)) {
    const SimulatorTrace a = run(s, p, f16(), messages, 77);
    const SimulatorTrace b = run(s, p, f16(), messages, 77);
    CHECK(trace_to_csv(a) == trace_to_csv(b));
    CHECK(a.emitted == b.emitted);
    CHECK(packets_to_csv(a, s, f16()) == packets_to_csv(b, s, f16()));
  }
}

TEST_CASE("protocol invariants on random schedules") {
  for (unsigned m : {4u, 16u}) {
    const gf::Field& f = gf::Field::standard(m);
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const Schedule s = random_schedule(seed);
      const TimeExpandedHypergraph g = build_hypergraph(s);
      const gf::Matrix messages = random_messages(f, s.k, s.l, seed);
      for (const Protocol& p : all_protocols(s.k)) {
        const SimulatorTrace t = run(s, p, f, messages, seed + 1);
        const auto cuts = all_min_cuts(info_flow_graph(g, p.memory()));
        std::map<NodeId, std::size_t> last_rank;
        for (const CutRow& row : cuts) {
          const CopyRecord& rec = t.at(row.node, row.tick);
          const auto known = t.knowledge(row.node, row.tick);
          REQUIRE(static_cast<std::int64_t>(rec.rank) <= row.value);
          CHECK(rec.rank == gf::header_rank(f, known, s.k));
          CHECK(rec.decodable == (rec.rank == s.k));
          for (const gf::Packet& pk : known) REQUIRE(gf::is_consistent(f, pk, messages));
          if (p.bounded()) {
            CHECK(rec.registers.size() == p.mu);
            CHECK(rec.rank <= p.mu);
          } else {
            CHECK(rec.rank >= last_rank[row.node]);  // copies come in tick order per node
            last_rank[row.node] = rec.rank;
          }
        }
        // Every emitted packet lies in the span of what its sender held before
        // the sending tick (nothing arrives at a sending copy).
        for (std::size_t e = 0; e < s.events.size(); ++e) {
          const auto* tx = std::get_if<TransmitEvent>(&s.events[e]);
          if (!tx) {
            CHECK_FALSE(t.emitted[e].has_value());
            continue;
          }
          REQUIRE(t.emitted[e].has_value());
          REQUIRE(gf::is_consistent(f, *t.emitted[e], messages));
          std::vector<gf::Packet> before;
          for (VertexId c : g.copies_of(tx->sender))
            if (g.vertices[c].tick < tx->time) before = t.knowledge(tx->sender, g.vertices[c].tick);
          CHECK(gf::in_span(f, before, *t.emitted[e], s.k));
        }
      }
    }
  }
}

TEST_CASE("csv exports") {
  const Schedule s = oracle::three_send_line();
  const SimulatorTrace t = run(s, Protocol::pnc(), f16(), random_messages(f16(), 2, 1, 0), 0);
  const std::string trace = trace_to_csv(t);
  CHECK(trace.rfind("node,tick,rank,decodable\n", 0) == 0);
  CHECK(trace.find("\n1,2,1,0\n") != std::string::npos);
  const std::string packets = packets_to_csv(t, s, f16());
  CHECK(packets.rfind("hyperedge,event,sender,tick,header\n", 0) == 0);
  CHECK(std::count(packets.begin(), packets.end(), '\n') == 4);
}
