#pragma once

// Information flow graphs, protocol transforms and memoryless circuit
// evaluation.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pnclab/gf.hpp"
#include "pnclab/random.hpp"
#include "pnclab/schedule.hpp"

namespace pnclab {

class UnknownVertex : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class CyclicCircuit : public std::logic_error {
 public:
  CyclicCircuit() : std::logic_error("circuit contains a cycle") {}
};

class EdgeListParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Buffer size per node: a packet count, or unbounded.
struct Memory {
  std::optional<std::size_t> packets;

  static Memory unbounded() { return {}; }
  static Memory bounded(std::size_t mu) { return {mu}; }
  bool is_unbounded() const { return !packets.has_value(); }
  /// Capacity of a memory edge; unbounded is represented by k.
  std::int64_t capacity(std::size_t k) const { return static_cast<std::int64_t>(packets ? *packets : k); }
  std::string name() const { return packets ? std::to_string(*packets) : "inf"; }
};

enum class EdgeKind : std::uint8_t {
  Source,        // supersource hyperedge, tag = message id
  Transmission,  // one timed transmission, tag = schedule event index
  Memory,        // v_t -> next copy; tag = slot for recombinator bundles
  Chain,         // register slot -> same slot at the next copy, tag = slot
  Read,          // register -> transmitter, tag = slot
};

std::string to_string(EdgeKind kind);

struct Hyperedge {
  VertexId tail = 0;
  std::vector<VertexId> heads;
  std::int64_t capacity = 1;
  EdgeKind kind = EdgeKind::Transmission;
  std::uint32_t tag = 0;
};

/// One vertex read by a query. combos == 0 reads the vertex's raw in-edges;
/// otherwise the query reads `combos` random combinations of them, keyed as
/// outputs output_base, output_base + 1, ... of that vertex.
struct ProbeTerm {
  VertexId vertex = 0;
  std::uint32_t combos = 0;
  std::uint32_t output_base = 0;
};

/// What node v holds after tick t, expressed on a particular graph. For flow
/// purposes a fresh sink is joined from every term's vertex with capacity
/// `combos` (k for raw terms).
struct QueryProbe {
  std::vector<ProbeTerm> terms;
};

class CapacitatedHypergraph {
 public:
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<Vertex> vertices;  // vertex 0 is the supersource
  std::vector<Hyperedge> edges;
  std::map<std::pair<NodeId, Tick>, QueryProbe> queries;

  static constexpr VertexId supersource = 0;

  VertexId add_vertex(const Vertex& v);
  EdgeId add_edge(Hyperedge e);
  std::optional<VertexId> find(const Vertex& v) const;

  /// Throws UnknownVertex when (v, t) is not a vertex copy of the schedule.
  const QueryProbe& query(NodeId v, Tick t) const;

  std::string to_edge_list() const;
  static CapacitatedHypergraph from_edge_list(std::istream& in);

 private:
  std::map<Vertex, VertexId> lookup_;
};

/// A capacitated hypergraph read as a memoryless circuit: every edge carries
/// one packet, every vertex combines its ordered inputs.
class Circuit {
 public:
  CapacitatedHypergraph graph;
  std::vector<std::vector<EdgeId>> inputs;   // ordered in-edges per vertex
  std::vector<std::vector<EdgeId>> outputs;  // ordered out-edges per vertex
};

CapacitatedHypergraph info_flow_graph(const TimeExpandedHypergraph& g, Memory mu);

/// Memory closure of every hyperedge.
Circuit pnc_transform(const TimeExpandedHypergraph& g);

/// mu parallel unit memory edges between consecutive copies of each node.
Circuit recombinator_transform(const TimeExpandedHypergraph& g, std::size_t mu);

/// Register-chain template: each copy becomes mu registers plus one
/// transmitter per transmission sent at that copy.
Circuit accumulator_transform(const TimeExpandedHypergraph& g, std::size_t mu);

/// Topological order of the circuit's vertices (Kahn); throws CyclicCircuit.
std::vector<VertexId> topological_order(const Circuit& c);

/// val(e) for every edge. messages is the k x l message matrix.
std::vector<gf::Packet> evaluate(const Circuit& c, const gf::Matrix& messages, const CoefficientOracle& oracle);

/// Packets held by node v after tick t according to the circuit.
std::vector<gf::Packet> probe_packets(const Circuit& c, std::span<const gf::Packet> values,
                                      const CoefficientOracle& oracle, NodeId v, Tick t);

/// k x |edges| matrix whose column j is the header of val(edges[j]).
gf::Matrix transfer_matrix(const Circuit& c, const CoefficientOracle& oracle, std::span<const EdgeId> edges);

}  // namespace pnclab
