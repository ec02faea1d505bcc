#pragma once

// Hypergraph lowering and exact integer max-flow / min-cut.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pnclab/circuits.hpp"

namespace pnclab {

class TooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

struct Arc {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  std::int64_t capacity = 0;
  bool operator==(const Arc&) const = default;
};

class FlowNetwork {
 public:
  FlowNetwork() = default;
  explicit FlowNetwork(std::size_t vertices) : vertex_count_(vertices) {}

  std::uint32_t add_vertex() { return static_cast<std::uint32_t>(vertex_count_++); }
  /// Self-loops are dropped; capacity must be non-negative.
  void add_arc(std::uint32_t from, std::uint32_t to, std::int64_t capacity);

  std::size_t vertex_count() const { return vertex_count_; }
  const std::vector<Arc>& arcs() const { return arcs_; }

 private:
  std::size_t vertex_count_ = 0;
  std::vector<Arc> arcs_;
};

struct LoweredNetwork {
  FlowNetwork network;
  /// Flow vertex of each hypergraph vertex (identity; gadget vertices follow).
  std::vector<std::uint32_t> vertex_of;
  std::uint32_t source = 0;
};

/// Multi-head hyperedges become a gadget vertex w_e with one tail arc and one
/// arc per head, all of the hyperedge's capacity; single-head edges become
/// direct arcs. Parallel direct arcs are merged by summing capacities.
LoweredNetwork lower(const CapacitatedHypergraph& h);

/// Dinic blocking flow. Throws UnknownVertex for out-of-range endpoints and
/// std::invalid_argument when source == sink.
std::int64_t max_flow(const FlowNetwork& net, std::uint32_t source, std::uint32_t sink);

/// Minimum over all source/sink vertex bipartitions. Throws TooLarge above 20
/// arcs or 24 incident vertices.
std::int64_t brute_force_max_flow(const FlowNetwork& net, std::uint32_t source, std::uint32_t sink);

/// Min-cut between the supersource and the query point (v, t) of h.
std::int64_t min_cut(const CapacitatedHypergraph& h, NodeId v, Tick t);

struct CutRow {
  NodeId node = 0;
  Tick tick = 0;
  std::int64_t value = 0;
  bool operator==(const CutRow&) const = default;
};

/// min_cut for every query point, in (node, tick) order; lowers h once.
std::vector<CutRow> all_min_cuts(const CapacitatedHypergraph& h);

std::string cuts_to_csv(const std::vector<CutRow>& rows);

}  // namespace pnclab
