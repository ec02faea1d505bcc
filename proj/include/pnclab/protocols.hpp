#pragma once

// Node state machines for PNC, the mu-recombinator and the mu-accumulator,
// driven over a schedule in (tick, node, event index) order.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pnclab/circuits.hpp"
#include "pnclab/gf.hpp"
#include "pnclab/schedule.hpp"

namespace pnclab {

enum class ProtocolKind { Pnc, Recombinator, Accumulator };

struct Protocol {
  ProtocolKind kind = ProtocolKind::Pnc;
  std::size_t mu = 0;  // buffer size for the bounded variants

  static Protocol pnc() { return {ProtocolKind::Pnc, 0}; }
  static Protocol recombinator(std::size_t mu) { return {ProtocolKind::Recombinator, mu}; }
  static Protocol accumulator(std::size_t mu) { return {ProtocolKind::Accumulator, mu}; }

  bool bounded() const { return kind != ProtocolKind::Pnc; }
  Memory memory() const { return bounded() ? Memory::bounded(mu) : Memory::unbounded(); }
  std::string name() const;

  bool operator==(const Protocol&) const = default;
};

/// "pnc", "recomb" or "acc"; throws std::invalid_argument otherwise.
ProtocolKind parse_protocol_kind(const std::string& name);

/// Node state after processing one vertex copy.
struct CopyRecord {
  NodeId node = 0;
  Tick tick = 0;
  std::size_t rank = 0;
  bool decodable = false;
  std::size_t store_size = 0;            // PNC: the store is the prefix of this length
  std::vector<gf::Packet> registers;     // bounded protocols
};

class SimulatorTrace {
 public:
  Protocol protocol;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t l = 0;
  std::vector<CopyRecord> copies;                    // (tick, node) order
  std::vector<std::optional<gf::Packet>> emitted;    // per schedule event; empty for generations
  std::vector<std::vector<gf::Packet>> stores;       // PNC final stores per node
  std::vector<bool> final_decodable;                 // per node

  /// Throws UnknownVertex when (v, t) is not a vertex copy.
  const CopyRecord& at(NodeId v, Tick t) const;
  std::vector<gf::Packet> knowledge(NodeId v, Tick t) const;

  void index();

 private:
  std::map<std::pair<NodeId, Tick>, std::size_t> lookup_;
};

/// Executes `protocol` on `s`. messages is k x l. Throws InvalidSchedule.
SimulatorTrace run(const Schedule& s, Protocol protocol, const gf::Field& field, const gf::Matrix& messages,
                   std::uint64_t seed);

std::size_t rank_at(const SimulatorTrace& trace, NodeId v, Tick t);
gf::DecodeResult decode_at(const SimulatorTrace& trace, const gf::Field& field, NodeId v, Tick t);

/// Uniformly random k x l message matrix.
gf::Matrix random_messages(const gf::Field& field, std::size_t k, std::size_t l, std::uint64_t seed);

/// Rows (node, tick, rank, decodable).
std::string trace_to_csv(const SimulatorTrace& trace);
/// Rows (hyperedge id, event index, sender, tick, header symbols in hex).
std::string packets_to_csv(const SimulatorTrace& trace, const Schedule& s, const gf::Field& field);

}  // namespace pnclab
