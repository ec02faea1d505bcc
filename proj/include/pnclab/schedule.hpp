#pragma once

// Communication schedules and their time-expanded hypergraphs.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace pnclab {

using NodeId = std::uint32_t;
using MessageId = std::uint32_t;
using Tick = std::int64_t;
using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

struct Head {
  NodeId to = 0;
  Tick delay = 1;
  bool operator==(const Head&) const = default;
};

struct TransmitEvent {
  NodeId sender = 0;
  Tick time = 0;
  std::vector<Head> heads;
  bool operator==(const TransmitEvent&) const = default;
};

struct Origin {
  NodeId node = 0;
  Tick time = 0;
  bool operator==(const Origin&) const = default;
};

struct GenerateEvent {
  MessageId message = 0;
  std::vector<Origin> origins;
  bool operator==(const GenerateEvent&) const = default;
};

using Event = std::variant<TransmitEvent, GenerateEvent>;

struct Schedule {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t l = 1;
  std::vector<Event> events;
  /// Generator configuration that produced this schedule, if any.
  std::optional<nlohmann::json> generator;

  bool operator==(const Schedule&) const = default;
};

struct Violation {
  enum class Kind {
    NodeOutOfRange,
    MessageOutOfRange,
    NegativeTick,
    NonPositiveDelay,
    EmptyHeads,
    EmptyOrigins,
    DuplicateRecipient,
    SelfTransmission,
    SimultaneousSendReceive,
    MessageNeverGenerated,
    DuplicateGeneration,
  };
  Kind kind;
  std::size_t event = 0;  // offending event index (unused for MessageNeverGenerated)
  NodeId node = 0;
  Tick tick = 0;
  MessageId message = 0;

  std::string describe() const;
};

std::string to_string(Violation::Kind kind);

std::vector<Violation> validate(const Schedule& s);

class InvalidSchedule : public std::runtime_error {
 public:
  explicit InvalidSchedule(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

class ScheduleParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const Schedule& s);
Schedule schedule_from_json(const nlohmann::json& j);
Schedule load_schedule(const std::string& path);
void save_schedule(const Schedule& s, const std::string& path);

// ---------------------------------------------------------------------------
// Vertices shared by every graph built from a schedule.

enum class VertexRole : std::uint8_t { Supersource, Copy, Register, Transmitter };

/// Supersource, a vertex copy (node, tick), or an auxiliary template vertex
/// attached to a copy: register `slot`, or the transmitter of event `slot`.
struct Vertex {
  VertexRole role = VertexRole::Copy;
  NodeId node = 0;
  Tick tick = 0;
  std::uint32_t slot = 0;

  static Vertex supersource() { return {VertexRole::Supersource, 0, 0, 0}; }
  static Vertex copy(NodeId v, Tick t) { return {VertexRole::Copy, v, t, 0}; }

  /// Key for the coefficient oracle.
  std::uint64_t key() const;
  std::string label() const;

  bool operator==(const Vertex&) const = default;
  auto operator<=>(const Vertex&) const = default;
};

/// Hyperedge of the time-expanded hypergraph. Supersource hyperedges carry
/// the message id; transmission hyperedges the schedule event index.
struct TimedHyperedge {
  VertexId tail = 0;
  std::vector<VertexId> heads;
  bool from_supersource = false;
  MessageId message = 0;
  std::size_t event = 0;
};

/// Vertex copies plus supersource. Vertex 0 is the supersource, copies follow
/// in (tick, node) order. Hyperedges 0..k-1 are the supersource hyperedges in
/// message order, then one per transmit event in event order.
class TimeExpandedHypergraph {
 public:
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<Vertex> vertices;
  std::vector<TimedHyperedge> hyperedges;

  static constexpr VertexId supersource = 0;

  std::optional<VertexId> find(NodeId v, Tick t) const;
  /// Copies of node v in increasing tick order.
  const std::vector<VertexId>& copies_of(NodeId v) const { return per_node_.at(v); }

  void index();

 private:
  std::map<std::pair<NodeId, Tick>, VertexId> lookup_;
  std::vector<std::vector<VertexId>> per_node_;
};

TimeExpandedHypergraph build_hypergraph(const Schedule& s);

// ---------------------------------------------------------------------------
// Generators.

Schedule gen_line(std::size_t n, std::size_t k, std::size_t repetitions, std::size_t l = 1);
Schedule gen_gossip(std::size_t n, std::size_t k, std::size_t rounds, std::size_t fanout, std::uint64_t seed,
                    std::size_t l = 1);
Schedule gen_random_dynamic(std::size_t n, std::size_t k, std::size_t events, Tick max_delay, std::uint64_t seed,
                            std::size_t l = 1);

/// Removes transmissions sent by nodes that have not yet generated or
/// received anything (a node is informed from its first arrival tick on).
Schedule drop_uninformed_sends(const Schedule& s);

}  // namespace pnclab
