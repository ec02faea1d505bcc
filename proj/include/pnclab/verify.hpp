#pragma once

// Executable checks tying the protocols to their circuit transforms and to
// the information flow graph capacities.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pnclab/circuits.hpp"
#include "pnclab/flow.hpp"
#include "pnclab/protocols.hpp"
#include "pnclab/schedule.hpp"

namespace pnclab {

// ---------------------------------------------------------------------------
// Exact simulation: PNC protocol vs. evaluation of its memory-closure circuit.

struct EquivalenceResult {
  bool pass = true;
  std::size_t packets_compared = 0;
  std::string first_divergence;
};

EquivalenceResult check_simulation_equivalence(const Schedule& s, const gf::Field& field, const gf::Matrix& messages,
                                               std::uint64_t seed);

/// Same, but the circuit side draws from `circuit_oracle` (e.g. a perturbed
/// copy) while the protocol uses the unmodified stream for `seed`.
EquivalenceResult check_simulation_equivalence(const Schedule& s, const gf::Field& field, const gf::Matrix& messages,
                                               std::uint64_t seed, const CoefficientOracle& circuit_oracle);

// ---------------------------------------------------------------------------
// Min-cut equalities across graphs.

struct CutComparison {
  NodeId node = 0;
  Tick tick = 0;
  std::int64_t ginf = 0;
  std::int64_t gpnc = 0;
  std::int64_t gmu = 0;
  std::int64_t grecomb = 0;
  std::int64_t gacc = 0;
  bool equal = true;
};

struct CutEquivalenceResult {
  bool pass = true;
  std::size_t mu = 0;  // buffer size used for the bounded graphs (k when unbounded)
  std::vector<CutComparison> rows;
};

/// For every vertex copy: G_inf == G_PNC, and G_mu == G_recombinator ==
/// G_accumulator. An unbounded mu compares the bounded graphs at mu = k.
CutEquivalenceResult check_mincut_equivalences(const Schedule& s, Memory mu);

// ---------------------------------------------------------------------------
// Monte-Carlo campaigns.

struct GeneratorSpec {
  enum class Kind { Random, Gossip, Line } kind = Kind::Random;
  std::size_t n_max = 10;
  std::size_t k_max = 4;
  std::size_t events_max = 100;  // random: transmit events per schedule
  Tick max_delay = 3;
  std::size_t rounds = 10;   // gossip
  std::size_t fanout = 1;    // gossip
  std::size_t reps = 3;      // line
  std::size_t l = 2;

  /// Per-trial schedule: sizes are drawn uniformly, n in [2, n_max], k in
  /// [1, k_max], events in [n, events_max].
  Schedule generate(std::uint64_t seed) const;
  nlohmann::json to_json() const;
};

/// Buffer size of a campaign: fixed, equal to each trial's k, or unbounded.
struct MuSpec {
  enum class Kind { Fixed, EqualK, Unbounded } kind = Kind::Unbounded;
  std::size_t value = 0;

  static MuSpec fixed(std::size_t mu) { return {Kind::Fixed, mu}; }
  static MuSpec equal_k() { return {Kind::EqualK, 0}; }
  static MuSpec unbounded() { return {Kind::Unbounded, 0}; }
  Memory resolve(std::size_t k) const;
  std::string name() const;
};

/// Parses "inf", "k" or a positive integer.
MuSpec parse_mu(const std::string& text);

/// Default epsilon target per field degree: 0.01 for m = 16, 0.05 for m = 8,
/// none for m = 4.
std::optional<double> default_epsilon_target(unsigned m);

struct CampaignConfig {
  GeneratorSpec generator;
  ProtocolKind protocol = ProtocolKind::Pnc;
  MuSpec mu = MuSpec::unbounded();
  unsigned field_m = 16;
  std::size_t trials = 1000;
  std::uint64_t master_seed = 1;
  unsigned workers = 0;  // 0 = hardware concurrency
  bool final_only = false;  // true: success measured only at each node's last copy
  std::vector<NodeId> destinations;  // empty = every node
  std::optional<double> epsilon_target;

  nlohmann::json to_json() const;
};

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string protocol;
  std::size_t mu = 0;  // 0 = unbounded
  unsigned field_m = 16;
  NodeId node = 0;
  Tick tick = 0;
  std::size_t rank = 0;
  std::int64_t min_cut = 0;
  bool equal = false;
};

struct Interval {
  double lo = 0;
  double hi = 1;
};

/// Wilson score interval at 95% confidence.
Interval wilson95(std::size_t successes, std::size_t trials);

struct VerificationReport {
  nlohmann::json config;
  std::vector<TrialRecord> records;
  std::size_t trials = 0;
  std::size_t trial_successes = 0;
  std::size_t query_points = 0;
  std::size_t point_successes = 0;
  std::size_t bound_observations = 0;  // every vertex copy of every trial
  std::size_t bound_violations = 0;    // rank above the information flow min-cut
  std::size_t consistency_violations = 0;
  std::optional<double> epsilon_target;

  /// Fraction of trials in which every measured query point reached its min-cut.
  double success_rate() const;
  double point_success_rate() const;
  double epsilon_hat() const { return 1.0 - success_rate(); }
  std::size_t violations() const { return bound_violations + consistency_violations; }
  Interval ci95() const { return wilson95(trial_successes, trials); }
  bool passed() const;

  nlohmann::json summary() const;
  std::string records_csv() const;
};

VerificationReport optimality_campaign(const CampaignConfig& config);

/// Equivalence campaign: `schedules` random schedules (drop_uninformed_sends
/// applied) times `seeds` coefficient seeds.
struct SimulationCampaignResult {
  std::size_t runs = 0;
  std::size_t passed = 0;
  std::size_t packets_compared = 0;
  std::string first_failure;
};
SimulationCampaignResult simulation_campaign(std::size_t schedules, std::size_t seeds, std::uint64_t master_seed,
                                             const GeneratorSpec& generator = {});

struct CutsCampaignResult {
  std::size_t schedules = 0;
  std::size_t comparisons = 0;  // (schedule, mu, vertex copy) triples
  std::size_t mismatches = 0;
  std::string first_failure;
};
CutsCampaignResult cuts_campaign(std::size_t schedules, const std::vector<Memory>& mus, std::uint64_t master_seed,
                                 const GeneratorSpec& generator = {});

}  // namespace pnclab
