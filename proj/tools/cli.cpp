#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pnclab/circuits.hpp"
#include "pnclab/flow.hpp"
#include "pnclab/protocols.hpp"
#include "pnclab/schedule.hpp"
#include "pnclab/verify.hpp"

namespace pnclab {
namespace {

using nlohmann::json;

// Bad input data (as opposed to bad flags).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  // gen
  std::string gen_kind;
  std::size_t n = 2;
  std::size_t k = 1;
  std::size_t reps = 3;
  std::size_t rounds = 10;
  std::size_t fanout = 1;
  std::size_t events = 50;
  Tick max_delay = 3;
  std::size_t l = 1;

  // shared
  std::uint64_t seed = 1;
  std::string out;
  std::string schedule;
  std::string protocol = "pnc";
  std::string mu = "k";
  unsigned field = 16;
  unsigned workers = 0;

  // mincut
  std::string graph = "ginf";
  std::string edge_list;
  std::string export_path;

  // run
  std::string packets;

  // verify
  std::string check = "all";
  std::string generator = "random";
  std::size_t schedules = 0;
  std::size_t seeds = 10;
  std::size_t trials = 1000;
  std::string scope = "all";
  std::vector<NodeId> destinations;
  std::optional<double> epsilon;
  std::string records;
};

void write_output(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw InputError("cannot write " + path);
  file << text;
}

std::string with_config(const json& config, const std::string& csv) { return "# config: " + config.dump() + "\n" + csv; }

Schedule read_schedule(const std::string& path) {
  try {
    Schedule s = load_schedule(path);
    if (auto violations = validate(s); !violations.empty()) throw InvalidSchedule(std::move(violations));
    return s;
  } catch (const ScheduleParseError& e) {
    throw InputError(e.what());
  } catch (const InvalidSchedule& e) {
    throw InputError(e.what());
  }
}

Memory resolve_mu(const std::string& text, std::size_t k) {
  try {
    return parse_mu(text).resolve(k);
  } catch (const std::invalid_argument& e) {
    throw CLI::ValidationError("--mu", e.what());
  }
}

int cmd_gen(const Options& o, std::ostream& out) {
  Schedule s;
  if (o.gen_kind == "line")
    s = gen_line(o.n, o.k, o.reps, o.l);
  else if (o.gen_kind == "gossip")
    s = gen_gossip(o.n, o.k, o.rounds, o.fanout, o.seed, o.l);
  else
    s = gen_random_dynamic(o.n, o.k, o.events, o.max_delay, o.seed, o.l);
  write_output(out, o.out, to_json(s).dump(2) + "\n");
  return kExitOk;
}

int cmd_mincut(const Options& o, std::ostream& out) {
  json config = {{"command", "mincut"}, {"graph", o.graph}, {"mu", o.mu}};
  CapacitatedHypergraph h;
  if (!o.edge_list.empty()) {
    std::ifstream in(o.edge_list);
    if (!in) throw InputError("cannot read " + o.edge_list);
    try {
      h = CapacitatedHypergraph::from_edge_list(in);
    } catch (const EdgeListParseError& e) {
      throw InputError(e.what());
    }
    config["edge_list"] = o.edge_list;
  } else {
    const Schedule s = read_schedule(o.schedule);
    config["schedule"] = o.schedule;
    const TimeExpandedHypergraph g = build_hypergraph(s);
    const Memory mu = resolve_mu(o.mu, s.k);
    const std::size_t bounded = mu.packets.value_or(std::max<std::size_t>(s.k, 1));
    if (o.graph == "ginf")
      h = info_flow_graph(g, Memory::unbounded());
    else if (o.graph == "gmu")
      h = info_flow_graph(g, mu);
    else if (o.graph == "gpnc")
      h = pnc_transform(g).graph;
    else if (o.graph == "grecomb")
      h = recombinator_transform(g, bounded).graph;
    else
      h = accumulator_transform(g, bounded).graph;
  }
  if (!o.export_path.empty()) write_output(out, o.export_path, h.to_edge_list());
  write_output(out, o.out, with_config(config, cuts_to_csv(all_min_cuts(h))));
  return kExitOk;
}

int cmd_run(const Options& o, std::ostream& out) {
  const Schedule s = read_schedule(o.schedule);
  const ProtocolKind kind = parse_protocol_kind(o.protocol);
  const Memory mu = kind == ProtocolKind::Pnc ? Memory::unbounded() : resolve_mu(o.mu, s.k);
  const Protocol protocol{kind, mu.packets.value_or(0)};
  const gf::Field& field = gf::Field::standard(o.field);
  const gf::Matrix messages = random_messages(field, s.k, s.l, derive_seed(o.seed, 2));
  const SimulatorTrace trace = run(s, protocol, field, messages, o.seed);

  const json config = {{"command", "run"}, {"schedule", o.schedule}, {"protocol", protocol.name()},
                       {"mu", mu.name()},  {"field", o.field},       {"seed", o.seed}};
  write_output(out, o.out, with_config(config, trace_to_csv(trace)));
  if (!o.packets.empty()) write_output(out, o.packets, with_config(config, packets_to_csv(trace, s, field)));
  return kExitOk;
}

GeneratorSpec generator_spec(const Options& o) {
  GeneratorSpec g;
  g.kind = o.generator == "gossip" ? GeneratorSpec::Kind::Gossip
           : o.generator == "line" ? GeneratorSpec::Kind::Line
                                   : GeneratorSpec::Kind::Random;
  g.n_max = o.n;
  g.k_max = o.k;
  g.events_max = o.events;
  g.max_delay = o.max_delay;
  g.rounds = o.rounds;
  g.fanout = o.fanout;
  g.reps = o.reps;
  g.l = o.l;
  return g;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const GeneratorSpec gen = generator_spec(o);
  const bool all = o.check == "all";
  bool ok = true;
  json report = {{"config",
                  {{"command", "verify"},
                   {"check", o.check},
                   {"generator", gen.to_json()},
                   {"seed", o.seed},
                   {"schedules", o.schedules},
                   {"seeds", o.seeds}}}};

  if (all || o.check == "simulate") {
    const std::size_t count = o.schedules ? o.schedules : 100;
    const SimulationCampaignResult r = simulation_campaign(count, o.seeds, o.seed, gen);
    const bool pass = r.passed == r.runs;
    ok = ok && pass;
    report["simulate"] = {{"runs", r.runs},
                          {"passed", r.passed},
                          {"packets_compared", r.packets_compared},
                          {"first_failure", r.first_failure},
                          {"pass", pass}};
    out << "simulate: " << r.passed << "/" << r.runs << " runs identical (" << r.packets_compared
        << " packets compared)" << (pass ? "" : "; " + r.first_failure) << "\n";
  }

  if (all || o.check == "cuts") {
    const std::size_t count = o.schedules ? o.schedules : 200;
    const std::vector<Memory> mus = {Memory::bounded(1), Memory::bounded(2), Memory::bounded(3), Memory::unbounded()};
    const CutsCampaignResult r = cuts_campaign(count, mus, o.seed, gen);
    const bool pass = r.mismatches == 0;
    ok = ok && pass;
    report["cuts"] = {{"schedules", r.schedules},
                      {"comparisons", r.comparisons},
                      {"mismatches", r.mismatches},
                      {"first_failure", r.first_failure},
                      {"pass", pass}};
    out << "cuts: " << r.comparisons - r.mismatches << "/" << r.comparisons << " vertex copies agree"
        << (pass ? "" : "; " + r.first_failure) << "\n";
  }

  if (all || o.check == "optimality") {
    CampaignConfig cfg;
    cfg.generator = gen;
    cfg.protocol = parse_protocol_kind(o.protocol);
    try {
      cfg.mu = cfg.protocol == ProtocolKind::Pnc ? MuSpec::unbounded() : parse_mu(o.mu);
    } catch (const std::invalid_argument& e) {
      throw CLI::ValidationError("--mu", e.what());
    }
    cfg.field_m = o.field;
    cfg.trials = o.trials;
    cfg.master_seed = o.seed;
    cfg.workers = o.workers;
    cfg.final_only = o.scope == "final";
    cfg.destinations = o.destinations;
    cfg.epsilon_target = o.epsilon ? o.epsilon : default_epsilon_target(o.field);
    const VerificationReport r = optimality_campaign(cfg);
    ok = ok && r.passed();
    report["optimality"] = r.summary();
    const Interval ci = r.ci95();
    out << "optimality: success " << r.trial_successes << "/" << r.trials << " trials (rate " << r.success_rate()
        << ", ci95 [" << ci.lo << ", " << ci.hi << "]), " << r.violations() << " violations over "
        << r.bound_observations << " observations" << (r.passed() ? "" : "; FAILED") << "\n";
    if (!o.records.empty()) write_output(out, o.records, r.records_csv());
  }

  report["pass"] = ok;
  if (!o.out.empty()) write_output(out, o.out, report.dump(2) + "\n");
  return ok ? kExitOk : kExitVerificationFailed;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Packetized network coding lab: schedules, min-cuts, protocol runs and verification campaigns"};
  app.require_subcommand(1);

  const auto seed_option = [&](CLI::App* cmd) {
    cmd->add_option("--seed", o.seed, "Master seed")->envname("PNCLAB_SEED");
  };
  const auto size_options = [&](CLI::App* cmd) {
    cmd->add_option("--n", o.n, "Number of nodes")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 20));
    cmd->add_option("--k", o.k, "Number of messages")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
    cmd->add_option("--l", o.l, "Payload length in symbols");
    cmd->add_option("--reps", o.reps, "line: transmissions per hop")->check(CLI::PositiveNumber);
    cmd->add_option("--rounds", o.rounds, "gossip: rounds")->check(CLI::PositiveNumber);
    cmd->add_option("--fanout", o.fanout, "gossip: recipients per send")->check(CLI::PositiveNumber);
    cmd->add_option("--events", o.events, "random: transmit events")->check(CLI::PositiveNumber);
    cmd->add_option("--max-delay", o.max_delay, "random: largest delivery delay")->check(CLI::PositiveNumber);
  };
  const std::vector<std::string> fields = {"4", "8", "16"};

  CLI::App* gen = app.add_subcommand("gen", "Generate a schedule");
  gen->add_option("kind", o.gen_kind, "line, gossip or random")
      ->required()
      ->check(CLI::IsMember({"line", "gossip", "random"}));
  size_options(gen);
  seed_option(gen);
  gen->add_option("--out", o.out, "Output file (default stdout)");

  CLI::App* mincut = app.add_subcommand("mincut", "Min-cut at every vertex copy");
  auto* sched_opt = mincut->add_option("--schedule", o.schedule, "Schedule file");
  auto* edge_opt = mincut->add_option("--edge-list", o.edge_list, "Read a hypergraph edge list instead");
  sched_opt->excludes(edge_opt);
  mincut->add_option("--graph", o.graph, "ginf, gmu, gpnc, grecomb or gacc")
      ->check(CLI::IsMember({"ginf", "gmu", "gpnc", "grecomb", "gacc"}));
  mincut->add_option("--mu", o.mu, "Buffer size: integer, k or inf");
  mincut->add_option("--export", o.export_path, "Write the graph as an edge list");
  mincut->add_option("--out", o.out, "CSV output (default stdout)");

  CLI::App* runc = app.add_subcommand("run", "Run a protocol over a schedule");
  runc->add_option("--schedule", o.schedule, "Schedule file")->required();
  runc->add_option("--protocol", o.protocol, "pnc, recomb or acc")->check(CLI::IsMember({"pnc", "recomb", "acc"}));
  runc->add_option("--mu", o.mu, "Buffer size: integer, k or inf");
  runc->add_option("--field", o.field, "Field degree")->check(CLI::IsMember(fields));
  seed_option(runc);
  runc->add_option("--out", o.out, "Trace CSV (default stdout)");
  runc->add_option("--packets", o.packets, "Emitted packet CSV");

  CLI::App* verify = app.add_subcommand("verify", "Verification campaigns");
  verify->add_option("check", o.check, "simulate, cuts, optimality or all")
      ->check(CLI::IsMember({"simulate", "cuts", "optimality", "all"}));
  o.n = 10;
  o.k = 4;
  o.events = 100;
  o.l = 2;
  size_options(verify);
  seed_option(verify);
  verify->add_option("--generator", o.generator, "random, gossip or line")
      ->check(CLI::IsMember({"random", "gossip", "line"}));
  verify->add_option("--schedules", o.schedules, "Schedules for simulate/cuts (default 100/200)");
  verify->add_option("--seeds", o.seeds, "Coefficient seeds per schedule for simulate");
  verify->add_option("--trials", o.trials, "Optimality trials");
  verify->add_option("--protocol", o.protocol, "pnc, recomb or acc")->check(CLI::IsMember({"pnc", "recomb", "acc"}));
  verify->add_option("--mu", o.mu, "Buffer size: integer, k or inf");
  verify->add_option("--field", o.field, "Field degree")->check(CLI::IsMember(fields));
  verify->add_option("--workers", o.workers, "Worker threads (0 = available parallelism)");
  verify->add_option("--scope", o.scope, "Query points: final or all")->check(CLI::IsMember({"final", "all"}));
  verify->add_option("--dest", o.destinations, "Destination nodes (default all)");
  verify->add_option("--epsilon", o.epsilon, "Failure-rate target (default by field)");
  verify->add_option("--records", o.records, "Per-query-point CSV");
  verify->add_option("--out", o.out, "JSON report");

  // gen uses smaller defaults than the campaigns; reset them only when gen is selected.
  gen->preparse_callback([&](std::size_t) {
    o.n = 2;
    o.k = 1;
    o.events = 50;
    o.l = 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_gen(o, out);
    if (*mincut) {
      if (o.schedule.empty() && o.edge_list.empty()) throw CLI::RequiredError("--schedule or --edge-list");
      return cmd_mincut(o, out);
    }
    if (*runc) return cmd_run(o, out);
    return cmd_verify(o, out);
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const InvalidSchedule& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
}

}  // namespace pnclab
