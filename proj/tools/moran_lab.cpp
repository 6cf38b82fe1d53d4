// moran-lab: command-line front end for the moran library.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "moran/moran.hpp"

#ifndef MORAN_LAB_VERSION
#define MORAN_LAB_VERSION "0.0.0"
#endif

namespace {

using namespace moran;
using nlohmann::json;

enum Exit : int { Ok = 0, Internal = 1, ConfigError = 2, InputError = 3, CapacityError = 4 };

// errors raised by the front end itself, with the exit code they map to
struct CliFailure : std::runtime_error {
  int exit_code;
  CliFailure(int code, const std::string& what) : std::runtime_error(what), exit_code(code) {}
};

struct InputFile {
  std::string role, path, contents;
};

class Run {
 public:
  std::string subcommand;
  std::vector<std::string> argv;
  std::vector<InputFile> inputs;
  std::optional<std::uint64_t> seed;

  const InputFile& read(const std::string& role, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliFailure(ConfigError, "cannot read " + role + " file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    inputs.push_back({role, path, buf.str()});
    return inputs.back();
  }

  json manifest() const {
    json files = json::array();
    for (const auto& f : inputs) files.push_back({{"role", f.role}, {"path", f.path}, {"fnv1a64", hex64(fnv1a64(f.contents))}});
    json flags = json::object();
    for (std::size_t i = 1; i < argv.size(); ++i) {
      const auto eq = argv[i].find('=');
      flags[argv[i].substr(2, eq - 2)] = argv[i].substr(eq + 1);
    }
    return {{"tool", "moran-lab"},
            {"version", MORAN_LAB_VERSION},
            {"subcommand", subcommand},
            {"argv", argv},
            {"flags", flags},
            {"inputs", files},
            {"masterSeed", seed ? json(*seed) : json(nullptr)}};
  }
};

struct Common {
  std::string format = "json";
  std::string manifest_path;
};

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

TypeIndex type_named(const TypeSystem& ts, const std::string& name) {
  if (auto j = ts.index_of(name)) return *j;
  fail(ErrorCode::UnknownType, "no type named '" + name + "'");
}

TypeIndex resolve_alpha(const TypeDocument& doc, const std::string& flag) {
  if (!flag.empty()) return type_named(doc.types, flag);
  if (doc.alpha) return *doc.alpha;
  throw CliFailure(ConfigError, "no alpha: pass --alpha or set \"alpha\" in the types file");
}

// comma-separated type names, one per vertex
std::vector<TypeIndex> parse_start(const TypeSystem& ts, const std::string& text, std::size_t n) {
  std::vector<TypeIndex> out;
  std::stringstream in(text);
  std::string name;
  while (std::getline(in, name, ',')) out.push_back(type_named(ts, name));
  if (out.size() != n)
    fail(ErrorCode::InvalidArgument, "start state names " + std::to_string(out.size()) + " vertices, graph has " +
                                         std::to_string(n));
  return out;
}

InitialDistribution load_distribution(Run& run, const std::string& spec) {
  if (spec == "mut") return InitialDistribution::mut();
  if (spec.rfind("list:", 0) == 0) return parse_distribution_list(run.read("dist", spec.substr(5)).contents);
  throw CliFailure(ConfigError, "--dist must be 'mut' or 'list:<path>'");
}

std::uint64_t state_cap(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("MORAN_LAB_CAP")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw CliFailure(ConfigError, "MORAN_LAB_CAP must be a non-negative integer");
  }
  return default_state_cap;
}

json with_names(const TypeSystem& ts, const std::vector<std::string>& values) {
  json out = json::object();
  for (TypeIndex j = 0; j < ts.size(); ++j) out[ts.name(j)] = values[j];
  return out;
}

std::string outcome_text(Outcome o) { return std::string(to_string(o)); }

json record_json(const AbsorptionRecord& r, const TypeSystem& ts) {
  return {{"replicate", r.replicate},
          {"outcome", outcome_text(r.outcome)},
          {"type", r.type ? json(ts.name(*r.type)) : json(nullptr)},
          {"steps", r.steps}};
}

void print_text(const json& result, std::ostream& out) {
  std::size_t width = 0;
  for (const auto& [key, value] : result.items()) width = std::max(width, key.size());
  for (const auto& [key, value] : result.items()) {
    const bool rows = (value.is_array() || value.is_object()) && !value.empty() &&
                      std::all_of(value.begin(), value.end(), [](const json& v) { return v.is_object(); });
    if (rows) {
      out << key << ":\n";
      for (const auto& [label, row] : value.items()) {
        std::vector<std::string> cells;
        if (value.is_object()) cells.push_back(label);
        for (const auto& [k, v] : row.items()) cells.push_back(k + "=" + (v.is_string() ? v.get<std::string>() : v.dump()));
        out << "  " << join(cells, "  ") << '\n';
      }
      continue;
    }
    out << std::left << std::setw(static_cast<int>(width) + 2) << key
        << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
  }
}

void emit(const Run& run, const Common& common, const json& result) {
  const json manifest = run.manifest();
  if (!common.manifest_path.empty()) {
    std::ofstream out(common.manifest_path);
    if (!out) throw CliFailure(ConfigError, "cannot write manifest '" + common.manifest_path + "'");
    out << manifest.dump(2) << '\n';
  }
  if (common.format == "text") print_text(result, std::cout);
  else std::cout << json{{"result", result}, {"manifest", manifest}}.dump(2) << '\n';
}

// ---- subcommands ----

struct EstimateFlags {
  std::string graph, types, alpha, dist = "mut", mode = "fptras", budget_multiplier = "8";
  double eps = 0.1, delta = 0.1, delta_prime = 0.125;
  std::uint64_t seed = 0, replicates = 10000;
  std::optional<std::uint64_t> max_steps;
  unsigned threads = 1;
};

json cmd_estimate(Run& run, const EstimateFlags& f) {
  const Graph g = parse_graph(run.read("graph", f.graph).contents);
  const TypeDocument doc = parse_types(run.read("types", f.types).contents);
  const TypeIndex alpha = resolve_alpha(doc, f.alpha);
  const InitialDistribution dist = load_distribution(run, f.dist);
  json result;
  if (f.mode == "plain") {
    const auto r = run_plain_mc(g, doc.types, alpha, dist, f.replicates, f.seed, f.threads,
                                f.max_steps.value_or(unlimited_steps));
    result = to_json(r);
  } else {
    EstimatorConfig config;
    config.eps = f.eps;
    config.delta = f.delta;
    config.delta_prime = f.delta_prime;
    config.master_seed = f.seed;
    config.threads = f.threads;
    config.budget_multiplier = parse_rational(f.budget_multiplier);
    result = to_json(run_fptras(g, doc.types, alpha, dist, config));
  }
  result["mode"] = f.mode;
  result["alpha"] = doc.types.name(alpha);
  result["n"] = g.size();
  return result;
}

struct ExactFlags {
  std::string graph, types, dist, backend = "rational";
  std::optional<std::uint64_t> cap;
  bool omit_states = false;
};

json cmd_exact(Run& run, const ExactFlags& f) {
  const Graph g = parse_graph(run.read("graph", f.graph).contents);
  const TypeDocument doc = parse_types(run.read("types", f.types).contents);
  const TypeSystem& ts = doc.types;
  std::optional<InitialDistribution> dist;
  if (!f.dist.empty()) dist = load_distribution(run, f.dist);
  ExactOptions options;
  options.cap = state_cap(f.cap);
  options.backend = f.backend == "float" ? Backend::Float : Backend::Rational;
  const ExactSolution sol = solve_exact(g, ts, options);
  json result = to_json(sol, ts);
  if (f.omit_states) result.erase("states");
  if (dist) {
    const auto v = exact_under_distribution(sol, *dist, g, ts);
    json d = {{"pi", nullptr}, {"piFloat", json::object()}};
    for (TypeIndex j = 0; j < ts.size(); ++j) d["piFloat"][ts.name(j)] = v.fixation[j];
    if (sol.exact()) {
      std::vector<std::string> pi;
      for (const auto& x : v.fixation_exact) pi.push_back(to_string(x));
      d["pi"] = with_names(ts, pi);
    }
    d["spec"] = f.dist;
    result["distribution"] = d;
  }
  return result;
}

struct BoundsFlags {
  std::string graph, types, alpha;
  std::optional<std::size_t> n, mutants;
};

json cmd_bounds(Run& run, const BoundsFlags& f) {
  std::optional<Graph> g;
  if (!f.graph.empty()) g = parse_graph(run.read("graph", f.graph).contents);
  if (g.has_value() == f.n.has_value()) throw CliFailure(ConfigError, "pass exactly one of --graph and --n");
  const std::size_t n = g ? g->size() : *f.n;
  const TypeDocument doc = parse_types(run.read("types", f.types).contents);
  const TypeSystem& ts = doc.types;
  const std::optional<TypeIndex> alpha = f.alpha.empty() ? doc.alpha : std::optional(type_named(ts, f.alpha));

  std::vector<BoundReport> reports;
  reports.push_back({"pi_alpha lower bound for a maximally fit alpha", fixation_lower_bound(n), BoundDirection::Lower,
                     "n=" + std::to_string(n)});
  if (ts.size() >= 2) {
    for (auto& r : absorption_bounds_full(n, ts)) reports.push_back(std::move(r));
    std::vector<TypeIndex> tops = ts.tau_max();
    if (alpha && ts.is_max(*alpha)) tops = {*alpha};
    for (TypeIndex j : tops)
      reports.push_back({"E[A_" + ts.name(j) + "] for maximally fit " + ts.name(j), absorption_bound_max_type(n, ts, j),
                         BoundDirection::Upper, "n=" + std::to_string(n)});
  }
  if (f.mutants) {
    if (!alpha) throw CliFailure(ConfigError, "--mutants needs an alpha type");
    if (g && g->edge_count() != n * (n - 1) / 2)
      fail(ErrorCode::InvalidArgument, "the complete-graph sandwich applies only to complete graphs");
    const auto [lo, hi] = complete_graph_sandwich(ts, *alpha, n, *f.mutants);
    const std::string in = "K_" + std::to_string(n) + ", i=" + std::to_string(*f.mutants);
    reports.push_back({"pi_" + ts.name(*alpha) + " on the complete graph", lo, BoundDirection::Lower, in});
    reports.push_back({"pi_" + ts.name(*alpha) + " on the complete graph", hi, BoundDirection::Upper, in});
  }
  json list = json::array();
  for (const auto& r : reports) list.push_back(to_json(r));
  return {{"n", n}, {"bounds", list}};
}

struct SimulateFlags {
  std::string graph, types, alpha, dist = "mut", start, stop, record;
  std::uint64_t seed = 0, replicates = 1;
  std::optional<std::uint64_t> max_steps;
  unsigned threads = 1;
};

json cmd_simulate(Run& run, const SimulateFlags& f) {
  const Graph g = parse_graph(run.read("graph", f.graph).contents);
  const TypeDocument doc = parse_types(run.read("types", f.types).contents);
  const TypeSystem& ts = doc.types;
  std::optional<TypeIndex> alpha = f.alpha.empty() ? doc.alpha : std::optional(type_named(ts, f.alpha));
  const std::string stop = f.stop.empty() ? (alpha ? "alpha" : "full") : f.stop;
  if (stop == "alpha" && !alpha) throw CliFailure(ConfigError, "--stop alpha needs an alpha type");
  const StopRule rule = stop == "alpha" ? StopRule::alpha_stopped(*alpha) : StopRule::full_fixation();

  InitialDistribution dist = InitialDistribution::mut();
  if (!f.start.empty()) {
    if (f.dist != "mut") throw CliFailure(ConfigError, "pass either --start or --dist, not both");
    dist = InitialDistribution::explicit_list({{parse_start(ts, f.start, g.size()), Rational(1)}});
    dist.allow_partial_range();
  } else {
    dist = load_distribution(run, f.dist);
  }
  if (!f.record.empty() && f.replicates != 1) throw CliFailure(ConfigError, "--record needs --replicates 1");
  const std::uint64_t cap = f.max_steps.value_or(unlimited_steps);

  std::vector<AbsorptionRecord> records(f.replicates);
  auto one = [&](std::uint64_t i, auto&& observer) {
    Rng rng(f.seed, 0, i);
    State initial(ts, dist.sample(g, ts, rng));
    records[i] = run_to_absorption(g, std::move(initial), rule, cap, rng, observer);
    records[i].replicate = i;
  };
  if (!f.record.empty()) {
    std::ofstream out(f.record);
    if (!out) throw CliFailure(ConfigError, "cannot write '" + f.record + "'");
    one(0, TrajectoryCsv(out, ts));
  } else {
    parallel_for(f.replicates, f.threads, [&](std::uint64_t i) { one(i, NoObserver{}); });
  }

  json list = json::array();
  std::uint64_t truncated = 0, fixated = 0;
  double steps = 0;
  for (const auto& r : records) {
    list.push_back(record_json(r, ts));
    truncated += r.outcome == Outcome::Truncated;
    fixated += r.outcome == Outcome::Fixated;
    steps += static_cast<double>(r.steps);
  }
  return {{"stop", stop},
          {"records", list},
          {"replicates", f.replicates},
          {"fixated", fixated},
          {"truncated", truncated},
          {"meanSteps", steps / static_cast<double>(f.replicates)}};
}

struct CoupleFlags {
  std::string graph, types, types_prime, alpha, start, start_prime, log;
  std::uint64_t seed = 0, events = 10000;
};

json cmd_couple(Run& run, const CoupleFlags& f) {
  const Graph g = parse_graph(run.read("graph", f.graph).contents);
  const TypeDocument first = parse_types(run.read("types", f.types).contents);
  const TypeDocument second = parse_types(run.read("types-prime", f.types_prime).contents);
  if (first.types.names() != second.types.names())
    fail(ErrorCode::HypothesisViolated, "both types files must list the same types in the same order");
  const TypeIndex alpha = resolve_alpha(first, f.alpha);
  const auto a = parse_start(first.types, f.start, g.size());
  const auto b = parse_start(first.types, f.start_prime.empty() ? f.start : f.start_prime, g.size());
  Rng rng(f.seed);
  CoupledRunResult r;
  if (!f.log.empty()) {
    std::ofstream out(f.log);
    if (!out) throw CliFailure(ConfigError, "cannot write '" + f.log + "'");
    write_event_csv_header(out);
    r = coupled_run(g, first.types, second.types, a, b, alpha, f.events, rng,
                    [&](const CoupledEvent& e) { write_event_csv(out, e); });
  } else {
    r = coupled_run(g, first.types, second.types, a, b, alpha, f.events, rng);
  }
  return {{"violated", r.violated},
          {"firstViolation", r.first_violation ? json(*r.first_violation) : json(nullptr)},
          {"events", r.events},
          {"time", r.time},
          {"caseCounts", r.case_counts}};
}

// ---- dispatch ----

int exit_for(const Error& e) {
  switch (category(e.code())) {
    case ErrorCategory::Input:
      return InputError;
    case ErrorCategory::Capacity:
      return CapacityError;
    case ErrorCategory::Config:
      return ConfigError;
  }
  return Internal;
}

// Canonical argument vector: the subcommand, then every flag the user set as --name=value.
std::vector<std::string> canonical_argv(const CLI::App& sub) {
  std::vector<std::string> out{sub.get_name()};
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->count() == 0 || opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "manifest" || name == "format") continue;
    out.push_back("--" + name + "=" + (opt->get_type_size() == 0 ? "true" : join(opt->results(), ",")));
  }
  return out;
}

int run_cli(std::vector<std::string> args, std::optional<json> expected_inputs = std::nullopt);

int cmd_replay(const std::string& path, const std::string& format) {
  std::ifstream in(path);
  if (!in) throw CliFailure(ConfigError, "cannot read manifest '" + path + "'");
  json m;
  try {
    m = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::MalformedDocument, std::string("manifest: ") + e.what());
  }
  if (!m.is_object() || m.value("tool", "") != "moran-lab" || !m.contains("argv") || !m["argv"].is_array())
    fail(ErrorCode::MalformedDocument, "not a moran-lab manifest");
  std::vector<std::string> args;
  for (const auto& a : m["argv"]) {
    if (!a.is_string()) fail(ErrorCode::MalformedDocument, "manifest argv must hold strings");
    args.push_back(a.get<std::string>());
  }
  if (!format.empty()) {
    args.push_back("--format");
    args.push_back(format);
  }
  return run_cli(args, m.value("inputs", json::array()));
}

int run_cli(std::vector<std::string> args, std::optional<json> expected_inputs) {
  CLI::App app{"Fixation probabilities of the multi-type Moran process on graphs", "moran-lab"};
  app.set_version_flag("--version", MORAN_LAB_VERSION);
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", common.format, "Output format")->check(CLI::IsMember({"json", "text"}));
    sub->add_option("--manifest", common.manifest_path, "Also write the run manifest to this path");
  };

  EstimateFlags ef;
  auto* est = app.add_subcommand("estimate", "Approximate the fixation probability of alpha");
  est->add_option("--graph", ef.graph, "Edge-list file")->required();
  est->add_option("--types", ef.types, "Types JSON file")->required();
  est->add_option("--alpha", ef.alpha, "Name of the type to estimate");
  est->add_option("--eps", ef.eps, "Relative error");
  est->add_option("--delta", ef.delta, "Failure probability");
  est->add_option("--delta-prime", ef.delta_prime, "Failure probability of one repeat");
  est->add_option("--dist", ef.dist, "Initial distribution: mut or list:<path>");
  est->add_option("--seed", ef.seed, "Master seed")->required();
  est->add_option("--budget-multiplier", ef.budget_multiplier, "Step budget multiplier (rational)");
  est->add_option("--threads", ef.threads, "Worker threads")->check(CLI::PositiveNumber);
  est->add_option("--mode", ef.mode, "fptras or plain Monte Carlo")->check(CLI::IsMember({"fptras", "plain"}));
  est->add_option("--replicates", ef.replicates, "Replicates in plain mode")->check(CLI::PositiveNumber);
  est->add_option("--max-steps", ef.max_steps, "Per-replicate step cap in plain mode");
  add_common(est);

  ExactFlags xf;
  auto* exact = app.add_subcommand("exact", "Solve the absorbing chain exactly");
  exact->add_option("--graph", xf.graph, "Edge-list file")->required();
  exact->add_option("--types", xf.types, "Types JSON file")->required();
  exact->add_option("--dist", xf.dist, "Also average over mut or list:<path>");
  exact->add_option("--cap", xf.cap, "Maximum number of states");
  exact->add_option("--backend", xf.backend, "rational or float")->check(CLI::IsMember({"rational", "float"}));
  exact->add_flag("--omit-states", xf.omit_states, "Leave the per-state table out");
  add_common(exact);

  BoundsFlags bf;
  auto* bounds = app.add_subcommand("bounds", "Evaluate the closed-form bounds");
  bounds->add_option("--graph", bf.graph, "Edge-list file (only its size is used)");
  bounds->add_option("--n", bf.n, "Number of vertices")->check(CLI::PositiveNumber);
  bounds->add_option("--types", bf.types, "Types JSON file")->required();
  bounds->add_option("--alpha", bf.alpha, "Type for the per-type and sandwich bounds");
  bounds->add_option("--mutants", bf.mutants, "alpha vertices for the complete-graph sandwich");
  add_common(bounds);

  SimulateFlags sf;
  auto* sim = app.add_subcommand("simulate", "Run the discrete process to absorption");
  sim->add_option("--graph", sf.graph, "Edge-list file")->required();
  sim->add_option("--types", sf.types, "Types JSON file")->required();
  sim->add_option("--alpha", sf.alpha, "Type whose fixation or extinction stops a run");
  sim->add_option("--stop", sf.stop, "alpha or full")->check(CLI::IsMember({"alpha", "full"}));
  sim->add_option("--dist", sf.dist, "Initial distribution: mut or list:<path>");
  sim->add_option("--start", sf.start, "Initial state as comma-separated type names");
  sim->add_option("--seed", sf.seed, "Master seed")->required();
  sim->add_option("--replicates", sf.replicates, "Independent runs")->check(CLI::PositiveNumber);
  sim->add_option("--max-steps", sf.max_steps, "Step cap per run");
  sim->add_option("--record", sf.record, "Trajectory CSV path (single run)");
  sim->add_option("--threads", sf.threads, "Worker threads")->check(CLI::PositiveNumber);
  add_common(sim);

  CoupleFlags cf;
  auto* couple = app.add_subcommand("couple", "Run the coupled pair of continuous-time processes");
  couple->add_option("--graph", cf.graph, "Edge-list file")->required();
  couple->add_option("--types", cf.types, "Types JSON file with fitness f")->required();
  couple->add_option("--types-prime", cf.types_prime, "Types JSON file with fitness f'")->required();
  couple->add_option("--alpha", cf.alpha, "Shared type alpha");
  couple->add_option("--start", cf.start, "Initial state of the f chain")->required();
  couple->add_option("--start-prime", cf.start_prime, "Initial state of the f' chain (default: --start)");
  couple->add_option("--events", cf.events, "Number of events");
  couple->add_option("--seed", cf.seed, "Master seed")->required();
  couple->add_option("--log", cf.log, "Event CSV path");
  add_common(couple);

  std::string replay_path, replay_format;
  auto* replay = app.add_subcommand("replay", "Re-run a saved manifest");
  replay->add_option("manifest", replay_path, "Manifest JSON file")->required();
  replay->add_option("--format", replay_format, "Output format")->check(CLI::IsMember({"json", "text"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return ConfigError;
  }

  if (replay->parsed()) return cmd_replay(replay_path, replay_format);

  CLI::App* sub = app.get_subcommands().front();
  Run run;
  run.subcommand = sub->get_name();
  run.argv = canonical_argv(*sub);
  json result;
  if (est->parsed()) {
    run.seed = ef.seed;
    result = cmd_estimate(run, ef);
  } else if (exact->parsed()) {
    result = cmd_exact(run, xf);
  } else if (bounds->parsed()) {
    result = cmd_bounds(run, bf);
  } else if (sim->parsed()) {
    run.seed = sf.seed;
    result = cmd_simulate(run, sf);
  } else {
    run.seed = cf.seed;
    result = cmd_couple(run, cf);
  }

  if (expected_inputs) {
    for (const auto& want : *expected_inputs) {
      const auto it = std::find_if(run.inputs.begin(), run.inputs.end(),
                                   [&](const InputFile& f) { return f.path == want.value("path", ""); });
      if (it == run.inputs.end() || hex64(fnv1a64(it->contents)) != want.value("fnv1a64", ""))
        throw CliFailure(InputError, "input '" + want.value("path", "") + "' changed since the manifest was written");
    }
  }
  emit(run, common, result);
  return Ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return run_cli(std::move(args));
  } catch (const CliFailure& e) {
    std::cerr << "moran-lab: " << e.what() << '\n';
    return e.exit_code;
  } catch (const Error& e) {
    std::cerr << "moran-lab: " << e.what() << '\n';
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "moran-lab: internal error: " << e.what() << '\n';
    return Internal;
  }
}
