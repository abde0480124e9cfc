#include "utb/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "utb/catalog.hpp"
#include "utb/error.hpp"
#include "utb/fingerprint.hpp"
#include "utb/pipeline.hpp"
#include "utb/walk.hpp"

namespace utb {

namespace fs = std::filesystem;

std::string hex_digest(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

Json RunManifest::to_json() const {
  Json in = Json::array(), outs = Json::array();
  for (const auto& [label, d] : input_digests) in.push_back(Json{{"input", label}, {"digest", d}});
  for (const auto& [path, d] : outputs) outs.push_back(Json{{"path", path}, {"digest", d}});
  Json j{{"subcommand", subcommand}, {"inputs", in},       {"seed", seed},        {"tool_version", tool_version},
         {"flags", flags},           {"outputs", outs},    {"duration_s", duration_s}, {"cached", cached}};
  if (!failed_stage.empty()) {
    j["failed_stage"] = failed_stage;
    j["error"] = error;
  }
  return j;
}

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Input {
  std::string label;
  GroupSpec spec;
  std::optional<CatalogEntry> entry;
  Json raw;  // the parsed file, for dim inputs that are not group specs
  std::string digest;
};

std::string slurp(std::istream& in) {
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Json parse_json_text(const std::string& text, const std::string& label) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, label + ": " + e.what());
  }
}

Json read_json_arg(const std::string& arg) {
  if (arg == "-") return parse_json_text(slurp(std::cin), "stdin");
  std::ifstream f(arg);
  if (!f) throw UsageError("cannot read " + arg);
  return parse_json_text(slurp(f), arg);
}

// catalog:NAME, "-" for stdin, or a file holding a GroupSpec or a catalog
// entry. Raw JSON that is neither is kept for the dim subcommand.
Input load_input(const std::string& arg, bool allow_other = false) {
  Input in;
  in.label = arg;
  if (arg.rfind("catalog:", 0) == 0) {
    in.entry = build(arg.substr(8));
    in.spec = in.entry->spec;
    in.digest = hex_digest(in.entry->to_json().dump());
    return in;
  }
  in.raw = read_json_arg(arg);
  in.digest = hex_digest(in.raw.dump());
  if (in.raw.is_object() && in.raw.contains("spec")) {
    in.spec = GroupSpec::from_json(in.raw.at("spec"));
    if (in.raw.contains("name") && in.raw["name"].is_string()) {
      CatalogEntry e;
      e.name = in.raw["name"].get<std::string>();
      e.spec = in.spec;
      if (in.raw.contains("expected_outcome") && in.raw["expected_outcome"].is_string())
        e.expected_outcome = outcome_from_name(in.raw["expected_outcome"].get<std::string>());
      in.entry = e;
    }
    return in;
  }
  if (in.raw.is_object() && in.raw.contains("generators")) {
    in.spec = GroupSpec::from_json(in.raw);
    return in;
  }
  if (!allow_other) throw UsageError(arg + ": expected a group spec or catalog entry");
  return in;
}

TOrder order_from_name(const std::string& s, int n) {
  if (s == "U") return TOrder::partial_u(n);
  if (s == "row") return TOrder::row_major(n);
  if (s == "col") return TOrder::col_major(n);
  throw UsageError("unknown order " + s);
}

StepMeasure measure_from_arg(const std::string& s, const Input& in) {
  static const std::map<std::string, std::string> alias{{"uniform", "uniform_symmetric"},
                                                        {"base", "base_plus_lamp"},
                                                        {"lazy", "lazy_uniform"}};
  auto it = alias.find(s);
  std::string kind = it == alias.end() ? s : it->second;
  if (kind == "uniform_symmetric" || kind == "base_plus_lamp" || kind == "lazy_uniform") {
    const MeasureKind k = measure_kind_from_name(kind);
    return in.entry ? default_measure(*in.entry, k) : default_measure(in.spec, k);
  }
  return StepMeasure::from_json(read_json_arg(s), in.spec);
}

Word word_from_text(const GroupSpec& spec, const std::string& text) {
  std::vector<std::string> letters;
  std::string cur;
  for (char c : text + " ") {
    if (c == ' ' || c == ',' || c == '\t') {
      if (!cur.empty() && cur != "e") letters.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  return spec.parse_word(letters);
}

// "A;B" with space- or comma-separated letters, "e" for the identity
DeltaPair delta_from_text(const GroupSpec& spec, const std::string& text) {
  const auto semi = text.find(';');
  if (semi == std::string::npos) throw UsageError("--delta expects 'A;B', e.g. 'e;delta'");
  return DeltaPair{word_from_text(spec, text.substr(0, semi)), word_from_text(spec, text.substr(semi + 1))};
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' '); }

std::string blocks_text(const BlockReport& r, const GroupSpec& spec) {
  std::ostringstream o;
  o << "order " << r.order << ", searched depth " << r.searched_depth << ", " << r.valid_pairs().size()
    << " valid block(s)\n";
  o << pad("pair", 8) << pad("status", 12) << pad("verified", 12) << "witness\n";
  for (const auto& p : r.pairs) {
    const bool ok = p.status == PairStatus::Valid;
    o << pad(p.pair.str(), 8) << pad(ok ? "valid" : "-", 12)
      << pad(ok ? (p.exact_verified ? "exact" : "fingerprint") : "", 12) << (ok ? spec.format_word(p.witness) : "")
      << "\n";
  }
  return o.str();
}

std::string dims_text(const std::vector<std::pair<std::string, DimensionReport>>& rows) {
  std::ostringstream o;
  o << pad("block", 10) << pad("dim", 6) << pad("exponent", 10) << "provenance\n";
  for (const auto& [label, d] : rows) {
    std::ostringstream e;
    if (d.fit) e << std::fixed << std::setprecision(3) << d.fit->exponent;
    o << pad(label, 10) << pad(d.ambiguous ? "?" : std::to_string(d.dimension), 6) << pad(e.str(), 10)
      << d.to_json().value("provenance", std::string()) << "\n";
  }
  return o.str();
}

std::string stats_text(const WalkStats& s) {
  std::istringstream in(s.to_csv());
  std::ostringstream o;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) o << pad(cell, 12);
    o << "\n";
  }
  return o.str();
}

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out_flag;
  std::string format = "json";
  RunManifest manifest;

  fs::path out_dir() const {
    if (!out_flag.empty()) return out_flag;
    if (const char* env = std::getenv(kCacheEnv); env && *env) return env;
    return "utb-out";
  }

  std::string run_key() const {
    std::string s = manifest.subcommand + "|" + std::to_string(seed) + "|" + manifest.flags.dump();
    for (const auto& [l, d] : manifest.input_digests) s += "|" + d;
    return hex_digest(s);
  }

  fs::path artifact_path(const std::string& ext) const {
    return out_dir() / (manifest.subcommand + "-" + run_key() + ext);
  }

  void write_artifact(const fs::path& p, const std::string& body) {
    fs::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + p.string());
    f << body;
    manifest.outputs.emplace_back(p.string(), hex_digest(body));
  }

  void write_manifest() {
    try {
      const fs::path dir = out_dir();
      fs::create_directories(dir);
      const std::string body = manifest.to_json().dump(2) + "\n";
      for (const fs::path& p : {dir / (manifest.subcommand + "-" + run_key() + ".manifest.json"), dir / "manifest.json"}) {
        std::ofstream f(p, std::ios::binary);
        f << body;
      }
    } catch (const std::exception& e) {
      err_ << "warning: manifest not written: " << e.what() << "\n";
    }
  }

  void add_input(const Input& in) { manifest.input_digests.emplace_back(in.label, in.digest); }

  // emits JSON or text and stores the JSON artifact
  void emit(const Json& j, const std::string& text) {
    const std::string body = j.dump(2) + "\n";
    write_artifact(artifact_path(".json"), body);
    if (format == "text") out_ << text;
    else out_ << body;
  }

  int catalog(const std::string& action, const std::string& name) {
    if (action == "list") {
      Json j{{"families", catalog_families()}};
      std::string t;
      for (const auto& f : catalog_families()) t += f + "\n";
      emit(j, t);
      return ExitOk;
    }
    if (action != "build") throw UsageError("catalog expects 'list' or 'build NAME'");
    if (name.empty()) throw UsageError("catalog build needs a NAME");
    const CatalogEntry e = build(name);
    emit(e.to_json(), e.name + "\n" + e.spec.to_json().dump(2) + "\n");
    return ExitOk;
  }

  BlockOptions block_options(int depth, std::size_t budget) const {
    BlockOptions b;
    b.depth = depth;
    b.element_budget = budget;
    b.seed = derive_seed(seed, "blocks");
    return b;
  }

  int blocks(const Input& in, const std::string& order, int depth, std::size_t budget) {
    const BlockReport r = decompose(in.spec, order_from_name(order, in.spec.size()), block_options(depth, budget));
    emit(r.to_json(in.spec), blocks_text(r, in.spec));
    return ExitOk;
  }

  DimOptions dim_options(const std::vector<int>& radii, double tol, std::size_t rank_budget) const {
    DimOptions d;
    if (!radii.empty()) d.radii = radii;
    d.tolerance = tol;
    d.span.rank_budget = rank_budget;
    d.span.seed = derive_seed(seed, "dim");
    return d;
  }

  int dim(const std::string& arg, const DimOptions& opt, const std::string& order, int depth, std::size_t budget) {
    const Input in = load_input(arg, true);
    add_input(in);
    std::vector<std::pair<std::string, ModuleSpec>> mods;
    if (!in.raw.is_null() && in.raw.contains("action_generators")) {
      mods.emplace_back("module", ModuleSpec::from_json(in.raw));
    } else if (!in.raw.is_null() && in.raw.contains("pairs")) {
      // a saved block report: rebuild each block module from its phi-values
      for (const auto& p : in.raw.at("pairs")) {
        if (p.value("status", "") != "valid") continue;
        Json phis = Json::array();
        for (const auto& [g, v] : p.at("phi_values").items()) phis.push_back(v);
        Json mj{{"char", in.raw.at("char")}, {"vars", in.raw.at("vars")}, {"action_generators", phis}};
        mods.emplace_back(Pair{p.at("i").get<int>(), p.at("j").get<int>()}.str(), ModuleSpec::from_json(mj));
      }
    } else if (!in.spec.generators().empty()) {
      const BlockReport r = decompose(in.spec, order_from_name(order, in.spec.size()), block_options(depth, budget));
      for (const auto& p : r.valid_pairs()) mods.emplace_back(p.str(), ModuleSpec::from_phis(r.at(p).phi));
    } else {
      throw UsageError(arg + ": expected a module spec, block report, group spec or catalog name");
    }
    Json arr = Json::array();
    std::vector<std::pair<std::string, DimensionReport>> rows;
    for (const auto& [label, m] : mods) {
      DimensionReport d = dimension_estimate(m, opt);
      arr.push_back(Json{{"block", label}, {"module", m.to_json()}, {"report", d.to_json()}});
      rows.emplace_back(label, std::move(d));
    }
    emit(Json{{"dimensions", arr}}, dims_text(rows));
    return ExitOk;
  }

  AnalysisOptions analysis_options(const std::string& order, int depth, std::size_t budget, const DimOptions& d,
                                   int n) const {
    AnalysisOptions a;
    a.blocks = block_options(depth, budget);
    a.dim = d;
    a.order = order_from_name(order, n);
    return a;
  }

  int classify(const Input& in, const AnalysisOptions& opt, const std::vector<std::string>& elements) {
    Analysis a = analyze(in.spec, opt);
    if (!elements.empty()) {
      std::vector<Word> words;
      for (const auto& e : elements) words.push_back(word_from_text(in.spec, e));
      classify_elements(a.verdict, in.spec, words, TOrder::row_major(in.spec.size()), opt.blocks);
    }
    Json j = a.verdict.to_json();
    j["citation_trail"] = a.verdict.citation_trail();
    std::string text = a.verdict.citation_trail();
    if (a.verdict.per_element)
      for (const auto& e : *a.verdict.per_element)
        text += "  element " + e.element + ": " + (e.acts_nontrivially ? "acts non-trivially, " : "") + e.detail + "\n";
    emit(j, text);
    return a.verdict.outcome == Outcome::Unknown ? ExitUnknown : ExitOk;
  }

  struct SimArgs {
    std::int64_t n = 1000, walkers = 100;
    std::vector<std::int64_t> checkpoints;
    std::vector<std::string> stats;
    std::string delta, relation = "identity", measure = "uniform", scale = "sqrt";
    std::vector<double> epsilons{1.0};
    bool csv = false;
  };

  WalkConfig walk_config(const Input& in, const SimArgs& s, std::uint64_t walk_seed) const {
    WalkConfig c;
    c.spec = in.spec;
    c.measure = measure_from_arg(s.measure, in);
    c.n = s.n;
    c.walkers = s.walkers;
    c.seed = walk_seed;
    c.checkpoints = s.checkpoints;
    for (const auto& x : s.stats) c.stats.push_back(stat_from_name(x));
    c.epsilons = s.epsilons;
    c.scale = scale_from_name(s.scale);
    c.threads = threads;
    return c;
  }

  static AdmissibleRelation relation_from(const std::string& s) {
    if (s == "identity") return AdmissibleRelation::identity();
    if (s == "conjugate-vector" || s == "conjugate") return AdmissibleRelation::conjugate_vector();
    throw UsageError("unknown relation " + s);
  }

  // results are cached under the run key; a hit skips the walk
  int simulate(const Input& in, const SimArgs& s) {
    const WalkConfig cfg = walk_config(in, s, derive_seed(seed, "simulate"));
    std::optional<DeltaPair> delta;
    if (!s.delta.empty()) delta = delta_from_text(in.spec, s.delta);
    manifest.flags["config"] = cfg.to_json();
    const fs::path jp = artifact_path(".json");
    if (fs::exists(jp)) {
      std::ifstream f(jp, std::ios::binary);
      const std::string body = slurp(f);
      manifest.cached = true;
      manifest.outputs.emplace_back(jp.string(), hex_digest(body));
      out_ << body;
      return ExitOk;
    }
    const AdmissibleRelation rel = relation_from(s.relation);
    if (rel.kind != RelationKind::Identity) check_admissible(cfg, rel, delta);
    const WalkStats st = simulate_walk(cfg, rel, delta);
    if (s.csv) write_artifact(artifact_path(".csv"), st.to_csv());
    if (s.csv && format != "json") {
      write_artifact(jp, st.to_json().dump(2) + "\n");
      out_ << st.to_csv();
      return ExitOk;
    }
    emit(st.to_json(), stats_text(st));
    return ExitOk;
  }

  static WalkStats simulate_walk(const WalkConfig& cfg, const AdmissibleRelation& rel,
                                 const std::optional<DeltaPair>& delta) {
    return utb::simulate(cfg, rel, delta);
  }

  int pipeline(const Input& in, const AnalysisOptions& opt, bool with_sim, SimArgs s, std::string& stage) {
    Json report{{"input", in.label}};
    stage = "blocks";
    Analysis a;
    a.blocks = decompose(in.spec, *opt.order, opt.blocks);
    stage = "dim";
    // same stages as analyze(), split so a failure names its stage
    std::map<std::string, DimensionReport> seen;
    for (const auto& p : a.blocks.valid_pairs()) {
      const PairResult& b = a.blocks.at(p);
      ModuleSpec m = ModuleSpec::from_phis(b.phi);
      const std::string key = m.to_json().dump();
      auto it = seen.find(key);
      if (it == seen.end()) it = seen.emplace(key, dimension_estimate(m, opt.dim)).first;
      std::optional<WreathCheck> w;
      if (!in.spec.field().is_prime() && !it->second.ambiguous && it->second.dimension == 2)
        w = is_wreath_block(b, m, opt.exponent_bound, opt.wreath_radius);
      a.modules.push_back(std::move(m));
      a.dims.push_back(it->second);
      a.wreath.push_back(std::move(w));
    }
    stage = "classify";
    a.verdict = utb::classify(in.spec, a.blocks, a.dims, a.wreath_flags());
    report["analysis"] = a.to_json(in.spec);
    report["citation_trail"] = a.verdict.citation_trail();
    std::string text = blocks_text(a.blocks, in.spec) + "\n";
    {
      std::vector<std::pair<std::string, DimensionReport>> rows;
      const auto pairs = a.blocks.valid_pairs();
      for (std::size_t k = 0; k < pairs.size(); ++k) rows.emplace_back(pairs[k].str(), a.dims[k]);
      text += dims_text(rows) + "\n" + a.verdict.citation_trail();
    }
    if (in.entry && in.entry->expected_outcome) {
      const bool match = *in.entry->expected_outcome == a.verdict.outcome &&
                         (!in.entry->expected_moment || *in.entry->expected_moment == a.verdict.moment_class ||
                          a.verdict.outcome != Outcome::Trivial);
      report["catalog"] = Json{{"name", in.entry->name},
                               {"expected_outcome", outcome_name(*in.entry->expected_outcome)},
                               {"actual_outcome", outcome_name(a.verdict.outcome)},
                               {"match", match}};
      text += std::string("catalog expectation ") + outcome_name(*in.entry->expected_outcome) +
              (match ? ": match\n" : ": MISMATCH\n");
    }
    if (with_sim) {
      stage = "simulate";
      if (s.stats.empty()) {
        s.stats = {"range", "drift", "return"};
        if (!s.delta.empty() || has_unipotent(in.spec)) s.stats.push_back("deltarank");
      }
      const WalkConfig cfg = walk_config(in, s, derive_seed(seed, "pipeline/simulate"));
      std::optional<DeltaPair> delta;
      if (!s.delta.empty()) delta = delta_from_text(in.spec, s.delta);
      else if (has_unipotent(in.spec)) delta = default_delta(in.spec);
      const WalkStats st = utb::simulate(cfg, relation_from(s.relation), delta);
      report["simulation"] = Json{{"config", cfg.to_json()}, {"stats", st.to_json()}};
      text += "\n" + stats_text(st);
    }
    stage.clear();
    emit(report, text);
    return a.verdict.outcome == Outcome::Unknown ? ExitUnknown : ExitOk;
  }

  static bool has_unipotent(const GroupSpec& spec) {
    for (const auto& g : spec.generators())
      if (g.matrix.is_unipotent() && !(g.matrix == spec.identity())) return true;
    return false;
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace

int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"unipotent-triangular boundary toolkit", "utb"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolVersion);

  Runner R(out, err);
  app.add_option("--seed", R.seed, "master seed; stage seeds derive from it");
  app.add_option("--threads", R.threads, "worker cap (0: all cores)");
  app.add_option("--out", R.out_flag, std::string("artifact directory (default $") + kCacheEnv + " or ./utb-out)");
  app.add_option("--format", R.format, "json or text")->check(CLI::IsMember({"json", "text"}));

  std::string input, order = "U", action, cname;
  int depth = 8, exponent_bound = 3, wreath_radius = 4;
  std::size_t budget = BlockOptions().element_budget, rank_budget = SpanOptions().rank_budget;
  std::vector<int> radii;
  double tolerance = DimOptions().tolerance;
  std::vector<std::string> elements;
  Runner::SimArgs sim;
  bool no_simulate = false;

  auto add_block_flags = [&](CLI::App* c) {
    c->add_option("--order", order, "U, row or col")->check(CLI::IsMember({"U", "row", "col"}));
    c->add_option("--depth", depth, "word search depth");
    c->add_option("--budget", budget, "element budget of the block search");
  };
  auto add_dim_flags = [&](CLI::App* c) {
    c->add_option("--radii", radii, "span radii for the growth fit");
    c->add_option("--tolerance", tolerance, "distance to an integer accepted by the fit");
    c->add_option("--rank-budget", rank_budget, "largest span rank built");
    c->add_option("--exponent-bound", exponent_bound, "wreath check exponent bound");
  };
  auto add_sim_flags = [&](CLI::App* c) {
    c->add_option("--n", sim.n, "steps");
    c->add_option("--walkers", sim.walkers, "independent trajectories");
    c->add_option("--checkpoints", sim.checkpoints, "times at which statistics are recorded");
    c->add_option("--stat", sim.stats, "range genrange drift cautious return deltarank hits");
    c->add_option("--delta", sim.delta, "'A;B' increments of the delta set, e.g. 'e;delta'");
    c->add_option("--relation", sim.relation, "identity or conjugate-vector");
    c->add_option("--measure", sim.measure, "uniform, base, lazy or a measure JSON file");
    c->add_option("--epsilons", sim.epsilons, "cautiousness radii");
    c->add_option("--scale", sim.scale, "sqrt or linear");
  };

  auto* cat = app.add_subcommand("catalog", "list families or build a named example");
  cat->add_option("action", action, "list or build")->required();
  cat->add_option("name", cname, "e.g. lamplighter(3,2)");

  auto* blk = app.add_subcommand("blocks", "basic block decomposition");
  blk->add_option("input", input, "catalog:NAME, -, or a JSON file")->required();
  add_block_flags(blk);

  auto* dimc = app.add_subcommand("dim", "module dimension estimates");
  dimc->add_option("input", input, "module spec, block report, group spec or catalog:NAME")->required();
  add_dim_flags(dimc);
  add_block_flags(dimc);

  auto* cls = app.add_subcommand("classify", "boundary verdict with citation trail");
  cls->add_option("input", input)->required();
  add_block_flags(cls);
  add_dim_flags(cls);
  cls->add_option("--element", elements, "word whose boundary action is tested");

  auto* simc = app.add_subcommand("simulate", "Monte Carlo walk statistics");
  simc->add_option("input", input)->required();
  add_sim_flags(simc);
  simc->add_flag("--csv", sim.csv, "also write the statistics as CSV");

  auto* pipe = app.add_subcommand("pipeline", "blocks, dim, classify and simulate in one report");
  pipe->add_option("input", input)->required();
  add_block_flags(pipe);
  add_dim_flags(pipe);
  add_sim_flags(pipe);
  pipe->add_flag("--no-simulate", no_simulate, "skip the walk stage");

  std::vector<const char*> cargv;
  for (const auto& a : argv) cargv.push_back(a.c_str());
  if (cargv.empty()) cargv.push_back("utb");

  const auto t0 = std::chrono::steady_clock::now();
  std::string stage;
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? ExitOk : ExitUsage;
  }

  auto* sub = app.get_subcommands().front();
  R.manifest.subcommand = sub->get_name();
  R.manifest.seed = R.seed;
  Json flags{{"format", R.format}};
  for (const CLI::Option* o : sub->get_options())
    if (o->count() > 0 && o->get_name() != "--help") flags[o->get_name()] = o->results();
  R.manifest.flags = flags;

  int rc = ExitOk;
  bool record = true;
  try {
    if (sub == cat) {
      rc = R.catalog(action, cname);
    } else if (sub == dimc) {
      stage = "dim";
      rc = R.dim(input, R.dim_options(radii, tolerance, rank_budget), order, depth, budget);
    } else {
      stage = R.manifest.subcommand;
      const Input in = load_input(input);
      R.add_input(in);
      if (sub == blk) {
        rc = R.blocks(in, order, depth, budget);
      } else if (sub == simc) {
        rc = R.simulate(in, sim);
      } else {
        AnalysisOptions ao = R.analysis_options(order, depth, budget, R.dim_options(radii, tolerance, rank_budget),
                                                in.spec.size());
        ao.exponent_bound = exponent_bound;
        ao.wreath_radius = wreath_radius;
        if (sub == cls) {
          rc = R.classify(in, ao, elements);
        } else {
          if (!pipe->count("--n")) sim.n = 200;
          if (!pipe->count("--walkers")) sim.walkers = 32;
          rc = R.pipeline(in, ao, !no_simulate, sim, stage);
        }
      }
    }
  } catch (const UsageError& e) {
    err << "utb: " << e.what() << "\n";
    rc = ExitUsage;
    record = false;
  } catch (const Error& e) {
    err << "utb: " << e.what() << "\n";
    R.manifest.failed_stage = stage.empty() ? R.manifest.subcommand : stage;
    R.manifest.error = e.what();
    rc = ExitComputation;
  } catch (const std::exception& e) {
    err << "utb: " << e.what() << "\n";
    R.manifest.failed_stage = stage.empty() ? R.manifest.subcommand : stage;
    R.manifest.error = e.what();
    rc = ExitComputation;
  }
  R.manifest.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (record) R.write_manifest();
  return rc;
}

}  // namespace utb
