// urltriage: forensic URL triage over sealed browser-session evidence.
//
// Subcommands cover the pipeline end to end: simulate or ingest a session,
// serve its evidence tools, adjudicate the checklist, evaluate corpora, and
// synthesize incident reports.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>

#include "triage/adjudicator.hpp"
#include "triage/bundle_io.hpp"
#include "triage/errors.hpp"
#include "triage/evidence_api.hpp"
#include "triage/harness.hpp"
#include "triage/ingest.hpp"
#include "triage/oracle.hpp"
#include "triage/preprocessor.hpp"
#include "triage/remote.hpp"
#include "triage/report.hpp"
#include "triage/simulator.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace triage;

namespace {

struct RemoteCliOptions {
  std::string base_url;
  std::string model = "default";
  std::string api_key_env;
  int timeout_s = 60;
  int tool_budget = 12;
};

void add_remote_options(CLI::App* cmd, RemoteCliOptions& opts) {
  cmd->add_option("--remote-base-url", opts.base_url,
                  "chat-completion endpoint base URL (e.g. http://host:port/v1)");
  cmd->add_option("--remote-model", opts.model, "model name passed to the endpoint");
  cmd->add_option("--remote-api-key-env", opts.api_key_env,
                  "environment variable holding the API key");
  cmd->add_option("--remote-timeout", opts.timeout_s, "request timeout in seconds");
  cmd->add_option("--tool-budget", opts.tool_budget, "max tool calls per technique");
}

RemoteEndpointConfig remote_config(const RemoteCliOptions& opts) {
  if (opts.base_url.empty())
    throw Error("remote backend selected but --remote-base-url not given");
  RemoteEndpointConfig cfg;
  cfg.base_url = opts.base_url;
  cfg.model = opts.model;
  cfg.api_key_env = opts.api_key_env;
  cfg.timeout_s = opts.timeout_s;
  cfg.max_tool_calls = opts.tool_budget;
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  write_file(path, text);
}

Persona load_persona(const std::string& path) {
  if (path.empty()) return Persona::default_persona();
  return parse_persona_file(read_file(path));
}

struct TruthRow {
  Outcome label = Outcome::benign;
  bool blocked = false;
};

std::map<std::string, TruthRow> load_truth(const fs::path& path) {
  std::map<std::string, TruthRow> truth;
  std::string text = read_file(path);
  bool header = true;
  for (auto line : split(text, '\n')) {
    line = trim(line);
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("bundle_id", 0) == 0) continue;  // headered file
    }
    auto cols = split(line, '\t');
    if (cols.size() < 2) throw ParseError("truth file: expected bundle_id<TAB>label");
    TruthRow row;
    auto label = outcome_from_name(trim(cols[1]));
    if (!label || *label == Outcome::error)
      throw ParseError("truth file: label must be phishing|benign");
    row.label = *label;
    if (cols.size() >= 3) row.blocked = trim(cols[2]) == "1" || trim(cols[2]) == "true";
    truth[std::string(trim(cols[0]))] = row;
  }
  return truth;
}

std::string truth_tsv(const std::vector<std::pair<EvidenceBundle, GroundTruth>>& corpus) {
  std::string out = "bundle_id\tlabel\tblocked\ttechniques\n";
  for (const auto& [bundle, gt] : corpus) {
    out += bundle.bundle_id;
    out += '\t';
    out += label_name(gt.label);
    out += '\t';
    out += gt.blocked ? "1" : "0";
    out += '\t';
    bool first = true;
    for (const auto& t : gt.techniques) {
      if (!first) out += ',';
      out += t;
      first = false;
    }
    out += '\n';
  }
  return out;
}

struct ChecklistFiles {
  std::string techniques;  // techniques.v1 path, empty = builtin
  std::string profiles;    // profiles.v1 path, empty = builtin
};

void add_checklist_options(CLI::App* cmd, ChecklistFiles& files) {
  cmd->add_option("--techniques", files.techniques, "techniques.v1 override file");
  cmd->add_option("--profiles", files.profiles, "profiles.v1 override file");
}

AdjudicationRun adjudicate_bundle(const EvidenceBundle& bundle, const std::string& profile,
                                  const std::string& backend_name,
                                  const std::string& policy_name, int retry_limit, int jobs,
                                  const RemoteCliOptions& remote_opts,
                                  const ChecklistFiles& files = {}) {
  TechniqueCatalog catalog = files.techniques.empty()
                                 ? TechniqueCatalog::builtin()
                                 : TechniqueCatalog::load(read_file(files.techniques));
  ChecklistProfile profile_set =
      files.profiles.empty()
          ? resolve_profile(profile)
          : ProfileSet::load(read_file(files.profiles), &catalog).resolve(profile);
  AggregationPolicy policy = resolve_policy(policy_name);
  AdjudicateOptions options;
  options.retry_limit = retry_limit;
  options.jobs = jobs;

  if (backend_name == "oracle") {
    OracleBackend backend(bundle);
    return run_checklist(bundle, profile_set, backend, policy, catalog, options);
  }
  if (backend_name == "remote") {
    RemoteBackend backend(remote_config(remote_opts));
    return run_checklist(bundle, profile_set, backend, policy, catalog, options);
  }
  throw Error("unknown backend '" + backend_name + "' (expected oracle|remote)");
}

int run_cli(int argc, char** argv) {
  CLI::App app{"forensic URL triage over sealed browser-session evidence"};
  app.require_subcommand(1);

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "generate one synthetic sealed session");
  std::string sim_kind = "benign", sim_mode = "none", sim_out;
  std::uint64_t sim_seed = 0;
  std::string sim_persona;
  sim->add_option("--kind", sim_kind, "scenario kind")->required();
  sim->add_option("--seed", sim_seed, "scenario seed");
  sim->add_option("--mode", sim_mode, "gate failure mode: none|symbol|literal");
  sim->add_option("--persona", sim_persona, "persona.v1 file (defaults built in)");
  sim->add_option("--out", sim_out, "output bundle directory")->required();
  sim->callback([&] {
    auto kind = scenario_kind_from_name(sim_kind);
    if (!kind) throw Error("unknown scenario kind '" + sim_kind + "'");
    auto mode = failure_mode_from_name(sim_mode);
    if (!mode) throw Error("unknown failure mode '" + sim_mode + "'");
    auto script = ScenarioScript::for_kind(*kind, sim_seed);
    auto [bundle, truth] = run_scenario(script, load_persona(sim_persona), *mode);
    save_bundle(bundle, sim_out);
    std::cout << "bundle " << bundle.bundle_id << " sealed: " << to_hex(*bundle.manifest_hash)
              << "\nlabel=" << label_name(truth.label) << " blocked=" << truth.blocked
              << "\n";
  });

  // ---- simulate-corpus ----
  auto* corpus_cmd = app.add_subcommand("simulate-corpus",
                                        "generate a seeded corpus with ground truth");
  std::string corpus_spec_path, corpus_out;
  corpus_cmd->add_option("--spec", corpus_spec_path, "corpus.v1 spec file")->required();
  corpus_cmd->add_option("--out", corpus_out, "output directory")->required();
  corpus_cmd->callback([&] {
    CorpusSpec spec = corpus_spec_from_json(read_file(corpus_spec_path));
    auto corpus = build_corpus(spec);
    fs::create_directories(corpus_out);
    for (const auto& [bundle, truth] : corpus)
      save_bundle(bundle, fs::path(corpus_out) / bundle.bundle_id);
    write_file(fs::path(corpus_out) / "truth.tsv", truth_tsv(corpus));
    std::cout << corpus.size() << " bundles written to " << corpus_out << "\n";
  });

  // ---- ingest-eml ----
  auto* eml_cmd = app.add_subcommand("ingest-eml",
                                     "parse a raw email, pick the CTA, emit context.v1");
  std::string eml_in, eml_persona, eml_out;
  eml_cmd->add_option("--in", eml_in, "message .eml file")->required();
  eml_cmd->add_option("--persona", eml_persona, "persona.v1 file");
  eml_cmd->add_option("--out", eml_out, "context.v1 output (default stdout)");
  eml_cmd->callback([&] {
    EmailDoc doc = parse_eml(read_file(eml_in));
    SafeHtml safe = doc.body_html ? sanitize(*doc.body_html) : SafeHtml{};
    auto candidates = enumerate_links(safe);
    int cta = candidates.empty() ? 0 : select_cta(safe, candidates);
    std::string target =
        cta > 0 ? candidates[static_cast<std::size_t>(cta - 1)].url : std::string();
    SessionContext ctx = extract_context(doc, target, load_persona(eml_persona));

    json cands = json::array();
    for (const auto& c : candidates) {
      cands.push_back(json{{"index", c.index},
                           {"text", c.text},
                           {"url", c.url},
                           {"button_like", c.button_like},
                           {"area_rank", c.area_rank}});
    }
    json out{{"version", "context.v1"},
             {"context",
              json{{"lure_subject", ctx.lure_subject},
                   {"lure_from", ctx.lure_from},
                   {"lure_body_text", ctx.lure_body_text},
                   {"target_url", ctx.target_url},
                   {"time_budget_s", ctx.time_budget_s}}},
             {"candidates", cands},
             {"cta_index", cta}};
    write_text(eml_out.empty() ? "-" : eml_out, out.dump(2) + "\n");
  });

  // ---- ingest-bundle ----
  auto* ib = app.add_subcommand("ingest-bundle",
                                "assemble and seal a bundle from raw capture artifacts");
  std::string ib_har, ib_frames, ib_actions, ib_resources, ib_context, ib_id = "ingested";
  std::string ib_persona, ib_out;
  ib->add_option("--har", ib_har, "HAR 1.2 network log")->required();
  ib->add_option("--frames", ib_frames, "frame manifest (TSV)");
  ib->add_option("--actions", ib_actions, "action log (TSV)");
  ib->add_option("--resources", ib_resources, "directory of resource files");
  ib->add_option("--context", ib_context, "context.v1 from ingest-eml");
  ib->add_option("--persona", ib_persona, "persona.v1 file");
  ib->add_option("--bundle-id", ib_id, "bundle identifier");
  ib->add_option("--out", ib_out, "output bundle directory")->required();
  ib->callback([&] {
    EvidenceBundle b;
    b.bundle_id = ib_id;
    auto ingest = ingest_har(read_file(ib_har));
    for (const auto& w : ingest.warnings) std::cerr << w << "\n";
    b.network = std::move(ingest.records);
    for (auto& [id, res] : ingest.body_resources)
      b.resources.put(id, res.kind, std::move(res.content));
    if (!ib_resources.empty()) {
      for (const auto& entry : fs::directory_iterator(ib_resources)) {
        if (!entry.is_regular_file()) continue;
        std::string blob = read_file(entry.path());
        std::string ext = entry.path().extension().string();
        ResourceKind kind = ext == ".html" ? ResourceKind::html
                            : ext == ".js" ? ResourceKind::script
                            : (ext == ".png" || ext == ".jpg") ? ResourceKind::image
                                                               : ResourceKind::other;
        b.resources.put_text(entry.path().filename().string(), kind, blob);
      }
    }
    if (b.network.empty()) throw Error("ingest-bundle: HAR produced no records");
    b.epoch_t0 = establish_epoch(b.network);
    if (!ib_frames.empty()) b.frames = ingest_frames(read_file(ib_frames), b.resources);
    if (!ib_actions.empty()) b.actions = ingest_actions(read_file(ib_actions));
    b.context.persona = load_persona(ib_persona);
    if (!ib_context.empty()) {
      json ctx = json::parse(read_file(ib_context));
      const json& c = ctx.at("context");
      b.context.lure_subject = c.value("lure_subject", "");
      b.context.lure_from = c.value("lure_from", "");
      b.context.lure_body_text = c.value("lure_body_text", "");
      b.context.target_url = c.value("target_url", "");
      b.context.time_budget_s = c.value("time_budget_s", 60.0);
    }
    RelTime max_rel{0};
    for (const auto& r : b.network)
      max_rel = std::max(max_rel, to_relative(r.started_at, b.epoch_t0));
    if (!b.frames.empty()) max_rel = std::max(max_rel, b.frames.back().t_rel);
    if (!b.actions.empty()) max_rel = std::max(max_rel, b.actions.back().t_rel);
    b.session_end = max_rel;
    seal(b);
    save_bundle(b, ib_out);
    std::cout << "bundle " << b.bundle_id << " sealed: " << to_hex(*b.manifest_hash) << "\n";
  });

  // ---- serve ----
  auto* serve_cmd = app.add_subcommand("serve", "serve a sealed bundle's evidence tools");
  std::string serve_bundle, serve_listen = "stdio";
  serve_cmd->add_option("--bundle", serve_bundle, "bundle directory")->required();
  serve_cmd->add_option("--listen", serve_listen, "addr:port or 'stdio'");
  serve_cmd->callback([&] {
    EvidenceBundle bundle = load_bundle(serve_bundle);
    EvidenceApi api(bundle);
    if (serve_listen == "stdio") {
      serve_stream(api, std::cin, std::cout);
      return;
    }
    auto colon = serve_listen.rfind(':');
    if (colon == std::string::npos)
      throw Error("--listen expects addr:port or 'stdio'");
    std::string host = serve_listen.substr(0, colon);
    int port = std::stoi(serve_listen.substr(colon + 1));
    ToolServer server(api, host, port);
    std::cerr << "serving " << bundle.bundle_id << " on " << host << ":" << server.port()
              << " (ctrl-c to stop)\n";
    // Block until killed; the server threads do the work.
    std::promise<void>().get_future().wait();
  });

  // ---- adjudicate ----
  auto* adj = app.add_subcommand("adjudicate", "run the checklist against a sealed bundle");
  std::string adj_bundle, adj_profile = "comprehensive", adj_backend = "oracle";
  std::string adj_policy = "any-confirmed", adj_out;
  int adj_retry = 2, adj_jobs = 1;
  RemoteCliOptions adj_remote;
  ChecklistFiles adj_files;
  adj->add_option("--bundle", adj_bundle, "bundle directory")->required();
  adj->add_option("--profile", adj_profile, "minimal|standard|comprehensive");
  adj->add_option("--backend", adj_backend, "oracle|remote");
  adj->add_option("--policy", adj_policy, "aggregation policy");
  adj->add_option("--retry-limit", adj_retry, "verdict retry limit");
  adj->add_option("--jobs", adj_jobs, "parallel technique adjudications");
  adj->add_option("--out", adj_out, "run.v1 output file (default stdout)");
  add_remote_options(adj, adj_remote);
  add_checklist_options(adj, adj_files);
  adj->callback([&] {
    EvidenceBundle bundle = load_bundle(adj_bundle);
    AdjudicationRun run = adjudicate_bundle(bundle, adj_profile, adj_backend, adj_policy,
                                            adj_retry, adj_jobs, adj_remote, adj_files);
    write_text(adj_out.empty() ? "-" : adj_out, run_to_json(run).dump(2) + "\n");
    std::cerr << "final: " << label_name(run.final.label) << "\n";
  });

  // ---- report ----
  auto* rep = app.add_subcommand("report", "synthesize the incident report for a run");
  std::string rep_run, rep_bundle, rep_writer = "template", rep_out, rep_rules;
  RemoteCliOptions rep_remote;
  rep->add_option("--run", rep_run, "run.v1 file")->required();
  rep->add_option("--bundle", rep_bundle, "bundle directory")->required();
  rep->add_option("--writer", rep_writer, "template|remote");
  rep->add_option("--recommendations", rep_rules, "recommendations.v1 override file");
  rep->add_option("--out", rep_out, "report output file (default stdout)");
  add_remote_options(rep, rep_remote);
  rep->callback([&] {
    EvidenceBundle bundle = load_bundle(rep_bundle);
    AdjudicationRun run = run_from_json(json::parse(read_file(rep_run)));
    RecommendationRules rules = rep_rules.empty()
                                    ? RecommendationRules::builtin()
                                    : RecommendationRules::load(read_file(rep_rules));
    std::string document;
    if (rep_writer == "remote") {
      document = synthesize_remote(run, bundle, remote_config(rep_remote));
    } else if (rep_writer == "template") {
      document = render(synthesize(run, bundle, rules));
    } else {
      throw Error("unknown writer '" + rep_writer + "'");
    }
    write_text(rep_out.empty() ? "-" : rep_out, document);
  });

  // ---- eval ----
  auto* ev = app.add_subcommand("eval", "score run.v1 files against a truth table");
  std::string ev_runs, ev_truth, ev_out;
  ev->add_option("--runs", ev_runs, "directory of run.v1 files")->required();
  ev->add_option("--truth", ev_truth, "truth.tsv (bundle_id, label, blocked)")->required();
  ev->add_option("--out", ev_out, "metrics.v1 output (default stdout)");
  ev->callback([&] {
    auto truth = load_truth(ev_truth);
    std::vector<Outcome> predictions, labels;
    ConfusionCounts counts;
    std::size_t blocked = 0;
    for (const auto& entry : fs::directory_iterator(ev_runs)) {
      if (!entry.is_regular_file()) continue;
      json doc = json::parse(read_file(entry.path()), nullptr, false);
      if (doc.is_discarded() || doc.value("version", "") != "run.v1") continue;
      AdjudicationRun run = run_from_json(doc);
      auto it = truth.find(run.bundle_id);
      if (it == truth.end())
        throw EvalError("no truth row for bundle " + run.bundle_id);
      if (it->second.blocked) {
        ++blocked;  // reported separately, never scored
        continue;
      }
      predictions.push_back(!run.errors.empty() ? Outcome::error
                            : run.final.label == Label::phishing ? Outcome::phishing
                                                                 : Outcome::benign);
      labels.push_back(it->second.label);
    }
    counts = evaluate(predictions, labels);
    counts.blocked = blocked;
    write_text(ev_out.empty() ? "-" : ev_out, metrics_v1(counts));
  });

  // ---- prior-shift ----
  auto* ps = app.add_subcommand("prior-shift", "project precision/F1 across prevalences");
  double ps_tpr = 0.0, ps_fpr = 0.0;
  std::string ps_grid = "0.01:0.99:0.01", ps_out;
  ps->add_option("--tpr", ps_tpr, "true-positive rate")->required();
  ps->add_option("--fpr", ps_fpr, "false-positive rate")->required();
  ps->add_option("--grid", ps_grid, "start:end:step over prevalence");
  ps->add_option("--out", ps_out, "curve.tsv output (default stdout)");
  ps->callback([&] {
    auto parts = split(ps_grid, ':');
    if (parts.size() != 3) throw Error("--grid expects start:end:step");
    double start = std::stod(std::string(parts[0]));
    double end = std::stod(std::string(parts[1]));
    double step = std::stod(std::string(parts[2]));
    write_text(ps_out.empty() ? "-" : ps_out, curve_tsv(ps_tpr, ps_fpr, start, end, step));
  });

  // ---- triage ----
  auto* tr = app.add_subcommand(
      "triage", "end to end: email -> session -> adjudication -> report");
  std::string tr_eml, tr_bundle, tr_kind = "logoless_harvester", tr_persona;
  std::string tr_backend = "oracle", tr_profile = "comprehensive", tr_policy = "any-confirmed";
  std::string tr_out, tr_workdir;
  std::uint64_t tr_seed = 0;
  RemoteCliOptions tr_remote;
  tr->add_option("--eml", tr_eml, "lure email (.eml)")->required();
  tr->add_option("--bundle", tr_bundle, "use an existing bundle directory");
  tr->add_option("--kind", tr_kind, "scenario kind when simulating the session");
  tr->add_option("--seed", tr_seed, "simulation seed");
  tr->add_option("--persona", tr_persona, "persona.v1 file");
  tr->add_option("--backend", tr_backend, "oracle|remote");
  tr->add_option("--profile", tr_profile, "checklist profile");
  tr->add_option("--policy", tr_policy, "aggregation policy");
  tr->add_option("--out", tr_out, "report output (default stdout)");
  tr->add_option("--workdir", tr_workdir, "directory to keep the bundle and run files");
  add_remote_options(tr, tr_remote);
  tr->callback([&] {
    Persona persona = load_persona(tr_persona);

    EmailDoc doc = parse_eml(read_file(tr_eml));
    SafeHtml safe = doc.body_html ? sanitize(*doc.body_html) : SafeHtml{};
    auto candidates = enumerate_links(safe);
    int cta = candidates.empty() ? 0 : select_cta(safe, candidates);
    std::string target =
        cta > 0 ? candidates[static_cast<std::size_t>(cta - 1)].url : std::string();
    SessionContext ctx = extract_context(doc, target, persona);
    std::cerr << "lure: " << ctx.lure_subject << "\ncta: "
              << (target.empty() ? "(none found)" : target) << "\n";

    EvidenceBundle bundle;
    if (!tr_bundle.empty()) {
      bundle = load_bundle(tr_bundle);
    } else {
      auto kind = scenario_kind_from_name(tr_kind);
      if (!kind) throw Error("unknown scenario kind '" + tr_kind + "'");
      auto script = ScenarioScript::for_kind(*kind, tr_seed);
      auto [made, truth] = run_scenario(script, persona, FailureMode::none);
      bundle = std::move(made);
      // The simulated session stands in for driving the real page; keep the
      // lure context from the email so the report reflects the input.
      bundle.context.lure_subject = ctx.lure_subject;
      bundle.context.lure_from = ctx.lure_from;
      bundle.context.lure_body_text = ctx.lure_body_text;
      if (!target.empty()) bundle.context.target_url = target;
      bundle.manifest_hash.reset();
      seal(bundle);
    }
    if (!tr_workdir.empty()) save_bundle(bundle, fs::path(tr_workdir) / bundle.bundle_id);

    AdjudicationRun run = adjudicate_bundle(bundle, tr_profile, tr_backend, tr_policy, 2, 1,
                                            tr_remote);
    if (!tr_workdir.empty())
      write_file(fs::path(tr_workdir) / (bundle.bundle_id + ".run.v1"),
                 run_to_json(run).dump(2) + "\n");
    std::string document = render(synthesize(run, bundle));
    write_text(tr_out.empty() ? "-" : tr_out, document);
    std::cerr << "final: " << label_name(run.final.label) << "\n";
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
