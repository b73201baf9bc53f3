#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "audit_report.hpp"
#include "json.hpp"
#include "primeie/audit.hpp"
#include "primeie/error.hpp"
#include "primeie/experiment.hpp"
#include "primeie/json_io.hpp"
#include "primeie/syngen.hpp"
#include "primeie/training.hpp"

namespace fs = std::filesystem;
using namespace primeie;
using ojson = nlohmann::ordered_json;

namespace {

void print(const ojson& j) { std::cout << j.dump(2) << "\n"; }

Ontology ontology_or_default(const std::string& path) {
  return path.empty() ? default_ontology() : load_ontology(path);
}

nlohmann::json read_json_file(const std::string& path) {
  try {
    return nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("bad seed '" + item + "'");
    }
  }
  return out;
}

struct Common {
  std::string ontology;
  std::string grammar;
};

// gen-data -------------------------------------------------------------
struct GenDataArgs {
  std::string out;
  std::string mode = "simple";
  int n_train = 4000, n_dev = 500, n_test = 500;
  std::uint64_t seed = 1;
  std::vector<double> translate;
};

void gen_data(const Common& c, const GenDataArgs& a) {
  const Ontology o = ontology_or_default(c.ontology);
  const GrammarSpec g = c.grammar.empty() ? default_grammar() : load_grammar(c.grammar);
  g.validate(o);
  const GenMode mode = parse_gen_mode(a.mode);
  fs::create_directories(a.out);
  ojson files = ojson::object();
  save_ontology(a.out + "/ontology.json", o);
  files["ontology"] = a.out + "/ontology.json";
  Corpus test;
  const std::vector<std::pair<std::string, int>> splits = {{"train", a.n_train}, {"dev", a.n_dev}, {"test", a.n_test}};
  for (std::size_t i = 0; i < splits.size(); ++i) {
    const auto& [name, n] = splits[i];
    if (n < 1) continue;
    Corpus corpus = generate_corpus(g, o, n, derive_seed(a.seed, i), mode);
    const std::string path = a.out + "/" + name + ".jsonl";
    save_corpus(path, corpus);
    files[name] = path;
    if (name == "test") test = std::move(corpus);
  }
  for (double anchors : a.translate) {
    if (test.sentences.empty()) throw ConfigError("--translate needs a test split");
    const GrammarSpec lex = with_lexicon(g, anchors, derive_seed(a.seed, 3));
    const std::string pair = language_pair_name(g.language, g.target_language, anchors);
    const std::string path = a.out + "/test_" + pair + ".jsonl";
    save_corpus(path, translate_corpus(test, lex));
    save_grammar(a.out + "/grammar_" + pair + ".json", lex);
    files["test_" + pair] = path;
  }
  print({{"command", "gen-data"}, {"mode", gen_mode_name(mode)}, {"files", files}});
}

// vocab ----------------------------------------------------------------
struct VocabArgs {
  std::string corpus, out;
  int size = 400;
  std::uint64_t seed = 0;
};

void vocab_cmd(const Common& c, const VocabArgs& a) {
  const Ontology o = ontology_or_default(c.ontology);
  const Corpus corpus = load_corpus(a.corpus, o);
  std::vector<std::string> reserved = {";"};
  for (const auto& r : o.all_roles()) reserved.push_back(o.code_of(r));
  const SubwordVocab v = build_vocab(corpus, a.size, a.seed, reserved);
  write_text_file(a.out, v.to_json() + "\n");
  print({{"command", "vocab"}, {"out", a.out}, {"pieces", v.size()}});
}

// train ----------------------------------------------------------------
struct TrainArgs {
  std::string model, corpus, dev, vocab, out, config;
  std::uint64_t seed = 0;
  int jobs = 1;
  int epochs = 0;
  double lr = -1;
  int max_sentence_tokens = 80;
};

void train_cmd(const Common& c, const TrainArgs& a) {
  const Ontology o = ontology_or_default(c.ontology);
  ModelConfig mc;
  TrainConfig tc;
  if (!a.config.empty()) {
    const auto j = read_json_file(a.config);
    if (j.contains("model")) mc = ModelConfig::from_json(j.at("model"));
    if (j.contains("training")) tc = TrainConfig::from_json(j.at("training"));
  }
  tc.seed = a.seed;
  tc.jobs = a.jobs;
  if (a.epochs > 0) tc.max_epochs = a.epochs;
  if (a.lr >= 0) tc.learning_rate = a.lr;
  tc.validate();
  const Corpus train_corpus = split_long_sentences(load_corpus(a.corpus, o), a.max_sentence_tokens);
  const Corpus dev = a.dev.empty() ? Corpus{{}, o.id} : split_long_sentences(load_corpus(a.dev, o), a.max_sentence_tokens);
  const SubwordVocab v = SubwordVocab::from_json(read_text_file(a.vocab));
  TrainResult r = train(parse_model_kind(a.model), mc, o, v, train_corpus, dev, tc);
  fs::create_directories(a.out);
  write_text_file(a.out + "/model.ckpt", r.model.to_checkpoint());
  ojson rep = r.report.to_json();
  write_text_file(a.out + "/train_report.json", rep.dump(2) + "\n");
  print({{"command", "train"}, {"model", a.model}, {"checkpoint", a.out + "/model.ckpt"}, {"report", rep}});
}

// decode ---------------------------------------------------------------
struct DecodeArgs {
  std::string checkpoint, trigger_checkpoint, corpus, out;
  bool gold_triggers = false;
  int max_sentence_tokens = 80;
};

void decode_cmd(const Common& c, const DecodeArgs& a) {
  const Ontology o = ontology_or_default(c.ontology);
  const Model m = Model::from_checkpoint(read_text_file(a.checkpoint), o);
  std::optional<Model> trig;
  if (!a.trigger_checkpoint.empty()) trig.emplace(Model::from_checkpoint(read_text_file(a.trigger_checkpoint), o));
  if (!is_trigger_model(m.kind()) && !a.gold_triggers && !trig)
    throw ConfigError("argument models need --gold-triggers or --trigger-checkpoint");
  const Corpus corpus = load_corpus(a.corpus, o);
  const EventSet pred = decode_events(trig ? &*trig : nullptr, m, corpus, a.gold_triggers && !trig,
                                      a.max_sentence_tokens);
  save_predictions(a.out, pred);
  long events = 0;
  for (const auto& se : pred) events += static_cast<long>(se.events.size());
  print({{"command", "decode"}, {"model", model_kind_name(m.kind())}, {"out", a.out},
         {"sentences", pred.size()}, {"events", events}});
}

// score / diff ---------------------------------------------------------
struct ScoreArgs {
  std::string gold, pred, pred_b, level = "argument", format = "json";
  bool discriminating = false;
};

void score_cmd(const ScoreArgs& a) {
  const EventSet gold = load_predictions(a.gold);
  EventSet pred = load_predictions(a.pred);
  ScoreReport r = score(pred, gold);
  if (a.format == "text") {
    std::cout << report_to_text(r);
    return;
  }
  ojson j = r.to_json();
  if (a.discriminating) {
    auto [p, g] = restrict_to_discriminating(pred, gold);
    const LevelScore d = score(p, g, Level::argument);
    j["argument_discriminating"] = {{"precision", d.precision}, {"recall", d.recall}, {"f1", d.f1},
                                    {"tp", d.tp}, {"fp", d.fp}, {"fn", d.fn}};
  }
  print(j);
}

void diff_cmd(const ScoreArgs& a) {
  const DiffReport d =
      diff_outputs(load_predictions(a.pred), load_predictions(a.pred_b), load_predictions(a.gold), parse_level(a.level));
  if (a.format == "text")
    std::cout << diff_to_text(d);
  else
    print(d.to_json());
}

// experiment -----------------------------------------------------------
struct ExperimentArgs {
  std::string config, out, model, mode, fractions, seeds, translate;
  std::vector<std::string> systems;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int num_seeds = 0, jobs = 0, n_train = 0, n_dev = -1, n_test = 0, epochs = 0;
  bool gold_triggers = false, predicted_triggers = false, discriminating = false;
  std::string corpus, dev, test;
};

std::vector<double> parse_doubles(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError(std::string("bad ") + what + " value '" + item + "'");
    }
  }
  return out;
}

void experiment_cmd(const Common& c, const ExperimentArgs& a) {
  ExperimentConfig cfg;
  if (!a.config.empty()) cfg = ExperimentConfig::from_json(read_json_file(a.config));
  if (!c.ontology.empty()) cfg.ontology_path = c.ontology;
  if (!c.grammar.empty()) cfg.grammar_path = c.grammar;
  if (!a.corpus.empty()) cfg.train_path = a.corpus;
  if (!a.dev.empty()) cfg.dev_path = a.dev;
  if (!a.test.empty()) cfg.test_path = a.test;
  if (!a.mode.empty()) cfg.mode = parse_gen_mode(a.mode);
  if (!a.systems.empty()) {
    cfg.systems.clear();
    for (const auto& s : a.systems) cfg.systems.push_back(parse_model_kind(s));
  }
  if (!a.model.empty()) {
    // A single --model runs it against the matching baseline.
    const ModelKind k = parse_model_kind(a.model);
    const ModelKind base = is_trigger_model(k) ? ModelKind::trigger_baseline : ModelKind::args_baseline;
    cfg.systems = k == base ? std::vector<ModelKind>{k} : std::vector<ModelKind>{base, k};
  }
  if (!a.fractions.empty()) cfg.fractions = parse_doubles(a.fractions, "fraction");
  if (!a.translate.empty()) cfg.translate = parse_doubles(a.translate, "anchor fraction");
  if (a.seed_set) cfg.seed = a.seed;
  if (a.num_seeds > 0) cfg.num_seeds = a.num_seeds;
  if (!a.seeds.empty()) cfg.seeds = parse_seed_list(a.seeds);
  if (a.jobs > 0) cfg.jobs = a.jobs;
  if (a.n_train > 0) cfg.n_train = a.n_train;
  if (a.n_dev >= 0) cfg.n_dev = a.n_dev;
  if (a.n_test > 0) cfg.n_test = a.n_test;
  if (a.epochs > 0) cfg.train.max_epochs = a.epochs;
  if (a.gold_triggers) cfg.gold_triggers = true;
  if (a.predicted_triggers) cfg.gold_triggers = false;
  if (a.discriminating) cfg.discriminating = true;
  const ExperimentResult r = run_experiment(cfg, a.out);
  print({{"command", "experiment"}, {"out", a.out}, {"results", a.out + "/results.csv"}, {"rows", r.rows.size()}});
}

// checks ---------------------------------------------------------------
int grad_check_cmd(std::size_t coordinates, std::uint64_t seed) {
  const auto f32 = primeie_audit::grad_audit_f32(coordinates, seed);
  const auto f64 = primeie_audit::grad_audit_f64(coordinates, seed);
  // The 64-bit audit decides; 32-bit differences are reported alongside.
  print({{"command", "grad-check"}, {"passed", f64.passed}, {"f64", f64.json}, {"f32", f32.json}});
  return f64.passed ? 0 : 1;
}

int crf_check_cmd(int per_shape, std::uint64_t seed) {
  const CrfCheckReport r = crf_check(per_shape, 6, 5, seed);
  print({{"command", "crf-check"},
         {"instances", r.instances},
         {"max_rel_error", r.max_rel_error},
         {"viterbi_mismatches", r.viterbi_mismatches},
         {"tolerance", 1e-6},
         {"passed", r.passed()}});
  return r.passed() ? 0 : 1;
}

void error_line(const std::string& kind, const std::string& message, long line = 0) {
  ojson j = {{"error", kind}, {"message", message}};
  if (line > 0) j["line"] = line;
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primed event and argument extraction"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--ontology", common.ontology, "Ontology JSON (default: built-in toy ontology)");
    sub->add_option("--grammar", common.grammar, "Grammar JSON (default: built-in grammar)");
  };

  GenDataArgs gd;
  auto* gen = app.add_subcommand("gen-data", "Generate synthetic train/dev/test corpora");
  add_common(gen);
  gen->add_option("--out", gd.out, "Output directory")->required();
  gen->add_option("--mode", gd.mode, "simple or two_event");
  gen->add_option("--n-train", gd.n_train);
  gen->add_option("--n-dev", gd.n_dev);
  gen->add_option("--n-test", gd.n_test);
  gen->add_option("--seed", gd.seed);
  gen->add_option("--translate", gd.translate, "Anchor fractions of translated test sets")->delimiter(',');

  VocabArgs va;
  auto* voc = app.add_subcommand("vocab", "Build a subword vocabulary");
  add_common(voc);
  voc->add_option("--corpus", va.corpus)->required();
  voc->add_option("--out", va.out)->required();
  voc->add_option("--size", va.size, "Whole-word pieces");
  voc->add_option("--seed", va.seed);

  TrainArgs ta;
  auto* tr = app.add_subcommand("train", "Train one model");
  add_common(tr);
  tr->add_option("--model", ta.model)->required();
  tr->add_option("--corpus", ta.corpus)->required();
  tr->add_option("--dev", ta.dev);
  tr->add_option("--vocab", ta.vocab)->required();
  tr->add_option("--out", ta.out, "Run directory")->required();
  tr->add_option("--config", ta.config, "JSON with optional model and training blocks");
  tr->add_option("--seed", ta.seed);
  tr->add_option("--jobs", ta.jobs);
  tr->add_option("--epochs", ta.epochs);
  tr->add_option("--lr", ta.lr);
  tr->add_option("--max-sentence-tokens", ta.max_sentence_tokens);

  DecodeArgs da;
  auto* dec = app.add_subcommand("decode", "Write predictions for a corpus");
  add_common(dec);
  dec->add_option("--checkpoint", da.checkpoint)->required();
  dec->add_option("--trigger-checkpoint", da.trigger_checkpoint);
  dec->add_option("--corpus", da.corpus)->required();
  dec->add_option("--out", da.out)->required();
  dec->add_flag("--gold-triggers", da.gold_triggers);
  dec->add_option("--max-sentence-tokens", da.max_sentence_tokens);

  ScoreArgs sa;
  auto* sc = app.add_subcommand("score", "Score predictions against gold");
  sc->add_option("--gold", sa.gold)->required();
  sc->add_option("--pred", sa.pred)->required();
  sc->add_option("--format", sa.format)->check(CLI::IsMember({"json", "text"}));
  sc->add_flag("--discriminating", sa.discriminating);

  ScoreArgs dfa;
  auto* df = app.add_subcommand("diff", "Error taxonomy of two systems");
  df->add_option("--gold", dfa.gold)->required();
  df->add_option("--pred-a", dfa.pred)->required();
  df->add_option("--pred-b", dfa.pred_b)->required();
  df->add_option("--level", dfa.level)->check(CLI::IsMember({"trigger", "argument"}));
  df->add_option("--format", dfa.format)->check(CLI::IsMember({"json", "text"}));

  ExperimentArgs ea;
  auto* ex = app.add_subcommand("experiment", "Train and evaluate systems over seeds and fractions");
  add_common(ex);
  ex->add_option("--config", ea.config, "Experiment JSON");
  ex->add_option("--out", ea.out)->required();
  ex->add_option("--corpus", ea.corpus, "Train corpus (default: generated)");
  ex->add_option("--dev", ea.dev);
  ex->add_option("--test", ea.test);
  ex->add_option("--mode", ea.mode);
  ex->add_option("--model", ea.model, "Primed system, run against its baseline");
  ex->add_option("--systems", ea.systems)->delimiter(',');
  ex->add_option("--fractions", ea.fractions);
  ex->add_option("--translate", ea.translate);
  ex->add_option("--seed", ea.seed)->each([&](const std::string&) { ea.seed_set = true; });
  ex->add_option("--seeds", ea.seeds, "Comma-separated seed list");
  ex->add_option("--num-seeds", ea.num_seeds);
  ex->add_option("--jobs", ea.jobs);
  ex->add_option("--n-train", ea.n_train);
  ex->add_option("--n-dev", ea.n_dev);
  ex->add_option("--n-test", ea.n_test);
  ex->add_option("--epochs", ea.epochs);
  ex->add_flag("--gold-triggers", ea.gold_triggers);
  ex->add_flag("--predicted-triggers", ea.predicted_triggers);
  ex->add_flag("--discriminating", ea.discriminating);

  std::size_t coordinates = 120;
  std::uint64_t check_seed = 0;
  auto* gc = app.add_subcommand("grad-check", "Finite-difference audit of every model's loss");
  gc->add_option("--coordinates", coordinates);
  gc->add_option("--seed", check_seed);
  int per_shape = 200;
  auto* cc = app.add_subcommand("crf-check", "CRF against exhaustive enumeration");
  cc->add_option("--per-shape", per_shape);
  cc->add_option("--seed", check_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_line("usage_error", e.what());
    return 2;
  }

  try {
    if (gen->parsed()) gen_data(common, gd);
    if (voc->parsed()) vocab_cmd(common, va);
    if (tr->parsed()) train_cmd(common, ta);
    if (dec->parsed()) decode_cmd(common, da);
    if (sc->parsed()) score_cmd(sa);
    if (df->parsed()) diff_cmd(dfa);
    if (ex->parsed()) experiment_cmd(common, ea);
    if (gc->parsed()) return grad_check_cmd(coordinates, check_seed);
    if (cc->parsed()) return crf_check_cmd(per_shape, check_seed);
  } catch (const ParseError& e) {
    error_line(e.kind(), e.what(), e.line());
    return 1;
  } catch (const primeie::Error& e) {
    error_line(e.kind(), e.what());
    return 1;
  } catch (const std::exception& e) {
    error_line("io_error", e.what());
    return 1;
  }
  return 0;
}
