#include "primeie/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <set>

#include "primeie/error.hpp"
#include "primeie/json_io.hpp"
#include "primeie/random.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string fraction_name(double f) { return fmt("%g", f); }

template <typename T>
T get(const nlohmann::json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("experiment config: bad value for '") + key + "'");
  }
}

}  // namespace

std::vector<std::uint64_t> ExperimentConfig::run_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  for (int i = 0; i < num_seeds; ++i) out.push_back(seed + static_cast<std::uint64_t>(i));
  return out;
}

void ExperimentConfig::validate() const {
  if (systems.empty()) throw ConfigError("experiment needs at least one system");
  if (fractions.empty()) throw ConfigError("experiment needs at least one train fraction");
  for (double f : fractions)
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("train fraction must lie in (0, 1], got " + fmt("%g", f));
  for (double a : translate)
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("anchor fraction must lie in [0, 1], got " + fmt("%g", a));
  if (seeds.empty() && num_seeds < 1) throw ConfigError("num_seeds must be at least 1");
  if (train_path.empty() && n_train < 1) throw ConfigError("n_train must be at least 1");
  if (test_path.empty() && n_test < 1) throw ConfigError("n_test must be at least 1");
  if (dev_path.empty() && n_dev < 0) throw ConfigError("n_dev must be non-negative");
  if (vocab_words < 0) throw ConfigError("vocab_words must be non-negative");
  if (max_sentence_tokens < 1) throw ConfigError("max_sentence_tokens must be at least 1");
  if (jobs < 1) throw ConfigError("jobs must be at least 1");
  for (const auto* p : {&ontology_path, &grammar_path, &train_path, &dev_path, &test_path})
    if (!p->empty() && !fs::exists(*p)) throw ConfigError("file not found: " + *p);
  train.validate();
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["ontology"] = ontology_path;
  j["grammar"] = grammar_path;
  j["train"] = train_path;
  j["dev"] = dev_path;
  j["test"] = test_path;
  j["mode"] = gen_mode_name(mode);
  j["n_train"] = n_train;
  j["n_dev"] = n_dev;
  j["n_test"] = n_test;
  j["data_seed"] = data_seed;
  j["translate"] = translate;
  std::vector<std::string> names;
  for (auto k : systems) names.push_back(model_kind_name(k));
  j["systems"] = names;
  j["fractions"] = fractions;
  j["seed"] = seed;
  j["num_seeds"] = num_seeds;
  j["seeds"] = seeds;
  j["gold_triggers"] = gold_triggers;
  j["discriminating"] = discriminating;
  j["vocab_words"] = vocab_words;
  j["max_sentence_tokens"] = max_sentence_tokens;
  j["write_checkpoints"] = write_checkpoints;
  j["jobs"] = jobs;
  j["model"] = model.to_json();
  j["training"] = train.to_json();
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  static const std::set<std::string> known = {
      "ontology", "grammar", "train", "dev", "test", "mode", "n_train", "n_dev", "n_test", "data_seed",
      "translate", "systems", "fractions", "seed", "num_seeds", "seeds", "gold_triggers", "discriminating",
      "vocab_words", "max_sentence_tokens", "write_checkpoints", "jobs", "model", "training"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError("experiment config: unknown key '" + k + "'");
  ExperimentConfig c;
  c.ontology_path = get(j, "ontology", c.ontology_path);
  c.grammar_path = get(j, "grammar", c.grammar_path);
  c.train_path = get(j, "train", c.train_path);
  c.dev_path = get(j, "dev", c.dev_path);
  c.test_path = get(j, "test", c.test_path);
  c.mode = parse_gen_mode(get<std::string>(j, "mode", gen_mode_name(c.mode)));
  c.n_train = get(j, "n_train", c.n_train);
  c.n_dev = get(j, "n_dev", c.n_dev);
  c.n_test = get(j, "n_test", c.n_test);
  c.data_seed = get(j, "data_seed", c.data_seed);
  c.translate = get(j, "translate", c.translate);
  if (j.contains("systems")) {
    c.systems.clear();
    for (const auto& n : get<std::vector<std::string>>(j, "systems", {})) c.systems.push_back(parse_model_kind(n));
  }
  c.fractions = get(j, "fractions", c.fractions);
  c.seed = get(j, "seed", c.seed);
  c.num_seeds = get(j, "num_seeds", c.num_seeds);
  c.seeds = get(j, "seeds", c.seeds);
  c.gold_triggers = get(j, "gold_triggers", c.gold_triggers);
  c.discriminating = get(j, "discriminating", c.discriminating);
  c.vocab_words = get(j, "vocab_words", c.vocab_words);
  c.max_sentence_tokens = get(j, "max_sentence_tokens", c.max_sentence_tokens);
  c.write_checkpoints = get(j, "write_checkpoints", c.write_checkpoints);
  c.jobs = get(j, "jobs", c.jobs);
  if (j.contains("model")) c.model = ModelConfig::from_json(j.at("model"));
  if (j.contains("training")) c.train = TrainConfig::from_json(j.at("training"));
  return c;
}

Corpus subset_by_documents(const Corpus& corpus, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("train fraction must lie in (0, 1]");
  std::vector<std::string> docs;
  std::map<std::string, long> events_in;
  long total = 0;
  for (const auto& s : corpus.sentences) {
    if (!events_in.count(s.doc_id)) docs.push_back(s.doc_id);
    events_in[s.doc_id] += static_cast<long>(s.events.size());
    total += static_cast<long>(s.events.size());
  }
  Rng rng(seed);
  shuffle(docs, rng);
  const double target = fraction * static_cast<double>(total);
  std::set<std::string> keep;
  long covered = 0;
  for (const auto& d : docs) {
    if (!keep.empty() && static_cast<double>(covered) >= target - 1e-9) break;
    keep.insert(d);
    covered += events_in[d];
  }
  Corpus out;
  out.ontology_id = corpus.ontology_id;
  for (const auto& s : corpus.sentences)
    if (keep.count(s.doc_id)) out.sentences.push_back(s);
  return out;
}

EventSet decode_events(const Model* trigger_model, const Model& argument_model, const Corpus& corpus,
                       bool gold_triggers, int max_sentence_tokens) {
  const Corpus pieces = split_long_sentences(corpus, max_sentence_tokens);
  EventSet out;
  out.reserve(pieces.sentences.size());
  for (const auto& s : pieces.sentences) {
    SentenceEvents se{s.doc_id, s.sent_id, {}};
    if (is_trigger_model(argument_model.kind())) {
      for (const auto& t : argument_model.detect_triggers(s)) se.events.push_back({t.span, t.event_type, {}, t.score});
    } else if (gold_triggers) {
      std::vector<TriggerPrediction> gold;
      for (const auto& e : s.events) gold.push_back({e.trigger, e.event_type, 1.0});
      se.events = extract_events(nullptr, argument_model, s, &gold);
    } else {
      if (!trigger_model) throw ConfigError("decoding without gold triggers needs a trigger model");
      se.events = extract_events(trigger_model, argument_model, s);
    }
    out.push_back(std::move(se));
  }
  return remap_to_reference(out, pieces);
}

std::string language_pair_name(const std::string& source, const std::string& target, double anchors) {
  if (anchors < 0) return source + "-" + target;
  return source + "-" + target + fmt("%.0f", std::round(anchors * 100.0));
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::string out = "system,language_pair,fraction,seed,level,precision,recall,f1\n";
  for (const auto& r : rows) {
    out += r.system + "," + r.language_pair + "," + fraction_name(r.fraction) + "," + std::to_string(r.seed) + "," +
           r.level + "," + fmt("%.6f", r.precision) + "," + fmt("%.6f", r.recall) + "," + fmt("%.6f", r.f1) + "\n";
  }
  return out;
}

namespace {

struct TestSet {
  std::string pair;
  Corpus corpus;
};

struct SubRun {
  ModelKind kind;
  std::size_t fraction;
  std::uint64_t seed;
};

struct SubRunOutput {
  std::vector<ResultRow> rows;
  std::map<std::string, EventSet> predictions;  // by language pair
};

std::string run_dir(const std::string& out, ModelKind k, double fraction, std::uint64_t seed) {
  return out + "/runs/" + model_kind_name(k) + "/f" + fraction_name(fraction) + "/seed" + std::to_string(seed);
}

void save_json(const std::string& path, const nlohmann::ordered_json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, const std::string& out_dir) {
  config.validate();
  const Ontology ontology = config.ontology_path.empty() ? default_ontology() : load_ontology(config.ontology_path);
  const GrammarSpec grammar = config.grammar_path.empty() ? default_grammar() : load_grammar(config.grammar_path);
  grammar.validate(ontology);

  auto corpus_for = [&](const std::string& path, int n, std::uint64_t stream) {
    if (!path.empty()) return load_corpus(path, ontology);
    return generate_corpus(grammar, ontology, n, derive_seed(config.data_seed, stream), config.mode);
  };
  const Corpus train_full = corpus_for(config.train_path, config.n_train, 0);
  const Corpus dev = (config.dev_path.empty() && config.n_dev == 0) ? Corpus{{}, ontology.id}
                                                                   : corpus_for(config.dev_path, config.n_dev, 1);
  const Corpus test = corpus_for(config.test_path, config.n_test, 2);

  fs::create_directories(out_dir + "/data");
  save_json(out_dir + "/config.json", config.to_json());
  save_ontology(out_dir + "/data/ontology.json", ontology);
  save_corpus(out_dir + "/data/train.jsonl", train_full);
  save_corpus(out_dir + "/data/dev.jsonl", dev);
  save_corpus(out_dir + "/data/test.jsonl", test);

  std::vector<TestSet> tests;
  tests.push_back({language_pair_name(grammar.language, grammar.language, -1), test});
  for (double a : config.translate) {
    const GrammarSpec lex = with_lexicon(grammar, a, derive_seed(config.data_seed, 3));
    TestSet t{language_pair_name(grammar.language, grammar.target_language, a), translate_corpus(test, lex)};
    save_corpus(out_dir + "/data/test_" + t.pair + ".jsonl", t.corpus);
    tests.push_back(std::move(t));
  }

  std::vector<std::string> reserved = {";"};
  for (const auto& r : ontology.all_roles()) reserved.push_back(ontology.code_of(r));
  const SubwordVocab vocab = build_vocab(train_full, config.vocab_words, config.data_seed, reserved);
  write_text_file(out_dir + "/vocab.json", vocab.to_json() + "\n");

  std::vector<Corpus> train_sets;
  for (double f : config.fractions) {
    Corpus sub = subset_by_documents(train_full, f, derive_seed(config.data_seed, 4));
    train_sets.push_back(split_long_sentences(sub, config.max_sentence_tokens));
  }
  const Corpus dev_pieces = split_long_sentences(dev, config.max_sentence_tokens);
  const std::vector<std::uint64_t> seeds = config.run_seeds();

  // Argument systems decoding from predicted triggers share one primed
  // trigger model per (fraction, seed).
  const bool need_triggers =
      !config.gold_triggers &&
      std::any_of(config.systems.begin(), config.systems.end(), [](ModelKind k) { return !is_trigger_model(k); });
  std::vector<ModelKind> kinds = config.systems;
  const ModelKind trigger_kind = ModelKind::trigger_primed;
  if (need_triggers && std::find(kinds.begin(), kinds.end(), trigger_kind) == kinds.end()) kinds.push_back(trigger_kind);

  auto train_one = [&](ModelKind kind, std::size_t fi, std::uint64_t seed) {
    TrainConfig tc = config.train;
    tc.seed = seed;
    tc.jobs = 1;
    TrainResult r = train(kind, config.model, ontology, vocab, train_sets[fi], dev_pieces, tc);
    const std::string dir = run_dir(out_dir, kind, config.fractions[fi], seed);
    fs::create_directories(dir);
    if (config.write_checkpoints) write_text_file(dir + "/model.ckpt", r.model.to_checkpoint());
    nlohmann::ordered_json rep = r.report.to_json();
    rep["train_sentences"] = train_sets[fi].sentences.size();
    save_json(dir + "/train_report.json", rep);
    return r;
  };

  // Phase 1: trigger models (they are needed by phase 2 when triggers are
  // predicted). Phase 2: everything else.
  std::vector<SubRun> phase1, phase2;
  for (auto k : kinds)
    for (std::size_t fi = 0; fi < config.fractions.size(); ++fi)
      for (auto s : seeds) (need_triggers && k == trigger_kind ? phase1 : phase2).push_back({k, fi, s});

  std::map<std::pair<std::size_t, std::uint64_t>, std::optional<Model>> trigger_models;
  for (const auto& r : phase1) trigger_models[{r.fraction, r.seed}];
  std::map<std::tuple<int, std::size_t, std::uint64_t>, SubRunOutput> outputs;
  for (const auto& r : phase1) outputs[{static_cast<int>(r.kind), r.fraction, r.seed}];
  for (const auto& r : phase2) outputs[{static_cast<int>(r.kind), r.fraction, r.seed}];

  auto evaluate = [&](const Model& model, const Model* trig, const SubRun& r) {
    SubRunOutput& o = outputs.at({static_cast<int>(r.kind), r.fraction, r.seed});
    const std::string dir = run_dir(out_dir, r.kind, config.fractions[r.fraction], r.seed);
    const bool trigger_system = is_trigger_model(r.kind);
    for (const auto& t : tests) {
      EventSet pred = decode_events(trig, model, t.corpus, config.gold_triggers, config.max_sentence_tokens);
      const EventSet gold = events_of(t.corpus);
      const ScoreReport rep = score(pred, gold);
      nlohmann::ordered_json sj = rep.to_json();
      auto add = [&](const std::string& level, const LevelScore& ls) {
        o.rows.push_back({model_kind_name(r.kind), t.pair, config.fractions[r.fraction], r.seed, level, ls.precision,
                          ls.recall, ls.f1});
      };
      if (trigger_system || !config.gold_triggers) add("trigger", rep.trigger);
      if (!trigger_system) {
        add("argument", rep.argument);
        if (config.discriminating) {
          auto [p, g] = restrict_to_discriminating(pred, gold);
          const LevelScore d = score(p, g, Level::argument);
          add("argument_discriminating", d);
          sj["argument_discriminating"] = nlohmann::ordered_json{
              {"precision", d.precision}, {"recall", d.recall}, {"f1", d.f1},
              {"tp", d.tp}, {"fp", d.fp}, {"fn", d.fn}};
        }
      }
      save_predictions(dir + "/pred_" + t.pair + ".jsonl", pred);
      save_json(dir + "/score_" + t.pair + ".json", sj);
      o.predictions[t.pair] = std::move(pred);
    }
  };

  auto run_phase = [&](const std::vector<SubRun>& runs, bool keep_models) {
    std::vector<std::exception_ptr> errors(runs.size());
    const int n = static_cast<int>(runs.size());
#pragma omp parallel for schedule(dynamic) num_threads(config.jobs)
    for (int i = 0; i < n; ++i) {
      try {
        const SubRun& r = runs[static_cast<std::size_t>(i)];
        TrainResult tr = train_one(r.kind, r.fraction, r.seed);
        const Model* trig = nullptr;
        if (need_triggers && !is_trigger_model(r.kind)) trig = &*trigger_models.at({r.fraction, r.seed});
        evaluate(tr.model, trig, r);
        if (keep_models) trigger_models.at({r.fraction, r.seed}).emplace(std::move(tr.model));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  };
  run_phase(phase1, true);
  run_phase(phase2, false);

  // Rows in configuration order: system, fraction, seed, then test set and level.
  ExperimentResult result;
  for (auto k : kinds)
    for (std::size_t fi = 0; fi < config.fractions.size(); ++fi)
      for (auto s : seeds)
        for (const auto& row : outputs.at({static_cast<int>(k), fi, s}).rows) result.rows.push_back(row);
  result.csv = rows_to_csv(result.rows);
  write_text_file(out_dir + "/results.csv", result.csv);

  // Seed means per (system, pair, fraction, level).
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  {
    std::vector<std::tuple<std::string, std::string, double, std::string>> keys;
    std::map<std::tuple<std::string, std::string, double, std::string>, std::vector<const ResultRow*>> groups;
    for (const auto& r : result.rows) {
      auto key = std::make_tuple(r.system, r.language_pair, r.fraction, r.level);
      if (!groups.count(key)) keys.push_back(key);
      groups[key].push_back(&r);
    }
    for (const auto& key : keys) {
      std::vector<double> p, rc, f;
      for (const auto* r : groups[key]) {
        p.push_back(r->precision);
        rc.push_back(r->recall);
        f.push_back(r->f1);
      }
      auto ms = [](const std::vector<double>& v) {
        const MeanStd m = mean_std(v);
        return nlohmann::ordered_json{{"mean", m.mean}, {"stdev", m.stdev}};
      };
      summary.push_back({{"system", std::get<0>(key)},
                         {"language_pair", std::get<1>(key)},
                         {"fraction", std::get<2>(key)},
                         {"level", std::get<3>(key)},
                         {"seeds", groups[key].size()},
                         {"precision", ms(p)},
                         {"recall", ms(rc)},
                         {"f1", ms(f)}});
    }
  }
  save_json(out_dir + "/summary.json", summary);

  if (config.systems.size() >= 2) {
    const ModelKind a = config.systems[0], b = config.systems[1];
    const Level level = is_trigger_model(a) || is_trigger_model(b) ? Level::trigger : Level::argument;
    for (std::size_t fi = 0; fi < config.fractions.size(); ++fi)
      for (auto s : seeds)
        for (const auto& t : tests) {
          const std::string dir = out_dir + "/diffs/f" + fraction_name(config.fractions[fi]) + "/seed" +
                                  std::to_string(s);
          fs::create_directories(dir);
          const DiffReport d = diff_outputs(outputs.at({static_cast<int>(a), fi, s}).predictions.at(t.pair),
                                            outputs.at({static_cast<int>(b), fi, s}).predictions.at(t.pair),
                                            events_of(t.corpus), level);
          nlohmann::ordered_json dj = d.to_json();
          dj["a"] = model_kind_name(a);
          dj["b"] = model_kind_name(b);
          save_json(dir + "/" + model_kind_name(a) + "_vs_" + model_kind_name(b) + "_" + t.pair + ".json", dj);
        }
  }
  return result;
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
