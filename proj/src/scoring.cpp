#include "primeie/scoring.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "primeie/error.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

namespace {

using SentKey = std::pair<std::string, std::string>;

// A scorable unit: triggers leave role empty and argument span unused.
struct Item {
  SentKey sent;
  std::string event_type;
  TokenSpan span;
  std::string role;
  TokenSpan trigger;
  bool same(const Item& o) const {
    return sent == o.sent && event_type == o.event_type && span == o.span && role == o.role;
  }
  bool overlaps(const Item& o) const { return sent == o.sent && event_type == o.event_type && span.overlaps(o.span); }
};

std::vector<Item> items(const EventSet& set, Level level) {
  std::vector<Item> out;
  for (const auto& se : set) {
    const SentKey k{se.doc_id, se.sent_id};
    for (const auto& e : se.events) {
      if (level == Level::trigger) {
        out.push_back({k, e.event_type, e.trigger, "", e.trigger});
      } else {
        for (const auto& a : e.arguments) out.push_back({k, e.event_type, a.span, a.role, e.trigger});
      }
    }
  }
  return out;
}

void check_sentences(const EventSet& pred, const EventSet& gold) {
  std::set<SentKey> keys;
  for (const auto& g : gold) keys.insert({g.doc_id, g.sent_id});
  for (const auto& p : pred)
    if (!keys.count({p.doc_id, p.sent_id}))
      throw ValidationError("score: predicted sentence " + p.doc_id + "/" + p.sent_id + " is not in the gold set");
}

// Greedy exact matching; returns for each prediction the gold index or -1.
std::vector<int> match(const std::vector<Item>& pred, const std::vector<Item>& gold) {
  std::map<SentKey, std::vector<int>> by_sent;
  for (int i = 0; i < static_cast<int>(gold.size()); ++i) by_sent[gold[i].sent].push_back(i);
  std::vector<bool> used(gold.size(), false);
  std::vector<int> out(pred.size(), -1);
  for (std::size_t p = 0; p < pred.size(); ++p) {
    auto it = by_sent.find(pred[p].sent);
    if (it == by_sent.end()) continue;
    for (int gi : it->second)
      if (!used[gi] && gold[gi].same(pred[p])) {
        used[gi] = true;
        out[p] = gi;
        break;
      }
  }
  return out;
}

nlohmann::ordered_json level_json(const LevelScore& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"tp", s.tp}, {"fp", s.fp}, {"fn", s.fn}};
}

nlohmann::ordered_json mean_json(const MeanStd& m) { return {{"mean", m.mean}, {"stdev", m.stdev}}; }

nlohmann::ordered_json avg_json(const LevelAverage& a) {
  return {{"precision", mean_json(a.precision)}, {"recall", mean_json(a.recall)}, {"f1", mean_json(a.f1)}};
}

nlohmann::ordered_json counts_json(const DiffCounts& c, const char* only_name) {
  return {{"both_correct", c.both_correct}, {only_name, c.only_correct}, {"substitution", c.substitution},
          {"similar", c.similar},           {"deletion", c.deletion},    {"insertion", c.insertion}};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (width.size() <= c) width.push_back(0);
      width[c] = std::max(width[c], r[c].size());
    }
  std::ostringstream os;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) line += "  ";
      const std::string pad(width[c] - r[c].size(), ' ');
      line += c == 0 ? r[c] + pad : pad + r[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << '\n';
  }
  return os.str();
}

}  // namespace

const char* level_name(Level l) { return l == Level::trigger ? "trigger" : "argument"; }

Level parse_level(const std::string& name) {
  if (name == "trigger") return Level::trigger;
  if (name == "argument") return Level::argument;
  throw ConfigError("unknown level '" + name + "'");
}

LevelScore prf(long tp, long fp, long fn) {
  LevelScore s;
  s.tp = tp;
  s.fp = fp;
  s.fn = fn;
  const bool both_empty = tp + fp == 0 && tp + fn == 0;
  s.precision = tp + fp > 0 ? double(tp) / double(tp + fp) : (both_empty ? 1.0 : 0.0);
  s.recall = tp + fn > 0 ? double(tp) / double(tp + fn) : (both_empty ? 1.0 : 0.0);
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

LevelScore score(const EventSet& pred, const EventSet& gold, Level level) {
  check_sentences(pred, gold);
  const auto p = items(pred, level);
  const auto g = items(gold, level);
  const auto m = match(p, g);
  long tp = 0;
  for (int x : m) tp += x >= 0;
  return prf(tp, static_cast<long>(p.size()) - tp, static_cast<long>(g.size()) - tp);
}

ScoreReport score(const EventSet& pred, const EventSet& gold) {
  return {score(pred, gold, Level::trigger), score(pred, gold, Level::argument)};
}

nlohmann::ordered_json ScoreReport::to_json() const {
  return {{"trigger", level_json(trigger)}, {"argument", level_json(argument)}};
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd m;
  if (values.empty()) return m;
  for (double v : values) m.mean += v;
  m.mean /= values.size();
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.stdev = std::sqrt(ss / (values.size() - 1));
  }
  return m;
}

AveragedReport average_seeds(const std::vector<ScoreReport>& reports) {
  if (reports.empty()) throw ConfigError("average_seeds: no reports");
  AveragedReport out;
  out.seeds = reports.size();
  for (Level l : {Level::trigger, Level::argument}) {
    std::vector<double> p, r, f;
    for (const auto& rep : reports) {
      p.push_back(rep.at(l).precision);
      r.push_back(rep.at(l).recall);
      f.push_back(rep.at(l).f1);
    }
    LevelAverage& a = l == Level::trigger ? out.trigger : out.argument;
    a = {mean_std(p), mean_std(r), mean_std(f)};
  }
  return out;
}

nlohmann::ordered_json AveragedReport::to_json() const {
  return {{"seeds", seeds}, {"trigger", avg_json(trigger)}, {"argument", avg_json(argument)}};
}

EventSet union_decode(const std::vector<EventSet>& per_seed) {
  if (per_seed.empty()) throw ConfigError("union_decode: no prediction sets");
  std::vector<SentKey> order;
  for (const auto& se : per_seed[0]) order.push_back({se.doc_id, se.sent_id});
  const std::set<SentKey> keys(order.begin(), order.end());
  std::map<SentKey, std::vector<EventMention>> merged;
  for (const auto& set : per_seed) {
    std::set<SentKey> seen;
    for (const auto& se : set) seen.insert({se.doc_id, se.sent_id});
    if (seen != keys) throw ValidationError("union_decode: prediction sets cover different sentences");
    for (const auto& se : set) {
      auto& events = merged[{se.doc_id, se.sent_id}];
      for (const auto& e : se.events) {
        auto it = std::find_if(events.begin(), events.end(), [&](const EventMention& x) {
          return x.trigger == e.trigger && x.event_type == e.event_type;
        });
        if (it == events.end()) {
          events.push_back(e);
          events.back().arguments.clear();
          it = events.end() - 1;
        }
        it->score = std::max(it->score, e.score);
        for (const auto& a : e.arguments) {
          auto at = std::find(it->arguments.begin(), it->arguments.end(), a);
          if (at == it->arguments.end())
            it->arguments.push_back(a);
          else
            at->score = std::max(at->score, a.score);
        }
      }
    }
  }
  EventSet out;
  std::set<SentKey> emitted;
  for (const auto& k : order)
    if (emitted.insert(k).second) out.push_back({k.first, k.second, merged[k]});
  return out;
}

DiffReport diff_outputs(const EventSet& pred_a, const EventSet& pred_b, const EventSet& gold, Level level) {
  check_sentences(pred_a, gold);
  check_sentences(pred_b, gold);
  const auto g = items(gold, level);
  const auto pa = items(pred_a, level);
  const auto pb = items(pred_b, level);
  const auto ma = match(pa, g);
  const auto mb = match(pb, g);

  DiffReport r;
  r.level = level;
  r.gold_items = static_cast<long>(g.size());
  r.a_items = static_cast<long>(pa.size());
  r.b_items = static_cast<long>(pb.size());

  auto side = [&](const std::vector<Item>& mine, const std::vector<int>& my_match, const std::vector<Item>& other,
                  const std::vector<int>& other_match, DiffCounts& c, long& exact) {
    std::vector<bool> gold_hit(g.size(), false), other_hit(g.size(), false);
    for (int x : my_match)
      if (x >= 0) gold_hit[x] = true;
    for (int x : other_match)
      if (x >= 0) other_hit[x] = true;
    for (std::size_t gi = 0; gi < g.size(); ++gi) {
      if (gold_hit[gi]) {
        ++exact;
        (other_hit[gi] ? c.both_correct : c.only_correct)++;
        continue;
      }
      bool overlapped = false;
      for (std::size_t p = 0; p < mine.size() && !overlapped; ++p) overlapped = my_match[p] < 0 && mine[p].overlaps(g[gi]);
      (overlapped ? c.substitution : c.deletion)++;
    }
    for (std::size_t p = 0; p < mine.size(); ++p) {
      if (my_match[p] >= 0) continue;
      bool on_gold = false, on_other = false;
      for (const auto& gi : g) on_gold = on_gold || mine[p].overlaps(gi);
      for (const auto& o : other) on_other = on_other || mine[p].overlaps(o);
      if (on_gold)
        ++c.substitution;
      else if (on_other)
        ++c.similar;
      else
        ++c.insertion;
    }
  };
  side(pa, ma, pb, mb, r.a, r.a_exact);
  side(pb, mb, pa, ma, r.b, r.b_exact);
  return r;
}

nlohmann::ordered_json DiffReport::to_json() const {
  return {{"level", level_name(level)},
          {"gold_items", gold_items},
          {"a", counts_json(a, "a_only_correct")},
          {"b", counts_json(b, "b_only_correct")},
          {"a_items", a_items},
          {"b_items", b_items}};
}

std::pair<EventSet, EventSet> restrict_to_discriminating(const EventSet& pred, const EventSet& gold) {
  check_sentences(pred, gold);
  std::map<SentKey, std::set<TokenSpan>> spans;
  EventSet g_out;
  for (const auto& se : gold) {
    std::map<TokenSpan, int> holders;
    for (const auto& e : se.events) {
      std::set<TokenSpan> mine;
      for (const auto& a : e.arguments) mine.insert(a.span);
      for (const auto& sp : mine) ++holders[sp];
    }
    auto& keep = spans[{se.doc_id, se.sent_id}];
    for (const auto& [sp, n] : holders)
      if (n == 1) keep.insert(sp);
    SentenceEvents out{se.doc_id, se.sent_id, {}};
    for (const auto& e : se.events) {
      EventMention f = e;
      f.arguments.clear();
      for (const auto& a : e.arguments)
        if (keep.count(a.span)) f.arguments.push_back(a);
      out.events.push_back(std::move(f));
    }
    g_out.push_back(std::move(out));
  }
  EventSet p_out;
  for (const auto& se : pred) {
    const auto& keep = spans[{se.doc_id, se.sent_id}];
    SentenceEvents out{se.doc_id, se.sent_id, {}};
    for (const auto& e : se.events) {
      EventMention f = e;
      f.arguments.clear();
      for (const auto& a : e.arguments)
        if (keep.count(a.span)) f.arguments.push_back(a);
      out.events.push_back(std::move(f));
    }
    p_out.push_back(std::move(out));
  }
  return {p_out, g_out};
}

std::string report_to_text(const ScoreReport& r) {
  std::vector<std::vector<std::string>> rows = {{"level", "precision", "recall", "f1", "tp", "fp", "fn"}};
  for (Level l : {Level::trigger, Level::argument}) {
    const auto& s = r.at(l);
    rows.push_back({level_name(l), fmt(s.precision), fmt(s.recall), fmt(s.f1), std::to_string(s.tp),
                    std::to_string(s.fp), std::to_string(s.fn)});
  }
  return table(rows);
}

std::string averaged_to_text(const AveragedReport& r) {
  std::vector<std::vector<std::string>> rows = {{"level", "precision", "recall", "f1", "f1_stdev"}};
  for (Level l : {Level::trigger, Level::argument}) {
    const auto& a = l == Level::trigger ? r.trigger : r.argument;
    rows.push_back({level_name(l), fmt(a.precision.mean), fmt(a.recall.mean), fmt(a.f1.mean), fmt(a.f1.stdev)});
  }
  return table(rows);
}

std::string diff_to_text(const DiffReport& r) {
  std::vector<std::vector<std::string>> rows = {
      {"system", "both_correct", "only_correct", "substitution", "similar", "deletion", "insertion"}};
  for (int s = 0; s < 2; ++s) {
    const DiffCounts& c = s == 0 ? r.a : r.b;
    rows.push_back({s == 0 ? "a" : "b", std::to_string(c.both_correct), std::to_string(c.only_correct),
                    std::to_string(c.substitution), std::to_string(c.similar), std::to_string(c.deletion),
                    std::to_string(c.insertion)});
  }
  return table(rows);
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
