#include <map>
#include <set>

#include "doctest.h"
#include "primeie/error.hpp"
#include "primeie/random.hpp"
#include "primeie/scoring.hpp"

using namespace primeie;

namespace {

EventMention ev(TokenSpan trigger, std::string type, std::vector<Argument> args = {}) {
  return {trigger, std::move(type), std::move(args), 0.0};
}

Argument arg(int a, int b, std::string role) { return {{a, b}, std::move(role), 0.0}; }

// Random set over a fixed sentence list with few distinct spans, so
// collisions with the gold set are common.
EventSet random_set(Rng& rng, int sentences) {
  const std::vector<std::string> types = {"Attack", "Convict"};
  const std::vector<std::string> roles = {"Place", "Target"};
  EventSet out;
  for (int s = 0; s < sentences; ++s) {
    SentenceEvents se{"d", "s" + std::to_string(s), {}};
    const int n = int(uniform_index(rng, 3));
    for (int k = 0; k < n; ++k) {
      const int t = int(uniform_index(rng, 4));
      EventMention e = ev({t, t + 1}, types[uniform_index(rng, 2)]);
      bool dup = false;
      for (const auto& o : se.events) dup |= o.trigger == e.trigger && o.event_type == e.event_type;
      if (dup) continue;
      const int m = int(uniform_index(rng, 4));
      for (int j = 0; j < m; ++j) {
        const int a = int(uniform_index(rng, 5));
        Argument x = arg(a, a + 1 + int(uniform_index(rng, 2)), roles[uniform_index(rng, 2)]);
        if (std::find(e.arguments.begin(), e.arguments.end(), x) == e.arguments.end()) e.arguments.push_back(x);
      }
      se.events.push_back(e);
    }
    out.push_back(se);
  }
  return out;
}

// Independent argument-level count: gold and predictions as multisets of
// (sentence, type, span, role) tuples; tp is the multiset intersection.
LevelScore argument_oracle(const EventSet& pred, const EventSet& gold) {
  using Key = std::tuple<std::string, std::string, int, int, std::string>;
  std::map<Key, long> g, p;
  long ng = 0, np = 0;
  for (const auto& se : gold)
    for (const auto& e : se.events)
      for (const auto& a : e.arguments) ++g[{se.sent_id, e.event_type, a.span.start, a.span.end, a.role}], ++ng;
  for (const auto& se : pred)
    for (const auto& e : se.events)
      for (const auto& a : e.arguments) ++p[{se.sent_id, e.event_type, a.span.start, a.span.end, a.role}], ++np;
  long tp = 0;
  for (const auto& [k, n] : p) tp += std::min(n, g.count(k) ? g[k] : 0L);
  LevelScore s;
  s.tp = tp;
  s.fp = np - tp;
  s.fn = ng - tp;
  s.precision = np ? double(tp) / np : (ng ? 0.0 : 1.0);
  s.recall = ng ? double(tp) / ng : (np ? 0.0 : 1.0);
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

long count(const EventSet& s, Level level) {
  long n = 0;
  for (const auto& se : s)
    for (const auto& e : se.events) n += level == Level::trigger ? 1 : long(e.arguments.size());
  return n;
}

}  // namespace

TEST_CASE("hand-computed scores") {
  const EventSet gold = {{"d", "s", {ev({0, 1}, "Attack", {arg(1, 2, "Place"), arg(2, 3, "Target"), arg(3, 4, "Place"),
                                                            arg(4, 5, "Target")})}}};
  SUBCASE("identical sets score 1") {
    const ScoreReport r = score(gold, gold);
    CHECK(r.trigger.f1 == 1.0);
    CHECK(r.argument.precision == 1.0);
    CHECK(r.argument.recall == 1.0);
    CHECK(r.argument.f1 == 1.0);
  }
  SUBCASE("one of two predictions correct against four gold") {
    const EventSet pred = {{"d", "s", {ev({0, 1}, "Attack", {arg(1, 2, "Place"), arg(1, 2, "Target")})}}};
    const LevelScore s = score(pred, gold, Level::argument);
    CHECK(s.tp == 1);
    CHECK(s.fp == 1);
    CHECK(s.fn == 3);
    CHECK(s.precision == doctest::Approx(0.5));
    CHECK(s.recall == doctest::Approx(0.25));
    CHECK(s.f1 == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("empty predictions") {
    const EventSet pred;
    const LevelScore s = score(pred, gold, Level::argument);
    CHECK(s.precision == 0.0);
    CHECK(s.recall == 0.0);
    CHECK(s.f1 == 0.0);
    CHECK(s.fn == 4);
  }
  SUBCASE("empty against empty") {
    const EventSet none = {{"d", "s", {}}};
    const LevelScore s = score(none, none, Level::argument);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
    CHECK(s.f1 == 1.0);
  }
  SUBCASE("trigger match needs span and type") {
    const EventSet pred = {{"d", "s", {ev({0, 1}, "Convict"), ev({0, 2}, "Attack")}}};
    CHECK(score(pred, gold, Level::trigger).tp == 0);
  }
  SUBCASE("unknown predicted sentence") {
    const EventSet pred = {{"d", "other", {}}};
    CHECK_THROWS_AS(score(pred, gold), ValidationError);
  }
  CHECK(prf(0, 0, 0).f1 == 1.0);
  CHECK(prf(0, 2, 0).precision == 0.0);
  CHECK(prf(0, 2, 0).recall == 0.0);
  CHECK(prf(0, 0, 3).precision == 0.0);
}

TEST_CASE("seed averaging") {
  ScoreReport a, b;
  a.argument = prf(2, 2, 3);
  b.argument = prf(3, 2, 0);
  AveragedReport one = average_seeds({a});
  CHECK(one.argument.f1.mean == a.argument.f1);
  CHECK(one.argument.f1.stdev == 0.0);
  ScoreReport x, y;
  x.argument.f1 = 0.4;
  y.argument.f1 = 0.6;
  CHECK(average_seeds({x, y}).argument.f1.mean == doctest::Approx(0.5));

  Rng rng(4);
  std::vector<ScoreReport> five(5);
  std::vector<double> f(5);
  for (int i = 0; i < 5; ++i) five[i].trigger.f1 = f[i] = uniform01(rng);
  double mean = (f[0] + f[1] + f[2] + f[3] + f[4]) / 5, ss = 0;
  for (double v : f) ss += (v - mean) * (v - mean);
  const AveragedReport r = average_seeds(five);
  CHECK(r.trigger.f1.mean == doctest::Approx(mean));
  CHECK(r.trigger.f1.stdev == doctest::Approx(std::sqrt(ss / 4)));
  CHECK(r.seeds == 5);
  CHECK_THROWS_AS(average_seeds({}), ConfigError);
}

TEST_CASE("union decoding") {
  const EventSet a = {{"d", "s", {ev({0, 1}, "Attack", {arg(1, 2, "Place"), arg(2, 3, "Place"), arg(3, 4, "Place")})}}};
  const EventSet b = {{"d", "s",
                       {ev({0, 1}, "Attack", {arg(1, 2, "Target"), arg(2, 3, "Target")}),
                        ev({5, 6}, "Attack", {arg(1, 2, "Target"), arg(2, 3, "Target")})}}};
  CHECK(count(union_decode({a, a}), Level::argument) == 3);
  CHECK(union_decode({a, a})[0].events == a[0].events);
  CHECK(count(union_decode({a, b}), Level::argument) == 7);
  const EventSet c = {{"d", "other", {}}};
  CHECK_THROWS_AS(union_decode({a, c}), ValidationError);
  CHECK_THROWS_AS(union_decode({}), ConfigError);
}

TEST_CASE("diff taxonomy examples") {
  const EventSet gold = {{"d", "s", {ev({0, 1}, "Attack", {arg(2, 3, "Place")})}}};
  SUBCASE("identical systems") {
    const DiffReport r = diff_outputs(gold, gold, gold, Level::argument);
    CHECK(r.a.both_correct == 1);
    CHECK(r.b.both_correct == 1);
    CHECK(r.a.total() == 1);
    CHECK(r.b.total() == 1);
  }
  SUBCASE("wider span is a substitution") {
    const EventSet a = {{"d", "s", {ev({0, 1}, "Attack", {arg(2, 4, "Place")})}}};
    const DiffReport r = diff_outputs(a, gold, gold, Level::argument);
    CHECK(r.a.substitution == 2);  // the gold item and the prediction
    CHECK(r.a.deletion == 0);
    CHECK(r.a.insertion == 0);
    CHECK(r.b.only_correct == 1);
  }
  SUBCASE("overlapping non-gold outputs are similar") {
    const EventSet a = {{"d", "s", {ev({0, 1}, "Attack", {arg(5, 7, "Target")})}}};
    const EventSet b = {{"d", "s", {ev({0, 1}, "Attack", {arg(6, 8, "Target")})}}};
    const DiffReport r = diff_outputs(a, b, gold, Level::argument);
    CHECK(r.a.similar == 1);
    CHECK(r.b.similar == 1);
    CHECK(r.a.deletion == 1);
    CHECK(r.b.deletion == 1);
    CHECK(r.a.insertion == 0);
  }
  SUBCASE("other event type does not overlap") {
    const EventSet a = {{"d", "s", {ev({0, 1}, "Convict", {arg(2, 3, "Place")})}}};
    const DiffReport r = diff_outputs(a, gold, gold, Level::argument);
    CHECK(r.a.insertion == 1);
    CHECK(r.a.deletion == 1);
  }
  const auto j = diff_outputs(gold, gold, gold, Level::argument).to_json();
  CHECK(j["a"].contains("a_only_correct"));
  CHECK(j["b"].contains("b_only_correct"));
}

TEST_CASE("discriminating restriction") {
  const EventSet gold = {{"d", "s",
                          {ev({0, 1}, "Attack", {arg(2, 3, "Place"), arg(4, 5, "Target")}),
                           ev({6, 7}, "Convict", {arg(2, 3, "Place")})}}};
  const EventSet pred = {{"d", "s", {ev({6, 7}, "Convict", {arg(2, 3, "Place"), arg(4, 5, "Place")})}}};
  auto [p, g] = restrict_to_discriminating(pred, gold);
  CHECK(count(g, Level::argument) == 1);
  CHECK(g[0].events[0].arguments[0].span == TokenSpan{4, 5});
  CHECK(count(p, Level::argument) == 1);

  // Assigning the shared-free argument to both triggers is wrong for one.
  const EventSet both = {{"d", "s",
                          {ev({0, 1}, "Attack", {arg(4, 5, "Target")}), ev({6, 7}, "Convict", {arg(4, 5, "Target")})}}};
  auto [bp, bg] = restrict_to_discriminating(both, gold);
  const LevelScore s = score(bp, bg, Level::argument);
  CHECK(s.tp == 1);
  CHECK(s.fp == 1);
}

TEST_CASE("text tables are aligned") {
  ScoreReport r;
  r.argument = prf(1, 1, 3);
  const std::string t = report_to_text(r);
  CHECK(t.find("argument") != std::string::npos);
  CHECK(t.find("0.3333") != std::string::npos);
  std::vector<std::size_t> widths;
  std::size_t pos = 0;
  while (pos < t.size()) {
    const std::size_t nl = t.find('\n', pos);
    widths.push_back(nl - pos);
    pos = nl + 1;
  }
  CHECK(widths.size() == 3);
  CHECK(widths[0] == widths[1]);
  CHECK(widths[1] == widths[2]);
}

TEST_CASE("scorer properties over random prediction sets") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    CAPTURE(trial);
    const int n = 1 + int(uniform_index(rng, 4));
    const EventSet gold = random_set(rng, n);
    const EventSet a = random_set(rng, n);
    const EventSet b = random_set(rng, n);

    const LevelScore s = score(a, gold, Level::argument);
    const LevelScore o = argument_oracle(a, gold);
    CHECK(s.tp == o.tp);
    CHECK(s.fp == o.fp);
    CHECK(s.fn == o.fn);
    CHECK(s.f1 == doctest::Approx(o.f1));

    // Sentence order does not matter.
    EventSet ra = a, rg = gold;
    std::reverse(ra.begin(), ra.end());
    std::rotate(rg.begin(), rg.begin() + (rg.size() / 2), rg.end());
    const LevelScore r = score(ra, rg, Level::argument);
    CHECK(r.tp == s.tp);
    CHECK(r.f1 == s.f1);

    // Union recall dominates every member. Recall of an empty gold set is
    // a convention, not a measurement, so those draws only check counts.
    const EventSet u = union_decode({a, b});
    const LevelScore su = score(u, gold, Level::argument);
    CHECK(su.tp >= score(a, gold, Level::argument).tp);
    CHECK(su.tp >= score(b, gold, Level::argument).tp);
    if (count(gold, Level::argument) > 0) {
      CHECK(su.recall >= score(a, gold, Level::argument).recall);
      CHECK(su.recall >= score(b, gold, Level::argument).recall);
    }

    // Diff categories partition gold and predictions per system.
    for (Level level : {Level::trigger, Level::argument}) {
      const DiffReport d = diff_outputs(a, b, gold, level);
      CHECK(d.a.total() == d.gold_items + d.a_items - d.a_exact);
      CHECK(d.b.total() == d.gold_items + d.b_items - d.b_exact);
      CHECK(d.a.both_correct == d.b.both_correct);
      CHECK(d.a_exact == score(a, gold, level).tp);
    }

    // Adding a correct prediction never lowers recall; adding a wrong one
    // never raises precision.
    EventSet plus = a;
    if (!gold[0].events.empty() && !gold[0].events[0].arguments.empty()) {
      const EventMention& g0 = gold[0].events[0];
      plus[0].events.push_back(ev(g0.trigger, g0.event_type, {g0.arguments[0]}));
      CHECK(score(plus, gold, Level::argument).recall >= s.recall);
    }
    EventSet wrong = a;
    wrong[0].events.push_back(ev({9, 10}, "Attack", {arg(20, 21, "Place")}));
    CHECK(score(wrong, gold, Level::argument).precision <= s.precision);
  }
}
