#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>

#include "autokitchen/goals.hpp"
#include "autokitchen/world.hpp"
#include "test_util.hpp"

using namespace ak;
using namespace aktest;

TEST_CASE("reward is exact substring matching") {
  Goal g{"a substance called water"};
  CHECK(reward("x a substance called water y", g) == 1);
  CHECK(reward("a substance called water", g) == 1);
  CHECK(reward("a substance called Water", g) == 0);  // case sensitive
  CHECK(reward("a substance called  water", g) == 0); // whitespace exact
  CHECK(reward("", g) == 0);
  CHECK(reward("water", Goal{""}) == 1);  // empty pattern matches trivially
}

// --- Independent element oracle ---------------------------------------------
//
// Second parser, written in a different style for the oracle-equivalence
// test: a single character scan that records every top-level line and every
// comma-separated item inside "is: ..." and "(containing ...)" regions.

namespace {

void oracle_scan_items(const std::string& text, size_t begin, size_t end,
                       std::set<std::string>& out);

std::string oracle_trim(std::string s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
  return s;
}

void oracle_add(const std::string& s, std::set<std::string>& out) {
  std::string t = oracle_trim(s);
  if (!t.empty() && t != "nothing") out.insert(t);
}

// Emits every depth-0 comma-separated item of text[begin, end), then scans
// each item's parenthesized groups.
void oracle_split(const std::string& text, size_t begin, size_t end,
                  std::set<std::string>& out) {
  int depth = 0;
  size_t start = begin;
  for (size_t i = begin; i <= end; ++i) {
    if (i == end || (text[i] == ',' && depth == 0)) {
      oracle_add(text.substr(start, i - start), out);
      oracle_scan_items(text, start, i, out);
      start = i + 1;
    } else if (text[i] == '(') {
      ++depth;
    } else if (text[i] == ')') {
      --depth;
    }
  }
}

// Finds "(containing ...)" groups within text[begin, end) and splits each.
void oracle_scan_items(const std::string& text, size_t begin, size_t end,
                       std::set<std::string>& out) {
  static const std::string kMark = "(containing ";
  size_t pos = begin;
  while (true) {
    pos = text.find(kMark, pos);
    if (pos == std::string::npos || pos >= end) break;
    int depth = 0;
    size_t close = pos;
    while (close < end) {
      if (text[close] == '(') ++depth;
      if (text[close] == ')' && --depth == 0) break;
      ++close;
    }
    oracle_split(text, pos + kMark.size(), close, out);
    pos = close + 1;
  }
}

std::set<std::string> oracle_elements(const std::string& look) {
  std::set<std::string> out;
  size_t line_start = 0;
  int lineno = 0;
  while (line_start <= look.size()) {
    size_t nl = look.find('\n', line_start);
    size_t line_end = nl == std::string::npos ? look.size() : nl;
    ++lineno;
    if (lineno > 2 && line_end > line_start) {
      std::string line =
          oracle_trim(look.substr(line_start, line_end - line_start));
      oracle_add(line, out);
      size_t is_pos = line.find(" is: ");
      if (is_pos != std::string::npos) {
        size_t start = is_pos + 5;
        int depth = 0;
        size_t stop = line.size();
        for (size_t i = start; i < line.size(); ++i) {
          if (line[i] == '(') ++depth;
          else if (line[i] == ')') --depth;
          else if (line[i] == '.' && depth == 0) {
            stop = i;
            break;
          }
        }
        oracle_split(line, start, stop, out);
      } else {
        oracle_scan_items(line, 0, line.size(), out);
      }
    }
    if (nl == std::string::npos) break;
    line_start = nl + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("element enumeration matches the independent oracle on random walks") {
  std::mt19937_64 rng(3);
  for (int walk = 0; walk < 10; ++walk) {
    auto r = reset(default_kitchen(), 0);
    WorldState s = r.state;
    for (int t = 0; t < 40; ++t) {
      auto va = valid_actions(s);
      s = step(s, va[std::uniform_int_distribution<size_t>(0, va.size() - 1)(
                        rng)])
              .state;
      std::string look = render_look(s);
      std::string diag;
      auto elems = enumerate_description_elements(look, &diag);
      CHECK(diag.empty());
      std::set<std::string> got;
      for (const auto& g : elems) got.insert(g.text);
      CHECK(got == oracle_elements(look));
      // Every element is a rewarded substring of its look.
      for (const auto& g : elems) CHECK(reward(look, g) == 1);
    }
  }
}

TEST_CASE("element enumeration of the reset kitchen, exact list") {
  auto r = reset(default_kitchen(), 0);
  auto elems = enumerate_description_elements(r.observation.look);
  std::vector<std::string> texts;
  for (const auto& g : elems) texts.push_back(g.text);
  const std::vector<std::string> expected = {
      "the agent",
      "a substance called air",
      "a counter. On the counter is: a bowl (containing a red apple "
      "(containing nothing), a banana (containing nothing), an orange "
      "(containing nothing), a potato (containing nothing)).",
      "a bowl (containing a red apple (containing nothing), a banana "
      "(containing nothing), an orange (containing nothing), a potato "
      "(containing nothing))",
      "a red apple (containing nothing)",
      "a banana (containing nothing)",
      "an orange (containing nothing)",
      "a potato (containing nothing)",
      "a freezer. The freezer door is closed.",
      "a fridge. The fridge door is closed.",
      "a glass jar (containing a substance called sodium chloride)",
      "a substance called sodium chloride",
      "a sink, which is turned off. In the sink is: nothing. The drain is "
      "open.",
      "a substance called soap",
      "a stove, which is turned off. On the stove is: nothing.",
      "a table. On the table is: a glass cup (containing nothing).",
      "a glass cup (containing nothing)",
      "a fork",
      "a spoon",
      "a knife",
      "a plate",
      "a ladle",
      "a spatula",
      "a whisk",
      "a pair of tongs",
      "a grater",
      "a peeler",
      "a strainer",
      "a masher",
      "a skewer",
      "a trivet",
      "a scoop",
      "a chopstick",
  };
  CHECK(texts == expected);
}

TEST_CASE("malformed looks yield an empty list and a diagnostic") {
  std::string diag;
  auto e1 = enumerate_description_elements("Kitchen\nheader\nno indent", &diag);
  CHECK(e1.empty());
  CHECK(diag.find("not indented") != std::string::npos);

  auto e2 = enumerate_description_elements(
      "Kitchen\nheader\n    a jar (containing a thing", &diag);
  CHECK(e2.empty());
  CHECK_FALSE(diag.empty());
}

TEST_CASE("relabeling: selective, exhaustive, none") {
  auto water = run_script(
      default_kitchen(),
      {"pick up glass cup", "move glass cup to sink", "activate sink"});
  std::vector<std::string> looks = {
      reset(default_kitchen(), 0).observation.look, render_look(water.state)};

  RelabelPolicy none{RelabelMode::None, {}};
  CHECK(relabel_looks(looks, none).empty());

  RelabelPolicy selective;
  selective.mode = RelabelMode::Selective;
  for (const auto& g : canonical_goals().all) selective.reference.insert(g);
  GoalSet sel = relabel_looks(looks, selective);
  CHECK(sel.contains("a substance called water"));
  CHECK(sel.contains("In the sink is: a glass cup"));
  CHECK(sel.contains("a glass cup (containing a substance called water)"));
  CHECK(sel.contains("a table. On the table is: nothing."));
  CHECK_FALSE(sel.contains("a substance called ice"));
  // Selective only ever returns reference goals.
  for (const auto& g : sel.items())
    CHECK(selective.reference.contains(g.text));

  RelabelPolicy ex{RelabelMode::Exhaustive, {}};
  GoalSet exh = relabel_looks(looks, ex);
  CHECK(exh.contains("a substance called water"));
  CHECK(exh.contains("a substance called soap"));
  CHECK(exh.contains("the agent"));
  CHECK(exh.size() >= sel.size());
  // Every exhaustive goal is substring-rewarded in at least one look.
  for (const auto& g : exh.items()) {
    int any = 0;
    for (const auto& look : looks) any += reward(look, g);
    CHECK(any >= 1);
  }
}

TEST_CASE("selective relabel requires a matching look, not a prefix") {
  RelabelPolicy sel;
  sel.mode = RelabelMode::Selective;
  sel.reference.insert(Goal{"a substance called ice"});
  GoalSet out =
      relabel_looks({"something with a substance called water"}, sel);
  CHECK(out.empty());
}

TEST_CASE("nonsense goals: format, determinism, no real-substance collisions") {
  auto a = gen_nonsense_goals(100, 42);
  auto b = gen_nonsense_goals(100, 42);
  auto c = gen_nonsense_goals(100, 43);
  REQUIRE(a.size() == 100);
  CHECK(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].text == b[i].text);
  bool differs = false;
  for (size_t i = 0; i < a.size(); ++i) differs |= a[i].text != c[i].text;
  CHECK(differs);

  std::set<std::string> words;
  for (const auto& g : a) {
    CHECK(g.origin == GoalOrigin::Nonsense);
    REQUIRE(g.text.rfind("a substance called ", 0) == 0);
    std::string word = g.text.substr(19);
    CHECK(words.insert(word).second);  // distinct
    CHECK(word.size() >= 4);
    for (const std::string real :
         {"air", "soap", "sodium chloride", "water", "ice", "steam", "milk"})
      CHECK(real.rfind(word, 0) != 0);
  }

  // Nonsense goals never match a reachable look.
  std::mt19937_64 rng(9);
  auto r = reset(default_kitchen(), 0);
  WorldState s = r.state;
  for (int t = 0; t < 100; ++t) {
    auto va = valid_actions(s);
    s = step(s, va[std::uniform_int_distribution<size_t>(0, va.size() - 1)(rng)])
            .state;
    std::string look = render_look(s);
    for (const auto& g : a) CHECK(reward(look, g) == 0);
  }
}

TEST_CASE("goal file parsing: comments, hard marker") {
  GoalFile gf = parse_goal_file(
      "# comment\n"
      "easy one\n"
      "\n"
      "easy two\n"
      "[hard]\n"
      "# another comment\n"
      "hard one\n");
  REQUIRE(gf.all.size() == 3);
  REQUIRE(gf.hard.size() == 1);
  CHECK(gf.all[0].text == "easy one");
  CHECK(gf.all[2].text == "hard one");
  CHECK(gf.hard[0].text == "hard one");
}

TEST_CASE("canonical goal set: 14 goals, 4 hard, matches the shipped file") {
  GoalFile gf = canonical_goals();
  CHECK(gf.all.size() == 14);
  CHECK(gf.hard.size() == 4);
  for (const auto& g : gf.hard) {
    bool in_all = false;
    for (const auto& a : gf.all) in_all |= a.text == g.text;
    CHECK(in_all);
  }
  GoalFile disk =
      load_goal_file(std::string(AK_SOURCE_DIR) + "/data/goals_sp.txt");
  REQUIRE(disk.all.size() == gf.all.size());
  for (size_t i = 0; i < disk.all.size(); ++i)
    CHECK(disk.all[i].text == gf.all[i].text);
  REQUIRE(disk.hard.size() == gf.hard.size());
  for (size_t i = 0; i < disk.hard.size(); ++i)
    CHECK(disk.hard[i].text == gf.hard[i].text);
}

TEST_CASE("every easy canonical goal is reachable by a known script") {
  const std::vector<std::pair<std::string, std::vector<std::string>>> scripts = {
      {"a freezer. The freezer door is open. In the freezer is: nothing.",
       {"open freezer"}},
      {"a sink, which is turned on. In the sink is: nothing.",
       {"activate sink"}},
      {"a substance called water",
       {"pick up glass cup", "move glass cup to sink", "activate sink"}},
      {"a sink, which is turned on. In the sink is: a substance called water.",
       {"close drain", "activate sink"}},
      {"a stove, which is turned on.", {"activate stove"}},
      {"a fridge. The fridge door is open.", {"open fridge"}},
      {"a table. On the table is: nothing.", {"pick up glass cup"}},
      {"In the sink is: a glass cup",
       {"pick up glass cup", "move glass cup to sink"}},
      {"a glass cup (containing a substance called water)",
       {"pick up glass cup", "move glass cup to sink", "activate sink"}},
      {"In the sink is: a substance called water. The drain is closed.",
       {"close drain", "activate sink"}},
  };
  for (const auto& [goal, script] : scripts) {
    CAPTURE(goal);
    auto r = run_script(default_kitchen(), script);
    CHECK(reward(render_look(r.state), Goal{goal}) == 1);
  }
}

TEST_CASE("GoalSet keeps first-insertion order and uniqueness") {
  GoalSet s;
  CHECK(s.insert(Goal{"b"}));
  CHECK(s.insert(Goal{"a"}));
  CHECK_FALSE(s.insert(Goal{"b"}));
  REQUIRE(s.size() == 2);
  CHECK(s.items()[0].text == "b");
  CHECK(s.items()[1].text == "a");
}
