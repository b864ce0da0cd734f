#include "autokitchen/goals.hpp"

#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace ak {

bool GoalSet::insert(const Goal& g) {
  if (contains(g.text)) return false;
  items_.push_back(g);
  return true;
}

bool GoalSet::contains(const std::string& text) const {
  for (const auto& g : items_)
    if (g.text == text) return true;
  return false;
}

int reward(const std::string& look_text, const Goal& goal) {
  return look_text.find(goal.text) != std::string::npos ? 1 : 0;
}

// --- Description-element enumeration ----------------------------------------

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

struct ElementParser {
  std::vector<Goal> out;
  std::set<std::string> seen;
  std::string error;

  void emit(const std::string& s) {
    std::string t = trim(s);
    if (t.empty() || t == "nothing") return;
    if (seen.insert(t).second) out.push_back(Goal{t, GoalOrigin::Discovered});
  }

  // Split a list at top-level commas and emit each item, recursing into
  // nested "(containing ...)" groups.
  void parse_list(const std::string& list) {
    int depth = 0;
    size_t start = 0;
    for (size_t i = 0; i <= list.size(); ++i) {
      if (i == list.size() || (list[i] == ',' && depth == 0)) {
        std::string item = trim(list.substr(start, i - start));
        if (!item.empty() && item != "nothing") {
          emit(item);
          parse_nested(item);
        }
        start = i + 1;
      } else if (list[i] == '(') {
        ++depth;
      } else if (list[i] == ')') {
        --depth;
        if (depth < 0) {
          error = "unbalanced ')' in list";
          return;
        }
      }
    }
    if (depth != 0) error = "unbalanced '(' in list";
  }

  // Find "(containing ...)" groups inside an element.
  void parse_nested(const std::string& s) {
    const std::string marker = "(containing ";
    size_t pos = 0;
    while ((pos = s.find(marker, pos)) != std::string::npos) {
      size_t open = pos;
      int depth = 0;
      size_t close = std::string::npos;
      for (size_t i = open; i < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        else if (s[i] == ')') {
          --depth;
          if (depth == 0) {
            close = i;
            break;
          }
        }
      }
      if (close == std::string::npos) {
        error = "unterminated '(containing' group";
        return;
      }
      parse_list(s.substr(pos + marker.size(), close - pos - marker.size()));
      pos = close + 1;
    }
  }

  // A top-level line: emit the line itself, then its "is: ..." list and any
  // "(containing ...)" groups.
  void parse_line(const std::string& line) {
    emit(line);
    const std::string marker = " is: ";
    size_t pos = line.find(marker);
    if (pos != std::string::npos) {
      size_t start = pos + marker.size();
      int depth = 0;
      size_t end = line.size();
      for (size_t i = start; i < line.size(); ++i) {
        if (line[i] == '(') ++depth;
        else if (line[i] == ')') --depth;
        else if (line[i] == '.' && depth == 0) {
          end = i;
          break;
        }
      }
      parse_list(line.substr(start, end - start));
    } else {
      parse_nested(line);
    }
  }
};

}  // namespace

std::vector<Goal> enumerate_description_elements(const std::string& look_text,
                                                 std::string* diagnostic) {
  ElementParser p;
  std::istringstream in(look_text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno <= 2) continue;  // room header
    if (line.rfind("    ", 0) != 0) {
      if (diagnostic) *diagnostic = "line " + std::to_string(lineno) + " not indented";
      return {};
    }
    p.parse_line(trim(line));
    if (!p.error.empty()) {
      if (diagnostic) *diagnostic = p.error;
      return {};
    }
  }
  if (diagnostic) diagnostic->clear();
  return p.out;
}

GoalSet relabel_looks(const std::vector<std::string>& looks,
                      const RelabelPolicy& policy) {
  GoalSet out;
  switch (policy.mode) {
    case RelabelMode::None:
      break;
    case RelabelMode::Selective:
      for (const auto& g : policy.reference.items()) {
        for (const auto& look : looks) {
          if (reward(look, g)) {
            out.insert(g);
            break;
          }
        }
      }
      break;
    case RelabelMode::Exhaustive:
      for (const auto& look : looks)
        for (const auto& g : enumerate_description_elements(look)) out.insert(g);
      break;
  }
  return out;
}

// --- Nonsense goals ---------------------------------------------------------

std::vector<Goal> gen_nonsense_goals(int n, unsigned long long seed) {
  static const char* kConsonants = "bdfgklmnprstvz";
  static const char* kVowels = "aeiou";
  // Real substance names a made-up word must not be a prefix of.
  static const std::vector<std::string> kReal = {
      "air", "soap", "sodium chloride", "water", "ice", "steam", "milk"};

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> syllables(2, 4);
  std::uniform_int_distribution<int> cons(0, 13);
  std::uniform_int_distribution<int> vows(0, 4);

  std::set<std::string> used;
  std::vector<Goal> out;
  while ((int)out.size() < n) {
    int k = syllables(rng);
    std::string word;
    for (int i = 0; i < k; ++i) {
      word += kConsonants[cons(rng)];
      word += kVowels[vows(rng)];
    }
    bool clashes = false;
    for (const auto& real : kReal)
      if (real.rfind(word, 0) == 0) clashes = true;
    if (clashes || !used.insert(word).second) continue;
    out.push_back(Goal{"a substance called " + word, GoalOrigin::Nonsense});
  }
  return out;
}

// --- Goal files -------------------------------------------------------------

GoalFile parse_goal_file(const std::string& text) {
  GoalFile gf;
  std::istringstream in(text);
  std::string line;
  bool hard = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line == "[hard]") {
      hard = true;
      continue;
    }
    Goal g{line, GoalOrigin::SpRelevant};
    gf.all.push_back(g);
    if (hard) gf.hard.push_back(g);
  }
  return gf;
}

GoalFile load_goal_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open goal file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_goal_file(ss.str());
}

const std::string& canonical_goal_file_text() {
  // Four of these strings are fixed by the rendering contract's golden tests;
  // the rest are constructed from the goal hierarchy. Hard goals are the ones
  // that need water first.
  static const std::string text =
      "a freezer. The freezer door is open. In the freezer is: nothing.\n"
      "a sink, which is turned on. In the sink is: nothing.\n"
      "a substance called water\n"
      "a sink, which is turned on. In the sink is: a substance called water.\n"
      "a stove, which is turned on.\n"
      "a fridge. The fridge door is open.\n"
      "a table. On the table is: nothing.\n"
      "In the sink is: a glass cup\n"
      "a glass cup (containing a substance called water)\n"
      "In the sink is: a substance called water. The drain is closed.\n"
      "[hard]\n"
      "a substance called ice\n"
      "a substance called steam\n"
      "On the stove is: a glass cup (containing a substance called steam).\n"
      "In the freezer is: a glass cup (containing a substance called ice).\n";
  return text;
}

GoalFile canonical_goals() { return parse_goal_file(canonical_goal_file_text()); }

}  // namespace ak
