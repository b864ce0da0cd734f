#pragma once

// Goal representation, the internal reward function and the social peer
// (selective / exhaustive / absent), plus nonsense-goal generation.

#include <optional>
#include <string>
#include <vector>

namespace ak {

enum class GoalOrigin { SpRelevant, Discovered, Nonsense, Extrinsic };

struct Goal {
  std::string text;
  GoalOrigin origin = GoalOrigin::Discovered;

  bool operator==(const Goal& o) const { return text == o.text; }
  bool operator<(const Goal& o) const { return text < o.text; }
};

// An ordered set of goals, unique by text.
class GoalSet {
 public:
  bool insert(const Goal& g);
  bool contains(const std::string& text) const;
  const std::vector<Goal>& items() const { return items_; }
  size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

 private:
  std::vector<Goal> items_;
};

enum class RelabelMode { Selective, Exhaustive, None };

struct RelabelPolicy {
  RelabelMode mode = RelabelMode::Selective;
  GoalSet reference;  // required non-empty in selective mode
};

// 1 iff goal.text is a contiguous substring of look_text. Case-sensitive and
// whitespace-exact: the render grammar is a frozen contract.
int reward(const std::string& look_text, const Goal& goal);

// All description elements of a rendered look, at every nesting level: each
// top-level line, each item of an "is: ..." or "(containing ...)" list, at
// any depth. Malformed input yields an empty list and a diagnostic.
std::vector<Goal> enumerate_description_elements(const std::string& look_text,
                                                 std::string* diagnostic = nullptr);

// Relabel a trajectory given the looks of every visited state.
GoalSet relabel_looks(const std::vector<std::string>& looks,
                      const RelabelPolicy& policy);

// n distinct "a substance called <word>" goals with pronounceable made-up
// words, deterministic per seed, none colliding with real substance names.
std::vector<Goal> gen_nonsense_goals(int n, unsigned long long seed);

// Goal file: one goal per line, "[hard]" marker starting the hard section,
// '#' comment lines ignored.
struct GoalFile {
  std::vector<Goal> all;   // easy goals first, then hard goals
  std::vector<Goal> hard;  // subset of all
};

GoalFile parse_goal_file(const std::string& text);
GoalFile load_goal_file(const std::string& path);

// The frozen canonical goal set shipped with the project.
const std::string& canonical_goal_file_text();
GoalFile canonical_goals();

}  // namespace ak
