#pragma once

// Deterministic single-room text environment: object tree, templated actions,
// phase-change thermodynamics and the three observation channels (obs/look/inv).

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ak {

enum class Kind { Container, Device, Substance, Surface, Agent, Fixture };

const char* kind_name(Kind k);
Kind kind_from_name(const std::string& s);  // throws ScenarioError on unknown

struct ThermoParams {
  double heat = 25.0;
  double cool = 25.0;
  double relax = 5.0;
  double ambient = 20.0;
};

struct ObjectNode {
  std::string id;
  std::string name;
  Kind kind = Kind::Container;
  bool openable = false;
  bool is_open = false;
  bool activatable = false;
  bool is_active = false;
  bool portable = false;
  // Rendering/physics traits. on_top selects the "On the X is:" preposition,
  // heats/cools mark heat sources, water_source marks the sink basin.
  bool on_top = false;
  bool heats = false;
  bool cools = false;
  bool water_source = false;
  double temperature = 20.0;
  std::vector<std::string> contents;  // child ids, insertion order
  std::string parent;                 // empty for the room root
};

struct WorldState {
  std::map<std::string, ObjectNode> objects;
  std::string room_root;
  std::string agent_id;
  long tick = 0;
  int next_fresh = 0;  // counter for ids of objects created at runtime
  ThermoParams thermo;
  std::string room_header = "Kitchen";
  std::string room_name = "kitchen";

  const ObjectNode& node(const std::string& id) const;
  ObjectNode& node(const std::string& id);
  bool has(const std::string& id) const { return objects.count(id) != 0; }
};

enum class Predicate {
  Look,
  Inventory,
  Wait,
  Open,
  Close,
  Activate,
  Deactivate,
  PickUp,
  MoveTo,
  PourInto,
};

const char* predicate_name(Predicate p);
int predicate_arity(Predicate p);

struct Action {
  Predicate pred = Predicate::Look;
  std::string arg1;  // object id or empty
  std::string arg2;  // object id or empty
  std::string surface_text;
};

struct Observation {
  std::string obs;
  std::string look;
  std::string inv;
};

// --- Scenario configuration ------------------------------------------------

struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ScenarioNode {
  std::string id;
  std::string name;
  std::string kind;  // validated against kind_from_name
  bool openable = false;
  bool open = false;
  bool activatable = false;
  bool active = false;
  bool portable = false;
  bool on_top = false;
  bool heats = false;
  bool cools = false;
  bool water_source = false;
  double temperature = 20.0;
  std::vector<ScenarioNode> contents;
};

struct ScenarioConfig {
  std::string room_header = "Kitchen";
  std::string room_name = "kitchen";
  ThermoParams thermo;
  std::vector<ScenarioNode> nodes;
};

// The hard-coded default layout (counter+bowl+fruit, freezer, fridge, glass
// jar of sodium chloride, sink with drain, soap, stove, table with glass cup).
ScenarioConfig default_kitchen();

// A room containing only the agent.
ScenarioConfig empty_room();

ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& json_text);
std::string scenario_to_json(const ScenarioConfig& scenario);

// Throws ScenarioError naming the offending node on malformed input.
void validate_scenario(const ScenarioConfig& scenario);

// --- Core operations -------------------------------------------------------

struct ResetResult {
  WorldState state;
  Observation observation;
};

struct StepResult {
  WorldState state;
  Observation observation;
  bool rejected = false;
};

// Deterministic: identical (scenario, seed) pairs produce byte-identical
// observations. The seed is reserved for randomized scenario variants; the
// default layouts ignore it.
ResetResult reset(const ScenarioConfig& scenario, unsigned long long seed);

// Exactly the well-typed actions over currently visible objects, in a fixed
// order (predicate order, then argument ids). Always contains look, inventory
// and wait. Actions are not guaranteed to change the state.
std::vector<Action> valid_actions(const WorldState& state);

// Applies the action effect, then one thermodynamic tick. An ineligible
// action is a no-op with obs "You can't do that." and rejected=true; the
// clock still advances.
StepResult step(const WorldState& state, const Action& action);

WorldState apply_thermodynamics(const WorldState& state);

std::string render_look(const WorldState& state);
std::string render_inv(const WorldState& state);

// Ids of objects reachable from the room root through open containers, plus
// the inventory. Sorted.
std::vector<std::string> visible_objects(const WorldState& state);

bool is_descendant(const WorldState& state, const std::string& maybe_child,
                   const std::string& maybe_ancestor);

// Owned-value convenience wrapper used by the training loop.
class Environment {
 public:
  explicit Environment(ScenarioConfig scenario) : scenario_(std::move(scenario)) {
    validate_scenario(scenario_);
  }

  Observation reset(unsigned long long seed) {
    auto r = ak::reset(scenario_, seed);
    state_ = std::move(r.state);
    return r.observation;
  }

  StepResult step(const Action& action) {
    auto r = ak::step(state_, action);
    state_ = r.state;
    return r;
  }

  std::vector<Action> valid_actions() const { return ak::valid_actions(state_); }
  const WorldState& state() const { return state_; }
  const ScenarioConfig& scenario() const { return scenario_; }

 private:
  ScenarioConfig scenario_;
  WorldState state_;
};

}  // namespace ak
