#include "autokitchen/world.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ak {

namespace {

using nlohmann::json;

const char* kVowels = "aeiou";

std::string article(const std::string& name) {
  if (!name.empty() && std::string(kVowels).find(name[0]) != std::string::npos)
    return "an";
  return "a";
}

bool is_water_name(const std::string& n) { return n == "water"; }

}  // namespace

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Container: return "container";
    case Kind::Device: return "device";
    case Kind::Substance: return "substance";
    case Kind::Surface: return "surface";
    case Kind::Agent: return "agent";
    case Kind::Fixture: return "fixture";
  }
  return "container";
}

Kind kind_from_name(const std::string& s) {
  if (s == "container") return Kind::Container;
  if (s == "device") return Kind::Device;
  if (s == "substance") return Kind::Substance;
  if (s == "surface") return Kind::Surface;
  if (s == "agent") return Kind::Agent;
  if (s == "fixture") return Kind::Fixture;
  throw ScenarioError("unknown kind '" + s + "'");
}

const char* predicate_name(Predicate p) {
  switch (p) {
    case Predicate::Look: return "look";
    case Predicate::Inventory: return "inventory";
    case Predicate::Wait: return "wait";
    case Predicate::Open: return "open";
    case Predicate::Close: return "close";
    case Predicate::Activate: return "activate";
    case Predicate::Deactivate: return "deactivate";
    case Predicate::PickUp: return "pick up";
    case Predicate::MoveTo: return "move";
    case Predicate::PourInto: return "pour";
  }
  return "look";
}

int predicate_arity(Predicate p) {
  switch (p) {
    case Predicate::Look:
    case Predicate::Inventory:
    case Predicate::Wait:
      return 0;
    case Predicate::Open:
    case Predicate::Close:
    case Predicate::Activate:
    case Predicate::Deactivate:
    case Predicate::PickUp:
      return 1;
    case Predicate::MoveTo:
    case Predicate::PourInto:
      return 2;
  }
  return 0;
}

const ObjectNode& WorldState::node(const std::string& id) const {
  auto it = objects.find(id);
  if (it == objects.end()) throw std::out_of_range("no such object: " + id);
  return it->second;
}

ObjectNode& WorldState::node(const std::string& id) {
  auto it = objects.find(id);
  if (it == objects.end()) throw std::out_of_range("no such object: " + id);
  return it->second;
}

// --- Scenarios --------------------------------------------------------------

ScenarioConfig default_kitchen() {
  ScenarioConfig sc;
  sc.room_header = "Kitchen";
  sc.room_name = "kitchen";

  auto sub = [](const std::string& id, const std::string& name) {
    ScenarioNode n;
    n.id = id;
    n.name = name;
    n.kind = "substance";
    return n;
  };
  auto item = [](const std::string& id, const std::string& name) {
    ScenarioNode n;
    n.id = id;
    n.name = name;
    n.kind = "container";
    n.portable = true;
    return n;
  };

  ScenarioNode agent;
  agent.id = "agent";
  agent.name = "agent";
  agent.kind = "agent";
  ScenarioNode held_orange = item("orange_held", "orange");
  agent.contents.push_back(held_orange);

  ScenarioNode air = sub("air", "air");

  ScenarioNode counter;
  counter.id = "counter";
  counter.name = "counter";
  counter.kind = "surface";
  counter.on_top = true;
  ScenarioNode bowl = item("bowl", "bowl");
  bowl.contents.push_back(item("apple", "red apple"));
  bowl.contents.push_back(item("banana", "banana"));
  bowl.contents.push_back(item("orange", "orange"));
  bowl.contents.push_back(item("potato", "potato"));
  counter.contents.push_back(bowl);

  ScenarioNode freezer;
  freezer.id = "freezer";
  freezer.name = "freezer";
  freezer.kind = "container";
  freezer.openable = true;
  freezer.cools = true;

  ScenarioNode fridge;
  fridge.id = "fridge";
  fridge.name = "fridge";
  fridge.kind = "container";
  fridge.openable = true;

  ScenarioNode jar = item("glass_jar", "glass jar");
  jar.contents.push_back(sub("sodium_chloride", "sodium chloride"));

  ScenarioNode sink;
  sink.id = "sink";
  sink.name = "sink";
  sink.kind = "device";
  sink.activatable = true;
  sink.water_source = true;
  ScenarioNode drain;
  drain.id = "drain";
  drain.name = "drain";
  drain.kind = "fixture";
  drain.openable = true;
  drain.open = true;
  sink.contents.push_back(drain);

  ScenarioNode soap = sub("soap", "soap");

  ScenarioNode stove;
  stove.id = "stove";
  stove.name = "stove";
  stove.kind = "device";
  stove.activatable = true;
  stove.on_top = true;
  stove.heats = true;

  ScenarioNode table;
  table.id = "table";
  table.name = "table";
  table.kind = "surface";
  table.on_top = true;
  table.contents.push_back(item("glass_cup", "glass cup"));

  // Loose kitchen utensils. They are portable fixtures: they can be picked up
  // and moved anywhere but hold nothing, are never filled by the sink, and
  // have no temperature, so they widen the action space without adding any
  // route to water.
  auto utensil = [](const std::string& id, const std::string& name) {
    ScenarioNode n;
    n.id = id;
    n.name = name;
    n.kind = "fixture";
    n.portable = true;
    return n;
  };
  std::vector<ScenarioNode> utensils = {
      utensil("fork", "fork"),         utensil("spoon", "spoon"),
      utensil("knife", "knife"),       utensil("plate", "plate"),
      utensil("ladle", "ladle"),       utensil("spatula", "spatula"),
      utensil("whisk", "whisk"),       utensil("tongs", "pair of tongs"),
      utensil("grater", "grater"),     utensil("peeler", "peeler"),
      utensil("strainer", "strainer"), utensil("masher", "masher"),
      utensil("skewer", "skewer"),     utensil("trivet", "trivet"),
      utensil("scoop", "scoop"),       utensil("chopstick", "chopstick"),
  };

  sc.nodes = {agent, air, counter, freezer, fridge, jar, sink, soap, stove, table};
  for (auto& u : utensils) sc.nodes.push_back(std::move(u));
  return sc;
}

ScenarioConfig empty_room() {
  ScenarioConfig sc;
  sc.room_header = "Kitchen";
  sc.room_name = "kitchen";
  ScenarioNode agent;
  agent.id = "agent";
  agent.name = "agent";
  agent.kind = "agent";
  sc.nodes = {agent};
  return sc;
}

namespace {

ScenarioNode scenario_node_from_json(const json& j) {
  ScenarioNode n;
  n.id = j.at("id").get<std::string>();
  n.name = j.value("name", n.id);
  n.kind = j.at("kind").get<std::string>();
  n.openable = j.value("openable", false);
  n.open = j.value("open", false);
  n.activatable = j.value("activatable", false);
  n.active = j.value("active", false);
  n.portable = j.value("portable", false);
  n.on_top = j.value("on_top", false);
  n.heats = j.value("heats", false);
  n.cools = j.value("cools", false);
  n.water_source = j.value("water_source", false);
  n.temperature = j.value("temperature", 20.0);
  for (const auto& c : j.value("contents", json::array()))
    n.contents.push_back(scenario_node_from_json(c));
  return n;
}

json scenario_node_to_json(const ScenarioNode& n) {
  json j;
  j["id"] = n.id;
  j["name"] = n.name;
  j["kind"] = n.kind;
  if (n.openable) j["openable"] = true;
  if (n.open) j["open"] = true;
  if (n.activatable) j["activatable"] = true;
  if (n.active) j["active"] = true;
  if (n.portable) j["portable"] = true;
  if (n.on_top) j["on_top"] = true;
  if (n.heats) j["heats"] = true;
  if (n.cools) j["cools"] = true;
  if (n.water_source) j["water_source"] = true;
  if (n.temperature != 20.0) j["temperature"] = n.temperature;
  if (!n.contents.empty()) {
    json arr = json::array();
    for (const auto& c : n.contents) arr.push_back(scenario_node_to_json(c));
    j["contents"] = arr;
  }
  return j;
}

void validate_node(const ScenarioNode& n, std::set<std::string>& ids,
                   int depth) {
  if (n.id.empty()) throw ScenarioError("scenario node with empty id");
  if (!ids.insert(n.id).second)
    throw ScenarioError("duplicate scenario node id '" + n.id + "'");
  Kind k;
  try {
    k = kind_from_name(n.kind);
  } catch (const ScenarioError&) {
    throw ScenarioError("node '" + n.id + "' has unknown kind '" + n.kind + "'");
  }
  if (n.open && !n.openable)
    throw ScenarioError("node '" + n.id + "' is open but not openable");
  if (n.active && !n.activatable)
    throw ScenarioError("node '" + n.id + "' is active but not activatable");
  if (k == Kind::Substance && !n.contents.empty())
    throw ScenarioError("substance node '" + n.id + "' has contents");
  if (depth > 64)
    throw ScenarioError("containment too deep at node '" + n.id +
                        "' (cyclic containment?)");
  for (const auto& c : n.contents) validate_node(c, ids, depth + 1);
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& json_text) {
  json j = json::parse(json_text);
  ScenarioConfig sc;
  sc.room_header = j.value("room_header", "Kitchen");
  sc.room_name = j.value("room_name", "kitchen");
  sc.thermo.heat = j.value("dt_heat", 25.0);
  sc.thermo.cool = j.value("dt_cool", 25.0);
  sc.thermo.relax = j.value("dt_relax", 5.0);
  sc.thermo.ambient = j.value("ambient", 20.0);
  for (const auto& n : j.at("nodes")) sc.nodes.push_back(scenario_node_from_json(n));
  return sc;
}

std::string scenario_to_json(const ScenarioConfig& sc) {
  json j;
  j["room_header"] = sc.room_header;
  j["room_name"] = sc.room_name;
  j["dt_heat"] = sc.thermo.heat;
  j["dt_cool"] = sc.thermo.cool;
  j["dt_relax"] = sc.thermo.relax;
  j["ambient"] = sc.thermo.ambient;
  json arr = json::array();
  for (const auto& n : sc.nodes) arr.push_back(scenario_node_to_json(n));
  j["nodes"] = arr;
  return j.dump(2);
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

void validate_scenario(const ScenarioConfig& sc) {
  std::set<std::string> ids;
  int agents = 0;
  for (const auto& n : sc.nodes) {
    validate_node(n, ids, 0);
    if (kind_from_name(n.kind) == Kind::Agent) ++agents;
  }
  if (agents != 1)
    throw ScenarioError("scenario must have exactly one top-level agent node");
}

// --- Reset ------------------------------------------------------------------

namespace {

void instantiate(const ScenarioNode& sn, const std::string& parent,
                 WorldState& ws) {
  ObjectNode o;
  o.id = sn.id;
  o.name = sn.name;
  o.kind = kind_from_name(sn.kind);
  o.openable = sn.openable;
  o.is_open = sn.open;
  o.activatable = sn.activatable;
  o.is_active = sn.active;
  o.portable = sn.portable;
  o.on_top = sn.on_top;
  o.heats = sn.heats;
  o.cools = sn.cools;
  o.water_source = sn.water_source;
  o.temperature = sn.temperature;
  o.parent = parent;
  ws.objects[o.id] = o;
  ws.node(parent).contents.push_back(o.id);
  if (o.kind == Kind::Agent) ws.agent_id = o.id;
  for (const auto& c : sn.contents) instantiate(c, sn.id, ws);
}

}  // namespace

ResetResult reset(const ScenarioConfig& scenario, unsigned long long /*seed*/) {
  validate_scenario(scenario);
  WorldState ws;
  ws.thermo = scenario.thermo;
  ws.room_header = scenario.room_header;
  ws.room_name = scenario.room_name;
  ws.room_root = "room";
  ObjectNode room;
  room.id = "room";
  room.name = scenario.room_name;
  room.kind = Kind::Fixture;
  ws.objects[room.id] = room;
  for (const auto& n : scenario.nodes) instantiate(n, "room", ws);

  Observation obs;
  obs.look = render_look(ws);
  obs.inv = render_inv(ws);
  obs.obs = obs.look;
  return {std::move(ws), std::move(obs)};
}

// --- Rendering --------------------------------------------------------------

namespace {

std::vector<std::string> display_contents(const WorldState& ws,
                                          const std::string& id) {
  std::vector<std::string> out;
  for (const auto& cid : ws.node(id).contents) {
    // Non-portable fixtures (the drain) render as a trailing suffix instead.
    const ObjectNode& c = ws.node(cid);
    if (c.kind == Kind::Fixture && !c.portable) continue;
    out.push_back(cid);
  }
  return out;
}

std::string render_element(const WorldState& ws, const std::string& id);

std::string render_content_list(const WorldState& ws,
                                const std::vector<std::string>& ids) {
  if (ids.empty()) return "nothing";
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    out += render_element(ws, ids[i]);
  }
  return out;
}

// Inline form used inside content lists and for bare containers.
std::string render_element(const WorldState& ws, const std::string& id) {
  const ObjectNode& o = ws.node(id);
  switch (o.kind) {
    case Kind::Agent:
      return "the agent";
    case Kind::Substance:
      return "a substance called " + o.name;
    case Kind::Container:
      if (o.openable && !o.is_open)
        return article(o.name) + " " + o.name + ". The " + o.name +
               " door is closed.";
      return article(o.name) + " " + o.name + " (containing " +
             render_content_list(ws, display_contents(ws, id)) + ")";
    default:
      return article(o.name) + " " + o.name;
  }
}

std::string fixture_suffix(const WorldState& ws, const std::string& id) {
  std::string out;
  for (const auto& cid : ws.node(id).contents) {
    const ObjectNode& c = ws.node(cid);
    if (c.kind != Kind::Fixture || !c.openable) continue;
    out += " The " + c.name + " is " + (c.is_open ? "open" : "closed") + ".";
  }
  return out;
}

std::string render_top_level(const WorldState& ws, const std::string& id) {
  const ObjectNode& o = ws.node(id);
  switch (o.kind) {
    case Kind::Agent:
      return "the agent";
    case Kind::Substance:
      return "a substance called " + o.name;
    case Kind::Device: {
      std::string prep = o.on_top ? "On" : "In";
      return article(o.name) + " " + o.name + ", which is turned " +
             (o.is_active ? "on" : "off") + ". " + prep + " the " + o.name +
             " is: " + render_content_list(ws, display_contents(ws, id)) + "." +
             fixture_suffix(ws, id);
    }
    case Kind::Surface:
      return article(o.name) + " " + o.name + ". On the " + o.name +
             " is: " + render_content_list(ws, display_contents(ws, id)) + "." +
             fixture_suffix(ws, id);
    case Kind::Container:
      if (o.openable) {
        if (!o.is_open)
          return article(o.name) + " " + o.name + ". The " + o.name +
                 " door is closed.";
        return article(o.name) + " " + o.name + ". The " + o.name +
               " door is open. In the " + o.name + " is: " +
               render_content_list(ws, display_contents(ws, id)) + "." +
               fixture_suffix(ws, id);
      }
      return render_element(ws, id);
    case Kind::Fixture:
      if (o.openable)
        return article(o.name) + " " + o.name + ", which is " +
               (o.is_open ? "open" : "closed") + ".";
      return article(o.name) + " " + o.name;
  }
  return o.name;
}

}  // namespace

std::string render_look(const WorldState& ws) {
  std::string out = ws.room_header + "\nThis room is called the " +
                    ws.room_name + ". In it, you see:";
  for (const auto& cid : ws.node(ws.room_root).contents) {
    out += "\n    " + render_top_level(ws, cid);
  }
  return out;
}

std::string render_inv(const WorldState& ws) {
  std::string out = "In your inventory, you see:";
  const auto items = display_contents(ws, ws.agent_id);
  if (items.empty()) {
    out += "\n    nothing.";
    return out;
  }
  for (const auto& cid : items) out += "\n    " + render_element(ws, cid) + ".";
  return out;
}

// --- Visibility and action enumeration --------------------------------------

namespace {

bool contents_visible(const ObjectNode& o) {
  switch (o.kind) {
    case Kind::Container:
      return !o.openable || o.is_open;
    case Kind::Substance:
      return false;
    default:
      return true;  // surfaces, devices, the room, the agent's inventory
  }
}

void collect_visible(const WorldState& ws, const std::string& id,
                     std::vector<std::string>& out) {
  for (const auto& cid : ws.node(id).contents) {
    out.push_back(cid);
    if (contents_visible(ws.node(cid))) collect_visible(ws, cid, out);
  }
}

bool is_receptacle(const ObjectNode& o) {
  return o.kind == Kind::Container || o.kind == Kind::Surface ||
         o.kind == Kind::Device;
}

bool accepts_contents(const ObjectNode& o) {
  return is_receptacle(o) && (!o.openable || o.is_open);
}

bool has_pourable_contents(const WorldState& ws, const ObjectNode& o) {
  for (const auto& cid : o.contents) {
    const ObjectNode& c = ws.node(cid);
    if (c.kind != Kind::Fixture || c.portable) return true;
  }
  return false;
}

Action make_action(const WorldState& ws, Predicate p, const std::string& a1 = "",
                   const std::string& a2 = "") {
  Action a;
  a.pred = p;
  a.arg1 = a1;
  a.arg2 = a2;
  switch (predicate_arity(p)) {
    case 0:
      a.surface_text = predicate_name(p);
      break;
    case 1:
      a.surface_text = std::string(predicate_name(p)) + " " + ws.node(a1).name;
      break;
    case 2:
      if (p == Predicate::PourInto)
        a.surface_text = "pour " + ws.node(a1).name + " into " + ws.node(a2).name;
      else
        a.surface_text = "move " + ws.node(a1).name + " to " + ws.node(a2).name;
      break;
  }
  return a;
}

}  // namespace

std::vector<std::string> visible_objects(const WorldState& ws) {
  std::vector<std::string> out;
  collect_visible(ws, ws.room_root, out);
  std::sort(out.begin(), out.end());
  return out;
}

bool is_descendant(const WorldState& ws, const std::string& maybe_child,
                   const std::string& maybe_ancestor) {
  std::string cur = ws.node(maybe_child).parent;
  while (!cur.empty()) {
    if (cur == maybe_ancestor) return true;
    cur = ws.node(cur).parent;
  }
  return false;
}

std::vector<Action> valid_actions(const WorldState& ws) {
  std::vector<Action> out;
  const auto vis = visible_objects(ws);

  out.push_back(make_action(ws, Predicate::Look));
  out.push_back(make_action(ws, Predicate::Inventory));
  out.push_back(make_action(ws, Predicate::Wait));

  for (const auto& id : vis) {
    const ObjectNode& o = ws.node(id);
    if (o.openable && !o.is_open) out.push_back(make_action(ws, Predicate::Open, id));
  }
  for (const auto& id : vis) {
    const ObjectNode& o = ws.node(id);
    if (o.openable && o.is_open) out.push_back(make_action(ws, Predicate::Close, id));
  }
  for (const auto& id : vis) {
    const ObjectNode& o = ws.node(id);
    if (o.activatable && !o.is_active)
      out.push_back(make_action(ws, Predicate::Activate, id));
  }
  for (const auto& id : vis) {
    const ObjectNode& o = ws.node(id);
    if (o.activatable && o.is_active)
      out.push_back(make_action(ws, Predicate::Deactivate, id));
  }
  for (const auto& id : vis) {
    const ObjectNode& o = ws.node(id);
    if (o.portable && o.contents.empty() && o.parent != ws.agent_id)
      out.push_back(make_action(ws, Predicate::PickUp, id));
  }
  for (const auto& src : vis) {
    const ObjectNode& s = ws.node(src);
    // Containers must be emptied before they can be carried around; pouring
    // is the only way to transport their contents.
    if (!s.portable || !s.contents.empty()) continue;
    for (const auto& dst : vis) {
      if (dst == src) continue;
      const ObjectNode& d = ws.node(dst);
      if (!accepts_contents(d)) continue;
      if (is_descendant(ws, dst, src)) continue;
      out.push_back(make_action(ws, Predicate::MoveTo, src, dst));
    }
  }
  for (const auto& src : vis) {
    const ObjectNode& s = ws.node(src);
    if (s.kind != Kind::Container || !s.portable) continue;
    if (!has_pourable_contents(ws, s)) continue;
    for (const auto& dst : vis) {
      if (dst == src) continue;
      const ObjectNode& d = ws.node(dst);
      // Pouring only works into another container, never onto a surface or a
      // device.
      if (d.kind != Kind::Container || !accepts_contents(d)) continue;
      if (is_descendant(ws, dst, src)) continue;
      out.push_back(make_action(ws, Predicate::PourInto, src, dst));
    }
  }
  return out;
}

// --- Stepping ---------------------------------------------------------------

namespace {

void detach(WorldState& ws, const std::string& id) {
  ObjectNode& o = ws.node(id);
  if (o.parent.empty()) return;
  auto& siblings = ws.node(o.parent).contents;
  siblings.erase(std::remove(siblings.begin(), siblings.end(), id),
                 siblings.end());
  o.parent.clear();
}

void attach(WorldState& ws, const std::string& id, const std::string& parent) {
  detach(ws, id);
  ws.node(id).parent = parent;
  ws.node(parent).contents.push_back(id);
}

bool visible(const WorldState& ws, const std::string& id) {
  if (!ws.has(id)) return false;
  std::string cur = ws.node(id).parent;
  while (!cur.empty()) {
    if (cur == ws.room_root) return true;
    const ObjectNode& p = ws.node(cur);
    if (!contents_visible(p)) return false;
    cur = p.parent;
  }
  return false;
}

// Returns empty string on success, otherwise the action is rejected.
std::string apply_effect(WorldState& ws, const Action& a, std::string& obs) {
  switch (a.pred) {
    case Predicate::Look:
      obs = render_look(ws);
      return "";
    case Predicate::Inventory:
      obs = render_inv(ws);
      return "";
    case Predicate::Wait:
      obs = "You decide to wait.";
      return "";
    case Predicate::Open: {
      if (!visible(ws, a.arg1)) return "not visible";
      ObjectNode& o = ws.node(a.arg1);
      if (!o.openable || o.is_open) return "not openable/closed";
      o.is_open = true;
      obs = "The " + o.name + " is now open.";
      return "";
    }
    case Predicate::Close: {
      if (!visible(ws, a.arg1)) return "not visible";
      ObjectNode& o = ws.node(a.arg1);
      if (!o.openable || !o.is_open) return "not open";
      o.is_open = false;
      obs = "The " + o.name + " is now closed.";
      return "";
    }
    case Predicate::Activate: {
      if (!visible(ws, a.arg1)) return "not visible";
      ObjectNode& o = ws.node(a.arg1);
      if (!o.activatable || o.is_active) return "not activatable/off";
      o.is_active = true;
      obs = "The " + o.name + " is now activated.";
      return "";
    }
    case Predicate::Deactivate: {
      if (!visible(ws, a.arg1)) return "not visible";
      ObjectNode& o = ws.node(a.arg1);
      if (!o.activatable || !o.is_active) return "not active";
      o.is_active = false;
      obs = "The " + o.name + " is now deactivated.";
      return "";
    }
    case Predicate::PickUp: {
      if (!visible(ws, a.arg1)) return "not visible";
      ObjectNode& o = ws.node(a.arg1);
      if (!o.portable || o.parent == ws.agent_id) return "not portable/held";
      if (!o.contents.empty()) return "not empty";
      attach(ws, a.arg1, ws.agent_id);
      obs = "You move the " + o.name + " to the inventory.";
      return "";
    }
    case Predicate::MoveTo: {
      if (!visible(ws, a.arg1) || !visible(ws, a.arg2)) return "not visible";
      if (a.arg1 == a.arg2) return "self move";
      ObjectNode& s = ws.node(a.arg1);
      const ObjectNode& d = ws.node(a.arg2);
      if (!s.portable || !accepts_contents(d)) return "bad move";
      if (!s.contents.empty()) return "not empty";
      if (is_descendant(ws, a.arg2, a.arg1)) return "cyclic move";
      attach(ws, a.arg1, a.arg2);
      obs = "You move the " + s.name + " to the " + d.name + ".";
      return "";
    }
    case Predicate::PourInto: {
      if (!visible(ws, a.arg1) || !visible(ws, a.arg2)) return "not visible";
      if (a.arg1 == a.arg2) return "self pour";
      ObjectNode& s = ws.node(a.arg1);
      const ObjectNode& d = ws.node(a.arg2);
      if (s.kind != Kind::Container || !s.portable) return "not a container";
      if (d.kind != Kind::Container || !accepts_contents(d)) return "bad target";
      if (is_descendant(ws, a.arg2, a.arg1)) return "cyclic pour";
      if (!has_pourable_contents(ws, s)) return "empty";
      std::vector<std::string> moved;
      for (const auto& cid : s.contents) {
        const ObjectNode& c = ws.node(cid);
        if (c.kind != Kind::Fixture || c.portable) moved.push_back(cid);
      }
      for (const auto& cid : moved) attach(ws, cid, a.arg2);
      obs = "You pour the contents of the " + s.name + " into the " + d.name + ".";
      return "";
    }
  }
  return "unknown";
}

bool has_direct_water(const WorldState& ws, const std::string& id) {
  for (const auto& cid : ws.node(id).contents) {
    const ObjectNode& c = ws.node(cid);
    if (c.kind == Kind::Substance && is_water_name(c.name)) return true;
  }
  return false;
}

void add_water(WorldState& ws, const std::string& parent) {
  ObjectNode w;
  w.id = "water#" + std::to_string(ws.next_fresh++);
  w.name = "water";
  w.kind = Kind::Substance;
  w.temperature = ws.thermo.ambient;
  w.parent = parent;
  ws.objects[w.id] = w;
  ws.node(parent).contents.push_back(w.id);
}

// A heater acts while activated; a cooler (the freezer) acts while its door
// is closed.
bool heater_active(const ObjectNode& o) { return o.heats && o.is_active; }
bool cooler_active(const ObjectNode& o) {
  return o.cools && (o.openable ? !o.is_open : o.is_active);
}

}  // namespace

WorldState apply_thermodynamics(const WorldState& in) {
  WorldState ws = in;
  const ThermoParams& tp = ws.thermo;

  // Temperature update. Only substances and containers carry temperature.
  // Collect first so that the order of map iteration cannot matter.
  std::vector<std::string> ids;
  for (const auto& [id, o] : ws.objects)
    if (o.kind == Kind::Substance || o.kind == Kind::Container) ids.push_back(id);

  for (const auto& id : ids) {
    bool heated = false, cooled = false;
    std::string cur = ws.node(id).parent;
    while (!cur.empty()) {
      const ObjectNode& p = ws.node(cur);
      if (heater_active(p)) heated = true;
      if (cooler_active(p)) cooled = true;
      cur = p.parent;
    }
    ObjectNode& o = ws.node(id);
    if (heated) {
      o.temperature += tp.heat;
    } else if (cooled) {
      o.temperature -= tp.cool;
    } else {
      double d = tp.ambient - o.temperature;
      if (d > tp.relax) d = tp.relax;
      if (d < -tp.relax) d = -tp.relax;
      o.temperature += d;
    }
  }

  // Phase transitions.
  for (const auto& id : ids) {
    ObjectNode& o = ws.node(id);
    if (o.kind != Kind::Substance) continue;
    if (o.name == "water") {
      if (o.temperature >= 100.0)
        o.name = "steam";
      else if (o.temperature <= 0.0)
        o.name = "ice";
    } else if (o.name == "ice") {
      if (o.temperature > 0.0) o.name = "water";
    } else if (o.name == "steam") {
      if (o.temperature < 100.0) o.name = "water";
    }
  }

  // Basin drainage: water lying directly in a water source's basin runs out
  // through an open drain.
  std::vector<std::string> basins;
  for (const auto& [id, o] : ws.objects)
    if (o.water_source) basins.push_back(id);
  for (const auto& bid : basins) {
    bool drain_open = false;
    for (const auto& cid : ws.node(bid).contents) {
      const ObjectNode& c = ws.node(cid);
      if (c.kind == Kind::Fixture && c.openable && c.is_open) drain_open = true;
    }
    if (!drain_open) continue;
    std::vector<std::string> drained;
    for (const auto& cid : ws.node(bid).contents) {
      const ObjectNode& c = ws.node(cid);
      if (c.kind == Kind::Substance && c.name == "water") drained.push_back(cid);
    }
    for (const auto& cid : drained) {
      detach(ws, cid);
      ws.objects.erase(cid);
    }
  }

  // Sink filling: an activated water source fills open containers placed in
  // its basin; with the drain closed it also fills the basin itself.
  std::vector<std::string> sources;
  for (const auto& [id, o] : ws.objects)
    if (o.water_source && o.is_active) sources.push_back(id);

  for (const auto& sid : sources) {
    std::vector<std::string> basin = ws.node(sid).contents;  // copy: we mutate
    for (const auto& cid : basin) {
      const ObjectNode& c = ws.node(cid);
      if (c.kind != Kind::Container) continue;
      if (c.openable && !c.is_open) continue;
      if (!has_direct_water(ws, cid)) add_water(ws, cid);
    }
    bool drain_closed = false;
    for (const auto& cid : ws.node(sid).contents) {
      const ObjectNode& c = ws.node(cid);
      if (c.kind == Kind::Fixture && c.openable && !c.is_open) drain_closed = true;
    }
    if (drain_closed && !has_direct_water(ws, sid)) add_water(ws, sid);
  }

  ws.tick += 1;
  return ws;
}

StepResult step(const WorldState& state, const Action& action) {
  StepResult r;
  r.state = state;
  std::string obs;
  std::string err = apply_effect(r.state, action, obs);
  if (!err.empty()) {
    r.rejected = true;
    obs = "You can't do that.";
  }
  r.state = apply_thermodynamics(r.state);
  r.observation.obs = obs;
  r.observation.look = render_look(r.state);
  r.observation.inv = render_inv(r.state);
  return r;
}

}  // namespace ak
