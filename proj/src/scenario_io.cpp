#include "grove/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "grove/error.hpp"

namespace grove {

using nlohmann::json;

namespace {

json capacity_to_json(double c) { return std::isfinite(c) ? json(c) : json(nullptr); }

double capacity_from_json(const json& j, const std::string& field) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  if (j.is_string() && (j.get<std::string>() == "inf" || j.get<std::string>() == "infinity"))
    return std::numeric_limits<double>::infinity();
  if (!j.is_number()) throw ConfigError(field, "capacity must be a number, null or \"inf\"");
  return j.get<double>();
}

template <typename T>
T get_field(const json& obj, const std::string& key, const std::string& path, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + key, "has the wrong type");
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ConfigError(path + key, "unknown field");
}

Eigen::VectorXd vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw ConfigError(field, "must be an array of numbers");
    v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
  }
  return v;
}

template <typename Matrix>
Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ConfigError(field, "rows must all have the same length");
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number()) throw ConfigError(field, "entries must be numbers");
      m(r, c) = row[static_cast<std::size_t>(c)].get<typename Matrix::Scalar>();
    }
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

template <typename Matrix>
json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

const std::set<std::string> kEnergyKeys = {
    "static_cu_wh",   "static_du_wh",   "dpe_cu_wh",      "dpe_du_wh",     "solar_scale_cu",
    "solar_scale_du", "battery_cu_kwh", "battery_du_kwh", "initial_cu_kwh", "initial_du_kwh",
    "cyclic_battery", "sell_ratio",     "tariff",         "generation_cu", "generation_du"};

EnergyParams energy_from_json(const json& j) {
  reject_unknown(j, kEnergyKeys, "energy.");
  EnergyParams e;
  const std::string p = "energy.";
  e.static_cu_wh = get_field(j, "static_cu_wh", p, e.static_cu_wh);
  e.static_du_wh = get_field(j, "static_du_wh", p, e.static_du_wh);
  e.dpe_cu_wh = get_field(j, "dpe_cu_wh", p, e.dpe_cu_wh);
  e.dpe_du_wh = get_field(j, "dpe_du_wh", p, e.dpe_du_wh);
  e.solar_scale_cu = get_field(j, "solar_scale_cu", p, e.solar_scale_cu);
  e.solar_scale_du = get_field(j, "solar_scale_du", p, e.solar_scale_du);
  e.battery_cu_kwh = get_field(j, "battery_cu_kwh", p, e.battery_cu_kwh);
  e.battery_du_kwh = get_field(j, "battery_du_kwh", p, e.battery_du_kwh);
  e.initial_cu_kwh = get_field(j, "initial_cu_kwh", p, e.initial_cu_kwh);
  e.initial_du_kwh = get_field(j, "initial_du_kwh", p, e.initial_du_kwh);
  e.cyclic_battery = get_field(j, "cyclic_battery", p, e.cyclic_battery);
  e.sell_ratio = get_field(j, "sell_ratio", p, e.sell_ratio);
  if (j.contains("tariff")) e.tariff = vector_from_json(j["tariff"], p + "tariff");
  if (j.contains("generation_cu")) e.generation_cu = vector_from_json(j["generation_cu"], p + "generation_cu");
  if (j.contains("generation_du"))
    e.generation_du = matrix_from_json<Eigen::MatrixXd>(j["generation_du"], p + "generation_du");
  if (e.initial_cu_kwh > e.battery_cu_kwh)
    throw ConfigError("energy.initial_cu_kwh", "initial charge exceeds battery capacity");
  if (e.initial_du_kwh > e.battery_du_kwh)
    throw ConfigError("energy.initial_du_kwh", "initial charge exceeds battery capacity");
  return e;
}

json energy_to_json(const EnergyParams& e) {
  json j;
  j["static_cu_wh"] = e.static_cu_wh;
  j["static_du_wh"] = e.static_du_wh;
  j["dpe_cu_wh"] = e.dpe_cu_wh;
  j["dpe_du_wh"] = e.dpe_du_wh;
  j["solar_scale_cu"] = e.solar_scale_cu;
  j["solar_scale_du"] = e.solar_scale_du;
  j["battery_cu_kwh"] = e.battery_cu_kwh;
  j["battery_du_kwh"] = e.battery_du_kwh;
  j["initial_cu_kwh"] = e.initial_cu_kwh;
  j["initial_du_kwh"] = e.initial_du_kwh;
  j["cyclic_battery"] = e.cyclic_battery;
  j["sell_ratio"] = e.sell_ratio;
  if (e.tariff.size()) j["tariff"] = vector_to_json(e.tariff);
  if (e.generation_cu.size()) j["generation_cu"] = vector_to_json(e.generation_cu);
  if (e.generation_du.size()) j["generation_du"] = matrix_to_json(e.generation_du);
  return j;
}

std::vector<Node> nodes_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("topology.nodes", "must be an array");
  std::vector<Node> nodes;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const json& n = j[k];
    reject_unknown(n, {"id", "kind", "label"}, "topology.nodes.");
    Node node;
    node.id = get_field(n, "id", "topology.nodes.", static_cast<int>(k));
    try {
      node.kind = node_kind_from_string(get_field<std::string>(n, "kind", "topology.nodes.", "Switch"));
    } catch (const InvalidArgument& err) {
      throw ConfigError("topology.nodes.kind", err.what());
    }
    node.label = get_field<std::string>(n, "label", "topology.nodes.", std::string(to_string(node.kind)) + std::to_string(node.id));
    nodes.push_back(node);
  }
  return nodes;
}

const std::set<std::string> kRootKeys = {
    "name",          "seed",          "city",         "month",           "tier",         "topology",
    "rrhs_per_du",   "users_per_rrh", "urf_count",    "dpe_cu",          "dpe_du",       "capacity_cu",
    "capacity_du",   "intervals",     "interval_hours", "strict_delay",  "redraw_delay_per_interval",
    "traffic",       "energy",        "solar_csv",    "solar_day",       "bandwidth_fraction", "link_capacity",
    "users"};

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + err.what());
  }
}

TrafficTier tier_field(const json& root) {
  try {
    return traffic_tier_from_string(get_field<std::string>(root, "tier", "", "medium"));
  } catch (const InvalidArgument& err) {
    throw ConfigError("tier", err.what());
  }
}

}  // namespace

ScenarioConfig config_from_json_text(const std::string& text) {
  const json root = parse_text(text);
  reject_unknown(root, kRootKeys, "");
  ScenarioConfig c;
  c.name = get_field<std::string>(root, "name", "", c.name);
  c.seed = get_field<std::uint64_t>(root, "seed", "", c.seed);
  c.city = get_field<std::string>(root, "city", "", c.city);
  c.month = get_field(root, "month", "", c.month);
  if (c.month < 1 || c.month > 12) throw ConfigError("month", "must be in 1..12");
  c.tier = tier_field(root);
  c.rrhs_per_du = get_field(root, "rrhs_per_du", "", c.rrhs_per_du);
  c.users_per_rrh = get_field(root, "users_per_rrh", "", c.users_per_rrh);
  c.urf_count = get_field(root, "urf_count", "", c.urf_count);
  c.dpe_cu = get_field(root, "dpe_cu", "", c.dpe_cu);
  c.dpe_du = get_field(root, "dpe_du", "", c.dpe_du);
  c.capacity_cu = get_field(root, "capacity_cu", "", c.capacity_cu);
  c.capacity_du = get_field(root, "capacity_du", "", c.capacity_du);
  c.intervals = get_field(root, "intervals", "", c.intervals);
  c.interval_hours = get_field(root, "interval_hours", "", c.interval_hours);
  c.strict_delay = get_field(root, "strict_delay", "", c.strict_delay);
  c.redraw_delay_per_interval = get_field(root, "redraw_delay_per_interval", "", c.redraw_delay_per_interval);
  c.solar_csv = get_field<std::string>(root, "solar_csv", "", c.solar_csv);
  c.solar_day = get_field(root, "solar_day", "", c.solar_day);
  c.bandwidth_fraction = get_field(root, "bandwidth_fraction", "", c.bandwidth_fraction);
  if (root.contains("link_capacity")) c.link_capacity = capacity_from_json(root["link_capacity"], "link_capacity");
  if (c.rrhs_per_du < 1) throw ConfigError("rrhs_per_du", "must be >= 1");
  if (c.users_per_rrh < 1) throw ConfigError("users_per_rrh", "must be >= 1");
  if (c.intervals < 1) throw ConfigError("intervals", "must be >= 1");

  if (root.contains("traffic")) {
    const json& t = root["traffic"];
    reject_unknown(t, {"slope_exponent", "phase_min", "phase_max", "noise_amplitude", "multiplier"}, "traffic.");
    c.traffic.slope_exponent = get_field(t, "slope_exponent", "traffic.", c.traffic.slope_exponent);
    c.traffic.phase_min = get_field(t, "phase_min", "traffic.", c.traffic.phase_min);
    c.traffic.phase_max = get_field(t, "phase_max", "traffic.", c.traffic.phase_max);
    c.traffic.noise_amplitude = get_field(t, "noise_amplitude", "traffic.", c.traffic.noise_amplitude);
    c.traffic.multiplier = get_field(t, "multiplier", "traffic.", c.traffic.multiplier);
    try {
      c.traffic.validate();
    } catch (const InvalidArgument& err) {
      throw ConfigError("traffic", err.what());
    }
  }
  if (root.contains("energy")) c.energy = energy_from_json(root["energy"]);

  if (root.contains("topology")) {
    const json& topo = root["topology"];
    reject_unknown(topo, {"preset", "nodes", "edges"}, "topology.");
    if (topo.contains("preset")) {
      try {
        c.preset = topology_preset_from_string(topo["preset"].get<std::string>());
      } catch (const std::exception& err) {
        throw ConfigError("topology.preset", err.what());
      }
    } else {
      c.preset.reset();
      if (!topo.contains("nodes") || !topo.contains("edges"))
        throw ConfigError("topology", "needs either 'preset' or 'nodes' and 'edges'");
      c.nodes = nodes_from_json(topo["nodes"]);
      for (const json& e : topo["edges"]) {
        if (e.is_array() && e.size() >= 2) {
          c.edges.push_back({e[0].get<int>(), e[1].get<int>(),
                             e.size() > 2 ? capacity_from_json(e[2], "topology.edges") : std::numeric_limits<double>::infinity()});
        } else if (e.is_object()) {
          reject_unknown(e, {"a", "b", "capacity"}, "topology.edges.");
          c.edges.push_back({get_field(e, "a", "topology.edges.", 0), get_field(e, "b", "topology.edges.", 0),
                             e.contains("capacity") ? capacity_from_json(e["capacity"], "topology.edges.capacity")
                                                    : std::numeric_limits<double>::infinity()});
        } else {
          throw ConfigError("topology.edges", "each edge is [a, b] or [a, b, capacity] or an object");
        }
      }
    }
  }
  if (root.contains("users")) throw ConfigError("users", "a materialized scenario is not a generation config");
  return c;
}

std::string config_to_json_text(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["seed"] = c.seed;
  j["city"] = c.city;
  j["month"] = c.month;
  j["tier"] = std::string(to_string(c.tier));
  if (c.preset) {
    j["topology"] = {{"preset", std::string(to_string(*c.preset))}};
  } else {
    json nodes = json::array();
    for (const Node& n : c.nodes) nodes.push_back({{"id", n.id}, {"kind", std::string(to_string(n.kind))}, {"label", n.label}});
    json edges = json::array();
    for (const Edge& e : c.edges) edges.push_back({{"a", e.a}, {"b", e.b}, {"capacity", capacity_to_json(e.capacity)}});
    j["topology"] = {{"nodes", nodes}, {"edges", edges}};
  }
  j["rrhs_per_du"] = c.rrhs_per_du;
  j["users_per_rrh"] = c.users_per_rrh;
  j["urf_count"] = c.urf_count;
  j["dpe_cu"] = c.dpe_cu;
  j["dpe_du"] = c.dpe_du;
  j["capacity_cu"] = c.capacity_cu;
  j["capacity_du"] = c.capacity_du;
  j["intervals"] = c.intervals;
  j["interval_hours"] = c.interval_hours;
  j["strict_delay"] = c.strict_delay;
  j["redraw_delay_per_interval"] = c.redraw_delay_per_interval;
  j["traffic"] = {{"slope_exponent", c.traffic.slope_exponent},
                  {"phase_min", c.traffic.phase_min},
                  {"phase_max", c.traffic.phase_max},
                  {"noise_amplitude", c.traffic.noise_amplitude},
                  {"multiplier", c.traffic.multiplier}};
  j["energy"] = energy_to_json(c.energy);
  if (!c.solar_csv.empty()) {
    j["solar_csv"] = c.solar_csv;
    j["solar_day"] = c.solar_day;
  }
  j["bandwidth_fraction"] = c.bandwidth_fraction;
  if (c.link_capacity) j["link_capacity"] = capacity_to_json(*c.link_capacity);
  return j.dump(2);
}

namespace {

json scenario_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["seed"] = s.seed;
  j["city"] = s.city;
  j["month"] = s.month;
  j["tier"] = std::string(to_string(s.tier));
  json nodes = json::array();
  for (const Node& n : s.topology.nodes())
    nodes.push_back({{"id", n.id}, {"kind", std::string(to_string(n.kind))}, {"label", n.label}});
  json arcs = json::array();
  for (const Arc& a : s.topology.arcs())
    arcs.push_back({{"from", a.from}, {"to", a.to}, {"capacity", capacity_to_json(a.capacity)}});
  j["topology"] = {{"nodes", nodes}, {"arcs", arcs}};
  j["urf_count"] = s.urf_count;
  j["dpe_cu"] = s.dpe_cu;
  j["dpe_du"] = s.dpe_du;
  j["capacity_cu"] = s.capacity_cu;
  j["capacity_du"] = s.capacity_du;
  j["intervals"] = s.intervals;
  j["interval_hours"] = s.interval_hours;
  j["strict_delay"] = s.strict_delay;
  j["energy"] = energy_to_json(s.energy);
  j["users"] = {{"rrh_du", s.users.rrh_du},
                {"user_rrh", s.users.user_rrh},
                {"delay", matrix_to_json(s.users.delay)},
                {"traffic", matrix_to_json(s.users.traffic)}};
  return j;
}

Scenario materialized_from_json(const json& root) {
  reject_unknown(root, {"name", "seed", "city", "month", "tier", "topology", "urf_count", "dpe_cu", "dpe_du",
                        "capacity_cu", "capacity_du", "intervals", "interval_hours", "strict_delay", "energy", "users"},
                 "");
  Scenario s;
  s.name = get_field<std::string>(root, "name", "", s.name);
  s.seed = get_field<std::uint64_t>(root, "seed", "", s.seed);
  s.city = get_field<std::string>(root, "city", "", s.city);
  s.month = get_field(root, "month", "", s.month);
  s.tier = tier_field(root);
  s.urf_count = get_field(root, "urf_count", "", s.urf_count);
  s.dpe_cu = get_field(root, "dpe_cu", "", s.dpe_cu);
  s.dpe_du = get_field(root, "dpe_du", "", s.dpe_du);
  s.capacity_cu = get_field(root, "capacity_cu", "", s.capacity_cu);
  s.capacity_du = get_field(root, "capacity_du", "", s.capacity_du);
  s.intervals = get_field(root, "intervals", "", s.intervals);
  s.interval_hours = get_field(root, "interval_hours", "", s.interval_hours);
  s.strict_delay = get_field(root, "strict_delay", "", s.strict_delay);

  if (!root.contains("topology")) throw ConfigError("topology", "missing");
  const json& topo = root["topology"];
  reject_unknown(topo, {"nodes", "arcs"}, "topology.");
  if (!topo.contains("nodes") || !topo.contains("arcs"))
    throw ConfigError("topology", "materialized scenarios list 'nodes' and 'arcs'");
  std::vector<Arc> arcs;
  for (const json& a : topo["arcs"]) {
    reject_unknown(a, {"from", "to", "capacity"}, "topology.arcs.");
    arcs.push_back({get_field(a, "from", "topology.arcs.", 0), get_field(a, "to", "topology.arcs.", 0),
                    a.contains("capacity") ? capacity_from_json(a["capacity"], "topology.arcs.capacity")
                                           : std::numeric_limits<double>::infinity()});
  }
  try {
    s.topology = NetworkTopology(nodes_from_json(topo["nodes"]), std::move(arcs));
  } catch (const TopologyError& err) {
    throw ConfigError("topology", err.what());
  }

  s.energy = energy_from_json(root.contains("energy") ? root["energy"] : json::object());
  const json& users = root["users"];
  reject_unknown(users, {"rrh_du", "user_rrh", "delay", "traffic"}, "users.");
  try {
    s.users.rrh_du = users.at("rrh_du").get<std::vector<int>>();
    s.users.user_rrh = users.at("user_rrh").get<std::vector<int>>();
  } catch (const json::exception&) {
    throw ConfigError("users", "rrh_du and user_rrh must be integer arrays");
  }
  if (!users.contains("delay")) throw ConfigError("users.delay", "missing");
  if (!users.contains("traffic")) throw ConfigError("users.traffic", "missing");
  s.users.delay = matrix_from_json<Eigen::MatrixXi>(users["delay"], "users.delay");
  s.users.traffic = matrix_from_json<Eigen::MatrixXd>(users["traffic"], "users.traffic");
  s.validate();
  return s;
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
  const json root = parse_text(text);
  if (root.is_object() && root.contains("users")) return materialized_from_json(root);
  return generate_scenario(config_from_json_text(text));
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return scenario_from_json_text(buffer.str());
}

std::string scenario_to_json_text(const Scenario& scenario) { return scenario_json(scenario).dump(1); }

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file " + path.string());
  out << scenario_to_json_text(scenario) << '\n';
  if (!out) throw IoError("failed writing scenario file " + path.string());
}

std::uint64_t scenario_hash(const Scenario& scenario) {
  const std::string text = scenario_json(scenario).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace grove
