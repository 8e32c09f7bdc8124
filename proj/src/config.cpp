#include "regor/config.hpp"

#include "regor/errors.hpp"
#include "regor/io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <initializer_list>

namespace regor {

using nlohmann::json;

StageSelection parse_stage_selection(std::string_view name) {
  if (name == "local_only") return StageSelection::kLocalOnly;
  if (name == "global_only") return StageSelection::kGlobalOnly;
  if (name == "both") return StageSelection::kBoth;
  throw InvalidConfig("unknown stages value '" + std::string(name) + "' (expected local_only|global_only|both)");
}

std::string_view to_string(StageSelection s) {
  switch (s) {
    case StageSelection::kLocalOnly: return "local_only";
    case StageSelection::kGlobalOnly: return "global_only";
    case StageSelection::kBoth: return "both";
  }
  return "both";
}

namespace {

bool parse_on_off(std::string_view v) {
  if (v == "on") return true;
  if (v == "off") return false;
  throw InvalidConfig("expected on|off, got '" + std::string(v) + "'");
}

void only_keys(const json& obj, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw InvalidConfig(std::string(section) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw InvalidConfig("unknown config key '" + std::string(section) + "." + key + "'");
  }
}

template <typename T>
void read(const json& obj, std::string_view section, const char* key, T& out) {
  if (!obj.contains(key)) return;
  const auto& v = obj.at(key);
  const std::string where = std::string(section) + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw InvalidConfig(where + " must be a boolean");
    out = v.get<bool>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw InvalidConfig(where + " must be a number");
    out = v.get<double>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw InvalidConfig(where + " must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_unsigned()) {
        out = static_cast<T>(v.get<std::uint64_t>());
      } else {
        throw InvalidConfig(where + " must be non-negative");
      }
    } else {
      out = static_cast<T>(v.get<std::int64_t>());
    }
  } else {
    if (!v.is_string()) throw InvalidConfig(where + " must be a string");
    out = v.get<std::string>();
  }
}

}  // namespace

PipelineOptions RunConfig::pipeline_options() const {
  PipelineOptions o;
  o.matching = matching;
  o.consistency = consistency;
  o.local_correction = stages != StageSelection::kGlobalOnly;
  o.global_correction = stages != StageSelection::kLocalOnly;
  o.progressive = progressive;
  return o;
}

void RunConfig::validate() const {
  schedule.validate();
  refinement.validate();
  if (!(thresholds.rotation_deg > 0.0) || !(thresholds.translation > 0.0)) {
    throw InvalidConfig("metric thresholds must be positive");
  }
  if (!(inlier_tolerance > 0.0)) throw InvalidConfig("metrics.inlier_tolerance must be positive");
  if (!(descriptor_radius > 0.0) || !std::isfinite(descriptor_radius)) {
    throw InvalidConfig("descriptor.support_radius must be positive");
  }
}

void RunConfig::apply_ablation(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw InvalidConfig("ablation must be key=value, got '" + std::string(assignment) + "'");
  const auto key = assignment.substr(0, eq);
  const auto value = assignment.substr(eq + 1);
  if (key == "matching") {
    matching = parse_matching_mode(value);
  } else if (key == "consistency") {
    consistency = parse_local_consistency(value);
  } else if (key == "stages") {
    stages = parse_stage_selection(value);
  } else if (key == "progressive") {
    progressive = parse_on_off(value);
  } else {
    throw InvalidConfig("unknown ablation key '" + std::string(key) + "'");
  }
}

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  RunConfig c;
  only_keys(root, "config",
            {"schedule", "consistency", "refinement", "metrics", "descriptor", "rng_seed", "bootstrap", "ablation"});
  if (root.contains("schedule")) {
    const auto& s = root["schedule"];
    only_keys(s, "schedule", {"k0", "r0", "s0", "omega_k", "omega_r", "omega_s", "iterations", "k_gmm", "s_min",
                              "min_region_points", "global_cap", "top_fraction"});
    auto& d = c.schedule;
    read(s, "schedule", "k0", d.k0);
    read(s, "schedule", "r0", d.r0);
    read(s, "schedule", "s0", d.s0);
    read(s, "schedule", "omega_k", d.omega_k);
    read(s, "schedule", "omega_r", d.omega_r);
    read(s, "schedule", "omega_s", d.omega_s);
    read(s, "schedule", "iterations", d.iterations);
    read(s, "schedule", "k_gmm", d.k_gmm);
    read(s, "schedule", "s_min", d.s_min);
    read(s, "schedule", "min_region_points", d.min_region_points);
    read(s, "schedule", "global_cap", d.global_cap);
    read(s, "schedule", "top_fraction", d.top_fraction);
  }
  if (root.contains("consistency")) {
    const auto& s = root["consistency"];
    only_keys(s, "consistency", {"sigma", "sigma_d", "a"});
    read(s, "consistency", "sigma", c.schedule.params.sigma);
    read(s, "consistency", "sigma_d", c.schedule.params.sigma_d);
    read(s, "consistency", "a", c.schedule.params.a);
  }
  if (root.contains("refinement")) {
    const auto& s = root["refinement"];
    only_keys(s, "refinement", {"enabled", "sigma_d", "max_rounds", "convergence_eps"});
    read(s, "refinement", "enabled", c.refine);
    read(s, "refinement", "sigma_d", c.refinement.sigma_d);
    read(s, "refinement", "max_rounds", c.refinement.max_rounds);
    read(s, "refinement", "convergence_eps", c.refinement.convergence_eps);
  }
  if (root.contains("metrics")) {
    const auto& s = root["metrics"];
    only_keys(s, "metrics", {"rotation_deg", "translation", "inlier_tolerance"});
    read(s, "metrics", "rotation_deg", c.thresholds.rotation_deg);
    read(s, "metrics", "translation", c.thresholds.translation);
    read(s, "metrics", "inlier_tolerance", c.inlier_tolerance);
  }
  if (root.contains("descriptor")) {
    const auto& s = root["descriptor"];
    only_keys(s, "descriptor", {"support_radius"});
    read(s, "descriptor", "support_radius", c.descriptor_radius);
  }
  read(root, "config", "rng_seed", c.rng_seed);
  read(root, "config", "bootstrap", c.bootstrap);
  if (root.contains("ablation")) {
    const auto& s = root["ablation"];
    only_keys(s, "ablation", {"matching", "consistency", "stages", "progressive"});
    for (const char* key : {"matching", "consistency", "stages", "progressive"}) {
      std::string v;
      read(s, "ablation", key, v);
      if (s.contains(key)) c.apply_ablation(std::string(key) + "=" + v);
    }
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_text_file(path)); }

std::string run_config_to_json(const RunConfig& c) {
  const auto& s = c.schedule;
  json j{{"schedule",
          {{"k0", s.k0},
           {"r0", s.r0},
           {"s0", s.s0},
           {"omega_k", s.omega_k},
           {"omega_r", s.omega_r},
           {"omega_s", s.omega_s},
           {"iterations", s.iterations},
           {"k_gmm", s.k_gmm},
           {"s_min", s.s_min},
           {"min_region_points", s.min_region_points},
           {"global_cap", s.global_cap},
           {"top_fraction", s.top_fraction}}},
         {"consistency", {{"sigma", s.params.sigma}, {"sigma_d", s.params.sigma_d}, {"a", s.params.a}}},
         {"refinement",
          {{"enabled", c.refine},
           {"sigma_d", c.refinement.sigma_d},
           {"max_rounds", c.refinement.max_rounds},
           {"convergence_eps", c.refinement.convergence_eps}}},
         {"metrics",
          {{"rotation_deg", c.thresholds.rotation_deg},
           {"translation", c.thresholds.translation},
           {"inlier_tolerance", c.inlier_tolerance}}},
         {"descriptor", {{"support_radius", c.descriptor_radius}}},
         {"rng_seed", c.rng_seed},
         {"bootstrap", c.bootstrap},
         {"ablation",
          {{"matching", std::string(to_string(c.matching))},
           {"consistency", std::string(to_string(c.consistency))},
           {"stages", std::string(to_string(c.stages))},
           {"progressive", c.progressive ? "on" : "off"}}}};
  return j.dump(2) + "\n";
}

}  // namespace regor
