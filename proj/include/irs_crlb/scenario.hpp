#pragma once

// Experiment configuration: presets, the JSON config format and scene
// assembly (geometry, path loss, seeded reflectivity and Doppler draws).

#include "irs_crlb/geometry.hpp"
#include "irs_crlb/scene.hpp"
#include "irs_crlb/signal_model.hpp"
#include "irs_crlb/types.hpp"

#include "json.hpp"

#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace irs_crlb {

struct IrsConfig {
  Position2D position;
  std::size_t elements = 8;
  double spacing_ratio = 0.5;
};

/// Normalized Dopplers: either one uniform draw per path from [low, high) or
/// an explicit list with one value per path (LoS first).
struct DopplerSpec {
  double low = 0.1;
  double high = 0.3;
  std::vector<double> values;

  bool is_explicit() const noexcept { return !values.empty(); }
};

struct PathLossModel {
  double l0_db = -30.0;
  double d0 = 1.0;
  double exponent = 2.5;
};

struct ScenarioConfig {
  std::string name = "custom";
  Position2D radar_pos{0.0, 0.0};
  Position2D target_pos{0.0, 5000.0};
  std::vector<IrsConfig> irs;
  std::size_t pulse_count = 16;
  double pri = 1e-3;
  std::optional<CVector> waveform;  // defaults to 1_N
  double sigma2 = 0.1;
  double gamma = 0.1;
  DopplerSpec doppler;
  PathLossModel path_loss;
  std::uint64_t seed = 42;

  std::size_t irs_count() const noexcept { return irs.size(); }

  void validate() const {
    auto fail = [](const std::string& field, const std::string& msg) { throw ConfigError(field, msg); };
    auto finite_pos = [](const Position2D& p) { return std::isfinite(p.x) && std::isfinite(p.y); };
    if (!finite_pos(radar_pos)) fail("radar.position", "must be finite");
    if (!finite_pos(target_pos)) fail("target.position", "must be finite");
    if (radar_pos == target_pos) fail("target.position", "must differ from the radar position");
    for (std::size_t k = 0; k < irs.size(); ++k) {
      const std::string f = "irs[" + std::to_string(k) + "]";
      if (!finite_pos(irs[k].position)) fail(f + ".position", "must be finite");
      if (irs[k].position == radar_pos || irs[k].position == target_pos)
        fail(f + ".position", "must differ from the radar and target positions");
      if (irs[k].elements < 1) fail(f + ".elements", "must be positive");
      if (!(irs[k].spacing_ratio > 0.0) || !std::isfinite(irs[k].spacing_ratio))
        fail(f + ".spacing_ratio", "must be positive");
    }
    if (pulse_count < 2) fail("radar.pulse_count", "must be at least 2");
    if (!(pri > 0.0) || !std::isfinite(pri)) fail("radar.pri", "must be positive");
    if (waveform) {
      if (waveform->size() != static_cast<Eigen::Index>(pulse_count)) fail("radar.waveform", "length must equal pulse_count");
      if (!waveform->allFinite() || !(waveform->squaredNorm() > 0.0)) fail("radar.waveform", "must be finite and nonzero");
    }
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) fail("noise.sigma2", "must be positive");
    if (!(gamma > 0.0) || !std::isfinite(gamma)) fail("gamma", "must be positive");
    if (doppler.is_explicit()) {
      if (doppler.values.size() != irs.size() + 1) fail("doppler.values", "needs one value per path (K+1)");
      for (double v : doppler.values)
        if (!(v >= -0.5 && v < 0.5)) fail("doppler.values", "entries must lie in [-0.5, 0.5)");
    } else {
      if (!(doppler.low >= -0.5 && doppler.high <= 0.5 && doppler.low < doppler.high))
        fail("doppler.uniform", "interval must satisfy -0.5 <= low < high <= 0.5");
    }
    if (!(path_loss.d0 > 0.0)) fail("path_loss.d0", "must be positive");
    if (!std::isfinite(path_loss.l0_db) || !std::isfinite(path_loss.exponent)) fail("path_loss", "must be finite");
  }

  /// Copy keeping only the first `count` IRS panels (and matching explicit
  /// Dopplers).
  ScenarioConfig with_irs_count(std::size_t count) const {
    require(count <= irs.size(), "ScenarioConfig: not enough IRS panels for the requested variant");
    ScenarioConfig c = *this;
    c.irs.resize(count);
    if (c.doppler.is_explicit()) c.doppler.values.resize(count + 1);
    return c;
  }
};

// ---------------------------------------------------------------------------
// Presets

inline ScenarioConfig preset(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  if (name == "no-irs") return c;
  if (name == "paper-1irs") {
    c.irs = {IrsConfig{{2500.0, 2500.0}}};
    return c;
  }
  if (name == "paper-3irs") {
    c.irs = {IrsConfig{{2500.0, 2500.0}}, IrsConfig{{-2500.0, 2500.0}}, IrsConfig{{0.0, 2500.0}}};
    return c;
  }
  throw ConfigError("preset", "unknown preset '" + name + "' (expected no-irs, paper-1irs or paper-3irs)");
}

// ---------------------------------------------------------------------------
// JSON config

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!keys.count(it.key())) throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
}

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

inline std::uint64_t get_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(path, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline Position2D get_position(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) throw ConfigError(path, "expected [x, y]");
  return {get_number(v[0], path + "[0]"), get_number(v[1], path + "[1]")};
}

}  // namespace detail

/// Parses a config document. Omitted fields keep the values of `base` (or
/// of the named preset); unknown keys are rejected with their dotted path.
inline ScenarioConfig scenario_from_json(const nlohmann::json& doc, ScenarioConfig base = ScenarioConfig{}) {
  using detail::get_count;
  using detail::get_number;
  using detail::get_position;
  using detail::join;
  ScenarioConfig c = std::move(base);
  detail::reject_unknown(doc, "",
                         {"name", "preset", "radar", "target", "irs", "noise", "gamma", "doppler", "path_loss", "seed"});

  if (doc.contains("preset")) {
    if (!doc["preset"].is_string()) throw ConfigError("preset", "expected a string");
    c = preset(doc["preset"].get<std::string>());
  }
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ConfigError("name", "expected a string");
    c.name = doc["name"].get<std::string>();
  }
  if (doc.contains("radar")) {
    const auto& r = doc["radar"];
    detail::reject_unknown(r, "radar", {"position", "pulse_count", "pri", "waveform"});
    if (r.contains("position")) c.radar_pos = get_position(r["position"], "radar.position");
    if (r.contains("pulse_count")) c.pulse_count = get_count(r["pulse_count"], "radar.pulse_count");
    if (r.contains("pri")) c.pri = get_number(r["pri"], "radar.pri");
    if (r.contains("waveform")) {
      const auto& w = r["waveform"];
      if (w.is_string()) {
        if (w.get<std::string>() != "ones") throw ConfigError("radar.waveform", "expected \"ones\" or a list");
        c.waveform.reset();
      } else if (w.is_array()) {
        CVector x(static_cast<Eigen::Index>(w.size()));
        for (std::size_t i = 0; i < w.size(); ++i) {
          const std::string p = "radar.waveform[" + std::to_string(i) + "]";
          if (w[i].is_number()) {
            x(static_cast<Eigen::Index>(i)) = {w[i].get<double>(), 0.0};
          } else if (w[i].is_array() && w[i].size() == 2) {
            x(static_cast<Eigen::Index>(i)) = {get_number(w[i][0], p + "[0]"), get_number(w[i][1], p + "[1]")};
          } else {
            throw ConfigError(p, "expected a number or [re, im]");
          }
        }
        c.waveform = x;
      } else {
        throw ConfigError("radar.waveform", "expected \"ones\" or a list");
      }
    }
  }
  if (doc.contains("target")) {
    detail::reject_unknown(doc["target"], "target", {"position"});
    if (doc["target"].contains("position")) c.target_pos = get_position(doc["target"]["position"], "target.position");
  }
  if (doc.contains("irs")) {
    const auto& list = doc["irs"];
    if (!list.is_array()) throw ConfigError("irs", "expected a list");
    c.irs.clear();
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string p = "irs[" + std::to_string(k) + "]";
      detail::reject_unknown(list[k], p, {"position", "elements", "spacing_ratio"});
      IrsConfig ic;
      if (!list[k].contains("position")) throw ConfigError(p + ".position", "is required");
      ic.position = get_position(list[k]["position"], p + ".position");
      if (list[k].contains("elements")) ic.elements = get_count(list[k]["elements"], p + ".elements");
      if (list[k].contains("spacing_ratio")) ic.spacing_ratio = get_number(list[k]["spacing_ratio"], p + ".spacing_ratio");
      c.irs.push_back(ic);
    }
  }
  if (doc.contains("noise")) {
    detail::reject_unknown(doc["noise"], "noise", {"sigma2"});
    if (doc["noise"].contains("sigma2")) c.sigma2 = get_number(doc["noise"]["sigma2"], "noise.sigma2");
  }
  if (doc.contains("gamma")) c.gamma = get_number(doc["gamma"], "gamma");
  if (doc.contains("doppler")) {
    const auto& d = doc["doppler"];
    detail::reject_unknown(d, "doppler", {"uniform", "values"});
    if (d.contains("uniform") && d.contains("values"))
      throw ConfigError("doppler", "give either uniform or values, not both");
    if (d.contains("uniform")) {
      const auto& u = d["uniform"];
      if (!u.is_array() || u.size() != 2) throw ConfigError("doppler.uniform", "expected [low, high]");
      c.doppler = DopplerSpec{get_number(u[0], "doppler.uniform[0]"), get_number(u[1], "doppler.uniform[1]"), {}};
    }
    if (d.contains("values")) {
      const auto& v = d["values"];
      if (!v.is_array() || v.empty()) throw ConfigError("doppler.values", "expected a non-empty list");
      c.doppler.values.clear();
      for (std::size_t i = 0; i < v.size(); ++i)
        c.doppler.values.push_back(get_number(v[i], "doppler.values[" + std::to_string(i) + "]"));
    }
  }
  if (doc.contains("path_loss")) {
    const auto& pl = doc["path_loss"];
    detail::reject_unknown(pl, "path_loss", {"l0_db", "d0", "exponent"});
    if (pl.contains("l0_db")) c.path_loss.l0_db = get_number(pl["l0_db"], "path_loss.l0_db");
    if (pl.contains("d0")) c.path_loss.d0 = get_number(pl["d0"], "path_loss.d0");
    if (pl.contains("exponent")) c.path_loss.exponent = get_number(pl["exponent"], "path_loss.exponent");
  }
  if (doc.contains("seed")) c.seed = get_count(doc["seed"], "seed");
  c.validate();
  return c;
}

inline nlohmann::json scenario_to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["name"] = c.name;
  j["radar"]["position"] = {c.radar_pos.x, c.radar_pos.y};
  j["radar"]["pulse_count"] = c.pulse_count;
  j["radar"]["pri"] = c.pri;
  if (c.waveform) {
    auto w = nlohmann::json::array();
    for (Eigen::Index i = 0; i < c.waveform->size(); ++i) w.push_back({(*c.waveform)(i).real(), (*c.waveform)(i).imag()});
    j["radar"]["waveform"] = w;
  } else {
    j["radar"]["waveform"] = "ones";
  }
  j["target"]["position"] = {c.target_pos.x, c.target_pos.y};
  j["irs"] = nlohmann::json::array();
  for (const auto& ic : c.irs)
    j["irs"].push_back({{"position", {ic.position.x, ic.position.y}}, {"elements", ic.elements},
                        {"spacing_ratio", ic.spacing_ratio}});
  j["noise"]["sigma2"] = c.sigma2;
  j["gamma"] = c.gamma;
  if (c.doppler.is_explicit())
    j["doppler"]["values"] = c.doppler.values;
  else
    j["doppler"]["uniform"] = {c.doppler.low, c.doppler.high};
  j["path_loss"] = {{"l0_db", c.path_loss.l0_db}, {"d0", c.path_loss.d0}, {"exponent", c.path_loss.exponent}};
  j["seed"] = c.seed;
  return j;
}

/// Loads a JSON config file; `preset` names a starting point when the
/// document itself does not.
inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("parse error: ") + e.what());
  }
  return scenario_from_json(doc);
}

/// FNV-1a over the canonical JSON form; identifies a config in outputs.
inline std::string config_digest(const ScenarioConfig& c) {
  const std::string s = scenario_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Scene assembly

/// Independent stream for path k, so a path's draws do not depend on how many
/// other paths the scenario has.
inline std::mt19937_64 path_rng(std::uint64_t seed, std::size_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), 0xd0995u};
  return std::mt19937_64(seq);
}

inline double draw_doppler(const DopplerSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(spec.low, spec.high);
  return uni(rng);
}

/// Radar, channels, target and coupling matrices for a config. NLoS
/// channels use `phases` when given and all-zero phases otherwise. Raw
/// reflectivities are standard complex Gaussian and are rescaled so the LSR
/// equals cfg.gamma at those channels.
inline Scene build_scene(const ScenarioConfig& cfg, const std::optional<std::vector<std::vector<double>>>& phases = {}) {
  cfg.validate();
  const std::size_t k_count = cfg.irs_count();
  if (phases) require(phases->size() == k_count, "build_scene: one phase vector per IRS is required");

  Scene s;
  s.radar = cfg.waveform ? RadarParams{cfg.pulse_count, cfg.pri, *cfg.waveform} : RadarParams::constant(cfg.pulse_count, cfg.pri);
  s.radar.validate();
  s.sigma2 = cfg.sigma2;

  s.channels.h_los = path_loss(2.0 * distance(cfg.radar_pos, cfg.target_pos), cfg.path_loss.l0_db, cfg.path_loss.d0,
                               cfg.path_loss.exponent);
  s.channels.h_nlos = CVector(static_cast<Eigen::Index>(k_count));
  for (std::size_t k = 0; k < k_count; ++k) {
    const IrsConfig& ic = cfg.irs[k];
    const IrsAngles ang = angles_from_positions(cfg.radar_pos, ic.position, cfg.target_pos);
    IrsPanel panel = phases ? IrsPanel((*phases)[k], ic.spacing_ratio) : IrsPanel::zeros(ic.elements, ic.spacing_ratio);
    require(panel.element_count() == ic.elements, "build_scene: phase count must match the IRS element count");
    s.coupling.push_back(coupling_matrix(ang.theta_ir, ang.theta_ti, ic.elements, ic.spacing_ratio));
    s.channels.h_nlos(static_cast<Eigen::Index>(k)) = nlos_channel_direct(panel, ang.theta_ir, ang.theta_ti);
    s.panels.push_back(std::move(panel));
  }

  CVector raw(static_cast<Eigen::Index>(k_count + 1));
  s.target.nu = RVector(static_cast<Eigen::Index>(k_count + 1));
  for (std::size_t k = 0; k <= k_count; ++k) {
    auto rng = path_rng(cfg.seed, k);
    raw(static_cast<Eigen::Index>(k)) = standard_complex_normal(1, rng)(0);
    s.target.nu(static_cast<Eigen::Index>(k)) = cfg.doppler.is_explicit() ? cfg.doppler.values[k] : draw_doppler(cfg.doppler, rng);
  }

  if (k_count >= 1) {
    s.target.alpha = scale_reflectivities(raw, s.channels, cfg.gamma);
  } else {
    const double los = std::norm(raw(0) * s.channels.h_los);
    if (!(los > 0.0)) throw DegenerateChannelError("build_scene: LoS term is zero");
    s.target.alpha = raw * std::sqrt(cfg.gamma / los);
  }
  s.target.validate();
  s.validate();
  return s;
}

}  // namespace irs_crlb
