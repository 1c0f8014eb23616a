#include "microtrap/scenario.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "microtrap/constants.hpp"
#include "microtrap/errors.hpp"
#include "microtrap/io.hpp"

namespace microtrap::scenario {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

// Strict field reader: every access is type-checked and recorded, and
// finish() rejects keys that were never consumed (typo protection).
class Fields {
 public:
  Fields(const json& obj, std::string ctx) : obj_(obj), ctx_(std::move(ctx)) {
    if (!obj_.is_object()) fail(ctx_ + ": expected a JSON object");
  }

  double num(const char* key) {
    const json& v = require(key);
    if (!v.is_number()) fail(where(key) + ": expected a number");
    return v.get<double>();
  }
  double num_or(const char* key, double dflt) {
    const json* v = optional(key);
    if (!v) return dflt;
    if (!v->is_number()) fail(where(key) + ": expected a number");
    return v->get<double>();
  }
  long integer(const char* key) {
    const json& v = require(key);
    if (!v.is_number_integer()) fail(where(key) + ": expected an integer");
    return v.get<long>();
  }
  long integer_or(const char* key, long dflt) {
    const json* v = optional(key);
    if (!v) return dflt;
    if (!v->is_number_integer()) fail(where(key) + ": expected an integer");
    return v->get<long>();
  }
  std::uint64_t uinteger_or(const char* key, std::uint64_t dflt) {
    const json* v = optional(key);
    if (!v) return dflt;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_integer() && v->get<std::int64_t>() >= 0)
      return static_cast<std::uint64_t>(v->get<std::int64_t>());
    fail(where(key) + ": expected a non-negative integer");
  }
  std::string str(const char* key) {
    const json& v = require(key);
    if (!v.is_string()) fail(where(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::string str_or(const char* key, const std::string& dflt) {
    const json* v = optional(key);
    if (!v) return dflt;
    if (!v->is_string()) fail(where(key) + ": expected a string");
    return v->get<std::string>();
  }
  const json* optional(const char* key) {
    consumed_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }
  const json& require(const char* key) {
    const json* v = optional(key);
    if (!v) fail(where(key) + ": missing required field");
    return *v;
  }
  void finish() const {
    for (const auto& item : obj_.items())
      if (!consumed_.count(item.key()))
        fail(ctx_ + ": unknown field '" + item.key() + "'");
  }

 private:
  std::string where(const char* key) const { return ctx_ + "." + key; }

  const json& obj_;
  std::string ctx_;
  std::set<std::string> consumed_;
};

std::string at(const std::string& section, std::size_t i) {
  return section + "[" + std::to_string(i) + "]";
}

ArrayConfig parse_array(const json& j, const std::string& ctx) {
  Fields f(j, ctx);
  ArrayConfig a;
  a.name = f.str("name");
  a.pitch_um = f.num("pitch_um");
  a.lens_diameter_um = f.num("lens_diameter_um");
  a.numerical_aperture = f.num("numerical_aperture");
  a.rows = static_cast<int>(f.integer("rows"));
  a.cols = static_cast<int>(f.integer("cols"));
  a.demagnification = f.num_or("demagnification", 1.0);
  a.na_convention = f.str_or("na_convention", "half_pitch_over_f");
  a.wavelength_nm = f.num("wavelength_nm");
  a.waist_um = f.num("waist_um");
  a.depth_mK = f.num("depth_mK");
  a.peak_mean_atoms = f.num_or("peak_mean_atoms", 10.0);
  a.beam_radius_pitches = f.num_or("beam_radius_pitches", 2.5);
  f.finish();
  return a;
}

TransportSweepConfig parse_transport(const json& j, const std::string& ctx) {
  Fields f(j, ctx);
  TransportSweepConfig t;
  t.name = f.str("name");
  t.array_name = f.str("array");
  t.distance_um = f.num_or("distance_um", 0.0);
  t.tmin_us = f.num("tmin_us");
  t.tmax_us = f.num("tmax_us");
  t.points = static_cast<int>(f.integer("points"));
  f.finish();
  return t;
}

MaskConfig parse_mask(const json& j, const std::string& ctx) {
  Fields f(j, ctx);
  MaskConfig m;
  m.name = f.str("name");
  m.array_name = f.str("array");
  m.file = f.str("file");
  f.finish();
  return m;
}

SplitConfig parse_split(const json& j, const std::string& ctx) {
  Fields f(j, ctx);
  SplitConfig s;
  s.name = f.str("name");
  s.array_name = f.str("array");
  const json& sites = f.require("sites");
  if (!sites.is_array()) fail(ctx + ".sites: expected an array of indices");
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (!sites[i].is_number_integer() || sites[i].get<long>() < 0)
      fail(ctx + ".sites[" + std::to_string(i) +
           "]: expected a non-negative integer");
    s.sites.push_back(static_cast<int>(sites[i].get<long>()));
  }
  s.model = f.str_or("model", "boltzmann");
  s.temperature_eff_uK = f.num_or("temperature_eff_uK", 25.0);
  s.exponent_gamma = f.num_or("exponent_gamma", 1.5);
  s.hold_depth_scale = f.num_or("hold_depth_scale", 1.0);
  s.move_depth_scale = f.num_or("move_depth_scale", 1.0);
  s.transfer_efficiency = f.num_or("transfer_efficiency", 1.0);
  s.transfer_duration_ms = f.num_or("transfer_duration_ms", 0.0);
  f.finish();
  return s;
}

PipelineSection parse_pipeline(const json& j, const std::string& ctx) {
  Fields f(j, ctx);
  PipelineSection p;
  p.lambda = f.num_or("lambda", p.lambda);
  p.collision_ms = f.num_or("collision_ms", p.collision_ms);
  p.retention = f.num_or("retention", p.retention);
  p.exposure_ms = f.num_or("exposure_ms", p.exposure_ms);
  p.overhead_ms = f.num_or("overhead_ms", p.overhead_ms);
  p.bg_rate_mean = f.num_or("bg_rate_mean", p.bg_rate_mean);
  p.bg_rate_sigma = f.num_or("bg_rate_sigma", p.bg_rate_sigma);
  p.atom_rate_mean = f.num_or("atom_rate_mean", p.atom_rate_mean);
  p.atom_rate_sigma = f.num_or("atom_rate_sigma", p.atom_rate_sigma);
  p.threshold = f.num_or("threshold", p.threshold);
  p.bin_width = f.num_or("bin_width", p.bin_width);
  p.trials = f.integer_or("trials", p.trials);
  f.finish();
  return p;
}

json array_to_json(const ArrayConfig& a) {
  json j;
  j["name"] = a.name;
  j["pitch_um"] = a.pitch_um;
  j["lens_diameter_um"] = a.lens_diameter_um;
  j["numerical_aperture"] = a.numerical_aperture;
  j["rows"] = a.rows;
  j["cols"] = a.cols;
  j["demagnification"] = a.demagnification;
  j["na_convention"] = a.na_convention;
  j["wavelength_nm"] = a.wavelength_nm;
  j["waist_um"] = a.waist_um;
  j["depth_mK"] = a.depth_mK;
  j["peak_mean_atoms"] = a.peak_mean_atoms;
  j["beam_radius_pitches"] = a.beam_radius_pitches;
  return j;
}

json transport_to_json(const TransportSweepConfig& t) {
  json j;
  j["name"] = t.name;
  j["array"] = t.array_name;
  j["distance_um"] = t.distance_um;
  j["tmin_us"] = t.tmin_us;
  j["tmax_us"] = t.tmax_us;
  j["points"] = t.points;
  return j;
}

json mask_to_json(const MaskConfig& m) {
  json j;
  j["name"] = m.name;
  j["array"] = m.array_name;
  j["file"] = m.file;
  return j;
}

json split_to_json(const SplitConfig& s) {
  json j;
  j["name"] = s.name;
  j["array"] = s.array_name;
  j["sites"] = s.sites;
  j["model"] = s.model;
  j["temperature_eff_uK"] = s.temperature_eff_uK;
  j["exponent_gamma"] = s.exponent_gamma;
  j["hold_depth_scale"] = s.hold_depth_scale;
  j["move_depth_scale"] = s.move_depth_scale;
  j["transfer_efficiency"] = s.transfer_efficiency;
  j["transfer_duration_ms"] = s.transfer_duration_ms;
  return j;
}

json pipeline_to_json(const PipelineSection& p) {
  json j;
  j["lambda"] = p.lambda;
  j["collision_ms"] = p.collision_ms;
  j["retention"] = p.retention;
  j["exposure_ms"] = p.exposure_ms;
  j["overhead_ms"] = p.overhead_ms;
  j["bg_rate_mean"] = p.bg_rate_mean;
  j["bg_rate_sigma"] = p.bg_rate_sigma;
  j["atom_rate_mean"] = p.atom_rate_mean;
  j["atom_rate_sigma"] = p.atom_rate_sigma;
  j["threshold"] = p.threshold;
  j["bin_width"] = p.bin_width;
  j["trials"] = p.trials;
  return j;
}

}  // namespace

optics::LensArraySpec ArrayConfig::lens_spec() const {
  optics::LensArraySpec s;
  s.pitch_m = units::from_um(pitch_um);
  s.lens_diameter_m = units::from_um(lens_diameter_um);
  s.numerical_aperture = numerical_aperture;
  s.rows = rows;
  s.cols = cols;
  s.demagnification = demagnification;
  return s;
}

optics::NaConvention ArrayConfig::convention() const {
  if (na_convention == "half_pitch_over_f")
    return optics::NaConvention::half_pitch_over_f;
  if (na_convention == "half_diameter_over_f")
    return optics::NaConvention::half_diameter_over_f;
  fail("array '" + name + "': na_convention must be half_pitch_over_f or "
       "half_diameter_over_f, got '" + na_convention + "'");
}

optics::TrapParams ArrayConfig::trap_params() const {
  return optics::derive_trap_params(
      units::from_um(waist_um), units::depth_from_mk(depth_mK),
      units::from_nm(wavelength_nm), constants::rb85_mass_kg);
}

register_control::RegisterState ArrayConfig::base_register() const {
  auto reg = register_control::make_uniform_register(
      rows, cols, units::depth_from_mk(depth_mK));
  reg.beam_envelope =
      register_control::gaussian_beam_envelope(rows, cols, beam_radius_pitches);
  return reg;
}

register_control::SplitModel SplitConfig::split_model() const {
  register_control::SplitModel m;
  if (model == "boltzmann") {
    m.kind = register_control::SplitKind::boltzmann;
  } else if (model == "power_law") {
    m.kind = register_control::SplitKind::power_law;
  } else {
    fail("split '" + name + "': model must be boltzmann or power_law, got '" +
         model + "'");
  }
  m.temperature_eff_k = temperature_eff_uK * 1e-6;
  m.exponent_gamma = exponent_gamma;
  return m;
}

supply::PipelineConfig PipelineSection::to_config(std::uint64_t seed) const {
  supply::PipelineConfig c;
  c.poisson_mean_lambda = lambda;
  c.collision_duration_s = units::from_ms(collision_ms);
  c.single_atom_retention = retention;
  c.exposure_time_s = units::from_ms(exposure_ms);
  c.extra_overhead_s = units::from_ms(overhead_ms);
  c.bg_rate_mean = bg_rate_mean;
  c.bg_rate_sigma = bg_rate_sigma;
  c.atom_rate_mean = atom_rate_mean;
  c.atom_rate_sigma = atom_rate_sigma;
  c.threshold = threshold;
  c.bin_width = bin_width;
  c.trials = trials;
  c.rng_seed = seed;
  return c;
}

const ArrayConfig& Scenario::array_by_name(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return a;
  std::string known;
  for (const auto& a : arrays) known += (known.empty() ? "" : ", ") + a.name;
  fail("unknown array '" + name + "' (defined: " + known + ")");
}

void Scenario::validate() const {
  if (output_dir.empty()) fail("scenario: output_dir must not be empty");
  if (arrays.empty() && !pipeline.has_value())
    fail("scenario: nothing to do (no arrays and no pipeline section)");

  std::set<std::string> names;
  for (const auto& a : arrays) {
    if (a.name.empty()) fail("array: name must not be empty");
    if (!names.insert(a.name).second)
      fail("array '" + a.name + "' is defined twice");
    try {
      a.lens_spec().validate();
      a.convention();
      a.trap_params();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail("array '" + a.name + "': " + e.what());
    }
    if (!(a.depth_mK > 0.0)) fail("array '" + a.name + "': depth_mK must be > 0");
    if (!(a.peak_mean_atoms >= 0.0))
      fail("array '" + a.name + "': peak_mean_atoms must be >= 0");
    if (!(a.beam_radius_pitches > 0.0))
      fail("array '" + a.name + "': beam_radius_pitches must be > 0");
  }

  std::set<std::string> action_names;
  auto unique_action = [&](const std::string& kind, const std::string& n) {
    if (n.empty()) fail(kind + ": name must not be empty");
    if (!action_names.insert(n).second)
      fail(kind + " '" + n + "': name already used by another action");
  };

  for (const auto& t : transports) {
    unique_action("transport", t.name);
    array_by_name(t.array_name);
    if (!(t.distance_um >= 0.0))
      fail("transport '" + t.name + "': distance_um must be >= 0");
    if (!(t.tmin_us > 0.0) || !(t.tmax_us > t.tmin_us))
      fail("transport '" + t.name + "': need 0 < tmin_us < tmax_us");
    if (t.points < 2) fail("transport '" + t.name + "': points must be >= 2");
  }
  for (const auto& m : masks) {
    unique_action("mask", m.name);
    array_by_name(m.array_name);
    if (m.file.empty()) fail("mask '" + m.name + "': file must not be empty");
  }
  for (const auto& s : splits) {
    unique_action("split", s.name);
    const ArrayConfig& a = array_by_name(s.array_name);
    s.split_model().validate();
    long site_count = static_cast<long>(a.rows) * a.cols;
    for (int site : s.sites)
      if (site < 0 || site >= site_count)
        fail("split '" + s.name + "': site " + std::to_string(site) +
             " outside register of " + std::to_string(site_count) + " sites");
    if (!(s.hold_depth_scale > 0.0))
      fail("split '" + s.name + "': hold_depth_scale must be > 0");
    if (!(s.move_depth_scale > 0.0))
      fail("split '" + s.name + "': move_depth_scale must be > 0");
    if (!(s.transfer_efficiency >= 0.0) || s.transfer_efficiency > 1.0)
      fail("split '" + s.name + "': transfer_efficiency must lie in [0,1]");
    if (!(s.transfer_duration_ms >= 0.0))
      fail("split '" + s.name + "': transfer_duration_ms must be >= 0");
  }
  if (pipeline) pipeline->to_config(seed).validate();
}

Scenario parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("scenario: JSON parse error: ") + e.what());
  }

  Fields f(root, "scenario");
  Scenario s;
  s.seed = f.uinteger_or("seed", 1);
  s.output_dir = f.str_or("output_dir", "out");

  if (const json* arrays = f.optional("arrays")) {
    if (!arrays->is_array()) fail("scenario.arrays: expected an array");
    for (std::size_t i = 0; i < arrays->size(); ++i)
      s.arrays.push_back(parse_array((*arrays)[i], at("arrays", i)));
  }
  if (const json* transports = f.optional("transports")) {
    if (!transports->is_array()) fail("scenario.transports: expected an array");
    for (std::size_t i = 0; i < transports->size(); ++i)
      s.transports.push_back(
          parse_transport((*transports)[i], at("transports", i)));
  }
  if (const json* masks = f.optional("masks")) {
    if (!masks->is_array()) fail("scenario.masks: expected an array");
    for (std::size_t i = 0; i < masks->size(); ++i)
      s.masks.push_back(parse_mask((*masks)[i], at("masks", i)));
  }
  if (const json* splits = f.optional("splits")) {
    if (!splits->is_array()) fail("scenario.splits: expected an array");
    for (std::size_t i = 0; i < splits->size(); ++i)
      s.splits.push_back(parse_split((*splits)[i], at("splits", i)));
  }
  if (const json* pipeline = f.optional("pipeline"))
    s.pipeline = parse_pipeline(*pipeline, "pipeline");
  f.finish();

  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::string text;
  try {
    text = io::read_text(file);
  } catch (const std::exception& e) {
    fail(std::string("scenario: ") + e.what());
  }
  return parse_scenario(text);
}

std::string serialize_scenario(const Scenario& s) {
  json j;
  j["seed"] = s.seed;
  j["output_dir"] = s.output_dir;
  j["arrays"] = json::array();
  for (const auto& a : s.arrays) j["arrays"].push_back(array_to_json(a));
  j["transports"] = json::array();
  for (const auto& t : s.transports)
    j["transports"].push_back(transport_to_json(t));
  j["masks"] = json::array();
  for (const auto& m : s.masks) j["masks"].push_back(mask_to_json(m));
  j["splits"] = json::array();
  for (const auto& sp : s.splits) j["splits"].push_back(split_to_json(sp));
  if (s.pipeline) j["pipeline"] = pipeline_to_json(*s.pipeline);
  return j.dump(2) + "\n";
}

register_control::SlmMask load_mask_csv(const std::filesystem::path& file,
                                        int rows, int cols) {
  std::string text;
  try {
    text = io::read_text(file);
  } catch (const std::exception& e) {
    fail(std::string("mask: ") + e.what());
  }

  register_control::SlmMask mask;
  mask.rows = rows;
  mask.cols = cols;
  mask.values.reserve(static_cast<std::size_t>(rows) * cols);

  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  int grid_row = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t,") == std::string::npos) continue;
    std::string where = file.string() + ":" + std::to_string(line_no);
    if (grid_row >= rows) fail("mask " + where + ": more rows than expected");

    int cells = 0;
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) {
      std::size_t pos = 0;
      int v = 0;
      try {
        v = std::stoi(cell, &pos);
      } catch (const std::exception&) {
        fail("mask " + where + ": '" + cell + "' is not an integer");
      }
      if (cell.find_first_not_of(" \t", pos) != std::string::npos)
        fail("mask " + where + ": '" + cell + "' is not an integer");
      if (v < 0 || v > 255)
        fail("mask " + where + ": value " + std::to_string(v) +
             " outside [0,255]");
      mask.values.push_back(static_cast<std::uint8_t>(v));
      ++cells;
    }
    if (cells != cols)
      fail("mask " + where + ": " + std::to_string(cells) +
           " columns, expected " + std::to_string(cols));
    ++grid_row;
  }
  if (grid_row != rows)
    fail("mask " + file.string() + ": " + std::to_string(grid_row) +
         " rows, expected " + std::to_string(rows));
  mask.validate();
  return mask;
}

const std::vector<ArrayConfig>& builtin_arrays() {
  static const std::vector<ArrayConfig> arrays = [] {
    ArrayConfig a30;
    a30.name = "register30";
    a30.pitch_um = 30.0;
    a30.lens_diameter_um = 26.0;
    a30.numerical_aperture = 0.144;
    a30.rows = 166;
    a30.cols = 166;
    a30.demagnification = 1.0;
    a30.na_convention = "half_pitch_over_f";
    a30.wavelength_nm = 795.8;
    a30.waist_um = 2.5;
    a30.depth_mK = 1.0;

    ArrayConfig a55;
    a55.name = "register55";
    a55.pitch_um = 125.0;
    a55.lens_diameter_um = 100.0;
    a55.numerical_aperture = 0.05;
    a55.rows = 40;
    a55.cols = 40;
    a55.demagnification = 125.0 / 55.0;
    a55.na_convention = "half_diameter_over_f";
    a55.wavelength_nm = 795.8;
    a55.waist_um = 3.8;
    a55.depth_mK = 0.1;

    return std::vector<ArrayConfig>{a30, a55};
  }();
  return arrays;
}

const ArrayConfig& builtin_array(const std::string& name) {
  for (const auto& a : builtin_arrays())
    if (a.name == name) return a;
  std::string known;
  for (const auto& a : builtin_arrays())
    known += (known.empty() ? "" : ", ") + a.name;
  fail("unknown built-in array '" + name + "' (available: " + known + ")");
}

}  // namespace microtrap::scenario
