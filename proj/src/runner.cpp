#include "microtrap/runner.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "microtrap/constants.hpp"
#include "microtrap/errors.hpp"
#include "microtrap/io.hpp"
#include "microtrap/transport.hpp"

namespace microtrap::runner {

namespace fs = std::filesystem;
using io::format_double;

namespace {

void write_register_csv(const fs::path& path,
                        const scenario::ArrayConfig& array,
                        const register_control::RegisterState& reg) {
  auto positions = optics::site_positions(array.lens_spec(), {0.0, 0.0});
  std::vector<std::vector<std::string>> rows;
  rows.reserve(reg.site_count());
  for (std::size_t i = 0; i < reg.site_count(); ++i) {
    rows.push_back({std::to_string(i), format_double(units::to_um(positions[i][0])),
                    format_double(units::to_um(positions[i][1])),
                    format_double(reg.depths[i]),
                    format_double(reg.mean_atoms[i])});
  }
  io::write_csv(path, {"site", "x_um", "y_um", "depth_J", "mean_atoms"}, rows);
}

std::string stats_json(const supply::SupplyStats& st) {
  nlohmann::json j;
  j["p_zero"] = st.p_zero;
  j["p_one"] = st.p_one;
  j["false_positive_rate"] = st.false_positive_rate;
  j["delivery_probability"] = st.delivery_probability;
  j["delivery_fidelity"] = st.delivery_fidelity;
  j["repetition_rate"] = st.repetition_rate;
  return j.dump(2) + "\n";
}

}  // namespace

void write_transport_sweep(const fs::path& csv_path, double distance_m,
                           double omega0, double atom_mass_kg, double tmin_s,
                           double tmax_s, int points) {
  if (!(tmin_s > 0.0) || !(tmax_s > tmin_s))
    throw ConfigError("transport sweep: need 0 < tmin < tmax");
  if (points < 2) throw ConfigError("transport sweep: points must be >= 2");

  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    double t = tmin_s + (tmax_s - tmin_s) * i / (points - 1);
    transport::TransportSpec spec{distance_m, t, omega0, atom_mass_kg};
    double added = transport::heating_added(spec).quanta;
    double envelope = std::nan("");
    try {
      envelope = transport::heating_envelope(spec).quanta;
    } catch (const NotAdiabaticError&) {
      // below the branch the envelope has no meaning; leave nan
    }
    double oracle = transport::simulate_transport_oracle(spec, 20000).quanta;
    rows.push_back({format_double(t), format_double(added),
                    format_double(envelope), format_double(oracle)});
  }
  io::write_csv(csv_path,
                {"T_s", "quanta_added", "quanta_envelope", "quanta_oracle"},
                rows);
}

void run_scenario(const scenario::Scenario& s, const fs::path& base_dir,
                  const fs::path& output_dir_override) {
  s.validate();
  fs::path out_dir =
      output_dir_override.empty() ? fs::path(s.output_dir) : output_dir_override;
  fs::create_directories(out_dir);

  std::vector<std::vector<std::string>> events;
  auto event = [&](const std::string& action, const std::string& name,
                   const std::string& detail) {
    events.push_back({action, name, detail});
  };

  {
    nlohmann::json manifest;
    manifest["constants"]["hbar_J_s"] = constants::hbar;
    manifest["constants"]["k_boltzmann_J_per_K"] = constants::k_boltzmann;
    manifest["constants"]["rb85_mass_kg"] = constants::rb85_mass_kg;
    manifest["scenario"] = nlohmann::json::parse(scenario::serialize_scenario(s));
    io::write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  }

  for (const auto& a : s.arrays) {
    auto reg = register_control::load_register(a.base_register(),
                                               a.peak_mean_atoms);
    write_register_csv(out_dir / (a.name + "_register.csv"), a, reg);
    event("array", a.name,
          "sites=" + std::to_string(reg.site_count()) +
              ";peak_mean_atoms=" + format_double(a.peak_mean_atoms));
  }

  for (const auto& t : s.transports) {
    const auto& a = s.array_by_name(t.array_name);
    double distance = t.distance_um > 0.0 ? units::from_um(t.distance_um)
                                          : a.lens_spec().site_spacing_m();
    write_transport_sweep(out_dir / (t.name + "_sweep.csv"), distance,
                          a.trap_params().omega_r, constants::rb85_mass_kg,
                          units::from_us(t.tmin_us), units::from_us(t.tmax_us),
                          t.points);
    event("transport_sweep", t.name,
          "distance_um=" + format_double(units::to_um(distance)) +
              ";points=" + std::to_string(t.points));
  }

  for (const auto& m : s.masks) {
    const auto& a = s.array_by_name(m.array_name);
    auto mask = scenario::load_mask_csv(base_dir / m.file, a.rows, a.cols);
    auto reg = a.base_register();
    reg.depths = register_control::apply_mask(reg.depths, mask);
    reg = register_control::load_register(reg, a.peak_mean_atoms);
    write_register_csv(out_dir / (m.name + "_register.csv"), a, reg);
    event("mask", m.name, "file=" + m.file);
  }

  for (const auto& sp : s.splits) {
    const auto& a = s.array_by_name(sp.array_name);
    auto moving = register_control::load_register(a.base_register(),
                                                  a.peak_mean_atoms);
    if (sp.transfer_duration_ms > 0.0) {
      register_control::TransferSpec tspec{
          units::from_ms(sp.transfer_duration_ms), sp.transfer_efficiency};
      moving = register_control::cross_ramp_transfer(moving, a.base_register(),
                                                     tspec)
                   .second;
      event("cross_ramp", sp.name + "_transfer",
            "duration_ms=" + format_double(sp.transfer_duration_ms) +
                ";efficiency=" + format_double(sp.transfer_efficiency));
    }
    for (auto& d : moving.depths) d *= sp.move_depth_scale;

    auto holding = a.base_register();
    std::vector<std::size_t> selected(sp.sites.begin(), sp.sites.end());
    for (std::size_t i = 0; i < holding.site_count(); ++i) holding.depths[i] = 0.0;
    for (std::size_t site : selected)
      holding.depths[site] =
          sp.hold_depth_scale * units::depth_from_mk(a.depth_mK);

    auto model = sp.split_model();
    auto [mov, hold] =
        register_control::split_sites(moving, holding, selected, model);
    write_register_csv(out_dir / (sp.name + "_moving.csv"), a, mov);
    write_register_csv(out_dir / (sp.name + "_holding.csv"), a, hold);

    std::string detail = "model=" + sp.model +
                         ";sites=" + std::to_string(selected.size());
    if (!selected.empty()) {
      double r = register_control::splitting_ratio(
          model, holding.depths[selected.front()],
          moving.depths[selected.front()]);
      detail += ";ratio=" + format_double(r);
    }
    event("split", sp.name, detail);
  }

  if (s.pipeline) {
    auto result = supply::run_pipeline(s.pipeline->to_config(s.seed));

    std::vector<std::vector<std::string>> trial_rows;
    trial_rows.reserve(result.outcomes.size());
    for (std::size_t i = 0; i < result.outcomes.size(); ++i) {
      const auto& o = result.outcomes[i];
      trial_rows.push_back({std::to_string(i), std::to_string(o.initial_atoms),
                            std::to_string(o.final_atoms),
                            format_double(o.count_rate),
                            std::to_string(o.classified_as)});
    }
    io::write_csv(out_dir / "pipeline_trials.csv",
                  {"trial", "initial_atoms", "final_atoms", "count_rate",
                   "classified"},
                  trial_rows);

    std::vector<std::vector<std::string>> hist_rows;
    hist_rows.reserve(result.histogram.counts.size());
    for (std::size_t i = 0; i < result.histogram.counts.size(); ++i)
      hist_rows.push_back({format_double(result.histogram.center(i)),
                           format_double(result.histogram.counts[i])});
    io::write_csv(out_dir / "pipeline_histogram.csv", {"bin_center", "count"},
                  hist_rows);

    io::write_text(out_dir / "pipeline_stats.json", stats_json(result.stats));
    event("pipeline", "pipeline",
          "trials=" + std::to_string(result.outcomes.size()) +
              ";seed=" + std::to_string(s.seed));
  }

  io::write_csv(out_dir / "events.csv", {"action", "name", "detail"}, events);
}

}  // namespace microtrap::runner
