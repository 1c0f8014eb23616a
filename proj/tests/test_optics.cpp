#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "microtrap/constants.hpp"
#include "microtrap/optics.hpp"

using namespace microtrap;
using optics::LensArraySpec;
using optics::NaConvention;
using optics::SteeringConfig;

namespace {

// hand-computed from z_R = pi w0^2 / lambda, w_r = sqrt(4 U0 / (m w0^2)),
// w_z = sqrt(2 U0 / (m z_R^2)) with U0 = kB * depth, m = 1.4099e-25 kg
struct Frozen {
  double waist_um, depth_mk, wavelength_nm;
  double omega_r, omega_z, rayleigh_um;
};
constexpr Frozen kFrozen[] = {
    {2.5, 1.0, 782.7, 250344.1648, 17641.19204, 25.08618128},
    {2.5, 1.0, 795.8, 250344.1648, 17936.45155, 24.67322705},
    {3.8, 0.1, 795.8, 52082.74736, 2454.987882, 57.00502377},
};

LensArraySpec spec30() {
  LensArraySpec s;
  s.pitch_m = units::from_um(30.0);
  s.lens_diameter_m = units::from_um(26.0);
  s.numerical_aperture = 0.144;
  s.rows = 4;
  s.cols = 4;
  return s;
}

}  // namespace

TEST_CASE("trap parameters match hand-computed references") {
  for (const auto& f : kFrozen) {
    auto p = optics::derive_trap_params(
        units::from_um(f.waist_um), units::depth_from_mk(f.depth_mk),
        units::from_nm(f.wavelength_nm), constants::rb85_mass_kg);
    CHECK(p.omega_r == doctest::Approx(f.omega_r).epsilon(1e-9));
    CHECK(p.omega_z == doctest::Approx(f.omega_z).epsilon(1e-9));
    CHECK(units::to_um(p.rayleigh_m) ==
          doctest::Approx(f.rayleigh_um).epsilon(1e-9));
  }
}

TEST_CASE("rayleigh range for a 2.5 um waist at 782.7 nm is 25.08 um") {
  auto p = optics::derive_trap_params(units::from_um(2.5),
                                      units::depth_from_mk(1.0),
                                      units::from_nm(782.7),
                                      constants::rb85_mass_kg);
  CHECK(units::to_um(p.rayleigh_m) == doctest::Approx(25.08).epsilon(0.005));
}

TEST_CASE("frequency ratio identity omega_r/omega_z = sqrt(2) z_R / w0") {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 100; ++i) {
    double w0 = 1e-6 + 9e-6 * (gen() >> 11) * 0x1.0p-53;
    double lam = 0.5e-6 + 0.8e-6 * (gen() >> 11) * 0x1.0p-53;
    double depth = units::depth_from_mk(0.01 + (gen() % 100) * 0.05);
    auto p = optics::derive_trap_params(w0, depth, lam,
                                        constants::rb85_mass_kg);
    CHECK(p.omega_r / p.omega_z ==
          doctest::Approx(std::sqrt(2.0) * p.rayleigh_m / w0).epsilon(1e-12));
  }
}

TEST_CASE("derive_trap_params rejects nonphysical inputs") {
  CHECK_THROWS_AS(optics::derive_trap_params(0.0, 1e-27, 7.8e-7, 1.4e-25),
                  std::domain_error);
  CHECK_THROWS_AS(optics::derive_trap_params(2.5e-6, -1e-27, 7.8e-7, 1.4e-25),
                  std::domain_error);
  CHECK_THROWS_AS(optics::derive_trap_params(2.5e-6, 1e-27, 0.0, 1.4e-25),
                  std::domain_error);
}

TEST_CASE("focal length from numerical aperture") {
  auto s30 = spec30();
  CHECK(units::to_um(optics::lens_focal_length(
            s30, NaConvention::half_pitch_over_f)) ==
        doctest::Approx(104.16667).epsilon(1e-6));

  LensArraySpec s125;
  s125.pitch_m = units::from_um(125.0);
  s125.lens_diameter_m = units::from_um(100.0);
  s125.numerical_aperture = 0.05;
  CHECK(units::to_um(optics::lens_focal_length(
            s125, NaConvention::half_diameter_over_f)) ==
        doctest::Approx(1000.0).epsilon(1e-9));
}

TEST_CASE("lens array validation") {
  LensArraySpec bad = spec30();
  bad.lens_diameter_m = units::from_um(31.0);  // wider than the pitch
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = spec30();
  bad.numerical_aperture = 1.2;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
  bad = spec30();
  bad.demagnification = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("angle_to_shift: pitch-scale deflections on the 30 um register") {
  SteeringConfig steer;
  steer.telescope_magnification = 1.0;
  steer.deflector_range_rad = units::from_deg(20.0);
  auto s = spec30();

  CHECK(optics::angle_to_shift(0.0, s, steer) == 0.0);

  double full = optics::angle_to_shift(units::from_deg(16.4), s, steer);
  CHECK(units::to_um(full) == doctest::Approx(30.657917).epsilon(1e-6));
  CHECK(units::to_um(full) == doctest::Approx(30.0).epsilon(0.15));

  double half = optics::angle_to_shift(units::from_deg(8.2), s, steer);
  CHECK(units::to_um(half) == doctest::Approx(15.010646).epsilon(1e-6));
  CHECK(units::to_um(half) == doctest::Approx(15.0).epsilon(0.15));
}

TEST_CASE("angle_to_shift is odd and strictly increasing") {
  SteeringConfig steer;
  steer.telescope_magnification = 0.4;
  steer.deflector_range_rad = units::from_deg(10.0);
  auto s = spec30();
  double prev = -1e9;
  for (int i = -10; i <= 10; ++i) {
    double theta = units::from_deg(2.0 * i);
    double shift = optics::angle_to_shift(theta, s, steer);
    CHECK(shift == -optics::angle_to_shift(-theta, s, steer));
    CHECK(shift > prev);
    prev = shift;
  }
}

TEST_CASE("angle_to_shift range error names the reachable shift") {
  SteeringConfig steer;
  steer.telescope_magnification = 1.0;
  steer.deflector_range_rad = units::from_deg(10.0);
  auto s = spec30();
  CHECK_THROWS_AS(optics::angle_to_shift(units::from_deg(11.0), s, steer),
                  std::out_of_range);
  try {
    optics::angle_to_shift(units::from_deg(11.0), s, steer);
  } catch (const std::out_of_range& e) {
    CHECK(std::string(e.what()).find("maximum reachable") !=
          std::string::npos);
  }
  // demagnified telescope keeps the same mechanical angle usable
  steer.telescope_magnification = 0.4;
  CHECK_NOTHROW(optics::angle_to_shift(units::from_deg(11.0), s, steer));
}

TEST_CASE("piezo_shift translates within travel limits") {
  optics::RegisterPosition origin{0.0, 0.0};
  auto moved =
      optics::piezo_shift(origin, 0.0, units::from_um(30.6), units::from_um(30.6));
  CHECK(moved.offset_x_m == 0.0);
  CHECK(units::to_um(moved.offset_y_m) == doctest::Approx(30.6));

  auto same = optics::piezo_shift(origin, 0.0, 0.0, units::from_um(30.6));
  CHECK(same.offset_x_m == 0.0);
  CHECK(same.offset_y_m == 0.0);

  CHECK_THROWS_AS(optics::piezo_shift(origin, 0.0, units::from_um(31.0),
                                      units::from_um(30.6)),
                  std::out_of_range);
}

TEST_CASE("piezo_min_ramp_time scales with the resonance") {
  CHECK(optics::piezo_min_ramp_time(40e3, 10.0) == doctest::Approx(250e-6));
  CHECK(optics::piezo_min_ramp_time(40e3, 40.0) == doctest::Approx(1e-3));
  CHECK(optics::piezo_min_ramp_time(123.0, 1.0) == doctest::Approx(1.0 / 123.0));
  CHECK(optics::piezo_min_ramp_time(40e3, 40.0) < 1.01e-3);  // below 1 ms-ish
  CHECK_THROWS_AS(optics::piezo_min_ramp_time(40e3, 0.5), std::domain_error);
}

TEST_CASE("site_positions is row-major with demagnified spacing") {
  LensArraySpec s;
  s.pitch_m = units::from_um(125.0);
  s.lens_diameter_m = units::from_um(100.0);
  s.numerical_aperture = 0.05;
  s.rows = 2;
  s.cols = 3;
  s.demagnification = 125.0 / 55.0;
  CHECK(units::to_um(s.site_spacing_m()) == doctest::Approx(55.0));

  auto pos = optics::site_positions(s, {units::from_um(1.0), 0.0});
  REQUIRE(pos.size() == 6);
  CHECK(units::to_um(pos[0][0]) == doctest::Approx(1.0));
  CHECK(units::to_um(pos[1][0]) == doctest::Approx(56.0));   // col 1
  CHECK(units::to_um(pos[3][1]) == doctest::Approx(55.0));   // row 1
  CHECK(units::to_um(pos[5][0]) == doctest::Approx(111.0));  // row 1, col 2
}

TEST_CASE("pairwise site distances are invariant under rigid shifts") {
  auto s = spec30();
  auto a = optics::site_positions(s, {0.0, 0.0});
  auto b = optics::site_positions(
      s, optics::piezo_shift({0.0, 0.0}, units::from_um(7.0),
                             units::from_um(-3.0), units::from_um(30.6)));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      double da = std::hypot(a[i][0] - a[j][0], a[i][1] - a[j][1]);
      double db = std::hypot(b[i][0] - b[j][0], b[i][1] - b[j][1]);
      CHECK(da == doctest::Approx(db).epsilon(1e-12));
    }
}
