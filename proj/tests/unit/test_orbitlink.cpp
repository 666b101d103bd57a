#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qkdbench/orbitlink.hpp"

using namespace qkdbench::orbitlink;

namespace {

// Independent root of |sat - station| for the station-centre-satellite triangle.
double range_by_bisection(double elevation_deg, const OrbitConfig& o) {
  const double e = elevation_deg * std::numbers::pi / 180.0;
  const double r = o.earth_radius_km + o.altitude_km;
  double lo = 0.0;
  double hi = 2.0 * r;
  for (int i = 0; i < 200; ++i) {
    const double d = 0.5 * (lo + hi);
    const double x = d * std::cos(e);
    const double y = o.earth_radius_km + d * std::sin(e);
    (std::hypot(x, y) < r ? lo : hi) = d;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("slant range closed form") {
  const OrbitConfig o;
  CHECK(slant_range(90.0, o) == doctest::Approx(500.0).epsilon(1e-12));
  CHECK(slant_range(10.0, o) == doctest::Approx(1695.0).epsilon(2e-3));
  CHECK(slant_range(0.0, o) == doctest::Approx(2574.0).epsilon(1e-3));
  for (double e : {0.0, 5.0, 10.0, 33.0, 60.0, 89.0})
    CHECK(slant_range(e, o) == doctest::Approx(range_by_bisection(e, o)).epsilon(1e-9));
  CHECK_THROWS(slant_range(-1.0, o));
  CHECK_THROWS(slant_range(91.0, o));
}

TEST_CASE("slant range decreases with elevation") {
  const OrbitConfig o;
  double prev = slant_range(0.0, o);
  for (double e = 1.0; e <= 90.0; e += 1.0) {
    const double d = slant_range(e, o);
    CHECK(d < prev);
    CHECK(d >= o.altitude_km - 1e-9);
    prev = d;
  }
}

TEST_CASE("pass profile is symmetric about culmination") {
  const OrbitConfig o;
  const auto pass = pass_profile(o, 1.0);
  REQUIRE(pass.size() % 2 == 1);
  const auto& mid = pass[pass.size() / 2];
  CHECK(mid.t_s == 0.0);
  CHECK(mid.elevation_deg == doctest::Approx(90.0));
  CHECK(mid.slant_range_km == doctest::Approx(500.0));
  CHECK(std::fabs(mid.radial_velocity_km_s) < 1e-6);
  double vmax = 0.0;
  for (const auto& s : pass) {
    vmax = std::max(vmax, std::fabs(s.radial_velocity_km_s));
    CHECK(s.elevation_deg >= o.min_elevation_deg);
    CHECK(s.slant_range_km == doctest::Approx(slant_range(s.elevation_deg, o)).epsilon(1e-9));
  }
  CHECK(vmax > 5.0);
  CHECK(vmax < 8.0);
  CHECK(pass.front().elevation_deg == doctest::Approx(o.min_elevation_deg).epsilon(0.01));
  CHECK(pass.front().elevation_deg - o.min_elevation_deg < 0.1);
  for (std::size_t i = 0; i < pass.size(); ++i) {
    const auto& a = pass[i];
    const auto& b = pass[pass.size() - 1 - i];
    CHECK(a.elevation_deg == doctest::Approx(b.elevation_deg));
    CHECK(a.radial_velocity_km_s == doctest::Approx(-b.radial_velocity_km_s).epsilon(1e-6));
  }
}

TEST_CASE("radial velocity is the derivative of range") {
  const OrbitConfig o;
  const auto pass = pass_profile(o, 0.5);
  for (std::size_t i = 1; i + 1 < pass.size(); i += 37) {
    const double fd = (pass[i + 1].slant_range_km - pass[i - 1].slant_range_km) / 1.0;
    CHECK(pass[i].radial_velocity_km_s == doctest::Approx(fd).epsilon(1e-3));
  }
}

TEST_CASE("diffraction divergence") {
  BeamConfig b;
  b.wavelength_nm = 785.0;
  b.waist_radius_mm = 25.0;
  const double t1 = divergence_from_waist(b);
  CHECK(t1 * 1e6 == doctest::Approx(9.995).epsilon(1e-3));
  b.m_squared = 2.0;
  CHECK(divergence_from_waist(b) == doctest::Approx(2.0 * t1));
  b.m_squared = 1.0;
  b.wavelength_nm = 905.0;
  CHECK(divergence_from_waist(b) / t1 == doctest::Approx(905.0 / 785.0));
  b.divergence_half_angle_urad = 18.7;
  CHECK(effective_divergence(b) == doctest::Approx(18.7e-6));
  b.divergence_is_full_angle = true;
  CHECK(effective_divergence(b) == doctest::Approx(9.35e-6));
}

TEST_CASE("geometric transmission") {
  // Footprint radius equal to the aperture diameter.
  const double theta = std::atan(0.7 / 500e3);
  CHECK(geometric_transmission(theta, 500.0, 0.7) == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-9));
  CHECK(geometric_loss_db(theta, 500.0, 0.7) == doctest::Approx(4.05).epsilon(2e-3));
  // Far field: T ~ D^2 / (2 R^2).
  const double t = geometric_transmission(5e-6, 500.0, 0.7);
  CHECK(t == doctest::Approx(0.49 / (2.0 * 2.5 * 2.5)).epsilon(0.01));
  const double span = geometric_loss_db(10e-6, 1700.0, 0.7) - geometric_loss_db(10e-6, 500.0, 0.7);
  CHECK(span == doctest::Approx(20.0 * std::log10(1700.0 / 500.0)).epsilon(0.01));
  CHECK_THROWS(geometric_transmission(0.0, 500.0, 0.7));
  CHECK_THROWS(geometric_transmission(1e-5, 0.0, 0.7));
}

TEST_CASE("atmospheric loss anchors") {
  CHECK(atmospheric_loss_db(90.0, Band::quantum_785) == doctest::Approx(2.5));
  CHECK(atmospheric_loss_db(10.0, Band::quantum_785) == doctest::Approx(7.9));
  CHECK(atmospheric_loss_db(90.0, Band::beacon_905) == doctest::Approx(0.2));
  CHECK(atmospheric_loss_db(10.0, Band::beacon_905) == doctest::Approx(7.9));
  const double mid_airmass = 0.5 * (1.0 + 1.0 / std::sin(10.0 * std::numbers::pi / 180.0));
  const double e_mid = std::asin(1.0 / mid_airmass) * 180.0 / std::numbers::pi;
  CHECK(atmospheric_loss_db(e_mid, Band::quantum_785) == doctest::Approx(0.5 * (2.5 + 7.9)));
  double prev = 0.0;
  for (double e = 90.0; e >= 10.0; e -= 5.0) {
    const double l = atmospheric_loss_db(e, Band::quantum_785);
    CHECK(l >= prev);
    prev = l;
  }
  CHECK(band_from_string(to_string(Band::beacon_905)) == Band::beacon_905);
  CHECK_THROWS(band_from_string("uv"));
}

TEST_CASE("loss budget totals") {
  CHECK(total_loss_db(LossBudget{}) == 0.0);
  LossBudget best{0.0, 17.1, 3.0, 2.5, 3.8, 2.2, ChannelKind::quantum};
  LossBudget worst{0.0, 27.7, 3.0, 7.9, 3.8, 2.2, ChannelKind::quantum};
  CHECK(total_loss_db(best) == doctest::Approx(28.6));
  CHECK(total_loss_db(worst) == doctest::Approx(44.6));
  const OrbitConfig o;
  const auto link = spoqc_quantum_link();
  const auto b = budget_at(link, 45.0, o);
  CHECK(total_loss_db(b) == doctest::Approx(b.geometric_db + b.atmospheric_db + 3.0 + 3.8 + 2.2));
  CHECK(total_loss_db(budget_at(link, 10.0, o)) > total_loss_db(budget_at(link, 90.0, o)));
  // Beacon geometric excess over the quantum beam tracks the divergence ratio.
  const double excess = budget_at(spoqc_beacon_link(), 90.0, o).geometric_db - budget_at(link, 90.0, o).geometric_db;
  CHECK(excess == doctest::Approx(20.0 * std::log10(18.7 / 10.0)).epsilon(0.02));
}

TEST_CASE("doppler shift") {
  CHECK(doppler_relative_shift(0.0) == 0.0);
  CHECK(doppler_relative_shift(10.0) == doctest::Approx(3.3356e-5).epsilon(1e-4));
  CHECK(doppler_relative_shift(-10.0) == doctest::Approx(-3.3356e-5).epsilon(1e-4));
  CHECK(doppler_relative_shift(5.0) == doctest::Approx(1.668e-5).epsilon(1e-3));
  CHECK_THROWS(doppler_relative_shift(100.0));
}
