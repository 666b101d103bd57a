#include "qkdbench/orbitlink.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qkdbench::orbitlink {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct AtmosphereAnchors {
  double zenith_db;
  double low_db;  // at the low-elevation anchor
};

constexpr double kLowAnchorElevationDeg = 10.0;

AtmosphereAnchors anchors(Band band) {
  switch (band) {
    case Band::quantum_785: return {2.5, 7.9};
    case Band::beacon_905: return {0.2, 7.9};
  }
  throw std::invalid_argument("unknown band");
}

// Geocentric angle between station and sub-satellite point at a given elevation.
double central_angle(double elevation_deg, const OrbitConfig& orbit) {
  const double e = elevation_deg * kDeg;
  const double r = orbit.earth_radius_km + orbit.altitude_km;
  return std::numbers::pi / 2 - e - std::asin(orbit.earth_radius_km * std::cos(e) / r);
}

struct Geometry {
  double range_km;
  double elevation_deg;
};

Geometry geometry_at_angle(double phi, const OrbitConfig& orbit) {
  const double r = orbit.earth_radius_km + orbit.altitude_km;
  const double dx = r * std::sin(phi);
  const double dy = r * std::cos(phi) - orbit.earth_radius_km;
  const double d = std::hypot(dx, dy);
  return {d, std::asin(std::clamp(dy / d, -1.0, 1.0)) / kDeg};
}

}  // namespace

std::string_view to_string(ChannelKind kind) noexcept {
  return kind == ChannelKind::quantum ? "quantum" : "beacon";
}

std::string_view to_string(Band band) noexcept {
  return band == Band::quantum_785 ? "quantum_785" : "beacon_905";
}

Band band_from_string(std::string_view name) {
  if (name == "quantum_785") return Band::quantum_785;
  if (name == "beacon_905") return Band::beacon_905;
  throw std::invalid_argument("unknown band: " + std::string{name});
}

void validate(const OrbitConfig& orbit) {
  if (!(orbit.altitude_km > 0.0)) throw std::invalid_argument("altitude_km must be positive");
  if (!(orbit.earth_radius_km > 0.0)) throw std::invalid_argument("earth_radius_km must be positive");
  if (!(orbit.min_elevation_deg > 0.0 && orbit.min_elevation_deg < 90.0))
    throw std::invalid_argument("min_elevation_deg must lie in (0, 90)");
}

double slant_range(double elevation_deg, const OrbitConfig& orbit) {
  if (!(elevation_deg >= 0.0 && elevation_deg <= 90.0))
    throw std::invalid_argument("elevation must lie in [0, 90] degrees");
  const double re = orbit.earth_radius_km;
  const double r = re + orbit.altitude_km;
  const double e = elevation_deg * kDeg;
  const double c = std::cos(e);
  return std::sqrt(r * r - re * re * c * c) - re * std::sin(e);
}

std::vector<PassSample> pass_profile(const OrbitConfig& orbit, double timestep_s) {
  validate(orbit);
  if (!(timestep_s > 0.0)) throw std::invalid_argument("timestep must be positive");
  const double r = orbit.earth_radius_km + orbit.altitude_km;
  const double omega = std::sqrt(kEarthGmKm3S2 / (r * r * r));
  const double t_max = central_angle(orbit.min_elevation_deg, orbit) / omega;
  const auto k_max = static_cast<long>(std::floor(t_max / timestep_s + 1e-9));

  auto range_at = [&](double t) { return geometry_at_angle(omega * t, orbit).range_km; };

  std::vector<PassSample> out;
  out.reserve(static_cast<std::size_t>(2 * k_max + 1));
  for (long k = -k_max; k <= k_max; ++k) {
    const double t = static_cast<double>(k) * timestep_s;
    const Geometry g = geometry_at_angle(omega * t, orbit);
    if (g.elevation_deg < orbit.min_elevation_deg) continue;
    const double v = (range_at(t + timestep_s) - range_at(t - timestep_s)) / (2.0 * timestep_s);
    out.push_back({t, g.elevation_deg, g.range_km, v});
  }
  return out;
}

double divergence_from_waist(const BeamConfig& beam) {
  if (!(beam.waist_radius_mm > 0.0)) throw std::invalid_argument("waist radius must be positive");
  if (!(beam.m_squared >= 1.0)) throw std::invalid_argument("M^2 must be at least 1");
  const double lambda_m = beam.wavelength_nm * 1e-9;
  const double w0_m = beam.waist_radius_mm * 1e-3;
  return lambda_m / (std::numbers::pi * w0_m) * beam.m_squared;
}

double effective_divergence(const BeamConfig& beam) {
  if (beam.divergence_half_angle_urad > 0.0) {
    const double theta = beam.divergence_half_angle_urad * 1e-6;
    return beam.divergence_is_full_angle ? theta / 2.0 : theta;
  }
  return divergence_from_waist(beam);
}

double geometric_transmission(double divergence_half_angle_rad, double distance_km,
                              double rx_diameter_m) {
  if (!(distance_km > 0.0)) throw std::invalid_argument("distance must be positive");
  if (!(divergence_half_angle_rad > 0.0)) throw std::invalid_argument("divergence must be positive");
  if (!(rx_diameter_m > 0.0)) throw std::invalid_argument("aperture must be positive");
  const double footprint_m = std::tan(divergence_half_angle_rad) * distance_km * 1e3;
  const double x = rx_diameter_m * rx_diameter_m / (2.0 * footprint_m * footprint_m);
  return -std::expm1(-x);
}

double geometric_loss_db(double divergence_half_angle_rad, double distance_km,
                         double rx_diameter_m) {
  return -10.0 * std::log10(geometric_transmission(divergence_half_angle_rad, distance_km, rx_diameter_m));
}

double atmospheric_loss_db(double elevation_deg, Band band) {
  if (!(elevation_deg > 0.0 && elevation_deg <= 90.0))
    throw std::invalid_argument("elevation must lie in (0, 90] degrees");
  const AtmosphereAnchors a = anchors(band);
  const double low_airmass = 1.0 / std::sin(kLowAnchorElevationDeg * kDeg);
  const double airmass = std::clamp(1.0 / std::sin(elevation_deg * kDeg), 1.0, low_airmass);
  const double frac = (airmass - 1.0) / (low_airmass - 1.0);
  return a.zenith_db + frac * (a.low_db - a.zenith_db);
}

double total_loss_db(const LossBudget& b) {
  return b.tx_internal_db + b.geometric_db + b.turbulence_pointing_db + b.atmospheric_db +
         b.ogs_internal_db + b.detector_efficiency_db;
}

double doppler_relative_shift(double radial_velocity_km_s) {
  if (!(std::fabs(radial_velocity_km_s) < 30.0))
    throw std::invalid_argument("radial velocity outside the +-30 km/s sanity bound");
  return radial_velocity_km_s / kSpeedOfLightKmS;
}

LinkTerms spoqc_quantum_link() {
  LinkTerms link;
  link.tx_internal_db = 0.0;
  link.turbulence_pointing_db = 3.0;
  link.ogs_internal_db = 3.8;
  link.detector_efficiency_db = 2.2;
  link.rx_diameter_m = 0.7;
  link.beam.wavelength_nm = 785.0;
  link.beam.divergence_half_angle_urad = 10.0;
  link.band = Band::quantum_785;
  link.kind = ChannelKind::quantum;
  return link;
}

LinkTerms spoqc_beacon_link() {
  LinkTerms link;
  link.tx_internal_db = 3.0;
  link.turbulence_pointing_db = 3.0;
  link.ogs_internal_db = 3.0;
  link.detector_efficiency_db = 0.0;
  link.rx_diameter_m = 0.7;
  link.beam.wavelength_nm = 905.0;
  link.beam.divergence_half_angle_urad = 18.7;
  link.band = Band::beacon_905;
  link.kind = ChannelKind::beacon;
  return link;
}

LossBudget budget_at(const LinkTerms& link, double elevation_deg, const OrbitConfig& orbit) {
  LossBudget b;
  b.channel_kind = link.kind;
  b.tx_internal_db = link.tx_internal_db;
  b.turbulence_pointing_db = link.turbulence_pointing_db;
  b.ogs_internal_db = link.ogs_internal_db;
  b.detector_efficiency_db = link.detector_efficiency_db;
  b.geometric_db = geometric_loss_db(effective_divergence(link.beam), slant_range(elevation_deg, orbit),
                                     link.rx_diameter_m);
  b.atmospheric_db = atmospheric_loss_db(elevation_deg, link.band);
  return b;
}

}  // namespace qkdbench::orbitlink
