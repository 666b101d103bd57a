#pragma once

// Satellite pass geometry and optical loss budgets for the quantum (785 nm)
// and beacon (905 nm) downlinks.

#include <string_view>
#include <vector>

namespace qkdbench::orbitlink {

inline constexpr double kSpeedOfLightKmS = 299792.458;
inline constexpr double kEarthGmKm3S2 = 398600.4418;

struct OrbitConfig {
  double altitude_km = 500.0;
  double earth_radius_km = 6371.0;
  double min_elevation_deg = 10.0;
};

void validate(const OrbitConfig& orbit);

struct PassSample {
  double t_s = 0.0;  // seconds from culmination
  double elevation_deg = 0.0;
  double slant_range_km = 0.0;
  double radial_velocity_km_s = 0.0;
};

struct BeamConfig {
  double wavelength_nm = 785.0;
  double waist_radius_mm = 25.0;
  double m_squared = 1.0;
  // When > 0 this overrides the waist-derived divergence.
  double divergence_half_angle_urad = 0.0;
  // Interpret divergence_half_angle_urad as a full angle (halved on use).
  bool divergence_is_full_angle = false;
};

enum class ChannelKind { quantum, beacon };
enum class Band { quantum_785, beacon_905 };

std::string_view to_string(ChannelKind kind) noexcept;
std::string_view to_string(Band band) noexcept;
Band band_from_string(std::string_view name);

struct LossBudget {
  double tx_internal_db = 0.0;
  double geometric_db = 0.0;
  double turbulence_pointing_db = 0.0;
  double atmospheric_db = 0.0;
  double ogs_internal_db = 0.0;
  double detector_efficiency_db = 0.0;
  ChannelKind channel_kind = ChannelKind::quantum;
};

double slant_range(double elevation_deg, const OrbitConfig& orbit);

// Symmetric overhead pass sampled every timestep_s, clipped to min elevation.
std::vector<PassSample> pass_profile(const OrbitConfig& orbit, double timestep_s);

// Half-angle 1/e^2 divergence, radians.
double divergence_from_waist(const BeamConfig& beam);
// Effective half-angle divergence of a beam config, radians.
double effective_divergence(const BeamConfig& beam);

// Diffraction-limited Gaussian footprint captured by a centred aperture.
double geometric_transmission(double divergence_half_angle_rad, double distance_km,
                              double rx_diameter_m);
double geometric_loss_db(double divergence_half_angle_rad, double distance_km,
                         double rx_diameter_m);

// Two-anchor airmass interpolation, clamped to the anchors.
double atmospheric_loss_db(double elevation_deg, Band band);

double total_loss_db(const LossBudget& budget);

double doppler_relative_shift(double radial_velocity_km_s);

// Fixed (non-geometric, non-atmospheric) terms of a downlink budget.
struct LinkTerms {
  double tx_internal_db = 0.0;
  double turbulence_pointing_db = 3.0;
  double ogs_internal_db = 0.0;
  double detector_efficiency_db = 0.0;
  double rx_diameter_m = 0.7;
  BeamConfig beam;
  Band band = Band::quantum_785;
  ChannelKind kind = ChannelKind::quantum;
};

LinkTerms spoqc_quantum_link();
LinkTerms spoqc_beacon_link();

LossBudget budget_at(const LinkTerms& link, double elevation_deg, const OrbitConfig& orbit);

}  // namespace qkdbench::orbitlink
