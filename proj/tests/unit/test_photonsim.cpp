#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qkdbench/photonsim.hpp"

using namespace qkdbench;
using namespace qkdbench::photonsim;

namespace {

SimConfig quiet(std::uint64_t n) {
  SimConfig c;
  c.n_pulses = n;
  c.background_rate_hz = 0.0;
  c.dark_count_rate_hz = 0.0;
  return c;
}

bool within_sigma(double observed, double n, double p, double k = 3.0) {
  return std::fabs(observed - n * p) <= k * std::sqrt(n * p * (1.0 - p));
}

}  // namespace

TEST_CASE("detector helpers round-trip") {
  for (auto b : {Basis::Z, Basis::X})
    for (bool v : {false, true}) {
      const auto d = detector_for(b, v);
      CHECK(basis_of(d) == b);
      CHECK(value_of(d) == v);
      CHECK(detector_from_char(to_char(d)) == d);
    }
  CHECK(to_char(Detector::B) == 'B');
  for (auto o : {Origin::signal, Origin::background, Origin::dark, Origin::beacon})
    CHECK(origin_from_string(to_string(o)) == o);
  CHECK_THROWS(detector_from_char('Q'));
}

TEST_CASE("config validation") {
  SimConfig c;
  CHECK_NOTHROW(validate(c));
  c.intensity_schedule = {{0.5, 0.72}, {0.08, 0.18}, {0.0, 0.1}};
  CHECK_NOTHROW(validate(c));
  c.intensity_schedule = {{0.5, 0.7}, {0.08, 0.18}, {0.0, 0.1}};
  CHECK_THROWS(validate(c));
  c.intensity_schedule.clear();
  c.mu = 3.0;
  CHECK_THROWS(validate(c));
  c.mu = 0.1;
  c.basis_bias_px = 1.5;
  CHECK_THROWS(validate(c));
}

TEST_CASE("transmitter stream") {
  SimConfig c;
  c.n_pulses = 1'000'000;
  c.basis_bias_px = 0.9;
  const auto tx = generate_tx_stream(c);
  REQUIRE(tx.size() == c.n_pulses);
  std::size_t x = 0;
  std::size_t ones = 0;
  for (const auto& r : tx) {
    x += r.basis == Basis::X;
    ones += r.bit;
    CHECK(r.intensity_class == 0);
  }
  CHECK(within_sigma(static_cast<double>(x), 1e6, 0.9));
  CHECK(within_sigma(static_cast<double>(ones), 1e6, 0.5));
  CHECK(tx == generate_tx_stream(c));
  const TxSource src{c};
  CHECK(src.at(123456) == tx[123456]);
  c.seed = 2;
  CHECK(tx != generate_tx_stream(c));
}

TEST_CASE("intensity classes follow their probabilities") {
  SimConfig c;
  c.n_pulses = 200'000;
  c.intensity_schedule = {{0.5, 0.72}, {0.08, 0.18}, {0.0, 0.1}};
  std::array<double, 3> n{};
  for (const auto& r : generate_tx_stream(c)) n[r.intensity_class] += 1.0;
  CHECK(within_sigma(n[0], 2e5, 0.72));
  CHECK(within_sigma(n[1], 2e5, 0.18));
  CHECK(within_sigma(n[2], 2e5, 0.10));
}

TEST_CASE("infinite loss and no noise produce no records") {
  auto c = quiet(100'000);
  c.total_loss_db = 400.0;
  CHECK(simulate_channel(c).detections.empty());
}

TEST_CASE("lossless clicks follow the Poisson complement") {
  auto c = quiet(1'000'000);
  c.total_loss_db = 0.0;
  const auto run = simulate_channel(c);
  CHECK(within_sigma(static_cast<double>(run.detections.size()), 1e6, 1.0 - std::exp(-0.1)));
  for (std::size_t i = 0; i < run.detections.size(); i += 997) CHECK(run.detections.origin[i] == Origin::signal);
}

TEST_CASE("noise counts match the configured rates") {
  SimConfig c;
  c.n_pulses = 25'000'000;  // 1 s at 25 MHz
  c.mu = 0.0;
  c.background_rate_hz = 2700.0;
  c.dark_count_rate_hz = 2300.0;
  const auto run = simulate_channel(c);
  const double n = static_cast<double>(run.detections.size());
  CHECK(std::fabs(n - 5000.0) <= 3.0 * std::sqrt(5000.0));
  double bg = 0.0;
  std::array<double, 4> per_detector{};
  for (std::size_t i = 0; i < run.detections.size(); ++i) {
    bg += run.detections.origin[i] == Origin::background;
    per_detector[static_cast<std::size_t>(run.detections.detector[i])] += 1.0;
  }
  CHECK(within_sigma(bg, n, 0.54));
  for (double d : per_detector) CHECK(within_sigma(d, n, 0.25, 4.0));
}

TEST_CASE("output is independent of thread count and block size") {
  SimConfig c;
  c.n_pulses = 3'000'000;
  c.total_loss_db = 15.0;
  c.background_rate_hz = 2e5;
  c.dead_time_ns = 50.0;
  const auto ref = simulate_channel(c, 1);
  CHECK(ref.detections.size() > 1000);
  CHECK(simulate_channel(c, 4).detections == ref.detections);
  c.block_pulses = 12345;
  const auto other = simulate_channel(c, 3);
  CHECK(other.detections == ref.detections);
  CHECK(other.pulses_per_class == ref.pulses_per_class);
  for (std::size_t i = 1; i < ref.detections.size(); ++i)
    CHECK(ref.detections.timestamp_ps[i - 1] <= ref.detections.timestamp_ps[i]);
}

TEST_CASE("dead time removes clicks closer than the hold-off") {
  SimConfig c;
  c.n_pulses = 1'000'000;
  c.total_loss_db = 3.0;
  c.dead_time_ns = 100.0;
  const auto run = simulate_channel(c);
  std::array<double, 5> last{-1e300, -1e300, -1e300, -1e300, -1e300};
  for (std::size_t i = 0; i < run.detections.size(); ++i) {
    const auto d = static_cast<std::size_t>(run.detections.detector[i]);
    CHECK(run.detections.timestamp_ps[i] - last[d] >= 100e3);
    last[d] = run.detections.timestamp_ps[i];
  }
}

TEST_CASE("clock distortion") {
  DetectionLog log;
  log.push_back({0.0, Detector::H, Origin::signal});
  log.push_back({5e11, Detector::V, Origin::dark});
  log.push_back({1e12, Detector::D, Origin::background});
  const CounterRng rng{1};
  CHECK(apply_clock_distortion(log, {}, rng) == log);
  const auto drifted = apply_clock_distortion(log, {3.3e-5, 0.0, 0.0}, rng);
  CHECK(drifted.timestamp_ps[2] - log.timestamp_ps[2] == doctest::Approx(33e6));
  const auto shifted = apply_clock_distortion(log, {0.0, 1e9, 0.0}, rng);
  for (std::size_t i = 0; i < log.size(); ++i) CHECK(shifted.timestamp_ps[i] == log.timestamp_ps[i] + 1e9);
  CHECK_THROWS(apply_clock_distortion(log, {1e-2, 0.0, 0.0}, rng));
}

TEST_CASE("event csv round trip") {
  SimConfig c;
  c.n_pulses = 200'000;
  c.total_loss_db = 10.0;
  const auto run = simulate_channel(c);
  std::stringstream ss;
  write_detections_csv(ss, run.detections);
  const std::string text = ss.str();
  CHECK(text.rfind("timestamp_ps,detector,origin\n", 0) == 0);
  CHECK(read_detections_csv(ss) == run.detections);
  std::stringstream bad{"timestamp_ps,detector,origin\n1.0,Q,signal\n"};
  CHECK_THROWS(read_detections_csv(bad));
}

TEST_CASE("tx csv header") {
  SimConfig c;
  c.n_pulses = 3;
  std::stringstream ss;
  write_tx_csv(ss, generate_tx_stream(c));
  std::string header;
  std::getline(ss, header);
  CHECK(header == "index,basis,bit,class");
  int rows = 0;
  for (std::string line; std::getline(ss, line);) ++rows;
  CHECK(rows == 3);
}
