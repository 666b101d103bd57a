#include <doctest.h>

#include <cmath>

#include "qkdbench/qbermodel.hpp"
#include "qkdbench/rng.hpp"

using namespace qkdbench::qbermodel;

TEST_CASE("error composition algebra") {
  const qkdbench::CounterRng rng{2024};
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const auto [a, b] = rng.uniform2(qkdbench::Stream::trial, i);
    const double c = rng.uniform(qkdbench::Stream::trial, i, 1);
    CHECK(std::fabs(combine_error(a, b) - combine_error(b, a)) <= 1e-12);
    CHECK(std::fabs(combine_error(combine_error(a, b), c) - combine_error(a, combine_error(b, c))) <= 1e-12);
    CHECK(std::fabs(combine_error(a, 0.0) - a) <= 1e-12);
    CHECK(std::fabs(combine_error(0.5, a) - 0.5) <= 1e-12);
  }
  CHECK(combine_error(0.015, 0.03) == doctest::Approx(0.0441).epsilon(1e-9));
}

TEST_CASE("qber composition from components") {
  CHECK(compose(0, 0, 0, 0, 0).qber == 0.0);
  CHECK(total_qber(0.015, 0.0) == doctest::Approx(0.015));
  const auto q = compose(0.01, 0.005, 0.0, 0.02, 0.01);
  CHECK(q.qber == doctest::Approx(combine_error(combine_error(0.01, 0.005), combine_error(0.0, 0.03))));
  CHECK(q.e_i == doctest::Approx(intrinsic_qber(0.01, 0.005)));
  CHECK(q.e_e == doctest::Approx(external_qber(0.0, 0.02, 0.01)));
}

TEST_CASE("duty cycle") {
  CHECK(duty_cycle(1.0, 25e6) == doctest::Approx(0.025));
  CHECK(duty_cycle(40.0, 25e6) == doctest::Approx(1.0));
  CHECK(duty_cycle(0.5, 100e6) == doctest::Approx(0.05));
}

TEST_CASE("gate capture fraction") {
  CHECK(gate_capture_fraction(0.9, 1e6, 0.0) == doctest::Approx(1.0));
  CHECK(gate_capture_fraction(0.9, 0.0, 0.0) == doctest::Approx(0.0));
  CHECK(gate_capture_fraction(0.9, 0.9, 0.0) == doctest::Approx(std::erf(kFwhmPerSigma / (2.0 * std::sqrt(2.0)))));
  CHECK(gate_capture_fraction(0.9, 0.9, 0.0) == doctest::Approx(0.7610).epsilon(1e-3));
  CHECK(sigma_total_ns(0.9, 0.3) == doctest::Approx(std::hypot(0.9 / kFwhmPerSigma, 0.3)));
  double prev = 0.0;
  for (double g = 0.1; g < 5.0; g += 0.1) {
    const double c = gate_capture_fraction(0.9, g, 0.015);
    CHECK(c > prev);
    prev = c;
  }
}

TEST_CASE("effective signal-to-noise ratio") {
  SignalModel m;
  m.mu = 0.1;
  m.total_loss_db = 30.0;
  m.noise_rate_hz = 2700.0;
  m.gate_width_ns = 1000.0;  // capture ~1 but keep the noise on a 1 ns gate below
  CHECK(signal_per_gate(m) == doctest::Approx(1e-4).epsilon(0.06));
  m.gate_width_ns = 1.0;
  m.pulse_fwhm_ns = 1e-3;
  CHECK(noise_per_gate(m) == doctest::Approx(2.7e-6).epsilon(1e-3));
  CHECK(esnr(m) == doctest::Approx(37.0).epsilon(0.03));
  const double base = esnr(m);
  m.total_loss_db += 10.0;
  CHECK(esnr(m) == doctest::Approx(base / 10.0).epsilon(2e-3));
  m.total_loss_db -= 10.0;
  m.gate_width_ns = 2.0;
  CHECK(esnr(m) == doctest::Approx(base / 2.0).epsilon(1e-6));
  m.noise_rate_hz = 0.0;
  CHECK(std::isinf(esnr(m)));
  m.mu = 0.0;
  CHECK_THROWS(validate(m));
}

TEST_CASE("qber from esnr") {
  CHECK(qber_from_esnr(1.0, 0.0) == doctest::Approx(0.25));
  CHECK(qber_from_esnr(9.0, 0.0) == doctest::Approx(0.05));
  CHECK(qber_from_esnr(kInfiniteEsnr, 0.015) == doctest::Approx(0.015));
  CHECK(qber_from_esnr(1e12, 0.015) == doctest::Approx(0.015));
  double prev = 0.5;
  for (double e = 0.01; e < 1e4; e *= 1.5) {
    const double q = qber_from_esnr(e, 0.015);
    CHECK(q < prev);
    prev = q;
  }
}
