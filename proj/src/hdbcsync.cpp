#include "qkdbench/hdbcsync.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qkdbench/kernels.hpp"

namespace qkdbench::hdbcsync {

namespace {

// Above this many erasures in the best k-span, fall back to a full scan.
constexpr int kMaxEnumeratedErasures = 12;

// Fixed per-node edge preference for the Eulerian circuit.
bool prefers_one(std::uint64_t node) noexcept {
  std::uint64_t z = node + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return (z ^ (z >> 31)) & 1u;
}

bool consistent(std::span<const BeaconSymbol> w, const DeBruijnIndex& index, std::uint64_t start) {
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] == BeaconSymbol::erased) continue;
    if (index.bit(start + j) != static_cast<std::uint8_t>(w[j])) return false;
  }
  return true;
}

IndexResult finish(std::vector<std::uint32_t>& hits) {
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  IndexResult r;
  r.placements = hits.size();
  if (hits.empty()) {
    r.status = IndexStatus::no_match;
  } else if (hits.size() == 1) {
    r.status = IndexStatus::ok;
    r.index = hits.front();
  } else {
    r.status = IndexStatus::ambiguous_window;
    r.index = hits.front();
  }
  return r;
}

}  // namespace

void validate(const HdbcConfig& c) {
  if (c.order_k < 2 || c.order_k > 24) throw std::invalid_argument("de Bruijn order must lie in [2, 24]");
  if (!(c.beacon_rate_hz > 0.0)) throw std::invalid_argument("beacon rate must be positive");
  if (!(c.ppm_offset_fraction > 0.0 && c.ppm_offset_fraction < 0.5))
    throw std::invalid_argument("ppm_offset_fraction must lie in (0, 0.5)");
}

double beacon_period_ps(const HdbcConfig& c) { return 1e12 / c.beacon_rate_hz; }

std::vector<std::uint8_t> debruijn_sequence(int order_k) {
  if (order_k < 2 || order_k > 24) throw std::invalid_argument("de Bruijn order must lie in [2, 24]");
  // Eulerian circuit of the order-(k-1) de Bruijn graph; each node leaves by
  // its hashed preference first, which avoids the long near-repeats of
  // lexicographic and linear constructions.
  const std::size_t length = std::size_t{1} << order_k;
  const std::uint32_t mask = static_cast<std::uint32_t>(length / 2 - 1);
  std::vector<std::uint8_t> used(length / 2, 0);
  std::vector<std::uint32_t> node_stack{0};
  std::vector<std::uint8_t> bit_stack{0};
  std::vector<std::uint8_t> circuit;
  circuit.reserve(length);
  while (!node_stack.empty()) {
    const std::uint32_t v = node_stack.back();
    if (used[v] < 2) {
      const auto b = static_cast<std::uint8_t>(prefers_one(v) ^ (used[v] == 1));
      ++used[v];
      node_stack.push_back(((v << 1) | b) & mask);
      bit_stack.push_back(b);
    } else {
      node_stack.pop_back();
      if (!node_stack.empty()) circuit.push_back(bit_stack.back());
      bit_stack.pop_back();
    }
  }
  std::reverse(circuit.begin(), circuit.end());
  // Rotate so the sequence opens with k zeros.
  std::size_t zero_run = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < 2 * length; ++i) {
    zero_run = circuit[i % length] ? 0 : zero_run + 1;
    if (zero_run == static_cast<std::size_t>(order_k)) {
      start = (i + 1 - zero_run) % length;
      break;
    }
  }
  std::vector<std::uint8_t> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = circuit[(start + i) % length];
  return out;
}

DeBruijnIndex::DeBruijnIndex(int order_k) : k_{order_k}, seq_{debruijn_sequence(order_k)} {
  pos_.assign(seq_.size(), 0);
  const std::uint32_t mask = static_cast<std::uint32_t>(seq_.size() - 1);
  std::uint32_t v = 0;
  for (int j = 0; j < k_; ++j) v = (v << 1) | seq_[static_cast<std::size_t>(j)];
  for (std::size_t i = 0; i < seq_.size(); ++i) {
    pos_[v] = static_cast<std::uint32_t>(i);
    v = ((v << 1) & mask) | bit(i + static_cast<std::size_t>(k_));
  }
}

std::uint32_t DeBruijnIndex::window_at(std::uint64_t i) const noexcept {
  std::uint32_t v = 0;
  for (int j = 0; j < k_; ++j) v = (v << 1) | bit(i + static_cast<std::uint64_t>(j));
  return v;
}

std::vector<double> encode_beacon(std::span<const std::uint8_t> bits, const HdbcConfig& config,
                                  double start_ps) {
  validate(config);
  if (bits.empty()) throw std::invalid_argument("encode_beacon: empty bit sequence");
  const double period = beacon_period_ps(config);
  std::vector<double> out(bits.size());
  for (std::size_t m = 0; m < bits.size(); ++m)
    out[m] = start_ps + static_cast<double>(m) * period +
             (bits[m] ? config.ppm_offset_fraction * period : 0.0);
  return out;
}

std::vector<std::uint8_t> decode_bits(std::span<const double> timestamps, const HdbcConfig& config,
                                      double start_ps) {
  validate(config);
  const double period = beacon_period_ps(config);
  const double f = config.ppm_offset_fraction;
  std::vector<std::uint8_t> out(timestamps.size());
  for (std::size_t m = 0; m < timestamps.size(); ++m) {
    const double phase = (timestamps[m] - start_ps) / period - static_cast<double>(m);
    out[m] = std::fabs(phase - f) < std::fabs(phase) ? 1 : 0;
  }
  return out;
}

IndexResult decode_index(std::span<const BeaconSymbol> window, const DeBruijnIndex& index) {
  const auto k = static_cast<std::size_t>(index.order());
  const std::size_t length = index.length();
  if (window.size() < k) {
    IndexResult r;
    r.status = IndexStatus::ambiguous_window;
    r.placements = std::size_t{1} << std::min<std::size_t>(k - window.size(), 62);
    return r;
  }

  // k-span with the fewest erasures.
  std::size_t best = 0;
  int best_erased = 0;
  int erased = 0;
  for (std::size_t j = 0; j < k; ++j) erased += window[j] == BeaconSymbol::erased;
  best_erased = erased;
  for (std::size_t s = 1; s + k <= window.size(); ++s) {
    erased += (window[s + k - 1] == BeaconSymbol::erased) - (window[s - 1] == BeaconSymbol::erased);
    if (erased < best_erased) {
      best_erased = erased;
      best = s;
    }
  }

  std::vector<std::uint32_t> hits;
  if (best_erased <= kMaxEnumeratedErasures) {
    std::vector<std::size_t> holes;
    std::uint32_t known = 0;
    for (std::size_t j = 0; j < k; ++j) {
      known <<= 1;
      if (window[best + j] == BeaconSymbol::erased)
        holes.push_back(k - 1 - j);
      else
        known |= static_cast<std::uint32_t>(window[best + j]);
    }
    for (std::uint32_t fill = 0; fill < (1u << holes.size()); ++fill) {
      std::uint32_t v = known;
      for (std::size_t h = 0; h < holes.size(); ++h)
        if (fill >> h & 1u) v |= 1u << holes[h];
      const std::uint64_t span_pos = index.position_of(v);
      const std::uint64_t start = (span_pos + length - best % length) % length;
      if (consistent(window, index, start)) hits.push_back(static_cast<std::uint32_t>(start));
    }
  } else {
    for (std::uint64_t start = 0; start < length; ++start)
      if (consistent(window, index, start)) hits.push_back(static_cast<std::uint32_t>(start));
  }
  return finish(hits);
}

WindowObservation observe_window(std::span<const double> rx_ps, const HdbcConfig& config) {
  validate(config);
  WindowObservation obs;
  if (rx_ps.empty()) return obs;
  const double period = beacon_period_ps(config);
  const double f = config.ppm_offset_fraction;
  const double guard = f / 2.0;

  std::vector<int> delta(rx_ps.size(), 0);
  obs.period_of_pulse.assign(rx_ps.size(), -1);
  int ups = 0;
  int downs = 0;
  std::int64_t last_period = 0;
  for (std::size_t j = 0; j < rx_ps.size(); ++j) {
    const double x = (rx_ps[j] - rx_ps[0]) / period;
    const double r = x - std::round(x);
    int d = 0;
    double dist = std::fabs(r);
    for (int cand : {-1, 1}) {
      const double dc = std::fabs(r - cand * f);
      if (dc < dist) {
        dist = dc;
        d = cand;
      }
    }
    if (dist > guard) continue;
    const auto n = static_cast<std::int64_t>(std::llround(x - d * f));
    if (n < 0) continue;
    delta[j] = d;
    obs.period_of_pulse[j] = n;
    last_period = std::max(last_period, n);
    ups += d == 1;
    downs += d == -1;
  }

  int b0 = 0;
  obs.first_bit_known = ups > 0 || downs > 0;
  if (downs > ups) b0 = 1;

  obs.symbols.assign(static_cast<std::size_t>(last_period) + 1, BeaconSymbol::erased);
  std::vector<std::uint8_t> hits(obs.symbols.size(), 0);
  for (std::size_t j = 0; j < rx_ps.size(); ++j) {
    const std::int64_t n = obs.period_of_pulse[j];
    if (n < 0) continue;
    const int b = b0 + delta[j];
    if (b < 0 || b > 1) {
      obs.period_of_pulse[j] = -1;
      continue;
    }
    auto& slot = obs.symbols[static_cast<std::size_t>(n)];
    if (hits[static_cast<std::size_t>(n)]++ == 0) {
      slot = static_cast<BeaconSymbol>(b);
    } else {
      slot = BeaconSymbol::erased;
    }
  }
  // Periods that collected two pulses are untrustworthy.
  for (std::size_t j = 0; j < rx_ps.size(); ++j) {
    const std::int64_t n = obs.period_of_pulse[j];
    if (n >= 0 && hits[static_cast<std::size_t>(n)] > 1) obs.period_of_pulse[j] = -1;
  }
  return obs;
}

AlignmentReport align_beacon(std::span<const double> rx_ps, const DeBruijnIndex& index,
                             const HdbcConfig& config, std::size_t window_periods,
                             double tx_start_ps) {
  validate(config);
  if (window_periods < static_cast<std::size_t>(index.order()))
    throw std::invalid_argument("window shorter than the de Bruijn order");
  const double period = beacon_period_ps(config);
  const double f = config.ppm_offset_fraction;
  const double span_ps = (static_cast<double>(window_periods) - 0.5) * period;
  AlignmentReport report;

  const auto cycle = static_cast<std::int64_t>(index.length());
  std::int64_t prev_index = -1;
  double prev_time = 0.0;
  std::size_t s = 0;
  while (s < rx_ps.size()) {
    std::size_t e = s;
    while (e < rx_ps.size() && rx_ps[e] - rx_ps[s] < span_ps) ++e;
    const auto window = rx_ps.subspan(s, e - s);
    ++report.windows;

    WindowObservation obs = observe_window(window, config);
    IndexResult res = decode_index(obs.symbols, index);
    if (!obs.first_bit_known) {
      // Every pulse sits at the first pulse's phase; try both readings.
      auto flipped = obs.symbols;
      for (auto& sym : flipped)
        if (sym != BeaconSymbol::erased) sym = sym == BeaconSymbol::zero ? BeaconSymbol::one : BeaconSymbol::zero;
      const IndexResult alt = decode_index(flipped, index);
      if (res.status == IndexStatus::ok && alt.status == IndexStatus::ok) {
        res.status = IndexStatus::ambiguous_window;
      } else if (alt.status == IndexStatus::ok) {
        res = alt;
      }
    }
    if (res.status == IndexStatus::ok) {
      ++report.windows_decoded;
      // Unwrap the cyclic index against the previous decoded window.
      auto first = static_cast<std::int64_t>(res.index);
      if (prev_index >= 0) {
        const double predicted = static_cast<double>(prev_index) + (window[0] - prev_time) / period;
        first += cycle * static_cast<std::int64_t>(std::llround((predicted - static_cast<double>(first)) /
                                                                static_cast<double>(cycle)));
      }
      prev_index = first;
      prev_time = window[0];
      for (std::size_t j = 0; j < window.size(); ++j) {
        const std::int64_t n = obs.period_of_pulse[j];
        if (n < 0) continue;
        const auto m = static_cast<std::uint64_t>(first + n);
        const double tx = tx_start_ps + static_cast<double>(m) * period + (index.bit(m) ? f * period : 0.0);
        report.pairs.push_back({tx, window[j]});
      }
    }
    s = e;
  }
  return report;
}

ClockModel recover_clock(std::span<const double> tx, std::span<const double> rx) {
  if (tx.size() != rx.size()) throw std::invalid_argument("recover_clock: size mismatch");
  if (tx.size() < 2) throw std::invalid_argument("recover_clock: need at least 2 matched pulses");
  const auto n = static_cast<double>(tx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < tx.size(); ++i) {
    mx += tx[i];
    my += rx[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < tx.size(); ++i) {
    const double dx = tx[i] - mx;
    sxx += dx * dx;
    sxy += dx * (rx[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("recover_clock: transmit times are degenerate");
  const double slope = sxy / sxx;
  ClockModel m;
  m.drift = slope - 1.0;
  m.offset_ps = my - slope * mx;
  if (!(std::fabs(m.drift) < 1e-3)) throw std::runtime_error("recover_clock: fitted drift exceeds 1e-3");
  double ss = 0.0;
  for (std::size_t i = 0; i < tx.size(); ++i) {
    const double r = rx[i] - (my + slope * (tx[i] - mx));
    ss += r * r;
  }
  m.residual_rms_ps = std::sqrt(ss / n);
  return m;
}

ClockModel recover_clock(std::span<const MatchedPair> pairs) {
  std::vector<double> tx(pairs.size());
  std::vector<double> rx(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    tx[i] = pairs[i].tx_ps;
    rx[i] = pairs[i].rx_ps;
  }
  return recover_clock(tx, rx);
}

std::vector<double> correct_timestamps(const ClockModel& model, std::span<const double> t_ps) {
  std::vector<double> out(t_ps.size());
  kernels::affine_inverse(t_ps, out, model.offset_ps, 1.0 + model.drift);
  return out;
}

photonsim::DetectionLog correct_timestamps(const ClockModel& model, const photonsim::DetectionLog& log) {
  photonsim::DetectionLog out = log;
  kernels::affine_inverse(log.timestamp_ps, out.timestamp_ps, model.offset_ps, 1.0 + model.drift);
  return out;
}

std::vector<double> beacon_transmit_times(std::uint64_t n_periods, const DeBruijnIndex& index,
                                          const HdbcConfig& config, double start_ps) {
  validate(config);
  const double period = beacon_period_ps(config);
  std::vector<double> out(n_periods);
  for (std::uint64_t m = 0; m < n_periods; ++m)
    out[m] = start_ps + static_cast<double>(m) * period +
             (index.bit(m) ? config.ppm_offset_fraction * period : 0.0);
  return out;
}

photonsim::DetectionLog receive_beacon(std::span<const double> tx_ps, const BeaconChannel& channel,
                                       const CounterRng& rng) {
  if (!(channel.erasure_probability >= 0.0 && channel.erasure_probability < 1.0))
    throw std::invalid_argument("erasure probability must lie in [0, 1)");
  photonsim::DetectionLog kept;
  kept.reserve(tx_ps.size());
  for (std::size_t m = 0; m < tx_ps.size(); ++m) {
    if (rng.uniform(Stream::beacon, m) < channel.erasure_probability) continue;
    kept.push_back({tx_ps[m], photonsim::Detector::B, photonsim::Origin::beacon});
  }
  return photonsim::apply_clock_distortion(kept, channel.distortion, rng.derive(0xBEAC0));
}

}  // namespace qkdbench::hdbcsync
