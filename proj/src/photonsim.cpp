#include "qkdbench/photonsim.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>

#include "qkdbench/kernels.hpp"

namespace qkdbench::photonsim {

namespace {

constexpr double kPsPerNs = 1e3;

bool record_less(const DetectionRecord& a, const DetectionRecord& b) {
  if (a.timestamp_ps != b.timestamp_ps) return a.timestamp_ps < b.timestamp_ps;
  if (a.detector != b.detector) return a.detector < b.detector;
  return a.origin < b.origin;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void drop_dead_time(std::vector<DetectionRecord>& records, double dead_time_ps) {
  if (!(dead_time_ps > 0.0)) return;
  double last[5];
  bool seen[5] = {false, false, false, false, false};
  std::size_t w = 0;
  for (const auto& r : records) {
    const auto d = static_cast<std::size_t>(r.detector);
    if (seen[d] && r.timestamp_ps - last[d] < dead_time_ps) continue;
    seen[d] = true;
    last[d] = r.timestamp_ps;
    records[w++] = r;
  }
  records.resize(w);
}

}  // namespace

Detector detector_for(Basis basis, bool value) noexcept {
  if (basis == Basis::Z) return value ? Detector::V : Detector::H;
  return value ? Detector::A : Detector::D;
}

Basis basis_of(Detector d) noexcept {
  return (d == Detector::D || d == Detector::A) ? Basis::X : Basis::Z;
}

bool value_of(Detector d) noexcept { return d == Detector::V || d == Detector::A; }

char to_char(Detector d) noexcept {
  switch (d) {
    case Detector::H: return 'H';
    case Detector::V: return 'V';
    case Detector::D: return 'D';
    case Detector::A: return 'A';
    case Detector::B: return 'B';
  }
  return '?';
}

std::string_view to_string(Origin o) noexcept {
  switch (o) {
    case Origin::signal: return "signal";
    case Origin::background: return "background";
    case Origin::dark: return "dark";
    case Origin::beacon: return "beacon";
  }
  return "?";
}

Detector detector_from_char(char c) {
  switch (c) {
    case 'H': return Detector::H;
    case 'V': return Detector::V;
    case 'D': return Detector::D;
    case 'A': return Detector::A;
    case 'B': return Detector::B;
  }
  throw std::invalid_argument(std::string{"unknown detector '"} + c + "'");
}

Origin origin_from_string(std::string_view s) {
  if (s == "signal") return Origin::signal;
  if (s == "background") return Origin::background;
  if (s == "dark") return Origin::dark;
  if (s == "beacon") return Origin::beacon;
  throw std::invalid_argument("unknown origin: " + std::string{s});
}

void validate(const SimConfig& c) {
  if (c.n_pulses < 1) throw std::invalid_argument("n_pulses must be at least 1");
  if (!(c.rep_rate_hz > 0.0)) throw std::invalid_argument("rep_rate_hz must be positive");
  if (!(c.pulse_fwhm_ns > 0.0)) throw std::invalid_argument("pulse_fwhm_ns must be positive");
  if (!(c.timing_sigma_ns >= 0.0)) throw std::invalid_argument("timing_sigma_ns must be nonnegative");
  if (std::isnan(c.total_loss_db) || c.total_loss_db < 0.0)
    throw std::invalid_argument("total_loss_db must be nonnegative");
  if (!(c.background_rate_hz >= 0.0) || !(c.dark_count_rate_hz >= 0.0))
    throw std::invalid_argument("noise rates must be nonnegative");
  if (!(c.basis_bias_px >= 0.0 && c.basis_bias_px <= 1.0))
    throw std::invalid_argument("basis_bias_px must lie in [0, 1]");
  if (!(c.dead_time_ns >= 0.0)) throw std::invalid_argument("dead_time_ns must be nonnegative");
  if (c.block_pulses < 1) throw std::invalid_argument("block_pulses must be at least 1");
  qbermodel::intrinsic_qber(c.e_sp, c.e_pbs);
  qbermodel::external_qber(c.e_a, 0.0, 0.0);
  const auto s = schedule(c);
  if (s.size() > 255) throw std::invalid_argument("too many intensity classes");
  double total = 0.0;
  for (const auto& k : s) {
    if (!(k.mu >= 0.0 && k.mu <= 2.0)) throw std::invalid_argument("intensity mu must lie in [0, 2]");
    if (!(k.probability >= 0.0)) throw std::invalid_argument("intensity probability must be nonnegative");
    total += k.probability;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw std::invalid_argument("intensity probabilities must sum to 1");
}

std::vector<Intensity> schedule(const SimConfig& c) {
  if (c.intensity_schedule.empty()) return {{c.mu, 1.0}};
  return c.intensity_schedule;
}

double period_ps(const SimConfig& c) { return 1e12 / c.rep_rate_hz; }

double detection_error(const SimConfig& c) {
  return qbermodel::combine_error(qbermodel::intrinsic_qber(c.e_sp, c.e_pbs), c.e_a);
}

double noise_rate_hz(const SimConfig& c) { return c.background_rate_hz + c.dark_count_rate_hz; }

qbermodel::SignalModel signal_model(const SimConfig& c, double gate_width_ns) {
  qbermodel::SignalModel m;
  m.mu = c.mu;
  m.pulse_fwhm_ns = c.pulse_fwhm_ns;
  m.rep_rate_hz = c.rep_rate_hz;
  m.noise_rate_hz = noise_rate_hz(c);
  m.total_loss_db = c.total_loss_db;
  m.gate_width_ns = gate_width_ns;
  m.timing_sigma_ns = c.timing_sigma_ns;
  return m;
}

TxSource::TxSource(const SimConfig& config) : rng_{config.seed}, px_{config.basis_bias_px} {
  double acc = 0.0;
  for (const auto& k : schedule(config)) {
    acc += k.probability;
    cumulative_.push_back(acc);
  }
}

TxRecord TxSource::at(std::uint64_t i) const {
  const auto w = rng_.words(Stream::tx, i, 0);
  TxRecord r;
  r.pulse_index = i;
  r.basis = unit_from_words(w[0], w[1]) < px_ ? Basis::X : Basis::Z;
  r.bit = static_cast<std::uint8_t>(w[2] >> 31);
  if (cumulative_.size() > 1) {
    const double u = unit_from_words(w[3], rng_.words(Stream::tx, i, 1)[0]) * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    r.intensity_class = static_cast<std::uint8_t>(
        std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1));
  }
  return r;
}

std::vector<TxRecord> generate_tx_stream(const SimConfig& config) {
  validate(config);
  const TxSource src{config};
  std::vector<TxRecord> out;
  out.reserve(config.n_pulses);
  for (std::uint64_t i = 0; i < config.n_pulses; ++i) out.push_back(src.at(i));
  return out;
}

void DetectionLog::reserve(std::size_t n) {
  timestamp_ps.reserve(n);
  detector.reserve(n);
  origin.reserve(n);
}

void DetectionLog::push_back(const DetectionRecord& r) {
  timestamp_ps.push_back(r.timestamp_ps);
  detector.push_back(r.detector);
  origin.push_back(r.origin);
}

DetectionLog DetectionLog::from_records(std::vector<DetectionRecord> records) {
  DetectionLog log;
  log.reserve(records.size());
  for (const auto& r : records) log.push_back(r);
  return log;
}

std::vector<DetectionRecord> DetectionLog::records() const {
  std::vector<DetectionRecord> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i]);
  return out;
}

void DetectionLog::sort_by_time() {
  auto r = records();
  std::stable_sort(r.begin(), r.end(),
                   [](const DetectionRecord& a, const DetectionRecord& b) { return a.timestamp_ps < b.timestamp_ps; });
  *this = from_records(std::move(r));
}

namespace {

struct PulseModel {
  std::vector<double> click_probability;  // per intensity class
  double px;
  double error;
  double sigma_ps;
  double period_ps;
  double noise_mean;            // noise events per period
  double p_no_noise;            // exp(-noise_mean)
  double background_fraction;   // of noise events
};

PulseModel make_model(const SimConfig& c) {
  PulseModel m;
  const double eta = std::pow(10.0, -c.total_loss_db / 10.0);
  for (const auto& k : schedule(c)) m.click_probability.push_back(-std::expm1(-k.mu * eta));
  m.px = c.basis_bias_px;
  m.error = detection_error(c);
  m.sigma_ps = qbermodel::sigma_total_ns(c.pulse_fwhm_ns, c.timing_sigma_ns) * kPsPerNs;
  m.period_ps = period_ps(c);
  const double rate = noise_rate_hz(c);
  m.noise_mean = rate / c.rep_rate_hz;
  m.p_no_noise = std::exp(-m.noise_mean);
  m.background_fraction = rate > 0.0 ? c.background_rate_hz / rate : 0.0;
  return m;
}

void simulate_into(const SimConfig& c, const PulseModel& m, const TxSource& tx, std::uint64_t first,
                   std::uint64_t last, std::vector<DetectionRecord>& out,
                   std::vector<std::uint64_t>& per_class) {
  const CounterRng rng{c.seed};
  constexpr std::uint64_t kChunk = 4096;
  std::vector<std::uint32_t> words(4 * kChunk);
  const bool multi_class = m.click_probability.size() > 1;

  for (std::uint64_t base = first; base < last; base += kChunk) {
    const std::uint64_t n = std::min(kChunk, last - base);
    rng.fill(Stream::emission, base, 0, std::span<std::uint32_t>(words.data(), 4 * n));
    for (std::uint64_t j = 0; j < n; ++j) {
      const std::uint64_t i = base + j;
      const std::uint32_t* w = &words[4 * j];
      const double slot_ps = static_cast<double>(i) * m.period_ps;

      std::size_t cls = 0;
      TxRecord t;
      bool have_tx = false;
      if (multi_class) {
        t = tx.at(i);
        have_tx = true;
        cls = t.intensity_class;
      }
      ++per_class[cls];

      if (unit_from_words(w[0], w[1]) < m.click_probability[cls]) {
        if (!have_tx) t = tx.at(i);
        const auto d0 = rng.words(Stream::detection, i, 0);
        const Basis rx = unit_from_words(d0[0], d0[1]) < m.px ? Basis::X : Basis::Z;
        bool value;
        if (rx == t.basis) {
          value = t.bit != 0;
          if (unit_from_words(d0[2], d0[3]) < m.error) value = !value;
        } else {
          value = (d0[2] >> 31) != 0;
        }
        const double z = rng.normal(Stream::detection, i, 1);
        out.push_back({slot_ps + m.sigma_ps * z, detector_for(rx, value), Origin::signal});
      }

      const double u_noise = unit_from_words(w[2], w[3]);
      if (u_noise >= m.p_no_noise) {
        const std::uint32_t k = poisson_from_uniform(u_noise, m.noise_mean);
        for (std::uint32_t e = 0; e < k; ++e) {
          const auto nw = rng.words(Stream::noise, i, e);
          const double offset = (unit_from_words(nw[0], nw[1]) - 0.5) * m.period_ps;
          const auto det = static_cast<Detector>(nw[2] >> 30);
          const double uo = static_cast<double>(nw[3]) * 0x1.0p-32;
          const Origin o = uo < m.background_fraction ? Origin::background : Origin::dark;
          out.push_back({slot_ps + offset, det, o});
        }
      }
    }
  }
}

}  // namespace

SimulationResult simulate_range(const SimConfig& config, std::uint64_t first, std::uint64_t last) {
  validate(config);
  if (last > config.n_pulses || first > last) throw std::invalid_argument("pulse range out of bounds");
  const PulseModel m = make_model(config);
  const TxSource tx{config};
  std::vector<DetectionRecord> records;
  SimulationResult result;
  result.pulses_per_class.assign(m.click_probability.size(), 0);
  simulate_into(config, m, tx, first, last, records, result.pulses_per_class);
  result.detections = DetectionLog::from_records(std::move(records));
  return result;
}

SimulationResult simulate_channel(const SimConfig& config, unsigned threads) {
  validate(config);
  const PulseModel m = make_model(config);
  const TxSource tx{config};
  const std::uint64_t block = config.block_pulses;
  const std::uint64_t n_blocks = (config.n_pulses + block - 1) / block;
  const std::size_t classes = m.click_probability.size();

  std::vector<std::vector<DetectionRecord>> parts(n_blocks);
  std::vector<std::vector<std::uint64_t>> counts(n_blocks, std::vector<std::uint64_t>(classes, 0));
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t b; (b = next.fetch_add(1)) < n_blocks;) {
      const std::uint64_t first = b * block;
      const std::uint64_t last = std::min(config.n_pulses, first + block);
      simulate_into(config, m, tx, first, last, parts[b], counts[b]);
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_blocks)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  std::vector<DetectionRecord> all;
  all.reserve(total);
  SimulationResult result;
  result.pulses_per_class.assign(classes, 0);
  for (std::uint64_t b = 0; b < n_blocks; ++b) {
    all.insert(all.end(), parts[b].begin(), parts[b].end());
    std::vector<DetectionRecord>().swap(parts[b]);
    for (std::size_t k = 0; k < classes; ++k) result.pulses_per_class[k] += counts[b][k];
  }
  std::sort(all.begin(), all.end(), record_less);
  drop_dead_time(all, config.dead_time_ns * kPsPerNs);
  result.detections = DetectionLog::from_records(std::move(all));
  return result;
}

DetectionLog apply_clock_distortion(const DetectionLog& log, const ClockDistortion& d,
                                    const CounterRng& rng) {
  if (!(std::fabs(d.drift) <= 1e-4)) throw std::invalid_argument("clock drift must be within 100 ppm");
  if (!(d.jitter_ps >= 0.0)) throw std::invalid_argument("jitter must be nonnegative");
  DetectionLog out = log;
  kernels::affine_forward(log.timestamp_ps, out.timestamp_ps, d.offset_ps, 1.0 + d.drift);
  if (d.jitter_ps > 0.0) {
    for (std::size_t i = 0; i < out.size(); ++i)
      out.timestamp_ps[i] += d.jitter_ps * rng.normal(Stream::clock, i);
    out.sort_by_time();
  }
  return out;
}

void write_detections_csv(std::ostream& out, const DetectionLog& log) {
  out << "timestamp_ps,detector,origin\n";
  for (std::size_t i = 0; i < log.size(); ++i)
    out << format_double(log.timestamp_ps[i]) << ',' << to_char(log.detector[i]) << ','
        << to_string(log.origin[i]) << '\n';
}

DetectionLog read_detections_csv(std::istream& in) {
  DetectionLog log;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_csv(line);
    if (line_no == 1 && !f.empty() && f[0] == "timestamp_ps") continue;
    if (f.size() != 3 || f[1].size() != 1)
      throw std::invalid_argument("malformed event line " + std::to_string(line_no));
    double t = 0.0;
    const auto res = std::from_chars(f[0].data(), f[0].data() + f[0].size(), t);
    if (res.ec != std::errc{} || res.ptr != f[0].data() + f[0].size())
      throw std::invalid_argument("bad timestamp on line " + std::to_string(line_no));
    log.push_back({t, detector_from_char(f[1][0]), origin_from_string(f[2])});
  }
  return log;
}

void write_tx_csv(std::ostream& out, const std::vector<TxRecord>& tx) {
  out << "index,basis,bit,class\n";
  for (const auto& r : tx)
    out << r.pulse_index << ',' << (r.basis == Basis::X ? 'X' : 'Z') << ',' << int{r.bit} << ','
        << int{r.intensity_class} << '\n';
}

}  // namespace qkdbench::photonsim
