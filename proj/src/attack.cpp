#include "ddet/attack.hpp"

#include "ddet/error.hpp"
#include "text_lines.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>

namespace ddet {

namespace {

// Budget comparisons allow for rounding in rate * length.
constexpr double kSlack = 1e-9;
constexpr int kMaxConsecutiveRejections = 10'000;

bool frequency_ok_ending_at(const std::vector<AttackInterval>& iv, std::size_t j,
                            const AttackBudget& b) {
  for (std::size_t i = 0; i <= j; ++i) {
    const double onsets = static_cast<double>(j - i + 1);
    const double len = static_cast<double>(iv[j].start - iv[i].start);
    if (onsets > b.kappa_a + b.freq_rate * len + kSlack) return false;
  }
  return true;
}

bool duration_ok_ending_at(const std::vector<AttackInterval>& iv, std::size_t j,
                           const AttackBudget& b) {
  if (b.zeta_a + kSlack < 1.0) return false;  // single attacked step, zero-length window
  double attacked = 0.0;
  for (std::size_t i = j + 1; i-- > 0;) {
    attacked += static_cast<double>(iv[i].duration);
    const double len = static_cast<double>(iv[j].end() - 1 - iv[i].start);
    if (attacked > b.zeta_a + b.dur_rate * len + kSlack) return false;
  }
  return true;
}

}  // namespace

DosSchedule::DosSchedule(long horizon, std::vector<AttackInterval> intervals)
    : horizon_(horizon), intervals_(std::move(intervals)) {
  if (horizon_ < 1) throw Error(ErrorKind::InvalidArgument, "schedule horizon must be positive");
  for (std::size_t l = 0; l < intervals_.size(); ++l) {
    const auto& a = intervals_[l];
    if (a.duration < 1) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("attack at {} has non-positive duration", a.start));
    }
    if (a.start < 0 || a.end() > horizon_) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("attack [{}, {}) leaves [0, {})", a.start, a.end(), horizon_));
    }
    if (l > 0 && a.start <= intervals_[l - 1].end()) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("attack at {} is not separated from the one ending at {}",
                              a.start, intervals_[l - 1].end()));
    }
  }
}

int DosSchedule::availability(long k) const {
  if (k < 0 || k >= horizon_) {
    throw Error(ErrorKind::OutOfRange,
                fmt::format("availability queried at k={} outside [0, {})", k, horizon_));
  }
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), k,
                             [](long kk, const AttackInterval& a) { return kk < a.start; });
  if (it == intervals_.begin()) return 1;
  return k < std::prev(it)->end() ? 0 : 1;
}

long DosSchedule::attacked_steps() const noexcept {
  long total = 0;
  for (const auto& a : intervals_) total += a.duration;
  return total;
}

void validate(const AttackBudget& b) {
  const bool finite = std::isfinite(b.kappa_a) && std::isfinite(b.freq_rate) &&
                      std::isfinite(b.zeta_a) && std::isfinite(b.dur_rate);
  if (!finite || b.kappa_a < 0 || b.freq_rate < 0 || b.zeta_a < 0 || b.dur_rate < 0) {
    throw Error(ErrorKind::InvalidArgument, "attack budget parameters must be finite and >= 0");
  }
  if (b.dur_rate >= 1.0) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("duration rate {} must be below 1", b.dur_rate));
  }
}

bool verify_frequency(const DosSchedule& sched, const AttackBudget& budget) {
  const auto& iv = sched.intervals();
  for (std::size_t j = 0; j < iv.size(); ++j) {
    if (!frequency_ok_ending_at(iv, j, budget)) return false;
  }
  return true;
}

bool verify_duration(const DosSchedule& sched, const AttackBudget& budget) {
  const auto& iv = sched.intervals();
  for (std::size_t j = 0; j < iv.size(); ++j) {
    if (!duration_ok_ending_at(iv, j, budget)) return false;
  }
  return true;
}

DosSchedule generate_schedule(const AttackBudget& budget, long horizon, long max_duration,
                              std::uint64_t seed) {
  validate(budget);
  if (horizon < 1) throw Error(ErrorKind::InvalidArgument, "horizon must be positive");
  if (max_duration < 1) throw Error(ErrorKind::InvalidArgument, "max duration must be positive");

  // A lone one-step attack already needs one onset and one attacked step in a
  // zero-length window.
  if (budget.kappa_a + kSlack < 1.0 || budget.zeta_a + kSlack < 1.0) {
    return DosSchedule(horizon);
  }

  const long max_gap = budget.freq_rate > 0.0
                           ? std::max(1L, static_cast<long>(std::ceil(2.0 / budget.freq_rate)))
                           : horizon;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> gap_dist(0, max_gap - 1);
  std::uniform_int_distribution<long> dur_dist(1, max_duration);

  std::vector<AttackInterval> iv;
  long cursor = 0;
  int rejections = 0;
  while (true) {
    const long start = cursor + gap_dist(rng);
    const long duration = dur_dist(rng);
    if (start >= horizon) break;
    bool accept = start + duration <= horizon;
    if (accept) {
      iv.push_back({start, duration});
      accept = frequency_ok_ending_at(iv, iv.size() - 1, budget) &&
               duration_ok_ending_at(iv, iv.size() - 1, budget);
      if (!accept) iv.pop_back();
    }
    if (accept) {
      rejections = 0;
      cursor = start + duration + 1;
    } else if (++rejections >= kMaxConsecutiveRejections) {
      throw Error(ErrorKind::Infeasible,
                  fmt::format("no admissible attack after {} consecutive draws (from k={})",
                              kMaxConsecutiveRejections, cursor));
    }
  }
  return DosSchedule(horizon, std::move(iv));
}

DosSchedule parse_schedule(std::istream& in, long default_horizon, const std::string& source) {
  std::optional<long> horizon;
  std::vector<AttackInterval> iv;
  auto fail = [&](int line, const std::string& msg) {
    return Error(ErrorKind::Parse, fmt::format("{}:{}: {}", source, line, msg));
  };
  for_each_record(in, [&](int line, const std::vector<std::string>& tok) {
    if (tok[0] == "horizon" && tok.size() == 2) {
      if (horizon) throw fail(line, "duplicate `horizon`");
      horizon = parse_long(tok[1], [&] { return fail(line, "bad horizon"); });
    } else if (tok[0] == "attack" && tok.size() == 3) {
      const long s = parse_long(tok[1], [&] { return fail(line, "bad attack start"); });
      const long d = parse_long(tok[2], [&] { return fail(line, "bad attack duration"); });
      iv.push_back({s, d});
    } else {
      throw fail(line, "expected `horizon H` or `attack <start> <duration>`");
    }
  });
  const long h = horizon.value_or(default_horizon);
  if (h < 1) throw Error(ErrorKind::Parse, fmt::format("{}: schedule has no horizon", source));
  try {
    return DosSchedule(h, std::move(iv));
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, fmt::format("{}: {}", source, e.what()));
  }
}

DosSchedule load_schedule(const std::string& path, long default_horizon) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, fmt::format("cannot open schedule file {}", path));
  return parse_schedule(in, default_horizon, path);
}

void write_schedule(std::ostream& out, const DosSchedule& sched) {
  out << fmt::format("horizon {}\n", sched.horizon());
  for (const auto& a : sched.intervals()) {
    out << fmt::format("attack {} {}\n", a.start, a.duration);
  }
}

}  // namespace ddet
