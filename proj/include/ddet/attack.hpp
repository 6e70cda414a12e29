#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ddet {

// Attack interval [start, start + duration).
struct AttackInterval {
  long start = 0;
  long duration = 1;

  long end() const noexcept { return start + duration; }
  friend bool operator==(const AttackInterval&, const AttackInterval&) = default;
};

// Ordered, strictly separated DoS intervals inside [0, horizon):
// start_{l+1} > start_l + duration_l.
class DosSchedule {
 public:
  explicit DosSchedule(long horizon, std::vector<AttackInterval> intervals = {});

  long horizon() const noexcept { return horizon_; }
  const std::vector<AttackInterval>& intervals() const noexcept { return intervals_; }
  bool empty() const noexcept { return intervals_.empty(); }

  // h(k): 0 while an attack is active, 1 otherwise.
  int availability(long k) const;
  long attacked_steps() const noexcept;

  friend bool operator==(const DosSchedule&, const DosSchedule&) = default;

 private:
  long horizon_;
  std::vector<AttackInterval> intervals_;
};

inline int availability(const DosSchedule& sched, long k) { return sched.availability(k); }

// Window budgets over [k0, k]:
//   onsets        <= kappa_a + freq_rate * (k - k0)
//   attacked steps <= zeta_a + dur_rate * (k - k0)
struct AttackBudget {
  double kappa_a = 0.0;
  double freq_rate = 0.0;
  double zeta_a = 0.0;
  double dur_rate = 0.0;
};

void validate(const AttackBudget& budget);

bool verify_frequency(const DosSchedule& sched, const AttackBudget& budget);
bool verify_duration(const DosSchedule& sched, const AttackBudget& budget);

// Rejection-sampled schedule satisfying both verifiers; durations uniform on
// [1, max_duration]. Throws ErrorKind::Infeasible after 10,000 consecutive
// rejected draws.
DosSchedule generate_schedule(const AttackBudget& budget, long horizon, long max_duration,
                              std::uint64_t seed);

inline double filter_error(double e, int h) { return h * e; }

// Line format: `horizon H` (optional) then `attack <start> <duration>` lines.
DosSchedule parse_schedule(std::istream& in, long default_horizon = -1,
                           const std::string& source = "<schedule>");
DosSchedule load_schedule(const std::string& path, long default_horizon = -1);
void write_schedule(std::ostream& out, const DosSchedule& sched);

}  // namespace ddet
