#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ddet {

// Closed catalog of scalar agent dynamics y(k+1) = f(y(k), u(k)).
//
//   Tanh / Sin:  y u / (1 + y^p) + b u tanh(u)   |  b u sin(u)
//   Cos / Log:   y u / (1 + y^p + u) + b u cos(u) | b u log(1 + |u|)
//   Affine:      y u / (1 + y^p) + b u
//   Linear:      b u
//   Integrator:  y + b u
//
// y^p uses std::pow for integer p and sign(y)|y|^p otherwise, so outputs
// stay real when a fractional exponent meets a negative output.
enum class PlantFamily { Tanh, Sin, Cos, Log, Affine, Linear, Integrator };

struct PlantModel {
  PlantFamily family = PlantFamily::Linear;
  double exponent = 1.0;  // p
  double gain = 1.0;      // b

  // Throws ErrorKind::NonFinite on a vanishing denominator or non-finite result.
  double step(double y, double u) const;
};

inline double plant_step(const PlantModel& model, double y, double u) {
  return model.step(y, u);
}

double signed_power(double base, double exponent);

enum class PlantCatalog { Example1, Example2, Linear, Integrator };

PlantCatalog parse_catalog(std::string_view name);
std::string_view to_string(PlantCatalog catalog);
std::string_view to_string(PlantFamily family);

// Builds one model per agent. `exponents` is ignored for the linear and
// integrator catalogs.
// Example 1 assigns families by agent pair: (1,2) tanh, (3,4) sin, (5,6) cos,
// (7,8) log, repeating for larger networks.
std::vector<PlantModel> make_plants(PlantCatalog catalog,
                                    std::span<const double> exponents,
                                    std::span<const double> gains);

// Agent parameters of the two shipped experiments.
std::vector<PlantModel> example1_plants();
std::vector<PlantModel> example2_plants();

// Leader reference: piecewise segments, each a constant plus harmonic terms.
// Segment l covers [start_l, start_{l+1}); the last one runs to the horizon.
struct HarmonicTerm {
  enum class Wave { Sin, Cos } wave = Wave::Sin;
  double amplitude = 0.0;
  double omega = 0.0;  // rad per step
};

struct ReferenceSegment {
  long start = 0;
  double constant = 0.0;
  std::vector<HarmonicTerm> terms;
};

class ReferenceSignal {
 public:
  ReferenceSignal(std::vector<ReferenceSegment> segments, long horizon);

  double value(long k) const;
  long horizon() const noexcept { return horizon_; }
  const std::vector<ReferenceSegment>& segments() const noexcept { return segments_; }

  // [start, end) of every segment, clipped to the horizon.
  std::vector<std::pair<long, long>> segment_bounds() const;

 private:
  std::vector<ReferenceSegment> segments_;
  long horizon_;
};

inline double reference_value(const ReferenceSignal& sig, long k) { return sig.value(k); }

ReferenceSignal example1_reference(long horizon = 2500);
ReferenceSignal example2_reference(long horizon = 2500);

// Empirical pseudo partial derivative Dy(k+1)/Du(k), recorded where Du != 0.
struct CfdlTrace {
  std::vector<long> steps;
  std::vector<double> ppd_values;
  double bound_estimate = 0.0;  // max |ppd|, 0 when empty
};

// y has one entry per step; u[k] is the input applied at step k (u may be one
// shorter than y). Dy(k+1) = y[k+1] - y[k], Du(k) = u[k] - u[k-1].
CfdlTrace cfdl_diagnostic(std::span<const double> y, std::span<const double> u);

}  // namespace ddet
