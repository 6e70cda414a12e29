#include "ddet/plant.hpp"

#include "ddet/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ddet {

namespace {

constexpr double kMinDenominator = 1e-12;

double guarded_ratio(double num, double den, double y, double u) {
  if (std::abs(den) < kMinDenominator || !std::isfinite(den)) {
    throw Error(ErrorKind::NonFinite,
                fmt::format("plant denominator vanished (y={}, u={})", y, u));
  }
  return num / den;
}

}  // namespace

double signed_power(double base, double exponent) {
  if (exponent == std::trunc(exponent)) return std::pow(base, exponent);
  const double mag = std::pow(std::abs(base), exponent);
  return base < 0.0 ? -mag : mag;
}

double PlantModel::step(double y, double u) const {
  double next = 0.0;
  switch (family) {
    case PlantFamily::Tanh:
    case PlantFamily::Sin: {
      const double rational = guarded_ratio(y * u, 1.0 + signed_power(y, exponent), y, u);
      const double shape = family == PlantFamily::Tanh ? std::tanh(u) : std::sin(u);
      next = rational + gain * u * shape;
      break;
    }
    case PlantFamily::Cos:
    case PlantFamily::Log: {
      const double rational =
          guarded_ratio(y * u, 1.0 + signed_power(y, exponent) + u, y, u);
      const double shape =
          family == PlantFamily::Cos ? std::cos(u) : std::log(1.0 + std::abs(u));
      next = rational + gain * u * shape;
      break;
    }
    case PlantFamily::Affine:
      next = guarded_ratio(y * u, 1.0 + signed_power(y, exponent), y, u) + gain * u;
      break;
    case PlantFamily::Linear:
      next = gain * u;
      break;
    case PlantFamily::Integrator:
      next = y + gain * u;
      break;
  }
  if (!std::isfinite(next)) {
    throw Error(ErrorKind::NonFinite,
                fmt::format("plant output is not finite (y={}, u={})", y, u));
  }
  return next;
}

PlantCatalog parse_catalog(std::string_view name) {
  if (name == "example1") return PlantCatalog::Example1;
  if (name == "example2") return PlantCatalog::Example2;
  if (name == "linear") return PlantCatalog::Linear;
  if (name == "integrator") return PlantCatalog::Integrator;
  throw Error(ErrorKind::InvalidArgument,
              fmt::format("unknown plant catalog `{}` (expected example1, example2, linear or integrator)",
                          name));
}

std::string_view to_string(PlantCatalog catalog) {
  switch (catalog) {
    case PlantCatalog::Example1: return "example1";
    case PlantCatalog::Example2: return "example2";
    case PlantCatalog::Linear: return "linear";
    case PlantCatalog::Integrator: return "integrator";
  }
  return "?";
}

std::string_view to_string(PlantFamily family) {
  switch (family) {
    case PlantFamily::Tanh: return "tanh";
    case PlantFamily::Sin: return "sin";
    case PlantFamily::Cos: return "cos";
    case PlantFamily::Log: return "log";
    case PlantFamily::Affine: return "affine";
    case PlantFamily::Linear: return "linear";
    case PlantFamily::Integrator: return "integrator";
  }
  return "?";
}

std::vector<PlantModel> make_plants(PlantCatalog catalog, std::span<const double> exponents,
                                    std::span<const double> gains) {
  const auto n = gains.size();
  const bool no_exponents = catalog == PlantCatalog::Linear || catalog == PlantCatalog::Integrator;
  if (!no_exponents && exponents.size() != n) {
    throw Error(ErrorKind::DimensionMismatch,
                fmt::format("{} exponents for {} gains", exponents.size(), n));
  }
  std::vector<PlantModel> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    PlantModel m;
    m.gain = gains[i];
    switch (catalog) {
      case PlantCatalog::Example1: {
        static constexpr PlantFamily by_pair[] = {PlantFamily::Tanh, PlantFamily::Sin,
                                                  PlantFamily::Cos, PlantFamily::Log};
        m.family = by_pair[(i / 2) % 4];
        m.exponent = exponents[i];
        break;
      }
      case PlantCatalog::Example2:
        m.family = PlantFamily::Affine;
        m.exponent = exponents[i];
        break;
      case PlantCatalog::Linear:
        m.family = PlantFamily::Linear;
        break;
      case PlantCatalog::Integrator:
        m.family = PlantFamily::Integrator;
        break;
    }
    if (!std::isfinite(m.gain) || !std::isfinite(m.exponent)) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("plant parameters of agent {} are not finite", i + 1));
    }
    out.push_back(m);
  }
  return out;
}

std::vector<PlantModel> example1_plants() {
  const double w1[] = {4, 3, 4, 3, 2, 4, 2, 3};
  const double w2[] = {2, 3, 4, 5, 2, 0.4, 2, 0.5};
  return make_plants(PlantCatalog::Example1, w1, w2);
}

std::vector<PlantModel> example2_plants() {
  const double p[] = {2, 3, 2, 3, 1, 0.9, 1.2, 2};
  const double b[] = {2, 5, 3, 5, 0.8, 0.5, 0.4, 0.5};
  return make_plants(PlantCatalog::Example2, p, b);
}

ReferenceSignal::ReferenceSignal(std::vector<ReferenceSegment> segments, long horizon)
    : segments_(std::move(segments)), horizon_(horizon) {
  if (horizon_ < 1) throw Error(ErrorKind::InvalidArgument, "reference horizon must be positive");
  if (segments_.empty() || segments_.front().start != 0) {
    throw Error(ErrorKind::InvalidArgument, "reference must have a segment starting at k=0");
  }
  for (std::size_t l = 1; l < segments_.size(); ++l) {
    if (segments_[l].start <= segments_[l - 1].start) {
      throw Error(ErrorKind::InvalidArgument, "reference segment starts must increase");
    }
  }
  for (const auto& seg : segments_) {
    if (!std::isfinite(seg.constant)) {
      throw Error(ErrorKind::InvalidArgument, "reference constant is not finite");
    }
    for (const auto& t : seg.terms) {
      if (!std::isfinite(t.amplitude) || !std::isfinite(t.omega)) {
        throw Error(ErrorKind::InvalidArgument, "reference term is not finite");
      }
    }
  }
}

double ReferenceSignal::value(long k) const {
  if (k < 0 || k > horizon_) {
    throw Error(ErrorKind::OutOfRange,
                fmt::format("reference queried at k={} outside [0, {}]", k, horizon_));
  }
  auto it = std::upper_bound(segments_.begin(), segments_.end(), k,
                             [](long kk, const ReferenceSegment& s) { return kk < s.start; });
  const auto& seg = *std::prev(it);
  double v = seg.constant;
  const double kd = static_cast<double>(k);
  for (const auto& t : seg.terms) {
    const double phase = t.omega * kd;
    v += t.amplitude * (t.wave == HarmonicTerm::Wave::Sin ? std::sin(phase) : std::cos(phase));
  }
  return v;
}

std::vector<std::pair<long, long>> ReferenceSignal::segment_bounds() const {
  std::vector<std::pair<long, long>> out;
  for (std::size_t l = 0; l < segments_.size(); ++l) {
    const long start = segments_[l].start;
    const long end = l + 1 < segments_.size() ? segments_[l + 1].start : horizon_;
    if (start >= horizon_) break;
    out.emplace_back(start, std::min(end, horizon_));
  }
  return out;
}

ReferenceSignal example1_reference(long horizon) {
  return ReferenceSignal({{0, 3.0, {}}, {900, 2.0, {}}, {1700, 1.0, {}}}, horizon);
}

ReferenceSignal example2_reference(long horizon) {
  using W = HarmonicTerm::Wave;
  constexpr double pi = std::numbers::pi;
  return ReferenceSignal(
      {{0, 0.0, {{W::Sin, 5.0, pi / 2500.0}, {W::Cos, 3.0, pi / 2500.0}}},
       {1200, 0.0, {{W::Sin, 5.0, pi / 5000.0}, {W::Cos, 6.0, pi / 6000.0}}}},
      horizon);
}

CfdlTrace cfdl_diagnostic(std::span<const double> y, std::span<const double> u) {
  CfdlTrace out;
  for (std::size_t k = 1; k + 1 < y.size() && k < u.size(); ++k) {
    const double du = u[k] - u[k - 1];
    if (du == 0.0) continue;
    const double ratio = (y[k + 1] - y[k]) / du;
    out.steps.push_back(static_cast<long>(k));
    out.ppd_values.push_back(ratio);
    out.bound_estimate = std::max(out.bound_estimate, std::abs(ratio));
  }
  return out;
}

}  // namespace ddet
