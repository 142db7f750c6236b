#include "enlarge/score_config.hpp"

#include <cmath>
#include <utility>

namespace enlarge {

namespace {

void validate(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("gamma must be a positive finite real");
  }
}

}  // namespace

GammaScoreConfig::GammaScoreConfig(double gamma, PhiKind kind,
                                   std::function<double(double)> phi)
    : gamma_(gamma), kind_(kind), phi_(std::move(phi)) {}

GammaScoreConfig GammaScoreConfig::power(double gamma) {
  validate(gamma);
  return GammaScoreConfig(gamma, PhiKind::Power, nullptr);
}

GammaScoreConfig GammaScoreConfig::sphere(double gamma) {
  validate(gamma);
  return GammaScoreConfig(gamma, PhiKind::Sphere, nullptr);
}

GammaScoreConfig GammaScoreConfig::custom(double gamma,
                                          std::function<double(double)> phi) {
  validate(gamma);
  if (!phi) throw ConfigError("custom generator must be callable");
  // Admissibility check on the grid z in {0, 0.01, ..., 10}.
  if (std::abs(phi(1.0) + 1.0) > 1e-9) {
    throw ConfigError("generator must satisfy phi(1) = -1");
  }
  for (int k = 0; k <= 1000; ++k) {
    const double z = 0.01 * k;
    const double lb = -std::pow(z, 1.0 + gamma);
    if (phi(z) < lb - 1e-12) {
      throw ConfigError("generator violates phi(z) >= -z^{1+gamma} at z=" +
                        std::to_string(z));
    }
  }
  return GammaScoreConfig(gamma, PhiKind::Custom, std::move(phi));
}

double GammaScoreConfig::phi(double z, bool* clamped) const {
  if (clamped) *clamped = false;
  if (z < 0.0) {
    if (clamped) *clamped = true;
    z = 0.0;
  }
  switch (kind_) {
    case PhiKind::Power:
      return gamma_ - (1.0 + gamma_) * z;
    case PhiKind::Sphere:
      return -std::pow(z, 1.0 + gamma_);
    case PhiKind::Custom:
      return phi_(z);
  }
  return 0.0;  // unreachable
}

}  // namespace enlarge
