#pragma once

#include <functional>

#include "enlarge/errors.hpp"

namespace enlarge {

enum class PhiKind { Power, Sphere, Custom };

/// Score family selector: the exponent gamma > 0 together with the
/// generator phi(z).  phi must satisfy phi(1) = -1 and phi(z) >= -z^{1+gamma}
/// for z >= 0; custom generators are checked on a fixed grid at construction.
class GammaScoreConfig {
 public:
  static GammaScoreConfig power(double gamma);
  static GammaScoreConfig sphere(double gamma);
  static GammaScoreConfig custom(double gamma, std::function<double(double)> phi);

  double gamma() const { return gamma_; }
  PhiKind kind() const { return kind_; }

  /// Evaluates the generator.  z < 0 (numerical noise) is clamped to 0 and
  /// reported through *clamped when non-null.
  double phi(double z, bool* clamped = nullptr) const;

 private:
  GammaScoreConfig(double gamma, PhiKind kind, std::function<double(double)> phi);

  double gamma_;
  PhiKind kind_;
  std::function<double(double)> phi_;
};

}  // namespace enlarge
