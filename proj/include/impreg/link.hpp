#pragma once

#include <functional>
#include <optional>
#include <string>

namespace impreg {

enum class LinkKind { Identity, F1, F2, F3, F4, F5, F6, F7, F8, Sign, Custom };

/// Link function f in y = f(<x, beta*>) + eps.
///
/// F1..F8 are the simulation catalog:
///   f1 = 8x + 4 sin x            f5 = sqrt(7) x + 3 cos^2 x
///   f2 = 4x + 7 tanh x + cos^2 x f6 = x/2 + 4 tanh x
///   f3 = x/2 + 4 sin x + sqrt(5) cos^2 x
///   f4 = 4 sin x + 2 cos^2 x     f7 = x + 3 sin x
///                                f8 = 10 tanh x + 8 sin x
/// Sign maps x >= 0 to +1 and x < 0 to -1 and has no derivative.
class LinkSpec {
 public:
  LinkSpec() = default;
  explicit LinkSpec(LinkKind kind);

  /// Custom link. When `f_prime` is given it is checked against central
  /// differences of `f` at 100 points in [-5, 5].
  static LinkSpec custom(std::function<double(double)> f,
                         std::function<double(double)> f_prime = {});

  /// Parses "identity", "f1".."f8", "sign" (case-insensitive).
  static LinkSpec from_name(const std::string& name);

  LinkKind kind() const noexcept { return kind_; }
  bool has_derivative() const noexcept;
  std::string name() const;

  double operator()(double x) const;
  /// f'(x); throws Unsupported for Sign or custom links without f'.
  double derivative(double x) const;

 private:
  LinkKind kind_ = LinkKind::Identity;
  std::function<double(double)> f_;
  std::function<double(double)> f_prime_;
};

}  // namespace impreg
