#include "impreg/link.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "impreg/error.hpp"
#include "impreg/rng.hpp"

namespace impreg {

namespace {

const double kSqrt5 = std::sqrt(5.0);
const double kSqrt7 = std::sqrt(7.0);

double sech2(double x) {
  const double c = std::cosh(x);
  return 1.0 / (c * c);
}

double cos2(double x) {
  const double c = std::cos(x);
  return c * c;
}

}  // namespace

LinkSpec::LinkSpec(LinkKind kind) : kind_(kind) {
  require(kind != LinkKind::Custom, ErrorCode::InvalidArgument,
          "use LinkSpec::custom for custom links");
}

LinkSpec LinkSpec::custom(std::function<double(double)> f,
                          std::function<double(double)> f_prime) {
  require(static_cast<bool>(f), ErrorCode::InvalidArgument,
          "custom link needs f");
  if (f_prime) {
    Rng rng(0x5eedULL);
    constexpr double h = 1e-6;
    for (int k = 0; k < 100; ++k) {
      const double x = -5.0 + 10.0 * rng.uniform();
      const double fd = (f(x + h) - f(x - h)) / (2.0 * h);
      const double an = f_prime(x);
      if (std::abs(fd - an) > 1e-5 * std::max(1.0, std::abs(an)))
        fail(ErrorCode::InvalidArgument,
             "custom link: f_prime disagrees with finite differences of f");
    }
  }
  LinkSpec link;
  link.kind_ = LinkKind::Custom;
  link.f_ = std::move(f);
  link.f_prime_ = std::move(f_prime);
  return link;
}

LinkSpec LinkSpec::from_name(const std::string& raw) {
  std::string name = raw;
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (name == "identity") return LinkSpec(LinkKind::Identity);
  if (name == "sign") return LinkSpec(LinkKind::Sign);
  if (name.size() == 2 && name[0] == 'f' && name[1] >= '1' && name[1] <= '8')
    return LinkSpec(static_cast<LinkKind>(static_cast<int>(LinkKind::F1) + (name[1] - '1')));
  fail(ErrorCode::Config, "unknown link '" + raw + "'");
}

bool LinkSpec::has_derivative() const noexcept {
  if (kind_ == LinkKind::Sign) return false;
  if (kind_ == LinkKind::Custom) return static_cast<bool>(f_prime_);
  return true;
}

std::string LinkSpec::name() const {
  switch (kind_) {
    case LinkKind::Identity: return "identity";
    case LinkKind::Sign: return "sign";
    case LinkKind::Custom: return "custom";
    default: return "f" + std::to_string(static_cast<int>(kind_) - static_cast<int>(LinkKind::F1) + 1);
  }
}

double LinkSpec::operator()(double x) const {
  switch (kind_) {
    case LinkKind::Identity: return x;
    case LinkKind::F1: return 8.0 * x + 4.0 * std::sin(x);
    case LinkKind::F2: return 4.0 * x + 7.0 * std::tanh(x) + cos2(x);
    case LinkKind::F3: return 0.5 * x + 4.0 * std::sin(x) + kSqrt5 * cos2(x);
    case LinkKind::F4: return 4.0 * std::sin(x) + 2.0 * cos2(x);
    case LinkKind::F5: return kSqrt7 * x + 3.0 * cos2(x);
    case LinkKind::F6: return 0.5 * x + 4.0 * std::tanh(x);
    case LinkKind::F7: return x + 3.0 * std::sin(x);
    case LinkKind::F8: return 10.0 * std::tanh(x) + 8.0 * std::sin(x);
    case LinkKind::Sign: return x >= 0.0 ? 1.0 : -1.0;
    case LinkKind::Custom: return f_(x);
  }
  return 0.0;
}

double LinkSpec::derivative(double x) const {
  // d/dx cos^2 x = -sin 2x
  switch (kind_) {
    case LinkKind::Identity: return 1.0;
    case LinkKind::F1: return 8.0 + 4.0 * std::cos(x);
    case LinkKind::F2: return 4.0 + 7.0 * sech2(x) - std::sin(2.0 * x);
    case LinkKind::F3: return 0.5 + 4.0 * std::cos(x) - kSqrt5 * std::sin(2.0 * x);
    case LinkKind::F4: return 4.0 * std::cos(x) - 2.0 * std::sin(2.0 * x);
    case LinkKind::F5: return kSqrt7 - 3.0 * std::sin(2.0 * x);
    case LinkKind::F6: return 0.5 + 4.0 * sech2(x);
    case LinkKind::F7: return 1.0 + 3.0 * std::cos(x);
    case LinkKind::F8: return 10.0 * sech2(x) + 8.0 * std::cos(x);
    case LinkKind::Sign: break;
    case LinkKind::Custom:
      if (f_prime_) return f_prime_(x);
      break;
  }
  fail(ErrorCode::Unsupported, "link '" + name() + "' has no derivative");
}

}  // namespace impreg
