#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "corridor/errors.hpp"

namespace corridor {

namespace detail {
inline constexpr double pi = 3.14159265358979323846;

inline void require_unit_interval(double xi, const char* what) {
  if (!(xi >= 0.0 && xi <= 1.0))
    throw DomainError(std::string(what) + ": position " + std::to_string(xi) +
                      " outside [0,1]");
}
}  // namespace detail

/// k(xi) = 1 + a cos(2 pi xi / b). Has an interior minimum at xi = b/2 when
/// 1 < b < 2.
struct CosineWidth {
  double amplitude;
  double period;
};

/// k(xi) = w_e - (w_e - w_m) exp(-((xi - xi0)/d)^6): two wide sections of
/// width w_e joined by a neck of width w_m, length ~2d, centered at xi0.
struct SupergaussWidth {
  double end_width;
  double neck_width;
  double neck_length;
  double neck_position;
};

/// Natural cubic spline through strictly increasing knots; C2 on the knot span.
class CubicSpline {
 public:
  CubicSpline() = default;

  CubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 4 || y_.size() != n)
      throw DomainError("tabulated width needs at least 4 knots");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1]))
        throw DomainError("tabulated width knots must be strictly increasing");

    // Second derivatives from the natural-spline tridiagonal system.
    m_.assign(n, 0.0);
    std::vector<double> diag(n, 0.0), rhs(n, 0.0), sub(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double hl = x_[i] - x_[i - 1];
      const double hr = x_[i + 1] - x_[i];
      sub[i] = hl;
      diag[i] = 2.0 * (hl + hr);
      rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
    }
    // Thomas elimination on the interior block; natural ends stay zero.
    for (std::size_t i = 2; i + 1 < n; ++i) {
      const double w = sub[i] / diag[i - 1];
      diag[i] -= w * (x_[i] - x_[i - 1]);
      rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      const double upper = (i + 2 < n) ? (x_[i + 1] - x_[i]) * m_[i + 1] : 0.0;
      m_[i] = (rhs[i] - upper) / diag[i];
      if (i == 1) break;
    }
  }

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

  double value(double t) const {
    const std::size_t i = interval(t);
    const double h = x_[i + 1] - x_[i];
    const double u = t - x_[i];
    const double b = (y_[i + 1] - y_[i]) / h - h * (2.0 * m_[i] + m_[i + 1]) / 6.0;
    return y_[i] + u * (b + u * (0.5 * m_[i] + u * (m_[i + 1] - m_[i]) / (6.0 * h)));
  }

  double deriv(double t) const {
    const std::size_t i = interval(t);
    const double h = x_[i + 1] - x_[i];
    const double u = t - x_[i];
    const double b = (y_[i + 1] - y_[i]) / h - h * (2.0 * m_[i] + m_[i + 1]) / 6.0;
    return b + u * (m_[i] + u * 0.5 * (m_[i + 1] - m_[i]) / h);
  }

  double deriv2(double t) const {
    const std::size_t i = interval(t);
    const double h = x_[i + 1] - x_[i];
    const double u = t - x_[i];
    return m_[i] + u * (m_[i + 1] - m_[i]) / h;
  }

 private:
  std::size_t interval(double t) const {
    // Clamp to the knot span; callers guarantee t in [front, back].
    if (t <= x_.front()) return 0;
    if (t >= x_.back()) return x_.size() - 2;
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
  }

  std::vector<double> x_, y_, m_;
};

/// Corridor width function on [0,1]. Evaluable twice-differentiably; built-in
/// kinds use closed forms, tabulated data a C2 cubic spline.
class WidthProfile {
 public:
  static WidthProfile cosine(double amplitude, double period) {
    if (!(period > 0.0)) throw DomainError("cosine width: period must be positive");
    if (!(std::abs(amplitude) < 1.0))
      throw DomainError("cosine width: |amplitude| must be < 1 to keep k positive");
    return WidthProfile(CosineWidth{amplitude, period});
  }

  static WidthProfile supergaussian(double end_width, double neck_width,
                                    double neck_length, double neck_position) {
    if (!(end_width > 0.0 && neck_width > 0.0 && neck_length > 0.0))
      throw DomainError("supergaussian width: parameters must be positive");
    if (!(neck_width < end_width))
      throw DomainError("supergaussian width: neck must be narrower than the ends");
    if (!(neck_position > 0.0 && neck_position < 1.0))
      throw DomainError("supergaussian width: neck position must be interior");
    return WidthProfile(SupergaussWidth{end_width, neck_width, neck_length, neck_position});
  }

  static WidthProfile tabulated(const std::vector<std::pair<double, double>>& knots) {
    std::vector<double> x, y;
    x.reserve(knots.size());
    y.reserve(knots.size());
    for (const auto& [xi, k] : knots) {
      x.push_back(xi);
      y.push_back(k);
    }
    CubicSpline s(std::move(x), std::move(y));
    if (std::abs(s.front()) > 1e-12 || std::abs(s.back() - 1.0) > 1e-12)
      throw DomainError("tabulated width must cover [0,1]");
    return WidthProfile(std::move(s));
  }

  double k(double xi) const {
    detail::require_unit_interval(xi, "eval_k");
    return std::visit(
        [xi](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, CosineWidth>) {
            return 1.0 + f.amplitude * std::cos(2.0 * detail::pi * xi / f.period);
          } else if constexpr (std::is_same_v<T, SupergaussWidth>) {
            const double u = (xi - f.neck_position) / f.neck_length;
            const double v = u * u * u * u * u * u;
            return f.end_width - (f.end_width - f.neck_width) * std::exp(-v);
          } else {
            return f.value(xi);
          }
        },
        kind_);
  }

  double k_prime(double xi) const {
    detail::require_unit_interval(xi, "eval_k_prime");
    return std::visit(
        [xi](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, CosineWidth>) {
            const double w = 2.0 * detail::pi / f.period;
            return -f.amplitude * w * std::sin(w * xi);
          } else if constexpr (std::is_same_v<T, SupergaussWidth>) {
            const double u = (xi - f.neck_position) / f.neck_length;
            const double u5 = u * u * u * u * u;
            const double v = u5 * u;
            return (f.end_width - f.neck_width) * std::exp(-v) * 6.0 * u5 / f.neck_length;
          } else {
            return f.deriv(xi);
          }
        },
        kind_);
  }

  double k_second(double xi) const {
    detail::require_unit_interval(xi, "eval_k_second");
    return std::visit(
        [xi](const auto& f) -> double {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, CosineWidth>) {
            const double w = 2.0 * detail::pi / f.period;
            return -f.amplitude * w * w * std::cos(w * xi);
          } else if constexpr (std::is_same_v<T, SupergaussWidth>) {
            const double d = f.neck_length;
            const double u = (xi - f.neck_position) / d;
            const double u4 = u * u * u * u;
            const double u5 = u4 * u;
            const double v = u5 * u;
            return (f.end_width - f.neck_width) * std::exp(-v) *
                   (30.0 * u4 - 36.0 * u5 * u5) / (d * d);
          } else {
            return f.deriv2(xi);
          }
        },
        kind_);
  }

  /// Logarithmic derivative g = k'/k.
  double g(double xi) const {
    const double kk = k(xi);
    if (!(kk > 0.0)) throw DomainError("eval_g: width is not positive here");
    return k_prime(xi) / kk;
  }

  bool is_tabulated() const { return std::holds_alternative<CubicSpline>(kind_); }

 private:
  template <typename Kind>
  explicit WidthProfile(Kind&& kind) : kind_(std::forward<Kind>(kind)) {}

  std::variant<CosineWidth, SupergaussWidth, CubicSpline> kind_;
};

inline double eval_k(const WidthProfile& profile, double xi) { return profile.k(xi); }
inline double eval_g(const WidthProfile& profile, double xi) { return profile.g(xi); }

/// Location and curvature data of the width minimum, plus the end widths the
/// downstream formulas keep dividing by.
struct BottleneckInfo {
  double xi_star = 0.0;          ///< interior global minimizer of k
  double k_min = 0.0;            ///< k(xi_star)
  double k0 = 0.0;               ///< k(0)
  double k1 = 0.0;               ///< k(1)
  double g_prime_at_star = 0.0;  ///< k''(xi_star)/k(xi_star)
  bool quadratic = false;        ///< k''(xi_star) above curvature tolerance
  bool assumption_ok = false;
};

namespace detail {

/// Bisect k' over [lo,hi] assuming k'(lo) < 0 < k'(hi).
inline double bisect_k_prime(const WidthProfile& p, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double d = p.k_prime(mid);
    if (d == 0.0) return mid;
    (d < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Locates the global minimum of k by dense grid scan plus derivative
/// bisection and checks the bottleneck assumption: positive width, interior
/// minimizer, and no competing minimum within `tol` of k_min outside the
/// minimizer's basin. Throws AssumptionViolated with a diagnostic otherwise.
///
/// The returned `quadratic` flag records whether the minimum is nondegenerate
/// in the second-derivative sense; flat-bottomed necks (the supergaussian has
/// sixth-order contact) pass validation but report quadratic = false, and the
/// folded-saddle linearization is then singular.
inline BottleneckInfo validate(const WidthProfile& profile, double tol = 1e-9) {
  constexpr int kGridPoints = 20001;
  constexpr double kCurvatureTol = 1e-8;

  std::vector<double> xs(kGridPoints), ks(kGridPoints);
  double k_grid_min = std::numeric_limits<double>::infinity();
  double kp_max = 0.0;
  for (int i = 0; i < kGridPoints; ++i) {
    xs[i] = static_cast<double>(i) / (kGridPoints - 1);
    ks[i] = profile.k(xs[i]);
    k_grid_min = std::min(k_grid_min, ks[i]);
    kp_max = std::max(kp_max, std::abs(profile.k_prime(xs[i])));
  }

  // Positivity on the grid, with interval refinement at grid-local minima.
  for (int i = 0; i < kGridPoints; ++i) {
    if (!(ks[i] > 0.0))
      throw AssumptionViolated("width is not positive at xi = " + std::to_string(xs[i]));
    if (i > 0 && i + 1 < kGridPoints && ks[i] <= ks[i - 1] && ks[i] <= ks[i + 1]) {
      if (profile.k_prime(xs[i - 1]) < 0.0 && profile.k_prime(xs[i + 1]) > 0.0) {
        const double xc = detail::bisect_k_prime(profile, xs[i - 1], xs[i + 1]);
        if (!(profile.k(xc) > 0.0))
          throw AssumptionViolated("width dips to zero near xi = " + std::to_string(xc));
      }
    }
  }

  // Cluster all grid points within tol of the minimum; a unique basin is one
  // contiguous run that stays away from the boundary.
  const double tie = tol * std::max(1.0, k_grid_min);
  int first = -1, last = -1;
  int clusters = 0;
  bool in_cluster = false;
  for (int i = 0; i < kGridPoints; ++i) {
    const bool low = ks[i] <= k_grid_min + tie;
    if (low && !in_cluster) {
      ++clusters;
      in_cluster = true;
      if (clusters == 1) first = i;
    }
    if (low && clusters == 1) last = i;
    if (!low) in_cluster = false;
  }
  if (clusters > 1)
    throw AssumptionViolated("tied global minima: " + std::to_string(clusters) +
                             " separate basins within tolerance of k_min");
  if (first == 0 || last == kGridPoints - 1)
    throw AssumptionViolated("global minimum of the width lies on the boundary");

  const double lo = xs[first - 1];
  const double hi = xs[last + 1];
  if (!(profile.k_prime(lo) < 0.0 && profile.k_prime(hi) > 0.0))
    throw AssumptionViolated("minimum basin is not bracketed by a sign change of k'");

  BottleneckInfo info;
  info.xi_star = detail::bisect_k_prime(profile, lo, hi);
  info.k_min = profile.k(info.xi_star);
  info.k0 = profile.k(0.0);
  info.k1 = profile.k(1.0);

  if (std::abs(profile.k_prime(info.xi_star)) > 1e-10 * kp_max)
    throw AssumptionViolated("minimizer refinement failed: |k'| too large at xi*");
  if (!(info.k_min < std::min(info.k0, info.k1)))
    throw AssumptionViolated("no interior bottleneck: k(xi*) is not below the end widths");

  const double curvature = profile.k_second(info.xi_star);
  if (curvature < -kCurvatureTol)
    throw AssumptionViolated("negative curvature at the located minimum");
  info.g_prime_at_star = curvature / info.k_min;
  info.quadratic = curvature > kCurvatureTol;
  info.assumption_ok = true;
  return info;
}

/// Parses a profile specification string:
///   cosine:a=<f>,b=<f>
///   supergauss:we=<f>,wm=<f>,d=<f>,xi0=<f>
///   table:<path.csv>          (CSV with header "xi,k")
inline WidthProfile parse_profile_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw DomainError("profile spec '" + spec + "': expected '<kind>:<args>'");
  const std::string kind = spec.substr(0, colon);
  const std::string args = spec.substr(colon + 1);

  auto parse_kv = [&](std::initializer_list<const char*> keys) {
    std::vector<double> values;
    std::string token;
    std::stringstream ss(args);
    std::vector<std::pair<std::string, double>> kv;
    while (std::getline(ss, token, ',')) {
      const auto eq = token.find('=');
      if (eq == std::string::npos)
        throw DomainError("profile spec '" + spec + "': expected key=value pairs");
      try {
        kv.emplace_back(token.substr(0, eq), std::stod(token.substr(eq + 1)));
      } catch (const std::exception&) {
        throw DomainError("profile spec '" + spec + "': bad number in '" + token + "'");
      }
    }
    for (const char* key : keys) {
      const auto it = std::find_if(kv.begin(), kv.end(),
                                   [&](const auto& p) { return p.first == key; });
      if (it == kv.end())
        throw DomainError("profile spec '" + spec + "': missing key '" + key + "'");
      values.push_back(it->second);
    }
    return values;
  };

  if (kind == "cosine") {
    const auto v = parse_kv({"a", "b"});
    return WidthProfile::cosine(v[0], v[1]);
  }
  if (kind == "supergauss") {
    const auto v = parse_kv({"we", "wm", "d", "xi0"});
    return WidthProfile::supergaussian(v[0], v[1], v[2], v[3]);
  }
  if (kind == "table") {
    std::ifstream in(args);
    if (!in) throw DomainError("profile spec: cannot open table file '" + args + "'");
    std::string line;
    if (!std::getline(in, line)) throw DomainError("table file '" + args + "' is empty");
    auto strip = [](std::string s) {
      s.erase(std::remove_if(s.begin(), s.end(),
                             [](unsigned char c) { return std::isspace(c); }),
              s.end());
      return s;
    };
    if (strip(line) != "xi,k")
      throw DomainError("table file '" + args + "': header must be 'xi,k'");
    std::vector<std::pair<double, double>> knots;
    while (std::getline(in, line)) {
      if (strip(line).empty()) continue;
      std::stringstream row(line);
      std::string a, b;
      if (!std::getline(row, a, ',') || !std::getline(row, b))
        throw DomainError("table file '" + args + "': bad row '" + line + "'");
      try {
        knots.emplace_back(std::stod(a), std::stod(b));
      } catch (const std::exception&) {
        throw DomainError("table file '" + args + "': bad number in '" + line + "'");
      }
    }
    return WidthProfile::tabulated(knots);
  }
  throw DomainError("profile spec '" + spec + "': unknown kind '" + kind + "'");
}

}  // namespace corridor
