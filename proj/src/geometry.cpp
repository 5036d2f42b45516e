// Copyright 2026 The hsurf Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hsurf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "hsurf/error.hpp"

namespace hsurf {
namespace {

constexpr double kSideTol = 1e-12;

struct Simpson {
  const FieldExpr& dg;
  int evaluations = 0;

  double f(double x) {
    ++evaluations;
    const double d = dg(x);
    return std::sqrt(1.0 + d * d);
  }

  double step(double a, double b, double fa, double fm, double fb, double whole,
              double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0) {
      throw GeometryError("arclength quadrature did not converge on [" +
                          std::to_string(a) + ", " + std::to_string(b) + "]");
    }
    return step(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           step(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  }

  double integrate(double a, double b, double tol) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return step(a, b, fa, fm, fb, whole, tol, 40);
  }
};

double angle_between(const Vec2& d1, const Vec2& d2) {
  const double cross = d1.x() * d2.y() - d1.y() * d2.x();
  return std::atan2(std::abs(cross), d1.dot(d2));
}

}  // namespace

SupportArc::SupportArc(FieldExpr g, double a, double b, std::vector<double> x_table,
                       std::vector<double> s_table)
    : g_(std::move(g)),
      dg_(differentiate(g_, Var::X1)),
      ddg_(differentiate(dg_, Var::X1)),
      a_(a),
      b_(b),
      x_(std::move(x_table)),
      s_(std::move(s_table)) {}

double SupportArc::s_at(double x1) const {
  x1 = std::clamp(x1, a_, b_);
  auto it = std::upper_bound(x_.begin(), x_.end(), x1);
  std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  if (k >= x_.size() - 1) k = x_.size() - 2;
  Simpson q{dg_};
  return s_[k] + q.integrate(x_[k], x1, 1e-14);
}

double SupportArc::x_at(double s) const {
  s = std::clamp(s, 0.0, length());
  auto it = std::upper_bound(s_.begin(), s_.end(), s);
  std::size_t k = it == s_.begin() ? 0 : static_cast<std::size_t>(it - s_.begin()) - 1;
  if (k >= s_.size() - 1) k = s_.size() - 2;
  const double t = (s - s_[k]) / (s_[k + 1] - s_[k]);
  double x = x_[k] + t * (x_[k + 1] - x_[k]);
  for (int it_newton = 0; it_newton < 30; ++it_newton) {
    const double d = dg_(x);
    const double speed = std::sqrt(1.0 + d * d);
    const double dx = (s_at(x) - s) / speed;
    x = std::clamp(x - dx, a_, b_);
    if (std::abs(dx) <= 1e-15 * (1.0 + std::abs(x))) break;
  }
  return x;
}

Vec2 SupportArc::point(double x1) const { return {x1, g_(x1)}; }

ArcFrame SupportArc::frame(double x1) const {
  ArcFrame f;
  f.x1 = x1;
  f.point = point(x1);
  const double d = dg_(x1);
  const double dd = ddg_(x1);
  const double speed = std::sqrt(1.0 + d * d);
  f.t = Vec3(1.0 / speed, d / speed, 0.0);
  f.n = f.t.cross(Vec3::UnitZ());
  f.nu = f.n.head<2>();
  // sigma'' = g'' / (1+g'^2)^2 (-g', 1)
  const Vec3 sigma_pp = Vec3(-d, 1.0, 0.0) * (dd / (speed * speed * speed * speed));
  f.kappa = -sigma_pp.dot(f.n);
  return f;
}

Vec2 SupportArc::sigma_prime(double s) const {
  const double x = x_at(s);
  const double d = dg_(x);
  const double speed = std::sqrt(1.0 + d * d);
  return {1.0 / speed, d / speed};
}

SupportArc build_support_arc(const FieldExpr& g, double a, double b, int n_samples) {
  if (!(a < b)) throw GeometryError("support arc needs a < b");
  n_samples = std::max(n_samples, 2);
  const FieldExpr dg = differentiate(g, Var::X1);
  std::vector<double> xs(static_cast<std::size_t>(n_samples));
  std::vector<double> ss(xs.size(), 0.0);
  Simpson q{dg};
  for (int k = 0; k < n_samples; ++k) {
    xs[static_cast<std::size_t>(k)] =
        k == n_samples - 1 ? b : a + (b - a) * k / (n_samples - 1);
  }
  for (std::size_t k = 1; k < xs.size(); ++k) {
    ss[k] = ss[k - 1] + q.integrate(xs[k - 1], xs[k], 1e-14);
  }
  return SupportArc(g, a, b, std::move(xs), std::move(ss));
}

bool DomainSpec::has_left_side() const {
  const double a = support.a();
  return fixed.u(a) - support.g()(a) > kSideTol;
}

bool DomainSpec::has_right_side() const {
  const double b = support.b();
  return fixed.u(b) - support.g()(b) > kSideTol;
}

std::pair<double, double> corner_angles(const DomainSpec& d) {
  const double a = d.support.a();
  const double b = d.support.b();
  const FieldExpr du = differentiate(d.fixed.u, Var::X1);
  const double ga = d.support.dg()(a);
  const double gb = d.support.dg()(b);
  const Vec2 sigma1(1.0, ga);
  const Vec2 sigma2(-1.0, -gb);
  const Vec2 fixed1 = d.has_left_side() ? Vec2(0.0, 1.0) : Vec2(1.0, du(a));
  const Vec2 fixed2 = d.has_right_side() ? Vec2(0.0, 1.0) : Vec2(-1.0, -du(b));
  for (const Vec2* v : {&sigma1, &sigma2, &fixed1, &fixed2}) {
    if (!std::isfinite(v->norm()) || v->norm() == 0.0) {
      throw GeometryError("degenerate tangent at a corner");
    }
  }
  return {angle_between(sigma1, fixed1), angle_between(sigma2, fixed2)};
}

DomainSpec make_domain(const FieldExpr& g, const FieldExpr& u, const FieldExpr& gamma,
                       double a, double b, double R, int arc_samples) {
  if (!(R > 0.0)) throw GeometryError("R must be positive");
  DomainSpec d{build_support_arc(g, a, b, arc_samples), FixedArc{u, gamma}};
  d.R = R;
  if (u(a) < g(a) - kSideTol || u(b) < g(b) - kSideTol) {
    throw GeometryError("degenerate band: u < g at an end point");
  }
  constexpr int kChecks = 1024;
  for (int k = 1; k < kChecks; ++k) {
    const double x = a + (b - a) * k / kChecks;
    if (!(u(x) > g(x))) {
      throw GeometryError("degenerate band: u <= g at x1 = " + std::to_string(x));
    }
  }
  d.corner1 = Vec2(a, g(a));
  d.corner2 = Vec2(b, g(b));
  const auto [al1, al2] = corner_angles(d);
  d.alpha1 = al1;
  d.alpha2 = al2;
  for (double al : {al1, al2}) {
    if (!(al > 0.0 && al < std::numbers::pi)) {
      throw GeometryError("corner angle outside (0, pi)");
    }
  }
  return d;
}

std::vector<BoundarySample> sample_boundary(const DomainSpec& d, int count) {
  const double a = d.support.a();
  const double b = d.support.b();
  const FieldExpr& g = d.support.g();
  const FieldExpr& u = d.fixed.u;
  const FieldExpr du = differentiate(u, Var::X1);
  const FieldExpr ddu = differentiate(du, Var::X1);

  // Length of the upper graph by a fine polyline.
  double len_u = 0.0;
  {
    constexpr int kPoly = 4096;
    Vec2 prev(a, u(a));
    for (int k = 1; k <= kPoly; ++k) {
      const double x = a + (b - a) * k / kPoly;
      const Vec2 p(x, u(x));
      len_u += (p - prev).norm();
      prev = p;
    }
  }
  const double left = d.has_left_side() ? u(a) - g(a) : 0.0;
  const double right = d.has_right_side() ? u(b) - g(b) : 0.0;
  const double len_s = d.support.length();
  const double total = len_s + len_u + left + right;
  auto share = [&](double len) {
    return len > 0.0 ? std::max(2, static_cast<int>(std::lround(count * len / total))) : 0;
  };
  const int n_s = share(len_s);
  const int n_u = share(len_u);
  const int n_l = share(left);
  const int n_r = share(right);

  std::vector<BoundarySample> out;
  out.reserve(static_cast<std::size_t>(n_s + n_u + n_l + n_r) + 4);
  for (int k = 0; k < n_s; ++k) {
    const double s = len_s * k / (n_s - 1);
    const double x = k == 0 ? a : (k == n_s - 1 ? b : d.support.x_at(s));
    const ArcFrame f = d.support.frame(x);
    out.push_back({f.point, f.nu, f.kappa, BoundaryPart::Support});
  }
  for (int k = 0; k < n_r; ++k) {
    const double y = g(b) + right * k / (n_r - 1);
    out.push_back({Vec2(b, y), Vec2(1.0, 0.0), 0.0, BoundaryPart::RightSide});
  }
  for (int k = 0; k < n_u; ++k) {
    const double x = b - (b - a) * k / (n_u - 1);
    const double s1 = du(x);
    const double speed = std::sqrt(1.0 + s1 * s1);
    const Vec2 nu(-s1 / speed, 1.0 / speed);
    const double kappa = -ddu(x) / (speed * speed * speed);
    out.push_back({Vec2(x, u(x)), nu, kappa, BoundaryPart::Fixed});
  }
  for (int k = 0; k < n_l; ++k) {
    const double y = u(a) - left * k / (n_l - 1);
    out.push_back({Vec2(a, y), Vec2(-1.0, 0.0), 0.0, BoundaryPart::LeftSide});
  }
  return out;
}

AdmissibilityReport check_r_admissible(const DomainSpec& d, int samples) {
  const std::vector<BoundarySample> pts = sample_boundary(d, samples);
  AdmissibilityReport rep;
  rep.samples = static_cast<int>(pts.size());
  for (const auto& p : pts) rep.max_norm = std::max(rep.max_norm, p.p.norm());
  rep.disc_margin = d.R - rep.max_norm;
  rep.disc_pass = rep.max_norm < d.R;

  // |eta - xi + R nu|^2 <= R^2  <=>  |eta - xi|^2 <= -2 R (eta - xi).nu
  const double scale = std::max(rep.max_norm, 1e-300);
  double required = 0.0;
  Vec2 worst = pts.empty() ? Vec2::Zero() : pts.front().p;
  for (const auto& xi : pts) {
    double need = 0.0;
    for (const auto& eta : pts) {
      const Vec2 diff = eta.p - xi.p;
      const double dist2 = diff.squaredNorm();
      if (dist2 <= 1e-28 * scale * scale) continue;
      const double along = diff.dot(xi.nu);
      if (along >= 0.0) {
        need = std::numeric_limits<double>::infinity();
        break;
      }
      need = std::max(need, dist2 / (-2.0 * along));
    }
    if (need > required) {
      required = need;
      worst = xi.p;
    }
  }
  rep.required_R = required;
  rep.convexity_margin = d.R - required;
  rep.convexity_pass = required <= d.R * (1.0 + 1e-9);
  rep.worst_point = worst;
  rep.feasible_R_min = std::max(required, rep.max_norm);
  return rep;
}

void write_boundary_csv(std::ostream& os, const DomainSpec& domain, int samples) {
  const auto pts = sample_boundary(domain, samples);
  os << "s,x1,x2,kappa,nu1,nu2\n";
  os.precision(17);
  double s = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (k > 0) s += (pts[k].p - pts[k - 1].p).norm();
    os << s << ',' << pts[k].p.x() << ',' << pts[k].p.y() << ',' << pts[k].kappa << ','
       << pts[k].nu.x() << ',' << pts[k].nu.y() << '\n';
  }
}

}  // namespace hsurf
