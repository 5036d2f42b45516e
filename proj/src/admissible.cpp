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

#include "hsurf/admissible.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hsurf/error.hpp"

namespace hsurf {
namespace {

FieldExpr x2() { return FieldExpr::variable(Var::X2); }

GaussRule make_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(rule.nodes.size());
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

template <class F>
double integrate_segment(double lo, double hi, F&& f) {
  const GaussRule& rule = gauss_legendre_16();
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
  }
  return half * sum;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

const GaussRule& gauss_legendre_16() {
  static const GaussRule rule = make_gauss_legendre(16);
  return rule;
}

QField::QField(FieldExpr H, FieldExpr psi, FieldExpr g)
    : H_(std::move(H)), psi_(std::move(psi)), g_(std::move(g)) {
  if (H_.depends_on(Var::X3)) {
    throw DomainError(
        "H must not depend on the height x3: the Q construction needs a "
        "height-independent mean curvature");
  }
  if (psi_.depends_on(Var::X3) || g_.depends_on(Var::X2) || g_.depends_on(Var::X3)) {
    throw DomainError("psi must be a function of (x1, x2) and g a function of x1");
  }
  dg_ = differentiate(g_, Var::X1);
  dH1_ = differentiate(H_, Var::X1);
  trace_term_ = substitute(psi_, Var::X2, g_) *
                apply(Func::Sqrt, FieldExpr::constant(1.0) + dg_ * dg_);
  dtrace_term_ = differentiate(trace_term_, Var::X1);
  if (!H_.depends_on(Var::X2)) {
    q2_expr_ = FieldExpr::constant(2.0) * H_ * (x2() - g_) - trace_term_;
    dq2_dx1_ = differentiate(*q2_expr_, Var::X1);
  }
}

QField QField::zero() { return QField(FieldExpr(), FieldExpr(), FieldExpr()); }

bool QField::is_zero() const { return H_.is_zero() && trace_term_.is_zero(); }

double QField::q2(double p1, double p2) const {
  if (q2_expr_) return (*q2_expr_)(p1, p2);
  const double lo = g_(p1);
  const double integral =
      integrate_segment(lo, p2, [&](double t) { return H_(p1, t); });
  return 2.0 * integral - trace_term_(p1);
}

double QField::divergence(double p1, double p2) const { return 2.0 * H_(p1, p2); }

Eigen::Matrix3d QField::jacobian(const Vec3& p) const {
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  const double p1 = p.x();
  const double p2 = p.y();
  if (dq2_dx1_) {
    J(1, 0) = (*dq2_dx1_)(p1, p2);
  } else {
    const double lo = g_(p1);
    const double integral =
        integrate_segment(lo, p2, [&](double t) { return dH1_(p1, t); });
    J(1, 0) = 2.0 * integral - 2.0 * H_(p1, lo) * dg_(p1) - dtrace_term_(p1);
  }
  J(1, 1) = 2.0 * H_(p1, p2);
  return J;
}

double QField::normal_trace(const SupportArc& arc, double p1) const {
  const ArcFrame f = arc.frame(p1);
  return q2(p1, f.point.y()) * f.n.y();
}

QField build_q_field(const FieldExpr& H, const FieldExpr& psi, const FieldExpr& g) {
  return QField(H, psi, g);
}

bool GateReport::pass() const {
  return std::all_of(entries.begin(), entries.end(), [](const GateEntry& e) { return e.pass; });
}

const GateEntry* GateReport::find(const std::string& key) const {
  for (const auto& e : entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

std::vector<std::string> GateReport::failures() const {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (!e.pass) out.push_back(e.label);
  }
  return out;
}

GateReport merge(GateReport a, const GateReport& b) {
  a.entries.insert(a.entries.end(), b.entries.begin(), b.entries.end());
  a.notes.insert(a.notes.end(), b.notes.begin(), b.notes.end());
  return a;
}

double smallness_value(double R, double h0, double psi0, double g0) {
  return 4.0 * R * h0 + psi0 * std::sqrt(1.0 + g0 * g0);
}

std::vector<Vec2> disc_samples(double R, int min_points) {
  // The disc covers pi/4 of its bounding square.
  const int side = static_cast<int>(std::ceil(std::sqrt(min_points * 4.0 / std::numbers::pi))) + 2;
  const double r_in = R * (1.0 - 1e-9);
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(side * side));
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      const Vec2 p(-R + 2.0 * R * (i + 0.5) / side, -R + 2.0 * R * (j + 0.5) / side);
      if (p.norm() < r_in) pts.push_back(p);
    }
  }
  const int ring = std::max(256, side * 4);
  for (int k = 0; k < ring; ++k) {
    const double th = 2.0 * std::numbers::pi * k / ring;
    pts.emplace_back(r_in * std::cos(th), r_in * std::sin(th));
  }
  return pts;
}

Suprema sample_suprema(const QField& Q, const FieldExpr& H, const DomainSpec& domain,
                       int min_points) {
  Suprema s;
  const double R = domain.R;
  const auto pts = disc_samples(R, min_points);
  if (auto c = H.constant_value()) {
    s.h0 = std::abs(*c);
    s.h0_exact = true;
  } else {
    for (const auto& p : pts) s.h0 = std::max(s.h0, std::abs(H(p.x(), p.y())));
  }
  for (const auto& p : pts) s.q_sup = std::max(s.q_sup, std::abs(Q.q2(p.x(), p.y())));

  const FieldExpr& g = domain.support.g();
  const FieldExpr& dg = domain.support.dg();
  const FieldExpr psi_trace = substitute(Q.psi(), Var::X2, g);
  const int line = std::max(min_points, 4096);
  if (auto c = psi_trace.constant_value()) {
    s.psi0 = std::abs(*c);
    s.psi0_exact = true;
  } else {
    const double a = domain.support.a();
    const double b = domain.support.b();
    for (int k = 0; k <= line; ++k) {
      s.psi0 = std::max(s.psi0, std::abs(psi_trace(a + (b - a) * k / line)));
    }
  }
  if (auto c = dg.constant_value()) {
    s.g0 = std::abs(*c);
    s.g0_exact = true;
  } else {
    for (int k = 0; k <= line; ++k) {
      s.g0 = std::max(s.g0, std::abs(dg(-R + 2.0 * R * k / line)));
    }
  }
  return s;
}

GateReport check_field_conditions(const QField& Q, const FieldExpr& H,
                                  const DomainSpec& domain, int min_points) {
  GateReport rep;
  const double R = domain.R;
  Suprema s;
  try {
    s = sample_suprema(Q, H, domain, min_points);
  } catch (const DomainError& e) {
    GateEntry bad{"fields", "field sampling", "finite", 0.0, 0.0, 0.0, -1.0, false, e.what()};
    rep.entries.push_back(bad);
    return rep;
  }
  auto inflate = [](double v, bool exact) { return exact ? v : v * kSupInflation; };

  {
    GateEntry e{"0_4", "(0.4)", "<", 1.0, s.q_sup, inflate(s.q_sup, Q.is_zero()), 0.0, false,
                "sup |Q| over B_R"};
    e.margin = e.bound - e.inflated;
    e.pass = e.inflated < e.bound;
    rep.entries.push_back(e);
  }
  {
    GateEntry e{"0_5", "(0.5)", "<=", 1.0 / (2.0 * R), s.h0, inflate(s.h0, s.h0_exact), 0.0,
                false, "sup |H| over B_R"};
    e.margin = e.bound - e.inflated;
    e.pass = e.inflated <= e.bound;
    rep.entries.push_back(e);
  }
  {
    const FieldExpr dH3 = differentiate(H, Var::X3);
    GateEntry e{"0_10", "(0.10)", ">=", 0.0, 0.0, 0.0, 0.0, true, "dH/dx3 symbolically zero"};
    if (!dH3.is_zero()) {
      double lo = std::numeric_limits<double>::infinity();
      const auto pts = disc_samples(R, min_points / 4);
      for (int layer = -2; layer <= 2; ++layer) {
        for (const auto& p : pts) lo = std::min(lo, dH3(p.x(), p.y(), layer * R));
      }
      e.value = e.inflated = lo;
      e.detail = "min dH/dx3 over sampled B_R x [-2R, 2R]";
      e.pass = lo >= 0.0;
    }
    e.margin = e.inflated - e.bound;
    rep.entries.push_back(e);
  }
  const double alphas[2] = {domain.alpha1, domain.alpha2};
  const double xs[2] = {domain.support.a(), domain.support.b()};
  for (int j = 0; j < 2; ++j) {
    const double qn = std::abs(Q.normal_trace(domain.support, xs[j]));
    GateEntry e{"0_11_" + std::to_string(j + 1), "(0.11) at corner " + std::to_string(j + 1),
                "<", std::cos(alphas[j]), qn, qn, 0.0, false,
                "|Q.n| against cos(alpha) with alpha = " + fmt(alphas[j])};
    e.margin = e.bound - e.inflated;
    e.pass = e.inflated < e.bound;
    rep.entries.push_back(e);
  }
  {
    const double v = smallness_value(R, s.h0, s.psi0, s.g0);
    const double vi = smallness_value(R, inflate(s.h0, s.h0_exact), inflate(s.psi0, s.psi0_exact),
                                      inflate(s.g0, s.g0_exact));
    GateEntry e{"4_8", "(4.8)", "<", 1.0, v, vi, 1.0 - vi, vi < 1.0,
                "4 R h0 + psi0 sqrt(1 + g0^2) with h0 = " + fmt(s.h0) + ", psi0 = " +
                    fmt(s.psi0) + ", g0 = " + fmt(s.g0)};
    rep.entries.push_back(e);
    if (v < 1.0 && !(s.q_sup < 1.0)) {
      throw Error("sampled sup|Q| >= 1 although 4 R h0 + psi0 sqrt(1+g0^2) < 1");
    }
  }
  rep.notes.push_back("Q2 uses sqrt(1 + g'^2) in its boundary term so that Q.n = psi on the support arc");
  rep.notes.push_back("Q.n on the support cylinder does not depend on x3 since Q2 does not");
  return rep;
}

GateReport check_geometry_conditions(const DomainSpec& domain, int samples) {
  GateReport rep;
  const AdmissibilityReport adm = check_r_admissible(domain, samples);
  {
    GateEntry e{"adm_i", "R-admissible (i)", "<", domain.R, adm.max_norm, adm.max_norm,
                adm.disc_margin, adm.disc_pass, "max boundary norm against R"};
    rep.entries.push_back(e);
  }
  {
    GateEntry e{"adm_ii", "R-admissible (ii)", "<=", domain.R, adm.required_R, adm.required_R,
                adm.convexity_margin, adm.convexity_pass,
                "smallest enclosing-disc radius; worst at (" + fmt(adm.worst_point.x()) + ", " +
                    fmt(adm.worst_point.y()) + ")"};
    rep.entries.push_back(e);
  }
  {
    const double amax = std::max(domain.alpha1, domain.alpha2);
    const double amin = std::min(domain.alpha1, domain.alpha2);
    GateEntry e{"angles", "corner angles in (0, pi/2]", "in", std::numbers::pi / 2, amax, amax,
                std::min(std::numbers::pi / 2 - amax, amin), amin > 0.0 && amax <= std::numbers::pi / 2 + 1e-12,
                "alpha1 = " + fmt(domain.alpha1) + ", alpha2 = " + fmt(domain.alpha2)};
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace hsurf
