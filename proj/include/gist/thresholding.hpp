#pragma once

#include <cmath>

#include "gist/types.hpp"

namespace gist {

enum class RuleKind { Soft, Hard, HardRidge };

/// Scalar threshold rule Theta(t; lambda[, eta]). The boundary |t| == lambda
/// takes the keep branch for every rule.
template <typename Scalar>
struct ThresholdRule {
  RuleKind kind = RuleKind::Soft;
  Scalar lambda = 0;
  Scalar eta = 0;  // used by HardRidge only

  static ThresholdRule soft(Scalar lambda) { return {RuleKind::Soft, lambda, Scalar(0)}; }
  static ThresholdRule hard(Scalar lambda) { return {RuleKind::Hard, lambda, Scalar(0)}; }
  static ThresholdRule hard_ridge(Scalar lambda, Scalar eta) {
    return {RuleKind::HardRidge, lambda, eta};
  }
  ThresholdRule with_lambda(Scalar l) const { return {kind, l, eta}; }
};

enum class PenaltyKind { L1, L0, HardPen, Ridge, HardRidgePen, L0L2 };

/// Closed-form penalty P(t; lambda[, eta]) evaluated at t = |coefficient|
/// (or the group norm). Each threshold rule has at least one matching
/// penalty through the prox correspondence.
template <typename Scalar>
struct PenaltySpec {
  PenaltyKind kind = PenaltyKind::L1;
  Scalar lambda = 0;
  Scalar eta = 0;

  static PenaltySpec l1(Scalar lambda) { return {PenaltyKind::L1, lambda, Scalar(0)}; }
  static PenaltySpec l0(Scalar lambda) { return {PenaltyKind::L0, lambda, Scalar(0)}; }
  static PenaltySpec hard_pen(Scalar lambda) { return {PenaltyKind::HardPen, lambda, Scalar(0)}; }
  static PenaltySpec ridge(Scalar eta) { return {PenaltyKind::Ridge, Scalar(0), eta}; }
  static PenaltySpec hard_ridge_pen(Scalar lambda, Scalar eta) {
    return {PenaltyKind::HardRidgePen, lambda, eta};
  }
  static PenaltySpec l0l2(Scalar lambda, Scalar eta) { return {PenaltyKind::L0L2, lambda, eta}; }
};

/// Continuous penalty matched to a rule (the discrete l0-type counterparts
/// share the same prox; see penalty_value).
template <typename Scalar>
PenaltySpec<Scalar> matched_penalty(const ThresholdRule<Scalar>& rule) {
  switch (rule.kind) {
    case RuleKind::Soft:
      return PenaltySpec<Scalar>::l1(rule.lambda);
    case RuleKind::Hard:
      return PenaltySpec<Scalar>::hard_pen(rule.lambda);
    case RuleKind::HardRidge:
    default:
      return PenaltySpec<Scalar>::hard_ridge_pen(rule.lambda, rule.eta);
  }
}

template <typename Scalar>
Scalar threshold_scalar(const ThresholdRule<Scalar>& rule, Scalar t) {
  const Scalar a = std::abs(t);
  switch (rule.kind) {
    case RuleKind::Soft:
      return a > rule.lambda ? (t > 0 ? a - rule.lambda : rule.lambda - a) : Scalar(0);
    case RuleKind::Hard:
      return a >= rule.lambda ? t : Scalar(0);
    case RuleKind::HardRidge:
    default:
      return a >= rule.lambda ? t / (Scalar(1) + rule.eta) : Scalar(0);
  }
}

template <typename Scalar>
Scalar penalty_value(const PenaltySpec<Scalar>& p, Scalar t) {
  const Scalar l = p.lambda;
  switch (p.kind) {
    case PenaltyKind::L1:
      return l * t;
    case PenaltyKind::L0:
      return t != Scalar(0) ? l * l / Scalar(2) : Scalar(0);
    case PenaltyKind::HardPen:
      return t < l ? -t * t / Scalar(2) + l * t : l * l / Scalar(2);
    case PenaltyKind::Ridge:
      return p.eta * t * t / Scalar(2);
    case PenaltyKind::HardRidgePen: {
      const Scalar knee = l / (Scalar(1) + p.eta);
      if (t < knee) return -t * t / Scalar(2) + l * t;
      return p.eta * t * t / Scalar(2) + l * l / (Scalar(2) * (Scalar(1) + p.eta));
    }
    case PenaltyKind::L0L2:
    default: {
      Scalar v = p.eta * t * t / Scalar(2);
      if (t != Scalar(0)) v += l * l / (Scalar(2) * (Scalar(1) + p.eta));
      return v;
    }
  }
}

/// Vectorized group thresholding: pairs (xi_k, xi_{k+D}) are rescaled by
/// Theta(||pair||)/||pair||, so each surviving pair keeps its direction.
template <typename Scalar>
Vec<Scalar> group_threshold(const ThresholdRule<Scalar>& rule, const Vec<Scalar>& xi,
                            Index num_groups) {
  if (xi.size() != 2 * num_groups)
    throw DimensionError("group_threshold: xi length must be 2*num_groups");
  Vec<Scalar> out(xi.size());
  for (Index k = 0; k < num_groups; ++k) {
    const Scalar a = xi(k);
    const Scalar b = xi(k + num_groups);
    const Scalar norm = std::hypot(a, b);
    if (norm == Scalar(0)) {
      out(k) = Scalar(0);
      out(k + num_groups) = Scalar(0);
      continue;
    }
    const Scalar scale = threshold_scalar(rule, norm) / norm;
    out(k) = a * scale;
    out(k + num_groups) = b * scale;
  }
  return out;
}

/// Elementwise (non-group) thresholding.
template <typename Scalar>
Vec<Scalar> elementwise_threshold(const ThresholdRule<Scalar>& rule, const Vec<Scalar>& xi) {
  Vec<Scalar> out(xi.size());
  for (Index i = 0; i < xi.size(); ++i) out(i) = threshold_scalar(rule, xi(i));
  return out;
}

template <typename Scalar>
struct ProximalCheckReport {
  bool pass = false;
  Scalar input = 0;
  Scalar rule_value = 0;
  Scalar grid_minimizer = 0;
  Scalar objective_gap = 0;  // obj(rule_value) - obj(grid_minimizer)
  bool near_discontinuity = false;
};

/// Test oracle: brute-force minimization of 0.5*(y-b)^2 + P(|b|) over a dense
/// grid, compared against threshold_scalar. At a prox discontinuity the
/// objective has two global minimizers and either branch is accepted.
template <typename Scalar>
ProximalCheckReport<Scalar> proximal_oracle_check(const ThresholdRule<Scalar>& rule,
                                                  const PenaltySpec<Scalar>& p, Scalar y,
                                                  Scalar grid_step) {
  if (!(grid_step > Scalar(0)))
    throw DimensionError("proximal_oracle_check: grid_step must be positive");
  const Scalar radius = std::abs(y) + Scalar(2) * rule.lambda + Scalar(1);
  // index-based grid through exact zero; the discrete penalties need the
  // candidate b = 0 to be representable
  const Index half = static_cast<Index>(std::ceil(radius / grid_step));
  Scalar best_b = 0;
  Scalar best_obj = std::numeric_limits<Scalar>::infinity();
  for (Index k = -half; k <= half; ++k) {
    const Scalar b = Scalar(k) * grid_step;
    const Scalar obj = (y - b) * (y - b) / Scalar(2) + penalty_value(p, std::abs(b));
    if (obj < best_obj) {
      best_obj = obj;
      best_b = b;
    }
  }
  ProximalCheckReport<Scalar> rep;
  rep.input = y;
  rep.rule_value = threshold_scalar(rule, y);
  rep.grid_minimizer = best_b;
  const Scalar obj_rule =
      (y - rep.rule_value) * (y - rep.rule_value) / Scalar(2) + penalty_value(p, std::abs(rep.rule_value));
  rep.objective_gap = obj_rule - best_obj;
  rep.near_discontinuity = std::abs(std::abs(y) - rule.lambda) <= grid_step;
  const Scalar tol = grid_step * (std::abs(y) + rule.lambda + Scalar(1));
  rep.pass = std::abs(rep.rule_value - best_b) <= grid_step + Scalar(1e-12) ||
             (rep.near_discontinuity && rep.objective_gap <= tol);
  return rep;
}

}  // namespace gist
