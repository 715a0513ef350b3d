// Copyright 2026 The Koopmanix Authors
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

#ifndef KOOPMANIX_LIFTING_HPP
#define KOOPMANIX_LIFTING_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "koopmanix/statespace.hpp"

namespace koopmanix {

enum class LiftingKind { kIdentity, kKodexPolynomial, kMonomialList };

/// Which ordered pairs (i, j) generate the (x_o^i)^2 x_o^j block.
enum class ObjectCubicPairs {
  kAllOrdered,  ///< every (i, j) including i == j: m^2 terms
  kDistinct,    ///< i != j only: m(m-1) terms
};

/// Half-open index range [begin, end).
struct IndexRange {
  int begin = 0;
  int end = 0;

  int size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool operator==(const IndexRange&) const = default;
};

/// Exponent vector over the n + m stacked raw coordinates.
using Monomial = std::vector<int>;

/// The observable map g(x). Immutable once built.
class LiftingSpec {
 public:
  static LiftingSpec identity(const StateLayout& layout);

  /// g(x) = [x_r | psi_r | x_o | psi_o], each polynomial block in
  /// lexicographic order:
  ///   psi_r = {x_r^i x_r^j : i <= j}, then {(x_r^i)^3}
  ///   psi_o = {x_o^i x_o^j : i <= j}, then {(x_o^i)^2 x_o^j}
  static LiftingSpec kodex(const StateLayout& layout,
                           ObjectCubicPairs pairs = ObjectCubicPairs::kAllOrdered);

  /// Arbitrary observables; each exponent vector has length n + m.
  static LiftingSpec monomial_list(const StateLayout& layout,
                                   std::vector<Monomial> monomials);

  LiftingKind kind() const { return kind_; }
  const StateLayout& layout() const { return layout_; }
  ObjectCubicPairs object_cubic_pairs() const { return cubic_pairs_; }
  const std::vector<Monomial>& monomials() const { return monomials_; }

  /// Identifies kind and observable ordering; K is only meaningful together
  /// with this tag.
  std::string ordering_tag() const;

  bool operator==(const LiftingSpec&) const = default;

 private:
  LiftingSpec(LiftingKind kind, StateLayout layout) : kind_(kind), layout_(std::move(layout)) {}

  LiftingKind kind_;
  StateLayout layout_;
  ObjectCubicPairs cubic_pairs_ = ObjectCubicPairs::kAllOrdered;
  std::vector<Monomial> monomials_;
};

struct ObservableVector {
  Eigen::VectorXd values;
  std::string spec_id;
};

std::string to_string(LiftingKind kind);
LiftingKind lifting_kind_from_string(const std::string& name);

/// p, the number of observables.
int dimension(const LiftingSpec& spec);

ObservableVector lift(const LiftingSpec& spec, const CompositeState& state);

/// Allocation-free form of lift(); `out` must have length dimension(spec).
void lift_into(const LiftingSpec& spec, const CompositeState& state,
               Eigen::Ref<Eigen::VectorXd> out);

/// Slots holding x_r verbatim: [0, n).
IndexRange robot_slice(const LiftingSpec& spec);

/// Slots holding x_o verbatim: [n + n', n + n' + m).
IndexRange object_slice(const LiftingSpec& spec);

/// Inverse of the pass-through slots: rebuilds (x_r, x_o) from g.
CompositeState retrieve_state(const LiftingSpec& spec,
                              const Eigen::Ref<const Eigen::VectorXd>& lifted);

}  // namespace koopmanix

#endif  // KOOPMANIX_LIFTING_HPP
