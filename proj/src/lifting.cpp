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

#include "koopmanix/lifting.hpp"

#include "koopmanix/error.hpp"

namespace koopmanix {
namespace {

int robot_poly_count(int n) { return n * (n + 1) / 2 + n; }

int object_poly_count(int m, ObjectCubicPairs pairs) {
  const int cubic = pairs == ObjectCubicPairs::kAllOrdered ? m * m : m * (m - 1);
  return m * (m + 1) / 2 + cubic;
}

// Writes {v_i v_j : i <= j} then the cubic block for one state block.
int write_robot_block(const Eigen::Ref<const Eigen::VectorXd>& v,
                      Eigen::Ref<Eigen::VectorXd> out, int pos) {
  const int n = static_cast<int>(v.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) out[pos++] = v[i] * v[j];
  }
  for (int i = 0; i < n; ++i) out[pos++] = v[i] * v[i] * v[i];
  return pos;
}

int write_object_block(const Eigen::Ref<const Eigen::VectorXd>& v,
                       ObjectCubicPairs pairs, Eigen::Ref<Eigen::VectorXd> out,
                       int pos) {
  const int m = static_cast<int>(v.size());
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) out[pos++] = v[i] * v[j];
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (pairs == ObjectCubicPairs::kDistinct && i == j) continue;
      out[pos++] = v[i] * v[i] * v[j];
    }
  }
  return pos;
}

bool is_unit(const Monomial& mono, int index) {
  for (int k = 0; k < static_cast<int>(mono.size()); ++k) {
    if (mono[k] != (k == index ? 1 : 0)) return false;
  }
  return true;
}

}  // namespace

LiftingSpec LiftingSpec::identity(const StateLayout& layout) {
  layout.check();
  return LiftingSpec(LiftingKind::kIdentity, layout);
}

LiftingSpec LiftingSpec::kodex(const StateLayout& layout,
                               ObjectCubicPairs pairs) {
  layout.check();
  LiftingSpec spec(LiftingKind::kKodexPolynomial, layout);
  spec.cubic_pairs_ = pairs;
  return spec;
}

LiftingSpec LiftingSpec::monomial_list(const StateLayout& layout,
                                       std::vector<Monomial> monomials) {
  layout.check();
  if (monomials.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "monomial list is empty");
  }
  for (const auto& mono : monomials) {
    if (static_cast<int>(mono.size()) != layout.state_dim()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "monomial exponent vector length must equal n + m");
    }
    for (int e : mono) {
      if (e < 0) {
        throw Error(ErrorCode::kInvalidArgument, "negative monomial exponent");
      }
    }
  }
  LiftingSpec spec(LiftingKind::kMonomialList, layout);
  spec.monomials_ = std::move(monomials);
  return spec;
}

std::string LiftingSpec::ordering_tag() const {
  switch (kind_) {
    case LiftingKind::kIdentity:
      return "identity";
    case LiftingKind::kKodexPolynomial:
      return cubic_pairs_ == ObjectCubicPairs::kAllOrdered
                 ? "kodex-v1:lex:object-cubic-all-ordered"
                 : "kodex-v1:lex:object-cubic-distinct";
    case LiftingKind::kMonomialList:
      return "monomial-list-v1";
  }
  return "unknown";
}

std::string to_string(LiftingKind kind) {
  switch (kind) {
    case LiftingKind::kIdentity: return "identity";
    case LiftingKind::kKodexPolynomial: return "kodex-polynomial";
    case LiftingKind::kMonomialList: return "monomial-list";
  }
  return "unknown";
}

LiftingKind lifting_kind_from_string(const std::string& name) {
  if (name == "identity") return LiftingKind::kIdentity;
  if (name == "kodex" || name == "kodex-polynomial") {
    return LiftingKind::kKodexPolynomial;
  }
  if (name == "monomial-list") return LiftingKind::kMonomialList;
  throw Error(ErrorCode::kInvalidArgument, "unknown lifting kind: " + name);
}

int dimension(const LiftingSpec& spec) {
  const auto& layout = spec.layout();
  switch (spec.kind()) {
    case LiftingKind::kIdentity:
      return layout.state_dim();
    case LiftingKind::kKodexPolynomial:
      return layout.n + robot_poly_count(layout.n) + layout.m +
             object_poly_count(layout.m, spec.object_cubic_pairs());
    case LiftingKind::kMonomialList:
      return static_cast<int>(spec.monomials().size());
  }
  return 0;
}

void lift_into(const LiftingSpec& spec, const CompositeState& state,
               Eigen::Ref<Eigen::VectorXd> out) {
  const auto& layout = spec.layout();
  if (!state.conforms_to(layout)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "state does not conform to the lifting layout");
  }
  if (out.size() != dimension(spec)) {
    throw Error(ErrorCode::kDimensionMismatch, "output length must equal p");
  }
  switch (spec.kind()) {
    case LiftingKind::kIdentity:
      out.head(layout.n) = state.robot;
      out.tail(layout.m) = state.object;
      return;
    case LiftingKind::kKodexPolynomial: {
      int pos = 0;
      out.segment(pos, layout.n) = state.robot;
      pos = write_robot_block(state.robot, out, pos + layout.n);
      out.segment(pos, layout.m) = state.object;
      pos = write_object_block(state.object, spec.object_cubic_pairs(), out,
                               pos + layout.m);
      return;
    }
    case LiftingKind::kMonomialList: {
      const Eigen::VectorXd x = state.stacked();
      const auto& monos = spec.monomials();
      for (int k = 0; k < static_cast<int>(monos.size()); ++k) {
        double value = 1.0;
        for (int d = 0; d < x.size(); ++d) {
          for (int e = 0; e < monos[k][d]; ++e) value *= x[d];
        }
        out[k] = value;
      }
      return;
    }
  }
}

ObservableVector lift(const LiftingSpec& spec, const CompositeState& state) {
  ObservableVector g{Eigen::VectorXd(dimension(spec)), spec.ordering_tag()};
  lift_into(spec, state, g.values);
  return g;
}

IndexRange robot_slice(const LiftingSpec& spec) {
  const int n = spec.layout().n;
  if (spec.kind() == LiftingKind::kMonomialList) {
    const auto& monos = spec.monomials();
    for (int i = 0; i < n; ++i) {
      if (i >= static_cast<int>(monos.size()) || !is_unit(monos[i], i)) {
        throw Error(ErrorCode::kUnsupported,
                    "monomial list does not start with the robot state");
      }
    }
  }
  return {0, n};
}

IndexRange object_slice(const LiftingSpec& spec) {
  const auto& layout = spec.layout();
  switch (spec.kind()) {
    case LiftingKind::kIdentity:
      return {layout.n, layout.n + layout.m};
    case LiftingKind::kKodexPolynomial: {
      const int begin = layout.n + robot_poly_count(layout.n);
      return {begin, begin + layout.m};
    }
    case LiftingKind::kMonomialList: {
      const auto& monos = spec.monomials();
      for (int i = 0; i < layout.m; ++i) {
        const int slot = layout.n + i;
        if (slot >= static_cast<int>(monos.size()) ||
            !is_unit(monos[slot], layout.n + i)) {
          throw Error(ErrorCode::kUnsupported,
                      "monomial list does not carry the object state after "
                      "the robot state");
        }
      }
      return {layout.n, layout.n + layout.m};
    }
  }
  return {};
}

CompositeState retrieve_state(const LiftingSpec& spec,
                              const Eigen::Ref<const Eigen::VectorXd>& lifted) {
  if (lifted.size() != dimension(spec)) {
    throw Error(ErrorCode::kDimensionMismatch, "lifted length must equal p");
  }
  const IndexRange r = robot_slice(spec);
  const IndexRange o = object_slice(spec);
  return {lifted.segment(r.begin, r.size()), lifted.segment(o.begin, o.size())};
}

}  // namespace koopmanix
