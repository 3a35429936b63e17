#pragma once

#include <string>
#include <vector>

#include "qrelay/common.hpp"
#include "qrelay/density.hpp"

namespace qrelay {

namespace detail {

inline void check_disjoint(const std::vector<std::vector<std::string>>& groups,
                           const DensityOperator& rho) {
  std::vector<std::string> seen;
  for (const auto& g : groups) {
    if (g.empty()) throw LabelError("information measure: empty label group");
    for (const auto& name : g) {
      if (!rho.has(name)) throw LabelError("information measure: unknown label '" + name + "'");
      for (const auto& s : seen) {
        if (s == name) throw LabelError("information measure: overlapping groups at '" + name + "'");
      }
      seen.push_back(name);
    }
  }
}

inline std::vector<std::string> join(std::initializer_list<std::vector<std::string>> groups) {
  std::vector<std::string> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

}  // namespace detail

// Shannon entropy of the eigenvalue spectrum, base 2. Eigenvalues below the
// cutoff contribute zero; values in [-1e-9, 0) are treated as numerical noise
// and anything more negative is rejected.
inline double von_neumann_entropy(const DensityOperator& rho) {
  const RVector eigs = hermitian_eigenvalues(rho.matrix());
  double H = 0.0;
  for (long i = 0; i < eigs.size(); ++i) {
    double lambda = eigs(i);
    if (lambda < -kPositivityTol) {
      throw ValidationError("von_neumann_entropy: eigenvalue " + std::to_string(lambda));
    }
    if (lambda <= kEigenvalueCutoff) continue;
    H -= lambda * std::log2(lambda);
  }
  return H;
}

// Entropy of the reduced state on a label group.
inline double subsystem_entropy(const DensityOperator& rho, const std::vector<std::string>& group) {
  if (group.size() == rho.labels().size()) return von_neumann_entropy(rho);
  return von_neumann_entropy(partial_trace(rho, group));
}

// H(A|B) = H(AB) - H(B)
inline double conditional_entropy(const DensityOperator& rho, const std::vector<std::string>& a,
                                  const std::vector<std::string>& b) {
  detail::check_disjoint({a, b}, rho);
  return subsystem_entropy(rho, detail::join({a, b})) - subsystem_entropy(rho, b);
}

// I(A;B) = H(A) + H(B) - H(AB)
inline double mutual_information(const DensityOperator& rho, const std::vector<std::string>& a,
                                 const std::vector<std::string>& b) {
  detail::check_disjoint({a, b}, rho);
  return subsystem_entropy(rho, a) + subsystem_entropy(rho, b) -
         subsystem_entropy(rho, detail::join({a, b}));
}

// I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C)
inline double conditional_mutual_information(const DensityOperator& rho,
                                             const std::vector<std::string>& a,
                                             const std::vector<std::string>& b,
                                             const std::vector<std::string>& c) {
  detail::check_disjoint({a, b, c}, rho);
  return subsystem_entropy(rho, detail::join({a, c})) +
         subsystem_entropy(rho, detail::join({b, c})) -
         subsystem_entropy(rho, detail::join({a, b, c})) - subsystem_entropy(rho, c);
}

// I(A>B) = -H(A|B) = H(B) - H(AB)
inline double coherent_information(const DensityOperator& rho, const std::vector<std::string>& a,
                                   const std::vector<std::string>& b) {
  detail::check_disjoint({a, b}, rho);
  return subsystem_entropy(rho, b) - subsystem_entropy(rho, detail::join({a, b}));
}

enum class InfoQuantity { entropy, cond_entropy, mutual, cond_mutual, coherent };

// A named information measure over ordered label groups, e.g. I(A;B|C).
struct InfoQuery {
  InfoQuantity quantity;
  std::vector<std::vector<std::string>> parts;

  double evaluate(const DensityOperator& rho) const {
    switch (quantity) {
      case InfoQuantity::entropy:
        require_parts(1);
        detail::check_disjoint(parts, rho);
        return subsystem_entropy(rho, parts[0]);
      case InfoQuantity::cond_entropy:
        require_parts(2);
        return conditional_entropy(rho, parts[0], parts[1]);
      case InfoQuantity::mutual:
        require_parts(2);
        return mutual_information(rho, parts[0], parts[1]);
      case InfoQuantity::cond_mutual:
        require_parts(3);
        return conditional_mutual_information(rho, parts[0], parts[1], parts[2]);
      case InfoQuantity::coherent:
        require_parts(2);
        return coherent_information(rho, parts[0], parts[1]);
    }
    throw ValidationError("InfoQuery: unknown quantity");
  }

 private:
  void require_parts(size_t n) const {
    if (parts.size() != n) {
      throw LabelError("InfoQuery: expected " + std::to_string(n) + " label groups, got " +
                       std::to_string(parts.size()));
    }
  }
};

}  // namespace qrelay
