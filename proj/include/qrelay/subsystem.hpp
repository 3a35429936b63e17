#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qrelay/common.hpp"

namespace qrelay {

enum class LabelKind { quantum, classical };

// A named tensor factor. Classical factors must stay diagonal in the
// computational basis; this is enforced whenever a state is constructed.
struct SubsystemLabel {
  std::string name;
  long dim = 1;
  LabelKind kind = LabelKind::quantum;

  friend bool operator==(const SubsystemLabel& a, const SubsystemLabel& b) {
    return a.name == b.name && a.dim == b.dim && a.kind == b.kind;
  }
};

inline SubsystemLabel quantum_label(std::string name, long dim) {
  return SubsystemLabel{std::move(name), dim, LabelKind::quantum};
}

inline SubsystemLabel classical_label(std::string name, long dim) {
  return SubsystemLabel{std::move(name), dim, LabelKind::classical};
}

inline long total_dim(const std::vector<SubsystemLabel>& labels) {
  long d = 1;
  for (const auto& l : labels) d *= l.dim;
  return d;
}

inline int find_label(const std::vector<SubsystemLabel>& labels, std::string_view name) {
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

inline void check_labels(const std::vector<SubsystemLabel>& labels, const std::string& where) {
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].dim < 1) {
      throw DimensionError(where + ": label '" + labels[i].name + "' has dim < 1");
    }
    if (labels[i].name.empty()) {
      throw LabelError(where + ": empty label name");
    }
    for (size_t j = i + 1; j < labels.size(); ++j) {
      if (labels[i].name == labels[j].name) {
        throw LabelError(where + ": duplicate label name '" + labels[i].name + "'");
      }
    }
  }
}

inline std::vector<long> label_dims(const std::vector<SubsystemLabel>& labels) {
  std::vector<long> d(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) d[i] = labels[i].dim;
  return d;
}

}  // namespace qrelay
