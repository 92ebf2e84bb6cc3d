#include "mgan/params.hpp"

namespace mgan {

ParameterTree::Diff ParameterTree::structural_diff(const ParameterTree& other) const {
  Diff d;
  for (const auto& [name, e] : entries_) {
    auto it = other.entries_.find(name);
    if (it == other.entries_.end()) {
      d.missing.push_back(name);
    } else if (e.value.shape() != it->second.value.shape()) {
      d.mismatched.push_back(name + " " + shape_to_string(e.value.shape()) + " vs " +
                             shape_to_string(it->second.value.shape()));
    }
  }
  for (const auto& [name, e] : other.entries_) {
    if (!entries_.count(name)) d.extra.push_back(name);
  }
  return d;
}

std::string ParameterTree::Diff::describe() const {
  std::string out;
  for (const auto& n : missing) out += "missing: " + n + "\n";
  for (const auto& n : extra) out += "extra: " + n + "\n";
  for (const auto& n : mismatched) out += "shape mismatch: " + n + "\n";
  if (out.empty()) out = "structurally equal\n";
  return out;
}

}  // namespace mgan
