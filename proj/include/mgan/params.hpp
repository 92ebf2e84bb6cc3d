#pragma once

#include <map>
#include <string>
#include <vector>

#include "mgan/array.hpp"

namespace mgan {

// Gradients keyed by parameter name. Ordered map keeps iteration (and thus
// every downstream update) deterministic.
using GradMap = std::map<std::string, RealArray>;

// Named hierarchy of weight arrays. Holds both the live parameters and the
// frozen target copy; copying the tree is how the target copy is made.
class ParameterTree {
 public:
  struct Entry {
    RealArray value;
    bool trainable = true;
  };

  void add(const std::string& name, RealArray value, bool trainable = true) {
    auto [it, inserted] = entries_.emplace(name, Entry{std::move(value), trainable});
    if (!inserted) {
      throw std::invalid_argument("ParameterTree: duplicate entry '" + name + "'");
    }
  }

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }

  RealArray& at(const std::string& name) { return entry(name).value; }
  const RealArray& at(const std::string& name) const { return entry(name).value; }

  Entry& entry(const std::string& name) {
    auto it = entries_.find(name);
    if (it == entries_.end()) {
      throw std::out_of_range("ParameterTree: no entry named '" + name + "'");
    }
    return it->second;
  }
  const Entry& entry(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) {
      throw std::out_of_range("ParameterTree: no entry named '" + name + "'");
    }
    return it->second;
  }

  std::size_t size() const { return entries_.size(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [k, v] : entries_) out.push_back(k);
    return out;
  }

  std::size_t total_scalars() const {
    std::size_t n = 0;
    for (const auto& [k, e] : entries_) n += e.value.numel();
    return n;
  }

  // Same names with same shapes. Used to validate target copies and
  // checkpoints against a constructed architecture.
  struct Diff {
    std::vector<std::string> missing;   // present here, absent there
    std::vector<std::string> extra;     // absent here, present there
    std::vector<std::string> mismatched;
    bool empty() const { return missing.empty() && extra.empty() && mismatched.empty(); }
    std::string describe() const;
  };
  Diff structural_diff(const ParameterTree& other) const;
  bool structurally_equal(const ParameterTree& other) const {
    return structural_diff(other).empty();
  }

 private:
  std::map<std::string, Entry> entries_;
};

}  // namespace mgan
