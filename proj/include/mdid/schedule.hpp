#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mdid/graph.hpp"

namespace mdid {

/// Partial order over classes of a fix-set. Each class carries the set of
/// counterfactuals X^(1) treated as observed while it is fixed; the rest are
/// projected out.
struct FixingSchedule {
    std::vector<VSet> classes;
    std::vector<VSet> promoted;
    std::set<std::pair<std::size_t, std::size_t>> before;  // (a, b): a ⊲ b, transitively closed

    std::size_t add_class(VSet members, VSet promotion = {});
    /// Adds a ⊲ b and closes transitively. Throws if it would create a cycle.
    void add_order(std::size_t a, std::size_t b);
    bool precedes(std::size_t a, std::size_t b) const { return before.count({a, b}) > 0; }
    std::vector<std::size_t> predecessors(std::size_t b) const;
    std::vector<std::size_t> successors(std::size_t a) const;

    /// Classes in a linear extension of ⊲, ties broken by class text.
    std::vector<std::size_t> linear_order() const;
    VSet members() const;
    /// Index of the class holding v, or classes.size().
    std::size_t class_of(const std::string& v) const;

    std::string class_label(std::size_t k) const;
    /// Order-only text ("{R1,R3} < {R2} < {R4}; ..."), used as search key.
    std::string shape() const;
    std::string transcript() const;
};

}  // namespace mdid
