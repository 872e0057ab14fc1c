#pragma once

#include <vector>

#include "mdid/graph.hpp"

namespace mdid {

/// m-separation of a and b given c. Selected and fixed vertices outside a and b
/// are treated as conditioned on.
bool m_separated(const Cadmg& g, const VSet& a, const VSet& b, const VSet& c);

/// An m-connecting walk from a to b given c, endpoints included; empty when
/// the sets are separated. Used to point at vertices worth fixing.
std::vector<std::string> m_connecting_path(const Cadmg& g, const VSet& a, const VSet& b,
                                           const VSet& c);

}  // namespace mdid
