#pragma once

#include "mdid/graph.hpp"

namespace mdid {

/// Latent projection onto keep. Fixed and selected vertices are always kept;
/// naming one of them as hidden is an error.
Cadmg latent_project(const Cadmg& g, const VSet& keep);

/// Removes a single random vertex, replacing it by the directed and bidirected
/// edges its paths induce among its neighbours.
void eliminate_vertex(Cadmg& g, const std::string& h);

}  // namespace mdid
