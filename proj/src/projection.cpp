#include "mdid/projection.hpp"

namespace mdid {

void eliminate_vertex(Cadmg& g, const std::string& h) {
    if (g.status(h) != Status::random)
        throw Error("cannot project out fixed or selected vertex '" + h + "'");
    VSet pa = g.pa(h), ch = g.ch(h), sib = g.sib(h);
    g.remove_vertex(h);
    for (const auto& c : ch) {
        for (const auto& p : pa) g.add_directed(p, c);
        for (const auto& s : sib)
            if (s != c) g.add_bidirected(s, c);
        for (const auto& c2 : ch)
            if (c < c2) g.add_bidirected(c, c2);
    }
}

Cadmg latent_project(const Cadmg& g, const VSet& keep) {
    for (const auto& v : keep)
        if (!g.has_vertex(v)) throw Error("unknown vertex '" + v + "'");
    Cadmg r = g;
    for (const auto& h : set_minus(g.vertices(), keep)) eliminate_vertex(r, h);
    return r;
}

}  // namespace mdid
