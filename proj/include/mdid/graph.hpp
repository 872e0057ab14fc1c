#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mdid {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using VSet = std::set<std::string>;

VSet set_union(const VSet& a, const VSet& b);
VSet set_minus(const VSet& a, const VSet& b);
VSet set_intersect(const VSet& a, const VSet& b);
bool is_subset(const VSet& a, const VSet& b);
bool disjoint(const VSet& a, const VSet& b);
std::string join(const VSet& s, const std::string& sep = ",");

enum class Status { random, fixed, selected };

struct Vertex {
    std::string name;
    Status status = Status::random;
    std::optional<std::string> value;  // set iff status == selected

    bool operator==(const Vertex&) const = default;
};

/// Conditional acyclic directed mixed graph. Fixed vertices stay in the graph
/// and may only carry outgoing directed edges.
class Cadmg {
public:
    void add_vertex(const std::string& name, Status s = Status::random,
                    std::optional<std::string> value = std::nullopt);
    void add_directed(const std::string& from, const std::string& to);
    void add_bidirected(const std::string& a, const std::string& b);
    void remove_directed(const std::string& from, const std::string& to);
    void remove_bidirected(const std::string& a, const std::string& b);
    void remove_vertex(const std::string& name);

    /// Marks v fixed after dropping every edge with an arrowhead into it.
    void fix(const std::string& v);
    void select(const std::string& v, const std::string& value);
    void set_status(const std::string& v, Status s, std::optional<std::string> value = std::nullopt);

    bool has_vertex(const std::string& v) const { return verts_.count(v) > 0; }
    const Vertex& vertex(const std::string& v) const;
    Status status(const std::string& v) const { return vertex(v).status; }
    bool is_fixed(const std::string& v) const { return status(v) == Status::fixed; }
    bool is_selected(const std::string& v) const { return status(v) == Status::selected; }

    VSet vertices() const;
    VSet with_status(Status s) const;
    VSet random_vertices() const { return with_status(Status::random); }
    VSet fixed_vertices() const { return with_status(Status::fixed); }
    VSet selected_vertices() const { return with_status(Status::selected); }
    std::size_t size() const { return verts_.size(); }

    const VSet& pa(const std::string& v) const;
    const VSet& ch(const std::string& v) const;
    const VSet& sib(const std::string& v) const;

    bool has_directed(const std::string& a, const std::string& b) const;
    bool has_bidirected(const std::string& a, const std::string& b) const;
    std::vector<std::pair<std::string, std::string>> directed_edges() const;
    std::vector<std::pair<std::string, std::string>> bidirected_edges() const;  // first < second

    bool operator==(const Cadmg& o) const;

private:
    void require(const std::string& v) const;
    bool reaches(const std::string& from, const std::string& to) const;

    std::map<std::string, Vertex> verts_;
    std::map<std::string, VSet> pa_, ch_, sib_;
};

enum class Relation { parents, children, descendants, ancestors, nondescendants };

struct VertexSetQuery {
    Relation kind;
    VSet targets;
};

VSet genealogy(const Cadmg& g, const VertexSetQuery& q);
VSet parents(const Cadmg& g, const VSet& s);
VSet children(const Cadmg& g, const VSet& s);
VSet descendants(const Cadmg& g, const VSet& s);
VSet ancestors(const Cadmg& g, const VSet& s);
VSet nondescendants(const Cadmg& g, const VSet& s);

/// Bidirected-connected components over non-fixed vertices. Selected vertices
/// take part like random ones.
std::vector<VSet> districts(const Cadmg& g);
VSet district_of(const Cadmg& g, const std::string& v);

/// (D_S ∪ pa(D_S)) \ S where D_S is the district containing S.
VSet markov_blanket(const Cadmg& g, const VSet& s);

Cadmg induced_subgraph(const Cadmg& g, const VSet& keep);

/// Kahn's algorithm with lexicographic tie-breaking.
std::vector<std::string> topological_order(const Cadmg& g);

}  // namespace mdid
