#pragma once

#include <string>

#include "mdid/graph.hpp"
#include "mdid/missing_data.hpp"

namespace mdid {

/// Line-oriented graph text:
///   var NAME missing|observed
///   edge A -> B
///   edge A <-> B
///   # comment
/// `var X1 missing` declares X1^1, R1 and X1 with edges R1 -> X1 and X1^1 -> X1.
struct GraphFile {
    Cadmg graph;
    MdRoles roles;
    std::vector<std::string> missing;  // declared bases, in file order

    /// Validates the missing-data structure (throws ValidationError).
    MdDag md_dag() const { return validate_md_dag(graph, roles); }
};

/// Throws Error("line N: ...") on syntax errors.
GraphFile parse_graph_file(const std::string& text);
std::string render_graph_file(const GraphFile& f);
GraphFile read_graph_file(const std::string& path);

}  // namespace mdid
