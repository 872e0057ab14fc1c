#include "mdid/graph_file.hpp"

#include <fstream>
#include <sstream>

namespace mdid {

GraphFile parse_graph_file(const std::string& text) {
    GraphFile f;
    std::istringstream in(text);
    std::string line;
    int no = 0;
    VSet proxy_edges;
    while (std::getline(in, line)) {
        ++no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        try {
            if (tok[0] == "var" && tok.size() == 3 && tok[2] == "missing") {
                Triple t = triple_for(tok[1]);
                f.graph.add_vertex(t.target);
                f.graph.add_vertex(t.indicator);
                f.graph.add_vertex(t.proxy);
                f.graph.add_directed(t.indicator, t.proxy);
                f.graph.add_directed(t.target, t.proxy);
                f.roles.triples.push_back(t);
                f.missing.push_back(tok[1]);
            } else if (tok[0] == "var" && tok.size() == 3 && tok[2] == "observed") {
                f.graph.add_vertex(tok[1]);
                f.roles.observed.insert(tok[1]);
            } else if (tok[0] == "edge" && tok.size() == 4 && tok[2] == "->") {
                f.graph.add_directed(tok[1], tok[3]);
            } else if (tok[0] == "edge" && tok.size() == 4 && tok[2] == "<->") {
                f.graph.add_bidirected(tok[1], tok[3]);
            } else {
                throw Error("cannot parse '" + line + "'");
            }
        } catch (const Error& e) {
            throw Error("line " + std::to_string(no) + ": " + e.what());
        }
    }
    return f;
}

std::string render_graph_file(const GraphFile& f) {
    std::string out;
    VSet auto_edges;
    for (const auto& base : f.missing) out += "var " + base + " missing\n";
    for (const auto& o : f.roles.observed) out += "var " + o + " observed\n";
    std::set<std::pair<std::string, std::string>> skip;
    for (const auto& t : f.roles.triples) {
        skip.insert({t.indicator, t.proxy});
        skip.insert({t.target, t.proxy});
    }
    for (const auto& e : f.graph.directed_edges())
        if (!skip.count(e)) out += "edge " + e.first + " -> " + e.second + "\n";
    for (const auto& [a, b] : f.graph.bidirected_edges()) out += "edge " + a + " <-> " + b + "\n";
    return out;
}

GraphFile read_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_graph_file(ss.str());
}

}  // namespace mdid
