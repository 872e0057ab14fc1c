#include "mdid/schedule.hpp"

#include <algorithm>

namespace mdid {

std::size_t FixingSchedule::add_class(VSet members, VSet promotion) {
    classes.push_back(std::move(members));
    promoted.push_back(std::move(promotion));
    return classes.size() - 1;
}

void FixingSchedule::add_order(std::size_t a, std::size_t b) {
    if (a >= classes.size() || b >= classes.size()) throw Error("class index out of range");
    if (a == b || precedes(b, a)) throw Error("ordering " + class_label(a) + " before " +
                                              class_label(b) + " creates a cycle");
    std::vector<std::size_t> lo{a}, hi{b};
    for (auto p : predecessors(a)) lo.push_back(p);
    for (auto s : successors(b)) hi.push_back(s);
    for (auto x : lo)
        for (auto y : hi) before.insert({x, y});
}

std::vector<std::size_t> FixingSchedule::predecessors(std::size_t b) const {
    std::vector<std::size_t> r;
    for (const auto& [x, y] : before)
        if (y == b) r.push_back(x);
    return r;
}

std::vector<std::size_t> FixingSchedule::successors(std::size_t a) const {
    std::vector<std::size_t> r;
    for (const auto& [x, y] : before)
        if (x == a) r.push_back(y);
    return r;
}

std::vector<std::size_t> FixingSchedule::linear_order() const {
    std::vector<std::size_t> out, left(classes.size());
    for (std::size_t k = 0; k < classes.size(); ++k) left[k] = k;
    while (!left.empty()) {
        std::size_t best = classes.size();
        for (auto k : left) {
            bool ready = std::none_of(left.begin(), left.end(),
                                      [&](std::size_t j) { return precedes(j, k); });
            if (ready && (best == classes.size() || class_label(k) < class_label(best))) best = k;
        }
        out.push_back(best);
        left.erase(std::find(left.begin(), left.end(), best));
    }
    return out;
}

VSet FixingSchedule::members() const {
    VSet r;
    for (const auto& c : classes) r.insert(c.begin(), c.end());
    return r;
}

std::size_t FixingSchedule::class_of(const std::string& v) const {
    for (std::size_t k = 0; k < classes.size(); ++k)
        if (classes[k].count(v)) return k;
    return classes.size();
}

std::string FixingSchedule::class_label(std::size_t k) const { return "{" + join(classes.at(k)) + "}"; }

std::string FixingSchedule::shape() const {
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < classes.size(); ++k) labels.push_back(class_label(k));
    std::vector<std::string> sorted = labels, rel;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [a, b] : before) rel.push_back(labels[a] + "<" + labels[b]);
    std::sort(rel.begin(), rel.end());
    std::string out;
    for (const auto& l : sorted) out += (out.empty() ? "" : " ") + l;
    out += " |";
    for (const auto& r : rel) out += " " + r;
    return out;
}

std::string FixingSchedule::transcript() const {
    std::string out;
    for (auto k : linear_order()) {
        out += class_label(k);
        VSet after;
        for (auto p : predecessors(k)) after.insert(class_label(p));
        if (!after.empty()) out += " after " + join(after, " ");
        out += " promote {" + join(promoted.at(k)) + "}\n";
    }
    return out;
}

}  // namespace mdid
