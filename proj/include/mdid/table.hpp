#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mdid/kernel_expr.hpp"

namespace mdid {

/// Dense table over named finite variables, axes sorted by name, last axis
/// fastest. NaN marks an undefined cell (a ratio with zero mass below it).
struct Table {
    std::vector<std::string> vars;
    std::vector<int> card;
    std::vector<double> data;

    std::size_t size() const { return data.size(); }
    int axis(const std::string& v) const;
    double get(const std::map<std::string, int>& cell) const;
};

Table scalar_table(double x);
Table make_table(std::vector<std::string> vars, std::vector<int> card, double fill = 0.0);

/// Zero absorbs undefined cells in products (0 * NaN = 0).
double mul_cell(double a, double b);
/// 0/0 = 0/NaN = 0 (a configuration without mass contributes nothing);
/// x/0 and x/NaN are undefined for x != 0.
double div_cell(double a, double b);

Table multiply(const Table& a, const Table& b);
Table divide(const Table& a, const Table& b);
Table sum_out(const Table& t, const VSet& out);
Table keep_only(const Table& t, const VSet& keep);
Table slice(const Table& t, const std::string& var, int index);
std::size_t count_undefined(const Table& t);

/// Calls f(cell) for every cell of the given axes in table order.
void for_each_cell(const std::vector<std::string>& vars, const std::vector<int>& card,
                   const std::function<void(const std::vector<int>&, std::size_t)>& f);

/// Joint probability table with value labels per variable.
struct DiscreteLaw {
    Table table;
    std::map<std::string, std::vector<std::string>> labels;

    std::optional<int> index_of(const std::string& var, const std::string& label) const;
    int card(const std::string& var) const;
    double total() const;
};

/// Numeric evaluation of kernel expressions whose atoms name `law_name`.
class Evaluator {
public:
    explicit Evaluator(const DiscreteLaw& law, std::string law_name = "p");

    Table eval(const Expr& e);
    const Table& marginal(const VSet& vars);

private:
    Table eval_atom(const Node& n);

    const DiscreteLaw& law_;
    std::string law_name_;
    std::unordered_map<std::string, Table> memo_;
    std::map<VSet, Table> marginals_;
};

}  // namespace mdid
