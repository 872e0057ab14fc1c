#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdid/graph.hpp"
#include "mdid/kernel_expr.hpp"
#include "mdid/missing_data.hpp"
#include "mdid/schedule.hpp"

namespace mdid {

struct FixStepResult {
    Cadmg graph;
    Expr kernel;
    Expr denominator;
};

/// de(v) ∩ dis(v) = {v}.
bool is_fixable_vertex(const Cadmg& g, const std::string& v);

/// Divides q by q(v | random nondescendants of v). Kernel variables are the
/// graph's vertex names.
FixStepResult fix_vertex(const Cadmg& g, const Expr& q, const std::string& v);

/// Fixes the vertices in order; throws at the first one that is not fixable.
FixStepResult fix_sequence(const Cadmg& g, const Expr& q, const std::vector<std::string>& order);

/// Outcome of checking one within-district part of a class.
struct SetFixCheck {
    bool ok = true;
    // "", "i", "ii", "iii", "self-counterfactual", "unobserved", "not-random"
    std::string condition;
    std::string detail;
    // vertices whose fixing (or merging into the class) might remove the obstruction
    VSet culprits;

    VSet part;
    VSet district;
    VSet mb;
    VSet r_z;
    std::vector<std::string> order;                // part in topological order
    std::map<std::string, VSet> conditioning;      // member -> conditioning vertices
};

/// Checks conditions (i)-(iii) for a part z lying in one district, plus the
/// requirement that every conditioning vertex is observed under the factor's
/// indicator pins. `whole` is the full class z belongs to; `pins` are the
/// indicators already held at 1 by the stage.
SetFixCheck check_fixable_part(const Cadmg& g, const VSet& z, const VSet& whole, const LawView& view,
                               const VSet& pins, const VSet& unpinned = {});

/// Plain (i)-(iii) test for a set inside one district; throws if z spans
/// districts.
SetFixCheck is_fixable_set(const Cadmg& g, const VSet& z, const LawView& view = {});

/// Districts of g restricted to z, each as a part.
std::vector<VSet> split_by_district(const Cadmg& g, const VSet& z);

/// Product over members z (topological order) of
/// K(z | C_z, R_Z) restricted at (R ∩ Z) ∪ R_Z = 1, in law variables.
/// `free_member` is left unrestricted (the indicator whose propensity is read off).
Expr part_denominator(const Cadmg& g, const Expr& kernel, const SetFixCheck& chk,
                      const LawView& view, const VSet& pins, const VSet& unpinned = {},
                      const std::string& free_member = "");

/// Fixes the given classes simultaneously: kernel = q|_{pins} / prod of part
/// denominators; fixed members lose incoming edges, leftover R_Z become
/// selected at 1.
FixStepResult fix_set(const Cadmg& g, const Expr& q, const std::vector<VSet>& classes,
                      const LawView& view = {}, const VSet& pins = {});

/// Graph φ_{⊲Z}(G) for a missing-data model.
struct StageSpec {
    VSet fixed;
    VSet selected;
    VSet hidden;    // counterfactuals projected out
    VSet unpinned;  // fixed indicators left free in the kernel
};

struct Stage {
    Cadmg graph;
    VSet pins;  // indicators held at 1
};

Stage build_stage(const MdDag& m, const StageSpec& spec);

struct ClassRun {
    std::size_t index = 0;
    StageSpec spec;
    Stage stage;
    std::vector<SetFixCheck> parts;
    VSet r_z;
    Expr kernel;       // stage kernel before fixing the class
    Expr denominator;  // q for this class
};

struct ScheduleRun {
    bool valid = true;
    std::size_t failed_class = 0;
    std::string condition;
    std::string detail;
    VSet culprits;
    std::vector<ClassRun> classes;  // in processing order, up to the failure
    Expr final_kernel;              // p|_{pins} / prod of all denominators
};

struct ApplyOptions {
    bool build_kernels = true;
    VSet unpinned;            // indicators never held at 1 (full-law mode)
    std::string free_member;  // left unrestricted in its own class factor
};

/// Processes classes in a linear extension of the order: builds the stage
/// graph from the fixed predecessors, their leftover R_Z (selected) and the
/// class's promotion set, checks every part and records its denominator.
ScheduleRun apply_schedule(const MdDag& m, const FixingSchedule& s, const ApplyOptions& opt = {});

}  // namespace mdid
