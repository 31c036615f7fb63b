#pragma once

// Synonym table used by the renaming refactorings.
//
// Groups are disjoint (each name appears in exactly one group) and contain
// either plain identifiers (variables, parameters, function names) or dotted
// builtin names (api.*).  Renaming swaps a name for another member of its
// group.  Identifier swaps preserve behavior once all references are updated;
// api swaps may change behavior (api.add -> api.delete) by design, which is
// why that method is excluded from the semantic-preservation oracle.

#include <optional>
#include <string>
#include <vector>

namespace mixcode::refactor {

struct SynonymTable {
    std::vector<std::vector<std::string>> groups;

    // Index of the group containing `name`, if any.
    std::optional<std::size_t> group_of(const std::string& name) const {
        for (std::size_t g = 0; g < groups.size(); ++g) {
            for (const std::string& member : groups[g]) {
                if (member == name) return g;
            }
        }
        return std::nullopt;
    }

    // Other members of `name`'s group, in table order; empty if ungrouped.
    std::vector<std::string> synonyms_of(const std::string& name) const {
        std::vector<std::string> out;
        if (auto g = group_of(name)) {
            for (const std::string& member : groups[*g]) {
                if (member != name) out.push_back(member);
            }
        }
        return out;
    }
};

inline const SynonymTable& default_synonym_table() {
    static const SynonymTable table{{
        // identifiers
        {"number", "size", "amount"},
        {"count", "compute", "tally"},
        {"result", "outcome"},
        {"total", "sum", "aggregate"},
        {"value", "val"},
        {"index", "idx", "position"},
        {"item", "element", "entry"},
        {"flag", "marker"},
        {"limit", "bound", "cap"},
        {"start", "begin"},
        {"stop", "finish"},
        {"step", "stride"},
        {"data", "info"},
        {"temp", "tmp", "scratch"},
        {"answer", "solution"},
        {"check", "verify"},
        {"calculate", "evaluate"},
        {"helper", "util"},
        {"process", "handle"},
        {"first", "initial"},
        {"second", "follower"},
        {"left", "lhs"},
        {"right", "rhs"},
        {"low", "lower"},
        {"high", "upper"},
        {"width", "breadth"},
        {"height", "depth"},
        {"length", "span"},
        {"output", "product"},
        {"base", "radix"},
        // dotted builtins
        {"api.add", "api.delete"},
        {"api.sub", "api.remove"},
        {"api.mul", "api.times"},
        {"api.max", "api.top"},
        {"api.min", "api.bottom"},
    }};
    return table;
}

}  // namespace mixcode::refactor
