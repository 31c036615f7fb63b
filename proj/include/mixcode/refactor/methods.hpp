#pragma once

// The refactoring-method catalogue: names, parsing, and the one deliberately
// absent entry.  Seventeen semantic-aware program transformations; dead
// switch insertion is excluded because MiniPy has no switch statement.

#include <optional>
#include <string>
#include <vector>

namespace mixcode::refactor {

enum class Method {
    ApiRenaming,
    ArgumentsAdding,
    ArgumentRenaming,
    DeadForAdding,
    DeadIfAdding,
    DeadIfElseAdding,
    DeadWhileAdding,
    Duplication,
    FieldEnhancement,
    ForLoopEnhancement,
    IfEnhancement,
    LocalVariableAdding,
    LocalVariableRenaming,
    MethodNameRenaming,
    PlusZero,
    PrintAdding,
    ReturnOptimal,
};

inline constexpr int kMethodCount = 17;

inline const std::vector<Method>& all_methods() {
    static const std::vector<Method> methods = {
        Method::ApiRenaming,       Method::ArgumentsAdding,    Method::ArgumentRenaming,
        Method::DeadForAdding,     Method::DeadIfAdding,       Method::DeadIfElseAdding,
        Method::DeadWhileAdding,   Method::Duplication,        Method::FieldEnhancement,
        Method::ForLoopEnhancement, Method::IfEnhancement,     Method::LocalVariableAdding,
        Method::LocalVariableRenaming, Method::MethodNameRenaming, Method::PlusZero,
        Method::PrintAdding,       Method::ReturnOptimal,
    };
    return methods;
}

// Everything except the builtin-name swap, which may change what a program
// computes (api.add -> api.delete) and so cannot serve as a behavior-keeping
// transform for robustness evaluation or the preservation test suite.
inline const std::vector<Method>& semantic_preserving_methods() {
    static const std::vector<Method> methods = [] {
        std::vector<Method> out;
        for (Method m : all_methods()) {
            if (m != Method::ApiRenaming) out.push_back(m);
        }
        return out;
    }();
    return methods;
}

inline std::string method_name(Method m) {
    switch (m) {
        case Method::ApiRenaming: return "api-renaming";
        case Method::ArgumentsAdding: return "arguments-adding";
        case Method::ArgumentRenaming: return "argument-renaming";
        case Method::DeadForAdding: return "dead-for-adding";
        case Method::DeadIfAdding: return "dead-if-adding";
        case Method::DeadIfElseAdding: return "dead-if-else-adding";
        case Method::DeadWhileAdding: return "dead-while-adding";
        case Method::Duplication: return "duplication";
        case Method::FieldEnhancement: return "field-enhancement";
        case Method::ForLoopEnhancement: return "for-loop-enhancement";
        case Method::IfEnhancement: return "if-enhancement";
        case Method::LocalVariableAdding: return "local-variable-adding";
        case Method::LocalVariableRenaming: return "local-variable-renaming";
        case Method::MethodNameRenaming: return "method-name-renaming";
        case Method::PlusZero: return "plus-zero";
        case Method::PrintAdding: return "print-adding";
        case Method::ReturnOptimal: return "return-optimal";
    }
    return "?";
}

inline std::optional<Method> method_from_name(const std::string& name) {
    for (Method m : all_methods()) {
        if (method_name(m) == name) return m;
    }
    return std::nullopt;
}

}  // namespace mixcode::refactor
