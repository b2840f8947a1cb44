#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "director/model.hpp"

namespace director::scenario {

/// A condition as written in a scenario file: the value is a state label.
struct ScenarioCondition {
    std::string var;
    Comparator comparator = Comparator::EQ;
    std::string value;

    friend bool operator==(const ScenarioCondition&, const ScenarioCondition&) = default;
};

std::string to_text(const ScenarioCondition& c);

struct ScenarioState {
    std::string name;
    std::vector<std::string> values;
    std::string initial;

    friend bool operator==(const ScenarioState&, const ScenarioState&) = default;
};

struct UsesGuard {
    TaskType task;
    /// Accepted run states; empty accepts any.
    std::vector<RunState> run_state;
    std::optional<bool> done;

    friend bool operator==(const UsesGuard&, const UsesGuard&) = default;
};

struct RuleEmit {
    enum class Kind { Request, Done, Idle };
    Kind kind = Kind::Request;
    TaskRequest request;

    friend bool operator==(const RuleEmit&, const RuleEmit&) = default;
};

/// One row of a provider's decision table. Rules are tried in file order and
/// the first match decides the bundle.
struct BehaviourRule {
    /// Accepted run reasons; empty accepts any.
    std::vector<RunReason> on;
    std::vector<ScenarioCondition> if_state;
    std::optional<UsesGuard> if_uses;
    /// Minimum OTHER_TRIGGER runs since the group acquired its task.
    int min_triggers = 0;
    std::vector<RuleEmit> emit;

    friend bool operator==(const BehaviourRule&, const BehaviourRule&) = default;
};

struct ScenarioProvider {
    std::string id;
    TaskType group;
    ProviderKind kind = ProviderKind::Provide;
    std::vector<ScenarioCondition> when;
    std::vector<ScenarioCondition> causing;
    std::vector<TaskType> needs;
    std::vector<TaskType> uses;
    std::vector<BehaviourRule> rules;

    friend bool operator==(const ScenarioProvider&, const ScenarioProvider&) = default;
};

struct ScriptEvent {
    enum class Action { Submit, Remove, Set, Trigger };
    std::int64_t at = 0;
    Action action = Action::Submit;
    /// Submit: the root request. Label names the task for a later remove.
    TaskRequest request;
    std::string label;
    /// Set: variable and label.
    std::string var;
    std::string value;
    /// Trigger: group and payload.
    TaskType group;
    std::string payload;

    friend bool operator==(const ScriptEvent&, const ScriptEvent&) = default;
};

struct ScenarioFile {
    std::string name;
    std::string description;
    std::vector<ScenarioState> states;
    std::vector<ScenarioProvider> providers;
    std::vector<ScriptEvent> script;

    std::vector<TaskType> groups() const;

    friend bool operator==(const ScenarioFile&, const ScenarioFile&) = default;
};

enum class DiagnosticKind { SyntaxError, UnknownKey, InvalidValue, UnresolvedReference, NonMonotoneScript, InvalidRegistry };

std::string_view to_string(DiagnosticKind k);

struct Diagnostic {
    int line = 0;
    int col = 0;
    DiagnosticKind kind = DiagnosticKind::SyntaxError;
    std::string message;

    std::string format() const;
};

struct ParseResult {
    std::optional<ScenarioFile> file;
    std::vector<Diagnostic> diagnostics;

    bool ok() const noexcept { return file.has_value() && diagnostics.empty(); }
};

/// Parses and validates a scenario. Never throws on bad input; every problem
/// is reported as a diagnostic with the position of the offending value.
ParseResult parse_scenario(std::string_view text);

/// Canonical JSON text of a scenario; parse_scenario(serialize(s)) == s.
std::string serialize(const ScenarioFile& s);

}  // namespace director::scenario
