#pragma once

// Domain types shared by every layer of the Director: tasks, providers,
// provider groups, conditions and the discrete state store.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "director/error.hpp"

namespace director {

/// Symbolic name of a task type. Each task type owns exactly one provider group.
using TaskType = std::string;

enum class TaskUid : std::uint64_t {};

constexpr std::uint64_t to_int(TaskUid uid) noexcept { return static_cast<std::uint64_t>(uid); }

/// Parent of a task: the provider group that emitted it, or Root (nullopt)
/// for tasks submitted from outside any provider. Also used as the
/// "ancestor" reference returned by common-ancestor queries.
using Parent = std::optional<TaskType>;

inline const Parent kRoot = std::nullopt;

enum class TaskStatus { Queued, Running, Retired };
enum class ProviderKind { Start, Provide, Stop };
enum class Comparator { EQ, NE, LT, LE, GT, GE };
enum class RunReason { NewTask, Started, Stopped, SubtaskDone, Pushed, OtherTrigger };
enum class RunState { NoTask, Queued, Running };

std::string_view to_string(TaskStatus s);
std::string_view to_string(ProviderKind k);
std::string_view to_string(Comparator c);
std::string_view to_string(RunReason r);
std::string_view to_string(RunState r);

std::optional<ProviderKind> parse_provider_kind(std::string_view s);
std::optional<RunReason> parse_run_reason(std::string_view s);
std::optional<RunState> parse_run_state(std::string_view s);
/// Accepts both symbolic ("==", "<=") and named ("EQ", "LE") spellings.
std::optional<Comparator> parse_comparator(std::string_view s);
std::string_view comparator_symbol(Comparator c);

bool compare(Comparator op, std::int64_t lhs, std::int64_t rhs) noexcept;

struct Condition {
    std::string state_var;
    Comparator comparator = Comparator::EQ;
    std::int64_t value = 0;

    friend bool operator==(const Condition&, const Condition&) = default;
};

/// A Causing declaration. Same shape as a When condition but read as
/// "running this provider drives the state towards this relation".
using StateAssertion = Condition;

struct TaskInstance {
    TaskUid uid{};
    TaskType task_type;
    std::string data;
    std::int64_t priority = 0;
    bool optional = false;
    Parent parent;
    TaskStatus status = TaskStatus::Queued;
    bool done = false;
    /// Last blocking reason written to the trace; avoids repeating identical
    /// TASK_BLOCKED records across fixed-point passes.
    std::string blocked_reason;

    bool is_root() const noexcept { return !parent.has_value(); }

    friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

struct TaskRequest {
    TaskType task_type;
    std::string data;
    std::int64_t priority = 0;
    bool optional = false;

    friend bool operator==(const TaskRequest&, const TaskRequest&) = default;
};

/// What a provider invocation hands back to the engine.
struct SubtaskBundle {
    std::vector<TaskRequest> requests;
    bool done = false;
    bool idle = false;

    static SubtaskBundle Done() { return SubtaskBundle{{}, true, false}; }
    static SubtaskBundle Idle() { return SubtaskBundle{{}, false, true}; }

    friend bool operator==(const SubtaskBundle&, const SubtaskBundle&) = default;
};

/// Returns an empty string when the bundle is well formed, otherwise a
/// description of the first violated rule.
std::string check_bundle(const SubtaskBundle& bundle);

struct UsesInfo {
    RunState run_state = RunState::NoTask;
    bool done = false;

    friend bool operator==(const UsesInfo&, const UsesInfo&) = default;
};

class StateStore;

/// Everything a behaviour callback may look at. Providers only see local
/// information: their own task, their subtasks and the state store.
struct BehaviourContext {
    RunReason reason = RunReason::NewTask;
    const TaskInstance* task = nullptr;
    std::string_view group;
    std::string_view provider;
    std::map<TaskType, UsesInfo> uses;
    const StateStore* state = nullptr;
    std::string_view payload;
    /// OTHER_TRIGGER runs seen by the group since it last (re)acquired its task.
    int trigger_count = 0;

    UsesInfo uses_of(const TaskType& type) const;
};

using Behaviour = std::function<SubtaskBundle(const BehaviourContext&)>;

struct ProviderSpec {
    std::string id;
    TaskType group;
    ProviderKind kind = ProviderKind::Provide;
    std::vector<Condition> when;
    std::vector<StateAssertion> causing;
    std::vector<TaskType> needs;
    /// Subtask types the provider wants Uses information for.
    std::vector<TaskType> uses;
    int decl_index = 0;
    Behaviour behaviour;
};

struct PushRecord {
    TaskUid pusher{};
    Condition unmet;

    friend bool operator==(const PushRecord&, const PushRecord&) = default;
};

struct ProviderGroup {
    TaskType task_type;
    std::vector<ProviderSpec> providers;
    std::optional<std::size_t> active_provider;
    std::optional<TaskUid> assigned_task;
    std::vector<TaskUid> watchers;
    std::optional<PushRecord> pushed_by;
    bool started = false;
    SubtaskBundle last_subtasks;
    /// Live subtasks requested by this group, in request order.
    std::vector<TaskUid> subtasks;
    int trigger_count = 0;

    bool active() const noexcept { return assigned_task.has_value(); }
    const ProviderSpec* active_spec() const {
        return active_provider ? &providers[*active_provider] : nullptr;
    }
    /// Union of Needs and Uses over all providers of the group.
    std::vector<TaskType> declared_subtask_types() const;
};

struct StateVar {
    std::string name;
    std::vector<std::string> labels;
    std::int64_t value = 0;
    std::int64_t initial = 0;

    friend bool operator==(const StateVar&, const StateVar&) = default;
};

/// Named discrete state variables. Each variable is an enumeration whose
/// labels map to 0..n-1 in declaration order.
class StateStore {
public:
    void register_var(const std::string& name, std::vector<std::string> labels,
                      const std::string& initial);

    bool has(std::string_view name) const;
    std::int64_t get(std::string_view name) const;
    void set(std::string_view name, std::int64_t value);
    const StateVar& var(std::string_view name) const;
    /// Resolves a label of `name` to its integer value.
    std::int64_t value_of(std::string_view name, std::string_view label) const;
    std::string label_of(std::string_view name, std::int64_t value) const;
    /// All values the variable may take.
    std::vector<std::int64_t> domain(std::string_view name) const;

    const std::map<std::string, StateVar, std::less<>>& vars() const { return vars_; }

    friend bool operator==(const StateStore&, const StateStore&) = default;

private:
    std::map<std::string, StateVar, std::less<>> vars_;
};

bool eval_condition(const Condition& c, const StateStore& s);

/// True iff every value satisfying `a` (within the variable's enumeration)
/// also satisfies `c`. An unsatisfiable assertion never satisfies anything.
bool assertion_satisfies(const StateAssertion& a, const Condition& c, const StateStore& s);

std::string describe(const Condition& c, const StateStore* s = nullptr);

enum class IssueKind {
    StopWithoutStart,
    MissingProvide,
    UnknownNeed,
    UnknownUses,
    UnknownStateVar,
    DuplicateProviderId,
    LifecycleWithConditions,
};

std::string_view to_string(IssueKind k);

struct ValidationIssue {
    IssueKind kind;
    std::string subject;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const noexcept { return issues.empty(); }
    bool contains(IssueKind k) const;
};

ValidationReport validate_registry(const std::vector<ProviderSpec>& providers, const StateStore& states);

}  // namespace director
