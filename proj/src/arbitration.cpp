#include "director/arbitration.hpp"

#include <algorithm>

namespace director {

std::string_view to_string(ChallengeOutcome o) {
    return o == ChallengeOutcome::ChallengerWins ? "CHALLENGER_WINS" : "INCUMBENT_HOLDS";
}

Parent closest_common_ancestor(const TaskInstance& a, const TaskInstance& b, const DirectorGraph& g) {
    auto chain_a = g.ancestor_groups(a);
    auto chain_b = g.ancestor_groups(b);
    for (const auto& node : chain_a) {
        if (std::find(chain_b.begin(), chain_b.end(), node) != chain_b.end()) return node;
    }
    return kRoot;
}

BranchDescriptor branch_descriptor(const TaskInstance& t, const Parent& ancestor, const DirectorGraph& g) {
    BranchDescriptor d;
    const TaskInstance* cur = &t;
    for (std::size_t depth = 0; depth <= g.groups.size(); ++depth) {
        d.any_optional = d.any_optional || cur->optional;
        if (cur->parent == ancestor) {
            d.branch_priority = cur->priority;
            return d;
        }
        if (cur->is_root()) break;
        cur = g.parent_task(*cur);
    }
    throw DirectorError(ErrorCode::NotAnAncestor, (ancestor ? *ancestor : std::string("Root")) +
                                                      " is not above task " + std::to_string(to_int(t.uid)));
}

ChallengeOutcome challenge_plain(const TaskInstance& incumbent, const TaskInstance& challenger,
                                 const DirectorGraph& g) {
    if (incumbent.uid == challenger.uid) return ChallengeOutcome::IncumbentHolds;
    auto ancestor = closest_common_ancestor(incumbent, challenger, g);
    auto inc = branch_descriptor(incumbent, ancestor, g);
    auto ch = branch_descriptor(challenger, ancestor, g);
    if (inc.any_optional != ch.any_optional) {
        return ch.any_optional ? ChallengeOutcome::IncumbentHolds : ChallengeOutcome::ChallengerWins;
    }
    return ch.branch_priority > inc.branch_priority ? ChallengeOutcome::ChallengerWins
                                                    : ChallengeOutcome::IncumbentHolds;
}

namespace {

bool descends_from(const TaskInstance& t, const TaskInstance& ancestor, const DirectorGraph& g) {
    if (t.uid == ancestor.uid) return true;
    const auto& holder = g.group(ancestor.task_type);
    if (holder.assigned_task != ancestor.uid) return false;
    auto chain = g.ancestor_groups(t);
    return std::find(chain.begin(), chain.end(), ancestor.task_type) != chain.end();
}

ChallengeOutcome challenge_impl(const TaskInstance& incumbent, const TaskInstance& challenger,
                                const DirectorGraph& g, int depth) {
    auto outcome = challenge_plain(incumbent, challenger, g);
    if (outcome == ChallengeOutcome::IncumbentHolds || depth > static_cast<int>(g.groups.size())) return outcome;
    for (const auto& node : g.ancestor_groups(incumbent)) {
        const auto& holder = g.group(node);
        if (!holder.pushed_by || !g.has_task(holder.pushed_by->pusher)) continue;
        const auto& pusher = g.task(holder.pushed_by->pusher);
        if (descends_from(challenger, pusher, g)) continue;
        if (challenge_impl(pusher, challenger, g, depth + 1) == ChallengeOutcome::IncumbentHolds) {
            return ChallengeOutcome::IncumbentHolds;
        }
    }
    return outcome;
}

bool below_any(const TaskInstance& u, const std::set<TaskType>& owned, const DirectorGraph& g) {
    for (const auto& node : g.ancestor_groups(u)) {
        if (owned.count(node)) return true;
    }
    return false;
}

bool needs_rec(const ProviderSpec& p, const TaskInstance& t, const DirectorGraph& g, std::set<TaskType>& owned,
               std::set<TaskType>& footprint) {
    for (const auto& need : p.needs) {
        if (!g.has_group(need)) throw DirectorError(ErrorCode::UnknownNeed, p.id + " needs " + need);
        if (footprint.count(need)) continue;
        footprint.insert(need);
        const auto& holder = g.group(need);
        if (holder.assigned_task) {
            const auto& incumbent = g.task(*holder.assigned_task);
            if (!below_any(incumbent, owned, g) &&
                challenge(incumbent, t, g) == ChallengeOutcome::IncumbentHolds) {
                return false;
            }
        }
        owned.insert(need);
        const ProviderSpec* next = holder.active_spec();
        if (!next) {
            bool any_provide = std::any_of(holder.providers.begin(), holder.providers.end(),
                                           [](const ProviderSpec& s) { return s.kind == ProviderKind::Provide; });
            if (!any_provide) return false;
            auto sel = select_provider(holder, g.state);
            if (!std::holds_alternative<std::size_t>(sel)) return false;
            next = &holder.providers[std::get<std::size_t>(sel)];
        }
        if (!needs_rec(*next, t, g, owned, footprint)) return false;
    }
    return true;
}

}  // namespace

ChallengeOutcome challenge(const TaskInstance& incumbent, const TaskInstance& challenger, const DirectorGraph& g) {
    return challenge_impl(incumbent, challenger, g, 0);
}

Selection select_provider(const ProviderGroup& group, const StateStore& s) {
    const ProviderSpec* first = nullptr;
    for (std::size_t i = 0; i < group.providers.size(); ++i) {
        const auto& p = group.providers[i];
        if (p.kind != ProviderKind::Provide) continue;
        if (!first) first = &p;
        if (std::all_of(p.when.begin(), p.when.end(), [&](const Condition& c) { return eval_condition(c, s); })) {
            return i;
        }
    }
    if (!first) throw DirectorError(ErrorCode::EmptyGroup, group.task_type + " has no Provide provider");
    NoneEligible none;
    for (const auto& c : first->when) {
        if (!eval_condition(c, s)) none.unmet.push_back(c);
    }
    return none;
}

bool can_acquire_needs(const ProviderSpec& p, const TaskInstance& t, const DirectorGraph& g,
                       std::set<TaskType>& footprint) {
    std::set<TaskType> owned{t.task_type};
    return needs_rec(p, t, g, owned, footprint);
}

bool can_acquire_needs(const ProviderSpec& p, const TaskInstance& t, const DirectorGraph& g) {
    std::set<TaskType> footprint;
    return can_acquire_needs(p, t, g, footprint);
}

std::optional<PushTarget> find_push_target(const Condition& unmet, const std::vector<TaskType>& blockers,
                                           const DirectorGraph& g) {
    for (const auto& b : blockers) {
        if (!g.has_group(b)) continue;
        const auto& group = g.group(b);
        for (std::size_t i = 0; i < group.providers.size(); ++i) {
            const auto& p = group.providers[i];
            if (p.kind != ProviderKind::Provide) continue;
            bool causes = std::any_of(p.causing.begin(), p.causing.end(), [&](const StateAssertion& a) {
                return assertion_satisfies(a, unmet, g.state);
            });
            if (!causes) continue;
            bool runnable = std::all_of(p.when.begin(), p.when.end(),
                                        [&](const Condition& c) { return eval_condition(c, g.state); });
            if (runnable) return PushTarget{b, i};
        }
    }
    return std::nullopt;
}

std::vector<TaskType> push_blockers(const ProviderSpec& p, const TaskInstance& t, const DirectorGraph& g) {
    std::vector<TaskType> out;
    auto add = [&](const TaskType& type) {
        if (std::find(out.begin(), out.end(), type) == out.end()) out.push_back(type);
    };
    for (const auto& need : p.needs) {
        if (!g.has_group(need)) continue;
        const auto& holder = g.group(need);
        if (!holder.assigned_task) continue;
        const auto& u = g.task(*holder.assigned_task);
        if (u.parent) add(*u.parent);
    }
    add(t.task_type);
    return out;
}

}  // namespace director
