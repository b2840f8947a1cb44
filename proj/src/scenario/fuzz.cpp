#include "director/scenario/fuzz.hpp"

#include <algorithm>
#include <random>

namespace director::scenario {

namespace {

class Dice {
public:
    explicit Dice(std::uint64_t seed) : rng_(seed) {}

    // Modulo instead of std::uniform_int_distribution keeps sequences identical
    // across standard library implementations.
    int below(int n) { return n <= 1 ? 0 : static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
    int between(int lo, int hi) { return lo + below(hi - lo + 1); }
    bool chance(int percent) { return below(100) < percent; }

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[static_cast<std::size_t>(below(static_cast<int>(v.size())))];
    }

private:
    std::mt19937_64 rng_;
};

constexpr Comparator kComparators[] = {Comparator::EQ, Comparator::NE, Comparator::LT,
                                       Comparator::LE, Comparator::GT, Comparator::GE};

ScenarioCondition random_condition(Dice& d, const std::vector<ScenarioState>& states) {
    const auto& s = d.pick(states);
    return {s.name, d.chance(60) ? Comparator::EQ : kComparators[d.below(6)], d.pick(s.values)};
}

std::vector<TaskType> pick_later(Dice& d, const std::vector<TaskType>& groups, std::size_t index, int max_count) {
    std::vector<TaskType> out;
    if (index + 1 >= groups.size()) return out;
    const int count = d.between(0, max_count);
    for (int i = 0; i < count; ++i) {
        const auto& g = groups[index + 1 + static_cast<std::size_t>(d.below(static_cast<int>(groups.size() - index - 1)))];
        if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
    }
    return out;
}

}  // namespace

ScenarioFile generate_fuzz_scenario(std::uint64_t seed, const FuzzLimits& limits) {
    Dice d(seed);
    ScenarioFile sf;
    sf.name = "fuzz-" + std::to_string(seed);

    const int n_states = d.between(1, std::max(1, limits.max_states));
    for (int i = 0; i < n_states; ++i) {
        ScenarioState s;
        s.name = "s" + std::to_string(i);
        const int n_values = d.between(2, 3);
        for (int v = 0; v < n_values; ++v) s.values.push_back("v" + std::to_string(v));
        s.initial = d.pick(s.values);
        sf.states.push_back(std::move(s));
    }

    const int n_groups = d.between(std::min(3, limits.max_groups), std::max(1, limits.max_groups));
    std::vector<TaskType> groups;
    for (int i = 0; i < n_groups; ++i) groups.push_back("G" + std::to_string(i));

    const RunReason reasons[] = {RunReason::NewTask, RunReason::SubtaskDone, RunReason::Pushed, RunReason::OtherTrigger};
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& group = groups[gi];
        const bool lifecycle = d.chance(40);
        if (lifecycle) sf.providers.push_back({group + ".start", group, ProviderKind::Start, {}, {}, {}, {}, {}});
        const int n_provide = d.chance(35) ? 2 : 1;
        for (int k = 0; k < n_provide; ++k) {
            ScenarioProvider p;
            p.id = group + ".p" + std::to_string(k);
            p.group = group;
            if (d.chance(30)) p.when.push_back(random_condition(d, sf.states));
            if (d.chance(30)) p.causing.push_back(random_condition(d, sf.states));
            p.needs = pick_later(d, groups, gi, 2);
            for (const auto& u : pick_later(d, groups, gi, 2)) {
                if (std::find(p.needs.begin(), p.needs.end(), u) == p.needs.end()) p.uses.push_back(u);
            }
            std::vector<TaskType> declared = p.needs;
            declared.insert(declared.end(), p.uses.begin(), p.uses.end());

            const int n_rules = d.between(1, 3);
            for (int r = 0; r < n_rules; ++r) {
                BehaviourRule rule;
                if (d.chance(40)) {
                    rule.on.push_back(reasons[d.below(4)]);
                    if (d.chance(50)) rule.on.push_back(reasons[d.below(4)]);
                    std::sort(rule.on.begin(), rule.on.end());
                    rule.on.erase(std::unique(rule.on.begin(), rule.on.end()), rule.on.end());
                }
                if (d.chance(30)) rule.if_state.push_back(random_condition(d, sf.states));
                if (!declared.empty() && d.chance(20)) {
                    UsesGuard g;
                    g.task = d.pick(declared);
                    g.run_state.push_back(static_cast<RunState>(d.below(3)));
                    if (d.chance(30)) g.done = d.chance(50);
                    rule.if_uses = g;
                }
                const int roll = d.below(10);
                if (roll == 0) {
                    rule.emit.push_back({RuleEmit::Kind::Idle, {}});
                } else if (roll == 1) {
                    rule.on = {RunReason::OtherTrigger};
                    rule.emit.push_back({RuleEmit::Kind::Done, {}});
                } else {
                    std::vector<TaskType> chosen;
                    for (const auto& t : declared) {
                        if (d.chance(70)) chosen.push_back(t);
                    }
                    for (const auto& t : chosen) {
                        RuleEmit e;
                        e.request = TaskRequest{t, d.chance(20) ? "alt" : "", d.between(0, 9), d.chance(30)};
                        rule.emit.push_back(std::move(e));
                    }
                }
                p.rules.push_back(std::move(rule));
            }
            sf.providers.push_back(std::move(p));
        }
        if (lifecycle && d.chance(75)) sf.providers.push_back({group + ".stop", group, ProviderKind::Stop, {}, {}, {}, {}, {}});
    }

    const int n_events = d.between(1, std::max(1, limits.max_events));
    std::int64_t at = 0;
    std::vector<std::string> labels;
    for (int i = 0; i < n_events; ++i) {
        at += d.below(3);
        ScriptEvent ev;
        ev.at = at;
        const int roll = d.below(100);
        if (roll < 35 || labels.empty()) {
            ev.action = ScriptEvent::Action::Submit;
            // Roots lean towards the top of the graph so that trees get deep.
            const auto top = static_cast<int>(std::min<std::size_t>(groups.size(), 4));
            ev.request = TaskRequest{groups[static_cast<std::size_t>(d.below(top))], "", d.between(0, 9), d.chance(15)};
            ev.label = "r" + std::to_string(i);
            labels.push_back(ev.label);
        } else if (roll < 45) {
            ev.action = ScriptEvent::Action::Remove;
            ev.label = d.pick(labels);
        } else if (roll < 70) {
            ev.action = ScriptEvent::Action::Set;
            const auto& s = d.pick(sf.states);
            ev.var = s.name;
            ev.value = d.pick(s.values);
        } else {
            ev.action = ScriptEvent::Action::Trigger;
            ev.group = d.pick(groups);
            ev.payload = "t" + std::to_string(i);
        }
        sf.script.push_back(std::move(ev));
    }
    return sf;
}

}  // namespace director::scenario
