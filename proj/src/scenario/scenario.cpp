#include "director/scenario/scenario.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "director/scenario/json_reader.hpp"

namespace director::scenario {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

template <typename T>
bool has(const std::vector<T>& v, const T& x) {
    return std::find(v.begin(), v.end(), x) != v.end();
}

struct Pos {
    int line = 0;
    int col = 0;
};

Pos pos_of(const JsonValue& v) { return {v.line, v.col}; }

class Parser {
public:
    std::vector<Diagnostic> diags;

    ScenarioFile run(const JsonValue& root) {
        ScenarioFile out;
        if (!root.is_object()) {
            error(root, DiagnosticKind::InvalidValue, "scenario must be a JSON object");
            return out;
        }
        keys(root, {"name", "description", "states", "providers", "script"}, "scenario");
        if (auto* v = root.find("name")) out.name = str(*v, "name");
        if (auto* v = root.find("description")) out.description = str(*v, "description");
        if (auto* v = root.find("states")) {
            for (const auto& item : list(*v, "states")) out.states.push_back(state(item));
        } else {
            error(root, DiagnosticKind::InvalidValue, "missing key 'states'");
        }
        for (const auto& s : out.states) states_[s.name] = &s;

        const JsonValue* providers = root.find("providers");
        if (!providers) error(root, DiagnosticKind::InvalidValue, "missing key 'providers'");
        if (providers && providers->is_array()) {
            for (const auto& item : providers->items) {
                if (!item.is_object()) continue;
                if (auto* g = item.find("group"); g && g->is_string() && !g->string.empty()) {
                    if (!has(groups_, g->string)) groups_.push_back(g->string);
                }
            }
        }
        if (providers) {
            for (const auto& item : list(*providers, "providers")) {
                out.providers.push_back(provider(item));
                provider_pos_.push_back(pos_of(item));
            }
        }
        check_registry(out);

        if (auto* v = root.find("script")) {
            std::int64_t last = 0;
            std::set<std::string> labels;
            for (const auto& item : list(*v, "script")) {
                auto ev = script_event(item, labels);
                if (ev.at < last) {
                    error(item, DiagnosticKind::NonMonotoneScript,
                          "script step " + std::to_string(ev.at) + " comes after step " + std::to_string(last));
                }
                last = std::max(last, ev.at);
                out.script.push_back(std::move(ev));
            }
        }
        return out;
    }

private:
    std::map<std::string, const ScenarioState*> states_;
    std::vector<TaskType> groups_;
    std::vector<Pos> provider_pos_;

    void error(const JsonValue& at, DiagnosticKind kind, std::string msg) { diags.push_back({at.line, at.col, kind, std::move(msg)}); }
    void error(Pos at, DiagnosticKind kind, std::string msg) { diags.push_back({at.line, at.col, kind, std::move(msg)}); }

    void keys(const JsonValue& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
        for (const auto& [k, v] : obj.members) {
            if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
                error(v, DiagnosticKind::UnknownKey, "unknown key '" + k + "' in " + std::string(where));
            }
        }
    }

    const std::vector<JsonValue>& list(const JsonValue& v, std::string_view what) {
        static const std::vector<JsonValue> empty;
        if (!v.is_array()) {
            error(v, DiagnosticKind::InvalidValue, std::string(what) + " must be an array, got " + std::string(type_name(v.type)));
            return empty;
        }
        return v.items;
    }

    std::string str(const JsonValue& v, std::string_view what) {
        if (!v.is_string()) {
            error(v, DiagnosticKind::InvalidValue, std::string(what) + " must be a string, got " + std::string(type_name(v.type)));
            return {};
        }
        return v.string;
    }

    std::int64_t integer(const JsonValue& v, std::string_view what) {
        if (v.type != JsonValue::Type::Integer) {
            error(v, DiagnosticKind::InvalidValue, std::string(what) + " must be an integer, got " + std::string(type_name(v.type)));
            return 0;
        }
        return v.integer;
    }

    bool boolean(const JsonValue& v, std::string_view what) {
        if (v.type != JsonValue::Type::Bool) {
            error(v, DiagnosticKind::InvalidValue, std::string(what) + " must be true or false");
            return false;
        }
        return v.boolean;
    }

    const JsonValue* require(const JsonValue& obj, std::string_view key, std::string_view where) {
        auto* v = obj.find(key);
        if (!v) error(obj, DiagnosticKind::InvalidValue, "missing key '" + std::string(key) + "' in " + std::string(where));
        return v;
    }

    bool object(const JsonValue& v, std::string_view what) {
        if (v.is_object()) return true;
        error(v, DiagnosticKind::InvalidValue, std::string(what) + " must be an object, got " + std::string(type_name(v.type)));
        return false;
    }

    void group_ref(const JsonValue& at, const std::string& name, std::string_view role) {
        if (!name.empty() && !has(groups_, name)) {
            error(at, DiagnosticKind::UnresolvedReference, std::string(role) + " '" + name + "' has no provider group");
        }
    }

    void state_ref(const JsonValue& at, const std::string& var, const std::string& value) {
        auto it = states_.find(var);
        if (it == states_.end()) {
            error(at, DiagnosticKind::UnresolvedReference, "unknown state variable '" + var + "'");
        } else if (!has(it->second->values, value)) {
            error(at, DiagnosticKind::UnresolvedReference, "state variable '" + var + "' has no value '" + value + "'");
        }
    }

    ScenarioState state(const JsonValue& v) {
        ScenarioState s;
        if (!object(v, "state")) return s;
        keys(v, {"name", "values", "initial"}, "state");
        if (auto* n = require(v, "name", "state")) s.name = str(*n, "state name");
        if (s.name.empty()) error(v, DiagnosticKind::InvalidValue, "state name must not be empty");
        if (has(seen_states_, s.name)) {
            error(v, DiagnosticKind::InvalidValue, "duplicate state variable '" + s.name + "'");
        }
        seen_states_.push_back(s.name);
        if (auto* vals = require(v, "values", "state")) {
            for (const auto& item : list(*vals, "values")) {
                auto label = str(item, "state value");
                if (has(s.values, label)) error(item, DiagnosticKind::InvalidValue, "duplicate value '" + label + "'");
                s.values.push_back(label);
            }
            if (s.values.empty()) error(*vals, DiagnosticKind::InvalidValue, "state '" + s.name + "' has no values");
        }
        if (auto* init = v.find("initial")) {
            s.initial = str(*init, "initial");
            if (!has(s.values, s.initial)) error(*init, DiagnosticKind::UnresolvedReference, "initial value '" + s.initial + "' is not a value of '" + s.name + "'");
        } else if (!s.values.empty()) {
            s.initial = s.values.front();
        }
        return s;
    }
    std::vector<std::string> seen_states_;

    std::vector<ScenarioCondition> conditions(const JsonValue& v, std::string_view what) {
        std::vector<ScenarioCondition> out;
        for (const auto& item : list(v, what)) {
            auto text = str(item, what);
            if (text.empty() && !item.is_string()) continue;
            std::istringstream in(text);
            std::vector<std::string> parts;
            for (std::string w; in >> w;) parts.push_back(w);
            std::optional<Comparator> op;
            if (parts.size() == 3) op = parse_comparator(parts[1]);
            if (!op) {
                error(item, DiagnosticKind::InvalidValue, "condition '" + text + "' is not of the form 'var OP value'");
                continue;
            }
            state_ref(item, parts[0], parts[2]);
            out.push_back({parts[0], *op, parts[2]});
        }
        return out;
    }

    std::vector<TaskType> type_list(const JsonValue& v, std::string_view what) {
        std::vector<TaskType> out;
        for (const auto& item : list(v, what)) {
            auto name = str(item, what);
            group_ref(item, name, std::string(what) + " entry");
            if (has(out, name)) error(item, DiagnosticKind::InvalidValue, "'" + name + "' listed twice in " + std::string(what));
            out.push_back(name);
        }
        return out;
    }

    TaskRequest request(const JsonValue& v, std::string_view where) {
        TaskRequest r;
        keys(v, {"task", "priority", "optional", "data", "label"}, where);
        if (auto* t = require(v, "task", where)) {
            r.task_type = str(*t, "task");
            group_ref(*t, r.task_type, "task");
        }
        if (auto* p = v.find("priority")) r.priority = integer(*p, "priority");
        if (auto* o = v.find("optional")) r.optional = boolean(*o, "optional");
        if (auto* d = v.find("data")) r.data = str(*d, "data");
        return r;
    }

    RuleEmit emit(const JsonValue& v) {
        RuleEmit e;
        if (v.is_string()) {
            if (v.string == "DONE") {
                e.kind = RuleEmit::Kind::Done;
            } else if (v.string == "IDLE") {
                e.kind = RuleEmit::Kind::Idle;
            } else {
                error(v, DiagnosticKind::InvalidValue, "emit entry must be a task request, \"DONE\" or \"IDLE\"");
            }
            return e;
        }
        if (!object(v, "emit entry")) return e;
        if (v.find("label")) error(*v.find("label"), DiagnosticKind::UnknownKey, "unknown key 'label' in emit entry");
        e.request = request(v, "emit entry");
        return e;
    }

    BehaviourRule rule(const JsonValue& v, const std::string& group) {
        BehaviourRule r;
        if (!object(v, "rule")) return r;
        keys(v, {"on", "if_state", "if_uses", "min_triggers", "emit"}, "rule");
        if (auto* on = v.find("on")) {
            for (const auto& item : list(*on, "on")) {
                auto name = str(item, "run reason");
                auto reason = parse_run_reason(name);
                if (!reason) {
                    if (item.is_string()) error(item, DiagnosticKind::InvalidValue, "unknown run reason '" + name + "'");
                    continue;
                }
                r.on.push_back(*reason);
            }
        }
        if (auto* s = v.find("if_state")) r.if_state = conditions(*s, "if_state");
        if (auto* u = v.find("if_uses"); u && object(*u, "if_uses")) {
            keys(*u, {"task", "run_state", "done"}, "if_uses");
            UsesGuard g;
            if (auto* t = require(*u, "task", "if_uses")) {
                g.task = str(*t, "task");
                if (!has(declared_[group], g.task)) {
                    error(*t, DiagnosticKind::UnresolvedReference, "'" + g.task + "' is not in the Needs or Uses of group '" + group + "'");
                }
            }
            if (auto* rs = u->find("run_state")) {
                for (const auto& item : list(*rs, "run_state")) {
                    auto name = str(item, "run state");
                    auto state = parse_run_state(name);
                    if (!state) {
                        if (item.is_string()) error(item, DiagnosticKind::InvalidValue, "unknown run state '" + name + "'");
                        continue;
                    }
                    g.run_state.push_back(*state);
                }
            }
            if (auto* d = u->find("done")) g.done = boolean(*d, "done");
            r.if_uses = g;
        }
        if (auto* m = v.find("min_triggers")) {
            auto n = integer(*m, "min_triggers");
            if (n < 0 || n > 1000000) error(*m, DiagnosticKind::InvalidValue, "min_triggers out of range");
            r.min_triggers = static_cast<int>(std::clamp<std::int64_t>(n, 0, 1000000));
        }
        if (auto* e = v.find("emit")) {
            bool done = false, idle = false;
            std::vector<TaskType> requested;
            for (const auto& item : list(*e, "emit")) {
                auto entry = emit(item);
                if (entry.kind == RuleEmit::Kind::Done) done = true;
                if (entry.kind == RuleEmit::Kind::Idle) idle = true;
                if (entry.kind == RuleEmit::Kind::Request) {
                    if (has(requested, entry.request.task_type)) {
                        error(item, DiagnosticKind::InvalidValue, "task '" + entry.request.task_type + "' emitted twice");
                    }
                    requested.push_back(entry.request.task_type);
                }
                r.emit.push_back(std::move(entry));
            }
            if (idle && (done || !requested.empty())) error(*e, DiagnosticKind::InvalidValue, "IDLE cannot be combined with other emits");
        }
        return r;
    }
    std::map<std::string, std::vector<TaskType>> declared_;

    ScenarioProvider provider(const JsonValue& v) {
        ScenarioProvider p;
        if (!object(v, "provider")) {
            pending_rules_.push_back(nullptr);
            return p;
        }
        keys(v, {"id", "group", "kind", "when", "causing", "needs", "uses", "rules"}, "provider");
        if (auto* id = require(v, "id", "provider")) p.id = str(*id, "id");
        if (auto* g = require(v, "group", "provider")) p.group = str(*g, "group");
        if (p.group.empty()) error(v, DiagnosticKind::InvalidValue, "provider group must not be empty");
        if (has(ids_, p.id)) error(v, DiagnosticKind::InvalidValue, "duplicate provider id '" + p.id + "'");
        ids_.push_back(p.id);
        if (auto* k = v.find("kind")) {
            auto name = str(*k, "kind");
            auto kind = parse_provider_kind(name);
            if (!kind) {
                if (k->is_string()) error(*k, DiagnosticKind::InvalidValue, "unknown provider kind '" + name + "'");
            } else {
                p.kind = *kind;
            }
        }
        if (auto* w = v.find("when")) p.when = conditions(*w, "when");
        if (auto* c = v.find("causing")) p.causing = conditions(*c, "causing");
        if (auto* n = v.find("needs")) p.needs = type_list(*n, "needs");
        if (auto* u = v.find("uses")) p.uses = type_list(*u, "uses");
        if (p.kind != ProviderKind::Provide && (!p.when.empty() || !p.causing.empty() || !p.needs.empty())) {
            error(v, DiagnosticKind::InvalidRegistry, "start/stop provider '" + p.id + "' cannot have when, causing or needs");
        }
        // Uses guards may name any subtask type declared anywhere in the group.
        auto& declared = declared_[p.group];
        for (const auto* l : {&p.needs, &p.uses}) {
            for (const auto& t : *l) {
                if (!has(declared, t)) declared.push_back(t);
            }
        }
        pending_rules_.push_back(v.find("rules"));
        if (auto* r = v.find("rules")) list(*r, "rules");
        return p;
    }
    std::vector<std::string> ids_;
    std::vector<const JsonValue*> pending_rules_;

    void check_registry(ScenarioFile& out) {
        // Rules are read once every provider has contributed to its group's
        // declared subtask types.
        for (std::size_t i = 0; i < out.providers.size(); ++i) {
            const auto* rules = pending_rules_[i];
            if (!rules || !rules->is_array()) continue;
            for (const auto& item : rules->items) out.providers[i].rules.push_back(rule(item, out.providers[i].group));
        }
        for (const auto& group : groups_) {
            bool start = false, stop = false, provide = false;
            Pos first{};
            bool have_first = false;
            for (std::size_t i = 0; i < out.providers.size(); ++i) {
                const auto& p = out.providers[i];
                if (p.group != group) continue;
                if (!have_first) {
                    first = provider_pos_[i];
                    have_first = true;
                }
                start = start || p.kind == ProviderKind::Start;
                stop = stop || p.kind == ProviderKind::Stop;
                provide = provide || p.kind == ProviderKind::Provide;
            }
            if (!provide) error(first, DiagnosticKind::InvalidRegistry, "group '" + group + "' has no provide provider");
            if (stop && !start && !provide) {
                error(first, DiagnosticKind::InvalidRegistry, "group '" + group + "' has a stop provider but no start or provide");
            }
        }
    }

    ScriptEvent script_event(const JsonValue& v, std::set<std::string>& labels) {
        ScriptEvent ev;
        if (!object(v, "script entry")) return ev;
        keys(v, {"at", "submit", "remove", "set", "trigger"}, "script entry");
        if (auto* at = require(v, "at", "script entry")) {
            ev.at = integer(*at, "at");
            if (ev.at < 0) error(*at, DiagnosticKind::InvalidValue, "'at' must not be negative");
        }
        int actions = 0;
        if (auto* s = v.find("submit")) {
            ++actions;
            ev.action = ScriptEvent::Action::Submit;
            if (object(*s, "submit")) {
                ev.request = request(*s, "submit");
                if (auto* l = s->find("label")) {
                    ev.label = str(*l, "label");
                    if (!labels.insert(ev.label).second) error(*l, DiagnosticKind::InvalidValue, "duplicate label '" + ev.label + "'");
                }
            }
        }
        if (auto* r = v.find("remove")) {
            ++actions;
            ev.action = ScriptEvent::Action::Remove;
            ev.label = str(*r, "remove");
            if (r->is_string() && !labels.count(ev.label)) {
                error(*r, DiagnosticKind::UnresolvedReference, "no earlier submit labelled '" + ev.label + "'");
            }
        }
        if (auto* s = v.find("set")) {
            ++actions;
            ev.action = ScriptEvent::Action::Set;
            if (object(*s, "set")) {
                keys(*s, {"var", "value"}, "set");
                if (auto* x = require(*s, "var", "set")) ev.var = str(*x, "var");
                if (auto* x = require(*s, "value", "set")) ev.value = str(*x, "value");
                state_ref(*s, ev.var, ev.value);
            }
        }
        if (auto* t = v.find("trigger")) {
            ++actions;
            ev.action = ScriptEvent::Action::Trigger;
            if (object(*t, "trigger")) {
                keys(*t, {"group", "payload"}, "trigger");
                if (auto* g = require(*t, "group", "trigger")) {
                    ev.group = str(*g, "group");
                    group_ref(*g, ev.group, "trigger group");
                }
                if (auto* p = t->find("payload")) ev.payload = str(*p, "payload");
            }
        }
        if (actions != 1) error(v, DiagnosticKind::InvalidValue, "script entry needs exactly one of submit, remove, set, trigger");
        return ev;
    }
};

nlohmann::ordered_json request_json(const TaskRequest& r, const std::string& label = {}) {
    nlohmann::ordered_json j;
    j["task"] = r.task_type;
    j["priority"] = r.priority;
    if (r.optional) j["optional"] = true;
    if (!r.data.empty()) j["data"] = r.data;
    if (!label.empty()) j["label"] = label;
    return j;
}

nlohmann::ordered_json conditions_json(const std::vector<ScenarioCondition>& cs) {
    auto j = nlohmann::ordered_json::array();
    for (const auto& c : cs) j.push_back(to_text(c));
    return j;
}

}  // namespace

std::string to_text(const ScenarioCondition& c) {
    return c.var + " " + std::string(comparator_symbol(c.comparator)) + " " + c.value;
}

std::vector<TaskType> ScenarioFile::groups() const {
    std::vector<TaskType> out;
    for (const auto& p : providers) {
        if (!has(out, p.group)) out.push_back(p.group);
    }
    return out;
}

std::string_view to_string(DiagnosticKind k) {
    switch (k) {
        case DiagnosticKind::SyntaxError: return "SyntaxError";
        case DiagnosticKind::UnknownKey: return "UnknownKey";
        case DiagnosticKind::InvalidValue: return "InvalidValue";
        case DiagnosticKind::UnresolvedReference: return "UnresolvedReference";
        case DiagnosticKind::NonMonotoneScript: return "NonMonotoneScript";
        case DiagnosticKind::InvalidRegistry: return "InvalidRegistry";
    }
    return "?";
}

std::string Diagnostic::format() const {
    return std::to_string(line) + ":" + std::to_string(col) + ": " + std::string(to_string(kind)) + ": " + message;
}

ParseResult parse_scenario(std::string_view text) {
    ParseResult result;
    JsonValue root;
    try {
        root = parse_json(text);
    } catch (const JsonSyntaxError& e) {
        result.diagnostics.push_back({e.line(), e.col(), DiagnosticKind::SyntaxError, e.what()});
        return result;
    }
    Parser parser;
    auto file = parser.run(root);
    result.diagnostics = std::move(parser.diags);
    std::stable_sort(result.diagnostics.begin(), result.diagnostics.end(), [](const Diagnostic& a, const Diagnostic& b) {
        return std::tie(a.line, a.col) < std::tie(b.line, b.col);
    });
    if (result.diagnostics.empty()) result.file = std::move(file);
    return result;
}

std::string serialize(const ScenarioFile& s) {
    nlohmann::ordered_json j;
    if (!s.name.empty()) j["name"] = s.name;
    if (!s.description.empty()) j["description"] = s.description;
    j["states"] = nlohmann::ordered_json::array();
    for (const auto& st : s.states) {
        j["states"].push_back({{"name", st.name}, {"values", st.values}, {"initial", st.initial}});
    }
    j["providers"] = nlohmann::ordered_json::array();
    for (const auto& p : s.providers) {
        nlohmann::ordered_json pj;
        pj["id"] = p.id;
        pj["group"] = p.group;
        pj["kind"] = lower(to_string(p.kind));
        if (!p.when.empty()) pj["when"] = conditions_json(p.when);
        if (!p.causing.empty()) pj["causing"] = conditions_json(p.causing);
        if (!p.needs.empty()) pj["needs"] = p.needs;
        if (!p.uses.empty()) pj["uses"] = p.uses;
        if (!p.rules.empty()) {
            pj["rules"] = nlohmann::ordered_json::array();
            for (const auto& r : p.rules) {
                nlohmann::ordered_json rj;
                if (!r.on.empty()) {
                    rj["on"] = nlohmann::ordered_json::array();
                    for (auto reason : r.on) rj["on"].push_back(to_string(reason));
                }
                if (!r.if_state.empty()) rj["if_state"] = conditions_json(r.if_state);
                if (r.if_uses) {
                    nlohmann::ordered_json uj;
                    uj["task"] = r.if_uses->task;
                    if (!r.if_uses->run_state.empty()) {
                        uj["run_state"] = nlohmann::ordered_json::array();
                        for (auto rs : r.if_uses->run_state) uj["run_state"].push_back(to_string(rs));
                    }
                    if (r.if_uses->done) uj["done"] = *r.if_uses->done;
                    rj["if_uses"] = uj;
                }
                if (r.min_triggers) rj["min_triggers"] = r.min_triggers;
                rj["emit"] = nlohmann::ordered_json::array();
                for (const auto& e : r.emit) {
                    if (e.kind == RuleEmit::Kind::Done) {
                        rj["emit"].push_back("DONE");
                    } else if (e.kind == RuleEmit::Kind::Idle) {
                        rj["emit"].push_back("IDLE");
                    } else {
                        rj["emit"].push_back(request_json(e.request));
                    }
                }
                pj["rules"].push_back(rj);
            }
        }
        j["providers"].push_back(pj);
    }
    j["script"] = nlohmann::ordered_json::array();
    for (const auto& ev : s.script) {
        nlohmann::ordered_json ej;
        ej["at"] = ev.at;
        switch (ev.action) {
            case ScriptEvent::Action::Submit: ej["submit"] = request_json(ev.request, ev.label); break;
            case ScriptEvent::Action::Remove: ej["remove"] = ev.label; break;
            case ScriptEvent::Action::Set: ej["set"] = {{"var", ev.var}, {"value", ev.value}}; break;
            case ScriptEvent::Action::Trigger: {
                nlohmann::ordered_json tj;
                tj["group"] = ev.group;
                if (!ev.payload.empty()) tj["payload"] = ev.payload;
                ej["trigger"] = tj;
                break;
            }
        }
        j["script"].push_back(ej);
    }
    return j.dump(2) + "\n";
}

}  // namespace director::scenario
