#include <sstream>

#include <nlohmann/json.hpp>

#include "fspvm/verifier.hpp"

namespace fspvm {

using nlohmann::json;

namespace {

json model_json(const Assignment& m) {
    json out = json::object();
    for (const auto& [name, v] : m) {
        out[name] = v.render();
    }
    return out;
}

}  // namespace

json verdict_to_json(const Verdict& v) {
    json j;
    j["property"] = v.property;
    j["entry"] = v.entry;
    j["verdict"] = std::string(verdict_name(v.kind));
    j["gas_limit"] = v.gas_limit;
    j["pruned_branches"] = v.pruned;
    if (v.kind == VerdictKind::Proved) {
        j["bound"] = "up to gas bound " + std::to_string(v.gas_limit);
    }
    j["unknowns"] = json::array();
    for (const auto& u : v.unknowns) {
        json x{{"reason", std::string(unknown_reason_name(u.reason))}, {"detail", u.detail}};
        x["path"] = u.path ? json(*u.path) : json(nullptr);
        j["unknowns"].push_back(std::move(x));
    }
    j["paths"] = json::array();
    for (const auto& p : v.paths) {
        j["paths"].push_back({{"index", p.index},
                              {"outcome", std::string(outcome_name(p.outcome))},
                              {"gas_used", p.gas_used},
                              {"status", p.status},
                              {"note", p.note},
                              {"pc", p.pc},
                              {"decisions", p.decisions}});
    }
    if (v.counterexample) {
        const Counterexample& c = *v.counterexample;
        j["counterexample"] = {{"path", c.path},
                               {"model", model_json(c.model)},
                               {"trace", c.trace},
                               {"replay_outcome", std::string(outcome_name(c.replay_outcome))},
                               {"replay_confirmed", c.replay_confirmed},
                               {"violated", c.violated},
                               {"final_memory", c.final_memory}};
    } else {
        j["counterexample"] = nullptr;
    }
    return j;
}

json report_json(const std::string& file, const std::vector<Verdict>& verdicts) {
    json j;
    j["file"] = file;
    j["verdicts"] = json::array();
    for (const auto& v : verdicts) {
        j["verdicts"].push_back(verdict_to_json(v));
    }
    return j;
}

std::string report_text(const std::vector<Verdict>& verdicts) {
    std::ostringstream out;
    for (const auto& v : verdicts) {
        out << v.property << " [" << v.entry << "]: " << verdict_name(v.kind);
        if (v.kind == VerdictKind::Proved) {
            out << " up to gas bound " << v.gas_limit;
        }
        out << " (" << v.paths.size() << " paths, " << v.pruned << " pruned)\n";
        for (const auto& u : v.unknowns) {
            out << "  " << unknown_reason_name(u.reason);
            if (u.path) {
                out << " on path " << *u.path;
            }
            out << ": " << u.detail << "\n";
        }
        if (v.counterexample && v.kind == VerdictKind::Falsified) {
            const Counterexample& c = *v.counterexample;
            out << "  counterexample on path " << c.path << ":\n";
            for (const auto& [name, x] : c.model) {
                out << "    " << name << " = " << x.render() << "\n";
            }
            out << "  branches:\n";
            for (const auto& t : c.trace) {
                out << "    " << t << "\n";
            }
            out << "  replay: " << outcome_name(c.replay_outcome) << "\n";
            for (const auto& s : c.violated) {
                out << "  violated: " << s << "\n";
            }
            out << "  final memory:\n";
            std::istringstream mem(c.final_memory);
            for (std::string line; std::getline(mem, line);) {
                out << "    " << line << "\n";
            }
        }
    }
    return out.str();
}

}  // namespace fspvm
