#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fspvm/frontend.hpp"
#include "fspvm/verifier.hpp"

namespace fspvm::cli {

namespace {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ArgError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text)) {
        throw IoError("cannot write " + path);
    }
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::uint64_t positive(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    unsigned long long n = 0;
    try {
        n = std::stoull(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty() || v[0] == '-' || n == 0) {
        throw ConfigError(key + " must be a positive integer, got '" + v + "'");
    }
    return n;
}

bool boolean(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") {
        return true;
    }
    if (v == "false" || v == "0") {
        return false;
    }
    throw ConfigError(key + " must be true or false, got '" + v + "'");
}

Format format_of(const std::string& v) {
    if (v == "text") {
        return Format::Text;
    }
    if (v == "json") {
        return Format::Json;
    }
    throw ConfigError("format must be text or json, got '" + v + "'");
}

int width_of(const std::string& key, const std::string& v) {
    const std::uint64_t w = positive(key, v);
    if (w % 8 != 0 || w > 256) {
        throw ConfigError(key + " must be a multiple of 8 up to 256, got " + v);
    }
    return static_cast<int>(w);
}

// ---------------------------------------------------------------- inputs

Contract load_contract(const std::string& path, int width) {
    const std::string text = read_file(path);
    if (std::filesystem::path(path).extension() == ".lol") {
        return parse_lolisa_text(text, path);
    }
    return typecheck_contract(parse_solidity(text, path), TypeOptions{width});
}

std::vector<std::string> split_args(const std::string& s) {
    std::vector<std::string> out;
    if (trim(s).empty()) {
        return out;
    }
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(trim(item));
    }
    return out;
}

BigInt parse_int(const std::string& text, const std::string& what) {
    std::string t = text;
    bool neg = false;
    if (!t.empty() && t[0] == '-') {
        neg = true;
        t = t.substr(1);
    }
    const bool hex = t.size() > 2 && t[0] == '0' && (t[1] == 'x' || t[1] == 'X');
    const std::string digits = hex ? t.substr(2) : t;
    const bool ok = !digits.empty() && std::all_of(digits.begin(), digits.end(), [&](unsigned char c) {
        return hex ? std::isxdigit(c) != 0 : std::isdigit(c) != 0;
    });
    if (!ok) {
        throw ArgError(what + ": '" + text + "' is not an integer");
    }
    BigInt n(hex ? "0x" + digits : digits);
    return neg ? BigInt(-n) : n;
}

Value parse_value(const std::string& text, const LType& t, const std::string& what) {
    try {
        switch (t.kind()) {
        case TypeKind::Bool:
            if (text == "true" || text == "false") {
                return Value::boolean(text == "true");
            }
            throw ArgError(what + ": expected true or false, got '" + text + "'");
        case TypeKind::Int: {
            BigInt n = parse_int(text, what);
            const bool sign = t.signedness() == Signedness::Signed;
            const BigInt lo = sign ? BigInt(-(BigInt(1) << (t.width() - 1))) : BigInt(0);
            const BigInt hi = sign ? BigInt((BigInt(1) << (t.width() - 1)) - 1) : BigInt((BigInt(1) << t.width()) - 1);
            if (n < lo || n > hi) {
                throw ArgError(what + ": " + text + " does not fit " + t.str());
            }
            return Value::integer(t.width(), t.signedness(), n);
        }
        case TypeKind::Address: {
            BigInt n = parse_int(text, what);
            if (n < 0 || n >= (BigInt(1) << 160)) {
                throw ArgError(what + ": address out of range");
            }
            return Value::address(Bits256(n));
        }
        case TypeKind::String: {
            std::string s = text;
            if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
                s = s.substr(1, s.size() - 2);
            }
            return Value::string(s);
        }
        default: break;
        }
    } catch (const DomainError& e) {
        throw ArgError(what + ": " + e.what());
    }
    throw ArgError(what + ": arguments of type " + t.str() + " cannot be given on the command line");
}

// ---------------------------------------------------------------- output

std::string render_returns(const std::vector<SymExpr>& rs) {
    std::string s;
    for (std::size_t i = 0; i < rs.size(); ++i) {
        s += (i ? ", " : "") + rs[i].render();
    }
    return s;
}

nlohmann::json outcome_json(const ExecOutcome& r) {
    nlohmann::json j;
    j["outcome"] = std::string(outcome_name(r.kind));
    j["gas_used"] = r.env.gas_used;
    j["gas_limit"] = r.env.gas_limit;
    j["returns"] = nlohmann::json::array();
    for (const auto& v : r.returns) {
        j["returns"].push_back(v.render());
    }
    if (r.kind == OutcomeKind::Reverted) {
        j["revert_reason"] = r.revert_reason;
        j["where"] = r.where.str();
    }
    if (r.kind == OutcomeKind::Fault) {
        j["fault"] = std::string(fault_name(r.fault));
        j["fault_message"] = r.fault_message;
        j["where"] = r.where.str();
    }
    j["memory"] = memory_to_json(r.mem);
    j["trace"] = r.trace;
    return j;
}

std::string outcome_text(const ExecOutcome& r) {
    std::ostringstream o;
    o << "outcome: " << outcome_name(r.kind) << "\n";
    o << "gas_used: " << r.env.gas_used << " of " << r.env.gas_limit << "\n";
    if (!r.returns.empty()) {
        o << "returns: " << render_returns(r.returns) << "\n";
    }
    if (r.kind == OutcomeKind::Reverted) {
        o << "revert: " << r.revert_reason << " at " << r.where.str() << "\n";
    }
    if (r.kind == OutcomeKind::Fault) {
        o << "fault: " << fault_name(r.fault) << ": " << r.fault_message << " at " << r.where.str() << "\n";
    }
    if (!r.trace.empty()) {
        o << "trace:\n";
        for (const auto& t : r.trace) {
            o << "  " << t << "\n";
        }
    }
    o << "memory:\n" << dump_memory(r.mem);
    return o.str();
}

std::string diff_text(const DiffReport& r) {
    std::ostringstream o;
    o << r.contract << " [" << (r.entry.empty() ? "all functions" : r.entry) << "]: " << r.cases << " cases, "
      << r.divergences.size() << " divergences\n";
    for (const auto& [k, n] : r.outcomes) {
        o << "  " << k << ": " << n << "\n";
    }
    for (const auto& [k, n] : r.faults) {
        o << "  fault " << k << ": " << n << "\n";
    }
    for (const auto& d : r.divergences) {
        o << "  case " << d.case_index << " (seed " << d.seed << ") " << d.function << ": " << d.details << "\n";
    }
    return o.str();
}

// ---------------------------------------------------------------- commands

struct Options {
    Config cfg;
    std::string file;
    std::string entry;
    std::string args;
    std::string sender = "1";
    std::string value = "0";
    std::string spec;
    std::string report;
    std::string smt_dir;
    std::size_t cases = 100;
    std::uint64_t seed = 0;
    unsigned jobs = 0;
};

int cmd_parse(const Options& o, bool dump, std::ostream& out) {
    Contract c = load_contract(o.file, o.cfg.uint_default_width);
    if (o.cfg.format == Format::Json) {
        nlohmann::json j{{"file", o.file}, {"contract", c.name()}, {"ok", true}};
        if (dump) {
            j["dump"] = pretty_print(c);
        }
        out << j.dump(2) << "\n";
    } else if (dump) {
        out << pretty_print(c);
    } else {
        out << o.file << ": ok\n";
    }
    return kOk;
}

int cmd_run(const Options& o, std::ostream& out) {
    Contract c = load_contract(o.file, o.cfg.uint_default_width);
    const FunctionDef* f = c.find_function(o.entry);
    if (!f) {
        throw ArgError("no function '" + o.entry + "' in " + c.name());
    }
    std::vector<std::string> texts = split_args(o.args);
    if (texts.size() != f->params().size()) {
        throw ArgError(o.entry + " expects " + std::to_string(f->params().size()) + " arguments, got " +
                       std::to_string(texts.size()));
    }
    std::vector<SymExpr> args;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const Param& p = f->params()[i];
        args.push_back(SymExpr::concrete(parse_value(texts[i], p.type, "argument " + p.name)));
    }
    TxParams tx;
    tx.gas_limit = o.cfg.gas_limit;
    tx.max_call_depth = o.cfg.call_depth_max;
    tx.sender = SymExpr::concrete(parse_value(o.sender, LType::address(), "--sender"));
    tx.value = SymExpr::concrete(parse_value(o.value, LType::uint(c.uint_width()), "--value"));
    auto [env, fenv, mem] = init_env(c, tx, init_memory(o.cfg.mem_size));
    ExecOptions eo;
    eo.trace = o.cfg.trace;
    ExecOutcome r = call_function(mem, env, fenv, o.entry, args, eo);
    if (o.cfg.format == Format::Json) {
        out << outcome_json(r).dump(2) << "\n";
    } else {
        out << outcome_text(r);
    }
    switch (r.kind) {
    case OutcomeKind::Normal: return kOk;
    case OutcomeKind::Reverted: return kReverted;
    case OutcomeKind::OutOfGas: return kOutOfGas;
    default: return kFault;
    }
}

int cmd_verify(const Options& o, std::ostream& out) {
    Contract c = load_contract(o.file, o.cfg.uint_default_width);
    std::vector<PropertySpec> props = parse_spec(read_file(o.spec), o.spec);
    for (const auto& p : props) {
        bind_spec(c, p);
    }
    VerifyOptions vo;
    vo.gas_limit = o.cfg.gas_limit;
    vo.mem_size = o.cfg.mem_size;
    vo.max_call_depth = o.cfg.call_depth_max;
    vo.budget = o.cfg.solver;
    vo.max_paths = o.cfg.max_paths;

    // One task per property; results are collected in file order.
    const unsigned jobs = std::max(1u, o.jobs ? o.jobs : std::thread::hardware_concurrency());
    std::vector<Verdict> verdicts(props.size());
    for (std::size_t start = 0; start < props.size(); start += jobs) {
        std::vector<std::future<Verdict>> running;
        for (std::size_t i = start; i < std::min(props.size(), start + jobs); ++i) {
            running.push_back(std::async(std::launch::async, [&c, &props, &vo, i] { return verify(c, props[i], vo); }));
        }
        for (std::size_t k = 0; k < running.size(); ++k) {
            verdicts[start + k] = running[k].get();
        }
    }

    const std::string rendered =
        o.cfg.format == Format::Json ? report_json(o.file, verdicts).dump(2) + "\n" : report_text(verdicts);
    out << rendered;
    if (!o.report.empty()) {
        write_file(o.report, rendered);
    }
    if (!o.smt_dir.empty()) {
        std::filesystem::create_directories(o.smt_dir);
        for (const auto& v : verdicts) {
            for (const auto& [path, cs] : v.open_queries) {
                write_file((std::filesystem::path(o.smt_dir) / (v.property + "." + std::to_string(path) + ".smt2"))
                               .string(),
                           export_smtlib(cs));
            }
        }
    }
    bool unknown = false;
    for (const auto& v : verdicts) {
        if (v.kind == VerdictKind::Falsified) {
            return kFalsified;
        }
        unknown = unknown || v.kind == VerdictKind::Unknown;
    }
    return unknown ? kUnknown : kOk;
}

int cmd_diff(const Options& o, std::ostream& out) {
    Contract c = load_contract(o.file, o.cfg.uint_default_width);
    DiffOptions d;
    d.gas_limit = o.cfg.gas_limit;
    d.mem_size = o.cfg.mem_size;
    d.max_call_depth = o.cfg.call_depth_max;
    DiffReport r = diff_check(c, o.entry, o.cases, o.seed, d);
    if (o.cfg.format == Format::Json) {
        out << diff_to_json(r).dump(2) << "\n";
    } else {
        out << diff_text(r);
    }
    return r.divergences.empty() ? kOk : kDiverged;
}

}  // namespace

std::vector<std::string> config_keys() {
    return {"mem_size",         "gas_limit",           "uint_default_width", "call_depth_max",
            "max_paths",        "format",              "trace",              "solver_full_range_width",
            "solver_samples",   "solver_seed",         "solver_max_assignments", "solver_max_steps",
            "solver_timeout_ms"};
}

void apply_config_value(Config& cfg, const std::string& key, const std::string& value) {
    if (key == "mem_size") {
        cfg.mem_size = positive(key, value);
    } else if (key == "gas_limit") {
        cfg.gas_limit = value == "0" ? 0 : positive(key, value);
    } else if (key == "uint_default_width") {
        cfg.uint_default_width = width_of(key, value);
    } else if (key == "call_depth_max") {
        cfg.call_depth_max = static_cast<unsigned>(positive(key, value));
    } else if (key == "max_paths") {
        cfg.max_paths = positive(key, value);
    } else if (key == "format") {
        cfg.format = format_of(value);
    } else if (key == "trace") {
        cfg.trace = boolean(key, value);
    } else if (key == "solver_full_range_width") {
        cfg.solver.full_range_max_width = static_cast<int>(positive(key, value));
    } else if (key == "solver_samples") {
        cfg.solver.samples_per_var = static_cast<int>(positive(key, value));
    } else if (key == "solver_seed") {
        cfg.solver.seed = value == "0" ? 0 : positive(key, value);
    } else if (key == "solver_max_assignments") {
        cfg.solver.max_assignments = positive(key, value);
    } else if (key == "solver_max_steps") {
        cfg.solver.max_steps = positive(key, value);
    } else if (key == "solver_timeout_ms") {
        cfg.solver.timeout = std::chrono::milliseconds(positive(key, value));
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

void apply_config_text(Config& cfg, const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(n) + ": expected key = value");
        }
        try {
            apply_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(n) + ": " + e.what());
        }
    }
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Symbolic execution and bounded verification for a Solidity subset", "fspvm"};
    app.require_subcommand(1);
    Options o;
    std::string config_path;
    std::map<std::string, std::string> flags;
    auto global = [&](const std::string& name, const std::string& key, const std::string& help) {
        app.add_option_function<std::string>(
               name, [&flags, key](const std::string& v) { flags[key] = v; }, help)
            ->type_name("VALUE");
    };
    global("--mem-size", "mem_size", "memory blocks (default 100)");
    global("--gas", "gas_limit", "gas limit per execution (default 1000000)");
    global("--uint-width", "uint_default_width", "width of uint/int (default 256)");
    global("--call-depth", "call_depth_max", "maximum call depth (default 1024)");
    global("--max-paths", "max_paths", "path budget per property (default 4096)");
    global("--format", "format", "text or json");
    app.add_flag_function("--trace", [&flags](std::int64_t) { flags["trace"] = "true"; }, "per-statement trace");
    app.add_option("--config", config_path, "flat key = value config file (default $FSPVM_CONFIG)");

    auto file_arg = [&](CLI::App* sub) { sub->add_option("file", o.file, ".sol or .lol input")->required(); };
    CLI::App* parse = app.add_subcommand("parse", "parse and typecheck, print the Lolisa dump");
    CLI::App* check = app.add_subcommand("typecheck", "parse and typecheck only");
    CLI::App* runc = app.add_subcommand("run", "execute one function concretely");
    CLI::App* ver = app.add_subcommand("verify", "check the properties of a spec file");
    CLI::App* diff = app.add_subcommand("diff", "compare concrete and symbolic execution on random inputs");
    for (CLI::App* sub : {parse, check, runc, ver, diff}) {
        sub->fallthrough();
        file_arg(sub);
    }
    runc->add_option("--entry", o.entry, "function to call")->required();
    runc->add_option("--args", o.args, "comma-separated arguments");
    runc->add_option("--sender", o.sender, "msg.sender address (default 1)");
    runc->add_option("--value", o.value, "msg.value (default 0)");
    ver->add_option("--spec", o.spec, "property file")->required();
    ver->add_option("--report", o.report, "also write the report here");
    ver->add_option("--smt-dir", o.smt_dir, "write SMT-LIB queries of Unknown paths here");
    ver->add_option("--jobs", o.jobs, "properties verified at once (default: cores)");
    diff->add_option("--entry", o.entry, "function to test (default: all, round-robin)");
    diff->add_option("--cases", o.cases, "number of random cases (default 100)");
    diff->add_option("--seed", o.seed, "random seed (default 0)");

    std::vector<const char*> raw;
    for (const auto& a : argv) {
        raw.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(raw.size()), raw.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (config_path.empty()) {
            if (const char* env = std::getenv("FSPVM_CONFIG"); env && *env) {
                config_path = env;
            }
        }
        if (!config_path.empty()) {
            apply_config_text(o.cfg, read_file(config_path), config_path);
        }
        for (const auto& [k, v] : flags) {
            apply_config_value(o.cfg, k, v);
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }

    try {
        if (parse->parsed()) {
            return cmd_parse(o, true, out);
        }
        if (check->parsed()) {
            return cmd_parse(o, false, out);
        }
        if (runc->parsed()) {
            return cmd_run(o, out);
        }
        if (ver->parsed()) {
            return cmd_verify(o, out);
        }
        return cmd_diff(o, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const TypeErrors& e) {
        for (const auto& t : e.errors()) {
            err << t.str() << "\n";
        }
        return kInputError;
    } catch (const SyntaxError& e) {
        err << e.what() << "\n";
        return kInputError;
    } catch (const SpecError& e) {
        err << e.what() << "\n";
        return kInputError;
    } catch (const ArgError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const ExecError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }
}

}  // namespace fspvm::cli
