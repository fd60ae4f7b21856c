#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"

using namespace fspvm;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "fspvm");
    std::ostringstream out;
    std::ostringstream err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string corpus(const std::string& name) { return std::string(FSPVM_CORPUS_DIR) + "/" + name; }

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "fspvm_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string write(const std::string& name, const std::string& text) {
    auto p = scratch(name);
    std::ofstream(p) << text;
    return p.string();
}

const char* kIdentity = "contract Id {\n"
                        "    uint public last;\n"
                        "    function id(uint x) public returns (uint) { last = x; return x; }\n"
                        "    function guard(uint x) public { if (x == 0) { throw; } }\n"
                        "    function flag(bool b, address a) public returns (bool) { return b; }\n"
                        "}\n";

}  // namespace

TEST(CliParse, DumpAndExitCodes) {
    Result ok = invoke({"parse", corpus("erc20.sol")});
    EXPECT_EQ(ok.code, 0);
    EXPECT_EQ(ok.out.rfind("Contract ERC20", 0), 0u);
    Result bad = invoke({"parse", write("bad.sol", "contract C { function f() public { uint x = true; } }")});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("bad.sol:1:"), std::string::npos);
    EXPECT_NE(bad.err.find("TypeMismatch"), std::string::npos);
    Result syntax = invoke({"parse", write("syntax.sol", "contract C { function f( }")});
    EXPECT_EQ(syntax.code, 1);
    EXPECT_NE(syntax.err.find("syntax.sol:1:"), std::string::npos);
    EXPECT_EQ(invoke({"parse", scratch("missing.sol").string()}).code, 2);
    Result tc = invoke({"typecheck", corpus("sponsor.sol")});
    EXPECT_EQ(tc.code, 0);
    EXPECT_EQ(tc.out.find("Contract"), std::string::npos);
}

TEST(CliParse, LolDumpIsAcceptedAsInput) {
    Result a = invoke({"parse", corpus("figure5.sol"), "--uint-width", "64"});
    ASSERT_EQ(a.code, 0);
    Result b = invoke({"parse", write("f5.lol", a.out)});
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(a.out, b.out);
}

TEST(CliRun, OutcomesMapToExitCodes) {
    const std::string f = write("id.sol", kIdentity);
    Result r = invoke({"run", f, "--entry", "id", "--args", "7"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("returns: uint256(7)"), std::string::npos);
    EXPECT_NE(r.out.find("[last : uint256, public] := uint256(7);"), std::string::npos);
    EXPECT_NE(r.out.find(":= initData;"), std::string::npos);
    EXPECT_EQ(invoke({"run", f, "--entry", "guard", "--args", "0"}).code, 3);
    EXPECT_EQ(invoke({"run", f, "--entry", "guard", "--args", "1"}).code, 0);
    EXPECT_EQ(invoke({"run", f, "--entry", "id", "--args", "7", "--gas", "0"}).code, 4);
    EXPECT_EQ(invoke({"run", f, "--entry", "flag", "--args", "true, 0x2"}).code, 0);
}

TEST(CliRun, BadArgumentsAreInputErrors) {
    const std::string f = write("id.sol", kIdentity);
    EXPECT_EQ(invoke({"run", f, "--entry", "id"}).code, 1);
    EXPECT_EQ(invoke({"run", f, "--entry", "id", "--args", "seven"}).code, 1);
    EXPECT_EQ(invoke({"run", f, "--entry", "nope"}).code, 1);
    EXPECT_EQ(invoke({"run", f, "--entry", "flag", "--args", "yes,1"}).code, 1);
    EXPECT_EQ(invoke({"run", f, "--entry", "id", "--args", "7", "--uint-width", "8"}).code, 0);
    EXPECT_EQ(invoke({"run", f, "--entry", "id", "--args", "300", "--uint-width", "8"}).code, 1);
    EXPECT_EQ(invoke({"run", f}).code, 2);
}

TEST(CliRun, TraceAndJson) {
    const std::string f = write("id.sol", kIdentity);
    Result r = invoke({"--format", "json", "run", f, "--entry", "id", "--args", "7", "--trace"});
    ASSERT_EQ(r.code, 0);
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["outcome"], "Normal");
    EXPECT_EQ(j["returns"][0], "uint256(7)");
    EXPECT_FALSE(j["trace"].empty());
    EXPECT_EQ(j["memory"]["size"], 100);
}

TEST(CliVerify, VerdictsMapToExitCodes) {
    Result ok = invoke({"verify", corpus("erc20.sol"), "--spec", corpus("erc20.spec"), "--uint-width", "8"});
    EXPECT_EQ(ok.code, 0) << ok.out << ok.err;
    EXPECT_NE(ok.out.find("transfer_conservation [transfer]: Proved up to gas bound 1000000"), std::string::npos);
    Result bad = invoke({"verify", corpus("erc20_broken.sol"), "--spec", corpus("erc20.spec"), "--uint-width", "8"});
    EXPECT_EQ(bad.code, 5);
    EXPECT_NE(bad.out.find("counterexample"), std::string::npos);
    EXPECT_NE(bad.out.find("msg.sender = "), std::string::npos);
    Result gas = invoke({"verify", corpus("erc20.sol"), "--spec", corpus("erc20.spec"), "--gas", "1"});
    EXPECT_EQ(gas.code, 6);
    EXPECT_EQ(invoke({"verify", corpus("erc20.sol"), "--spec", write("bad.spec", "property p\nentry nope()\n")}).code, 1);
    EXPECT_EQ(invoke({"verify", corpus("erc20.sol"), "--spec", scratch("none.spec").string()}).code, 2);
    EXPECT_EQ(invoke({"verify", corpus("erc20.sol")}).code, 2);
}

TEST(CliVerify, ReportIsDeterministicAcrossJobCounts) {
    std::vector<std::string> base{"--format", "json", "verify", corpus("sponsor.sol"), "--spec", corpus("sponsor.spec"),
                                  "--uint-width", "8"};
    auto with = [&](const std::string& jobs) {
        auto a = base;
        a.insert(a.end(), {"--jobs", jobs});
        return invoke(a);
    };
    Result one = with("1");
    Result many = with("6");
    ASSERT_EQ(one.code, 0) << one.err;
    EXPECT_EQ(one.out, many.out);
    EXPECT_EQ(one.out, with("6").out);
    auto j = nlohmann::json::parse(one.out);
    ASSERT_EQ(j["verdicts"].size(), 6u);
    for (const auto& v : j["verdicts"]) {
        EXPECT_EQ(v["verdict"], "Proved") << v["property"];
    }
}

TEST(CliVerify, ReportFileAndSmtExport) {
    const auto report = scratch("report.txt");
    const auto dir = scratch("smt");
    std::filesystem::remove_all(dir);
    Result r = invoke({"verify", corpus("erc20.sol"), "--spec", corpus("erc20.spec"), "--gas", "1", "--report",
                    report.string(), "--smt-dir", dir.string(), "--solver-budget-ignored"});
    EXPECT_EQ(r.code, 2);  // unknown flag
    r = invoke({"verify", corpus("erc20.sol"), "--spec", corpus("erc20.spec"), "--uint-width", "8",
             "--report", report.string(), "--smt-dir", dir.string(), "--config",
             write("tiny.cfg", "solver_max_steps = 1\nsolver_max_assignments = 1\n")});
    EXPECT_EQ(r.code, 6) << r.out;
    std::ifstream in(report);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), r.out);
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        const std::string name = e.path().filename().string();
        EXPECT_EQ(e.path().extension(), ".smt2") << name;
        std::ifstream f(e.path());
        std::string first;
        std::getline(f, first);
        EXPECT_FALSE(first.empty()) << name;
        ++files;
    }
    EXPECT_GT(files, 0u);
    EXPECT_TRUE(std::filesystem::exists(dir / "transfer_conservation.0.smt2") ||
                std::filesystem::exists(dir / "transfer_conservation.1.smt2") ||
                std::filesystem::exists(dir / "transfer_conservation.2.smt2"));
}

TEST(CliDiff, CorpusAndZeroCases) {
    Result r = invoke({"diff", corpus("erc20.sol"), "--entry", "transfer", "--cases", "1000", "--seed", "5"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("1000 cases, 0 divergences"), std::string::npos);
    Result z = invoke({"--format", "json", "diff", corpus("erc20.sol"), "--cases", "0"});
    EXPECT_EQ(z.code, 0);
    EXPECT_EQ(nlohmann::json::parse(z.out)["divergences"].size(), 0u);
    EXPECT_EQ(invoke({"diff", corpus("erc20.sol"), "--entry", "nope"}).code, 1);
    Result a = invoke({"diff", corpus("sponsor.sol"), "--cases", "200", "--seed", "9"});
    Result b = invoke({"diff", corpus("sponsor.sol"), "--cases", "200", "--seed", "9"});
    EXPECT_EQ(a.out, b.out);
}

TEST(CliConfig, PrecedenceFlagsOverFileOverDefaults) {
    const std::string f = write("id.sol", kIdentity);
    const std::string cfg = write("gas.cfg", "# comment\ngas_limit = 1   # trailing\nformat = json\n");
    Result file = invoke({"--config", cfg, "run", f, "--entry", "id", "--args", "7"});
    EXPECT_EQ(file.code, 4);
    EXPECT_EQ(nlohmann::json::parse(file.out)["gas_limit"], 1);
    Result flag = invoke({"--config", cfg, "--gas", "50", "run", f, "--entry", "id", "--args", "7"});
    EXPECT_EQ(flag.code, 0);
    EXPECT_EQ(nlohmann::json::parse(flag.out)["gas_limit"], 50);
    Result defaults = invoke({"run", f, "--entry", "id", "--args", "7"});
    EXPECT_NE(defaults.out.find("of 1000000"), std::string::npos);
}

TEST(CliConfig, EnvironmentVariableNamesDefaultFile) {
    const std::string f = write("id.sol", kIdentity);
    setenv("FSPVM_CONFIG", write("env.cfg", "gas_limit = 1\n").c_str(), 1);
    EXPECT_EQ(invoke({"run", f, "--entry", "id", "--args", "7"}).code, 4);
    EXPECT_EQ(invoke({"--config", write("big.cfg", "gas_limit = 100\n"), "run", f, "--entry", "id", "--args", "7"}).code,
              0);
    unsetenv("FSPVM_CONFIG");
}

TEST(CliConfig, RejectsUnknownKeysAndBadValues) {
    const std::string f = write("id.sol", kIdentity);
    for (const char* text : {"bogus = 1\n", "mem_size = 0\n", "mem_size = -3\n", "uint_default_width = 12\n",
                             "format = xml\n", "trace = maybe\n", "gas_limit\n"}) {
        Result r = invoke({"--config", write("bad.cfg", text), "typecheck", f});
        EXPECT_EQ(r.code, 2) << text;
        EXPECT_NE(r.err.find("bad.cfg:"), std::string::npos) << text;
    }
    EXPECT_EQ(invoke({"--mem-size", "0", "typecheck", f}).code, 2);
    EXPECT_EQ(invoke({"--format", "yaml", "typecheck", f}).code, 2);
    EXPECT_EQ(invoke({"--config", scratch("absent.cfg").string(), "typecheck", f}).code, 2);
    cli::Config c;
    for (const auto& k : cli::config_keys()) {
        EXPECT_NO_THROW(cli::apply_config_value(c, k, k == "format" ? "json" : k == "trace" ? "true" : "8")) << k;
    }
}

TEST(CliUsage, NoSubcommandOrHelp) {
    EXPECT_EQ(invoke({}).code, 2);
    EXPECT_EQ(invoke({"--help"}).code, 0);
    EXPECT_EQ(invoke({"frobnicate"}).code, 2);
}
