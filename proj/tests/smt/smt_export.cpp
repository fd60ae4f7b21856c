// Writes every path query of the corpus properties and of generated
// contracts as SMT-LIB, with the built-in solver's answer in a manifest.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fspvm/frontend.hpp"
#include "fspvm/generator.hpp"
#include "fspvm/solver.hpp"
#include "fspvm/lolisa.hpp"
#include "fspvm/verifier.hpp"

using namespace fspvm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Exporter {
    fs::path dir;
    std::ofstream manifest;
    std::size_t written = 0;
    std::size_t unsupported = 0;

    void emit(const std::string& stem, const std::vector<Constraint>& q, const StructTable& structs) {
        std::string text;
        try {
            text = export_smtlib(q);
        } catch (const UnsupportedSort&) {
            ++unsupported;
            return;
        }
        SatResult r = check_feasible(q, SolverBudget{}, structs);
        std::string file = stem + ".smt2";
        std::ofstream(dir / file) << text;
        manifest << file << ' ' << sat_status_name(r.status) << '\n';
        ++written;
    }

    void property(const std::string& tag, const Contract& c, const PropertySpec& p, std::uint64_t gas) {
        BoundSpec b = bind_spec(c, p);
        VerifyOptions o;
        o.gas_limit = gas;
        EntryState entry = symbolic_entry(c, b, o);
        Exploration x = explore(c, b, o);
        for (std::size_t i = 0; i < x.paths.size(); ++i) {
            const ExploredPath& path = x.paths[i];
            if (path.outcome.kind != OutcomeKind::Normal && path.outcome.kind != OutcomeKind::Reverted) {
                continue;
            }
            std::string stem = tag + "." + p.name + "." + std::to_string(i);
            std::vector<Constraint> feas = entry.pre;
            feas.insert(feas.end(), path.outcome.pc.begin(), path.outcome.pc.end());
            emit(stem + ".path", feas, entry.fenv.structs);
            PostCheck pc = check_post(entry, b, path);
            if (pc.query.size() > feas.size()) {
                emit(stem + ".post", pc.query, entry.fenv.structs);
            }
        }
    }
};

}  // namespace

int main(int argc, char** argv) {
    if (argc != 4) {
        std::cerr << "usage: smt_export <corpus dir> <out dir> <generated count>\n";
        return 2;
    }
    const fs::path corpus = argv[1];
    Exporter ex;
    ex.dir = argv[2];
    fs::create_directories(ex.dir);
    ex.manifest.open(ex.dir / "manifest.txt");

    struct Case {
        const char* sol;
        const char* spec;
        int width;
    };
    for (Case k : {Case{"erc20.sol", "erc20.spec", 8}, Case{"erc20_broken.sol", "erc20.spec", 8},
                   Case{"erc20.sol", "erc20.spec", 256}, Case{"sponsor.sol", "sponsor.spec", 8},
                   Case{"sponsor.sol", "sponsor.spec", 256}}) {
        Contract c = typecheck_contract(parse_solidity(slurp(corpus / k.sol), k.sol), TypeOptions{k.width});
        std::string tag = fs::path(k.sol).stem().string() + "_w" + std::to_string(k.width);
        for (const PropertySpec& p : parse_spec(slurp(corpus / k.spec), k.spec)) {
            ex.property(tag, c, p, kDefaultGasLimit);
        }
    }

    GenOptions g;
    g.verification = true;
    g.uint_width = 8;
    const int n = std::stoi(argv[3]);
    for (int s = 0; s < n; ++s) {
        const std::uint64_t seed = 30000 + s;
        Contract c = program_generator(seed, 12, g);
        ex.property("gen" + std::to_string(seed), c, parse_spec(generate_spec(seed, c)).at(0), 20000);
    }
    std::cout << ex.written << " queries written, " << ex.unsupported << " skipped (unsupported sort)\n";
    return 0;
}
