#pragma once

// Exhaustive 8-bit check of ERC20 transfer: every (sender balance, value)
// pair where the sender's balance grows.

#include <set>
#include <utility>

#include "fspvm/fether.hpp"

namespace fspvm::oracle {

struct TransferOracle {
    int violations = 0;
    std::set<std::pair<int, int>> bad;  // (balance of sender, value)
};

inline TransferOracle transfer_oracle(const Contract& c) {
    TransferOracle o;
    TxParams tx;
    tx.sender = SymExpr::concrete(Value::address(Bits256(1)));
    auto [env, fenv, mem0] = init_env(c, tx);
    for (int b = 0; b < 256; ++b) {
        LType m = LType::mapping(LType::address(), LType::uint(8));
        Value bal = default_value(m).map_set(Value::address(Bits256(1)), Value::uint(8, b));
        MemoryState mem = set_state(mem0, fenv, "balances", SymExpr::concrete(bal));
        for (int v = 0; v < 256; ++v) {
            ExecOutcome out = call_function(mem, env, fenv, "transfer", {SymExpr::concrete(Value::address(Bits256(2))), SymExpr::concrete(Value::uint(8, v))});
            if (!out.is_normal()) {
                continue;
            }
            Value after = get_state(out.mem, fenv, "balances").value();
            int s = after.map_get(Value::address(Bits256(1))).int_value().convert_to<int>();
            if (s > b) {
                ++o.violations;
                o.bad.emplace(b, v);
            }
        }
    }
    return o;
}

}  // namespace fspvm::oracle
