#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ig/errors.hpp"
#include "ig/policy.hpp"
#include "ig/signer_gate.hpp"

namespace ig {

// In-memory token-balance state machine standing in for a chain. Tokens are
// minted only at setup, so per-token balance sums are invariant across any
// scenario. Swaps fill exactly at minAmountOut against a designated pool
// account.

class MockLedger {
public:
    std::int64_t block_time() const { return block_time_; }

    void advance_time(std::int64_t ts) {
        if (ts < block_time_)
            throw TimestampRegression("block time may not move backwards");
        block_time_ = ts;
    }

    void mint(const std::string& account, const TokenKey& token, const UintDecimal& amount) {
        balances_[{account, token}] = balance_of(account, token) + amount;
    }

    UintDecimal balance_of(const std::string& account, const TokenKey& token) const {
        auto it = balances_.find({account, token});
        return it == balances_.end() ? UintDecimal() : it->second;
    }

    UintDecimal total_supply(const TokenKey& token) const {
        UintDecimal total;
        for (const auto& [key, amount] : balances_)
            if (key.second == token) total = total + amount;
        return total;
    }

    const std::vector<json>& receipts() const { return receipts_; }

    json snapshot() const {
        json rows = json::array();
        for (const auto& [key, amount] : balances_)
            rows.push_back(json{{"account", key.first},
                                {"token", json{{"chainId", key.second.first},
                                               {"address", key.second.second}}},
                                {"amount", amount.str()}});
        return json{{"blockTime", block_time_}, {"balances", std::move(rows)}};
    }

    struct Execution {
        std::string sender;
        std::optional<std::string> pool;  // swap counterparty
    };

    /// Applies the envelope's action atomically; no partial state on error.
    json execute_envelope(const ExecutionEnvelope& env, const Execution& how) {
        if (env.effective_deadline < block_time_)
            throw DeadlineExceeded("effective deadline " + std::to_string(env.effective_deadline) +
                                   " precedes block time " + std::to_string(block_time_));
        json receipt{{"ts", block_time_}, {"pdrId", env.pdr_id}};
        if (const Transfer* t = std::get_if<Transfer>(&env.intent.action)) {
            TokenKey token = token_key(t->token);
            require_balance(how.sender, token, t->amount);
            debit(how.sender, token, t->amount);
            credit(t->to.str(), token, t->amount);
            receipt["kind"] = "TRANSFER";
            receipt["from"] = how.sender;
            receipt["to"] = t->to.str();
            receipt["amount"] = t->amount.str();
        } else if (const Swap* s = std::get_if<Swap>(&env.intent.action)) {
            if (!how.pool) throw ScenarioConfigError("swap execution requires a pool account");
            TokenKey in = token_key(s->token_in), out = token_key(s->token_out);
            std::string recipient = s->recipient ? s->recipient->str() : how.sender;
            require_balance(how.sender, in, s->amount_in);
            require_balance(*how.pool, out, s->min_amount_out);
            debit(how.sender, in, s->amount_in);
            credit(*how.pool, in, s->amount_in);
            debit(*how.pool, out, s->min_amount_out);
            credit(recipient, out, s->min_amount_out);
            receipt["kind"] = "SWAP";
            receipt["from"] = how.sender;
            receipt["recipient"] = recipient;
            receipt["amountIn"] = s->amount_in.str();
            receipt["amountOut"] = s->min_amount_out.str();  // fills at the minimum
        } else {
            const Delegate& d = std::get<Delegate>(env.intent.action);
            receipt["kind"] = "DELEGATE";
            receipt["delegatee"] = d.delegatee.str();
        }
        receipts_.push_back(receipt);
        return receipt;
    }

private:
    void require_balance(const std::string& account, const TokenKey& token,
                         const UintDecimal& amount) {
        if (balance_of(account, token) < amount)
            throw InsufficientBalance("account " + account + " holds " +
                                      balance_of(account, token).str() + ", needs " + amount.str());
    }
    void debit(const std::string& account, const TokenKey& token, const UintDecimal& amount) {
        // subtraction via schoolbook borrow over the decimal strings
        const std::string& a = balances_.at({account, token}).str();
        const std::string& b = amount.str();
        std::string out;
        int borrow = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            int da = a[a.size() - 1 - i] - '0';
            int db = i < b.size() ? b[b.size() - 1 - i] - '0' : 0;
            int d = da - db - borrow;
            borrow = d < 0;
            if (d < 0) d += 10;
            out.push_back(static_cast<char>('0' + d));
        }
        while (out.size() > 1 && out.back() == '0') out.pop_back();
        std::reverse(out.begin(), out.end());
        balances_[{account, token}] = *UintDecimal::from_string(out);
    }
    void credit(const std::string& account, const TokenKey& token, const UintDecimal& amount) {
        balances_[{account, token}] = balance_of(account, token) + amount;
    }

    std::map<std::pair<std::string, TokenKey>, UintDecimal> balances_;
    std::int64_t block_time_ = 0;
    std::vector<json> receipts_;
};

}  // namespace ig
