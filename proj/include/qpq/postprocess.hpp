// Classical postprocessing shared by both protocols: raw-key records,
// substring XOR folding with knowledge propagation, shift encryption of the
// database, and item retrieval.
#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpq/quantum/symbols.hpp"
#include "qpq/random.hpp"

namespace qpq {

// One raw-key position. bob_bit is the key holder's bit; `conclusive` holds
// the user's deduced value when the announcement let her pin it down.
struct RawKeyRecord {
    std::size_t position = 0;
    int bob_bit = 0;
    int announcement = 0;
    std::optional<int> conclusive;
    PreparedSymbol prepared = PreparedSymbol::Z0;
};

struct FinalKey {
    std::vector<int> bits;                      // the key holder's final key
    std::map<std::size_t, int> alice_known;     // positions the user knows, with values
};

// XOR-fold `raw` into k substrings of length floor(|raw|/k); trailing records
// beyond k*N are dropped. The user knows final bit j exactly when all k
// contributing raw bits were conclusive.
inline FinalKey fold_key(std::span<const RawKeyRecord> raw, std::size_t k) {
    if (k < 1) throw std::invalid_argument("fold_key: substring count must be >= 1");
    if (raw.size() < k) throw std::invalid_argument("fold_key: raw key shorter than k");
    const std::size_t n = raw.size() / k;

    FinalKey out;
    out.bits.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        int bit = 0;
        int known = 0;
        bool all_conclusive = true;
        for (std::size_t r = 0; r < k; ++r) {
            const RawKeyRecord& rec = raw[r * n + j];
            bit ^= rec.bob_bit;
            if (rec.conclusive) {
                known ^= *rec.conclusive;
            } else {
                all_conclusive = false;
            }
        }
        out.bits[j] = bit;
        if (all_conclusive) out.alice_known.emplace(j, known);
    }
    return out;
}

struct Database {
    std::vector<int> bits;
    std::size_t size() const { return bits.size(); }
};

inline Database random_database(std::size_t n, RandomStream& rng) {
    if (n < 1) throw std::invalid_argument("random_database: size must be >= 1");
    Database db;
    db.bits.reserve(n);
    for (std::size_t i = 0; i < n; ++i) db.bits.push_back(rng.bit());
    return db;
}

// File format: one ASCII line of '0'/'1' characters, newline-terminated.
inline Database load_database(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_database: cannot open " + path);
    std::string line;
    std::getline(in, line);
    Database db;
    db.bits.reserve(line.size());
    for (char ch : line) {
        if (ch == '0' || ch == '1') {
            db.bits.push_back(ch - '0');
        } else if (ch == '\r') {
            continue;
        } else {
            throw std::runtime_error("load_database: invalid character in " + path);
        }
    }
    if (db.bits.empty()) throw std::runtime_error("load_database: empty database in " + path);
    return db;
}

inline void save_database(const Database& db, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_database: cannot open " + path);
    for (int b : db.bits) out.put(b ? '1' : '0');
    out.put('\n');
}

inline std::size_t mod_index(long long value, std::size_t n) {
    const long long m = static_cast<long long>(n);
    long long r = value % m;
    if (r < 0) r += m;
    return static_cast<std::size_t>(r);
}

// ciphertext[t] = db[t] XOR key[(t + shift) mod N].
inline std::vector<int> encrypt_database(const Database& db, const std::vector<int>& key,
                                         long long shift) {
    if (db.size() != key.size()) {
        throw std::invalid_argument("encrypt_database: key and database lengths differ");
    }
    const std::size_t n = db.size();
    std::vector<int> out(n);
    for (std::size_t t = 0; t < n; ++t) out[t] = db.bits[t] ^ key[mod_index(
        static_cast<long long>(t) + shift, n)];
    return out;
}

// The two published shift conventions. They differ only in the sign of the
// announced value; both align final-key position j with database item i.
enum class ShiftConvention {
    YuJMinusI,     // user announces s = j - i, holder shifts by +s
    ChangIMinusJ,  // user announces s = i - j, holder shifts by -s
};

inline long long announced_shift(ShiftConvention conv, std::size_t j, std::size_t i) {
    const long long jj = static_cast<long long>(j), ii = static_cast<long long>(i);
    return conv == ShiftConvention::YuJMinusI ? jj - ii : ii - jj;
}

inline long long encryption_shift(ShiftConvention conv, long long announced) {
    return conv == ShiftConvention::YuJMinusI ? announced : -announced;
}

// Decrypt item i given the one known final-key bit (position j, value v):
// with the shift aligned as above, ciphertext[i] = x_i XOR key[j].
inline int retrieve(const std::vector<int>& ciphertext, std::size_t /*j*/, int known_value,
                    std::size_t i, ShiftConvention /*conv*/) {
    if (i >= ciphertext.size()) throw std::invalid_argument("retrieve: index out of range");
    return ciphertext[i] ^ known_value;
}

// Checked variant: refuses when the user does not actually know bit j, which
// is the protocol's restart pathway.
inline int retrieve(const std::vector<int>& ciphertext, const FinalKey& key, std::size_t j,
                    std::size_t i, ShiftConvention conv) {
    const auto it = key.alice_known.find(j);
    if (it == key.alice_known.end()) {
        throw std::runtime_error("retrieve: final-key bit unknown to the user");
    }
    return retrieve(ciphertext, j, it->second, i, conv);
}

}  // namespace qpq
