// The four conjugate-coding symbols and their classical views.
#pragma once

#include <array>
#include <stdexcept>

namespace qpq {

enum class Basis : int { Z = 0, X = 1 };

enum class PreparedSymbol : int { Z0 = 0, Z1 = 1, XPlus = 2, XMinus = 3 };

inline constexpr std::array<PreparedSymbol, 4> all_symbols{
    PreparedSymbol::Z0, PreparedSymbol::Z1, PreparedSymbol::XPlus, PreparedSymbol::XMinus};

constexpr Basis basis_of(PreparedSymbol s) {
    return (s == PreparedSymbol::Z0 || s == PreparedSymbol::Z1) ? Basis::Z : Basis::X;
}

// Classical bit view: the bit announced when this state is observed
// (0 for |0> and |+>, 1 for |1> and |->).
constexpr int bit_of(PreparedSymbol s) {
    return (s == PreparedSymbol::Z1 || s == PreparedSymbol::XMinus) ? 1 : 0;
}

constexpr int basis_bit(Basis b) { return b == Basis::Z ? 0 : 1; }

constexpr Basis other_basis(Basis b) { return b == Basis::Z ? Basis::X : Basis::Z; }

constexpr Basis basis_from_bit(int bit) { return bit == 0 ? Basis::Z : Basis::X; }

constexpr PreparedSymbol make_symbol(Basis b, int bit) {
    if (b == Basis::Z) return bit == 0 ? PreparedSymbol::Z0 : PreparedSymbol::Z1;
    return bit == 0 ? PreparedSymbol::XPlus : PreparedSymbol::XMinus;
}

inline const char* to_string(PreparedSymbol s) {
    switch (s) {
        case PreparedSymbol::Z0: return "Z0";
        case PreparedSymbol::Z1: return "Z1";
        case PreparedSymbol::XPlus: return "X+";
        case PreparedSymbol::XMinus: return "X-";
    }
    throw std::logic_error("to_string: bad PreparedSymbol");
}

inline const char* to_string(Basis b) { return b == Basis::Z ? "Z" : "X"; }

}  // namespace qpq
