#pragma once

#include "elusive/numth.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace elusive::gf {

using numth::BigInt;
using numth::PrimePower;

enum class Family { Linear, Unitary, Symplectic, OrthogonalPlus, OrthogonalMinus, OrthogonalOdd };

/** Short tags used in data files and on the command line: L, U, S, O+, O-, O. */
std::string to_string(Family f);
Family family_from_string(std::string_view s);

/**
 * A finite simple classical group by family, natural dimension and field size.
 * Restricted mode admits only the set of groups the classification covers
 * (L_n n>=3, U_n and PSp_n n>=4, orthogonal n>=7, minus L3(2), L4(2), PSp4(2), PSp4(3)).
 */
struct GroupId {
    Family family = Family::Linear;
    unsigned n = 0;
    PrimePower q;

    static GroupId make(Family family, unsigned n, const PrimePower& q, bool restricted = true);
    /** Parses "U:4:2" style identifiers. */
    static GroupId parse(std::string_view s, bool restricted = true);

    /** +1, -1 for the even orthogonal families, 0 otherwise. */
    int eps() const;
    std::string name() const;
    std::string key() const;  ///< the "U:4:2" form
};

enum class AschClass { C1, C2, C3, C4, C5, C6, C7, C8, N, S };
std::string to_string(AschClass c);
AschClass asch_class_from_string(std::string_view s);

/**
 * Subgroup type. type_name uses an ASCII spelling of the usual notation, e.g.
 * "P2", "P1,6", "GL2+GL5", "GU1wrS5", "GL3(q^1/2)", "Sp4(q^2)", "O1+Om8",
 * "Om4wrS2", "C6", "A7", "Sz(q)". params holds the integers read from it.
 */
struct SubgroupSpec {
    AschClass asch_class = AschClass::C1;
    std::string type_name;
    std::vector<long> params;

    /** Parses "C1:P1"; a bare type name is accepted when the class is implied. */
    static SubgroupSpec parse(std::string_view s);
    static SubgroupSpec make(AschClass c, std::string_view type_name);
    std::string to_string() const;
};

/** Integer kept as a prime factorization; exponents may go negative mid-computation. */
class Factored {
public:
    Factored() = default;
    static Factored of(const BigInt& n);           ///< factors n (n >= 1)
    static Factored prime_power(const BigInt& p, long e);

    Factored& operator*=(const Factored& o);
    Factored& operator/=(const Factored& o);
    Factored pow(unsigned k) const;

    bool integral() const;
    BigInt value() const;  ///< throws PreconditionViolation unless integral
    std::vector<BigInt> primes() const;  ///< primes with positive exponent
    const std::map<BigInt, long>& exponents() const { return e_; }

private:
    std::map<BigInt, long> e_;
};
Factored operator*(Factored a, const Factored& b);
Factored operator/(Factored a, const Factored& b);

enum class OrderMode { Exact, DividesBound };
std::string to_string(OrderMode m);

struct SubgroupOrder {
    OrderMode mode = OrderMode::Exact;
    Factored factored;
    BigInt value() const { return factored.value(); }
};

BigInt order(const GroupId& g);
Factored order_factored(const GroupId& g);

/** |H0| or a divisor bound A; throws UnsupportedSubgroupType outside the catalog. */
SubgroupOrder subgroup_order(const GroupId& g, const SubgroupSpec& h);

/** Names accepted by subgroup_order, for error messages and the CLI. */
std::vector<std::string> catalog_types();

std::vector<BigInt> spectrum(const BigInt& n, std::uint64_t budget = numth::kDefaultBudget);
std::size_t pi(const BigInt& n, std::uint64_t budget = numth::kDefaultBudget);

/** Inconclusive only arises in DividesBound mode when the bound misses no prime. */
enum class VerdictTag { EqualPi, DiffOne, DiffAtLeastTwo, Inconclusive };
std::string to_string(VerdictTag t);

struct ScreenVerdict {
    VerdictTag tag = VerdictTag::Inconclusive;
    OrderMode mode = OrderMode::Exact;
    std::vector<BigInt> missing;  ///< primes of |G0| not dividing |H0| (or A)

    BigInt r() const { return missing.empty() ? BigInt(0) : missing.front(); }
    std::string to_string() const;  ///< "DiffOne(13)", "EqualPi", ...
};

ScreenVerdict screen(const GroupId& g, const SubgroupSpec& h);

/**
 * Screening of an almost simple irreducible subgroup with socle named by
 * socle_type in dimension n >= 13, using ppds of q^j-1, q^k-1, q^l-1 at the three
 * largest even indices below n and the table of socles whose order can meet them.
 */
ScreenVerdict s_screen(const GroupId& g, std::string_view socle_type, unsigned n);

/** Indices i (n/2 < i <= n) whose ppds may divide |H0| for the named socle. */
std::vector<unsigned> s_blocked_indices(std::string_view socle_type, unsigned n);

/** Degree |G0 : H0|; requires an exact subgroup order. */
BigInt omega_size(const GroupId& g, const SubgroupSpec& h);

} // namespace elusive::gf
