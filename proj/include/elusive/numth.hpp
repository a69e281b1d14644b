#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace elusive::numth {

using BigInt = mpz_class;

/** Default work budget for factorization, counted in basic steps. */
inline constexpr std::uint64_t kDefaultBudget = 1'000'000'000ULL;

/** @brief Prime power q = p^f kept together with its decomposition. */
struct PrimePower {
    BigInt p;
    unsigned f = 1;
    BigInt q;

    /** Builds p^f; throws PreconditionViolation unless p is prime and f >= 1. */
    static PrimePower of(const BigInt& p, unsigned f);
    /** Decomposes q; throws PreconditionViolation if q is not a prime power. */
    static PrimePower from_q(const BigInt& q);
    static std::optional<PrimePower> try_from_q(const BigInt& q);

    unsigned long p_ul() const { return p.get_ui(); }
    unsigned long q_ul() const { return q.get_ui(); }
    bool operator==(const PrimePower& o) const { return q == o.q; }
};

std::string to_string(const BigInt& x);
BigInt pow(const BigInt& base, unsigned long e);

/** Deterministic below 2^64; 40 Miller-Rabin rounds with a fixed seed above. */
bool is_prime(const BigInt& n);

/** Mutable step counter shared by one factorization job. */
class Budget {
public:
    explicit Budget(std::uint64_t limit = kDefaultBudget) : limit_(limit) {}
    void spend(std::uint64_t steps);
    std::uint64_t used() const { return used_; }
    std::uint64_t limit() const { return limit_; }

private:
    std::uint64_t limit_;
    std::uint64_t used_ = 0;
};

struct FactorMap {
    std::map<BigInt, unsigned> entries;
    BigInt value = 1;

    BigInt product() const;
    std::vector<BigInt> primes() const;
};

/** Trial division to 10^6, then Brent-rho on composite cofactors. */
FactorMap factor(const BigInt& n, std::uint64_t budget = kDefaultBudget);
FactorMap factor(const BigInt& n, Budget& budget);

/** Exponent of the prime r in n (n != 0). */
unsigned valuation(const BigInt& n, const BigInt& r);
/** The r-part (n)_r. */
BigInt r_part(const BigInt& n, const BigInt& r);

/** Value of the n-th cyclotomic polynomial at q. */
BigInt cyclotomic_value(const BigInt& q, unsigned n);

/**
 * Product of r^{v_r(q^n-1)} over the primitive prime divisors r of q^n-1.
 * Computed without factorization, so it is exact for any size.
 */
BigInt ppd_part(const BigInt& q, unsigned n);
bool has_ppd(const BigInt& q, unsigned n);

/** Sorted primitive prime divisors of q^n-1; throws FactorizationTimeout. */
std::vector<BigInt> ppd_set(const BigInt& q, unsigned n, std::uint64_t budget = kDefaultBudget);
std::vector<BigInt> ppd_set(const BigInt& q, unsigned n, Budget& budget);

/** Multiplicative order of a modulo m (gcd(a,m) = 1). */
unsigned long mult_order(const BigInt& a, const BigInt& m);

/** Exponent of r in q^n - eps via the closed three-branch formula. */
unsigned lifted_valuation(const PrimePower& q, int eps, const BigInt& r, unsigned n);

enum class LiftRelation { EqualI, EqualII, EqualIII, ProperSubset };
std::string to_string(LiftRelation rel);

struct LiftReport {
    LiftRelation relation = LiftRelation::ProperSubset;
    bool sets_equal = false;        ///< from the direct comparison
    std::vector<BigInt> small_set;  ///< P_b^{cn} when factorable, else empty
    std::vector<BigInt> large_set;  ///< P_a^n when factorable, else empty
    bool sets_listed = false;
};

/**
 * Compares P_b^{cn} with P_{b^c}^n directly and tags the equality case.
 * Throws PreconditionViolation if the direct answer contradicts the case list.
 */
LiftReport ppd_lift_relation(const BigInt& b, unsigned c, unsigned n,
                             std::uint64_t budget = kDefaultBudget);

enum class BoundClass { GeneralBound, Exceptional, Inapplicable };
std::string to_string(BoundClass c);

struct PpdReport {
    PrimePower q;
    unsigned n = 0;
    std::vector<BigInt> ppds;
    bool unique = false;
    BigInt r = 0;
    BoundClass d_class = BoundClass::Inapplicable;
    std::string list_id;  ///< e.g. "2^a.ii" when Exceptional
    std::string formula;  ///< e.g. "2nf+1" when Exceptional
    std::string note;     ///< coverage remarks, e.g. the open n=2 case
};

PpdReport unique_ppd_classify(const PrimePower& q, unsigned n,
                              std::uint64_t budget = kDefaultBudget);

/** Pairs (n,q) on the exceptional lists of the n=2^a and n=2^a*3 lemmas. */
struct ExceptionalPair {
    unsigned n;
    unsigned long q;
    unsigned k;  ///< r = k*n*f + 1
    const char* list_id;
};
const std::vector<ExceptionalPair>& exceptional_pairs_pow2();
const std::vector<ExceptionalPair>& exceptional_pairs_pow2_times3();

struct PowerPlusOne {
    bool prime_power = false;
    BigInt s = 0;
    unsigned w = 0;
    char lemma_case = 0;  ///< 'i' sporadic, 'f' Fermat, 'm' Mersenne, 0 none
};

/** Decides whether r^v + 1 = s^w with s prime. */
PowerPlusOne prime_power_plus_one(const BigInt& r, unsigned v);

struct RepunitPower {
    bool perfect_power = false;
    BigInt value = 0;  ///< (x^a-1)/(x-1)
    BigInt y = 0;
    unsigned b = 0;
    bool exceptional = false;  ///< one of the four known quadruples
};

RepunitPower repunit_power_check(const BigInt& x, unsigned a);

/** Number of solutions of a*x = b (mod c). */
BigInt congruence_solution_count(const BigInt& a, const BigInt& b, const BigInt& c);

enum class CaseIGate { NotDividingQPlus1, RNotPrime, QuotientNotPower, Survived };
std::string to_string(CaseIGate g);

struct CaseICandidate {
    unsigned n;
    unsigned f;
    CaseIGate outcome;
    unsigned l = 0;  ///< power of r divided out before stopping
};

struct CaseIResult {
    std::vector<CaseICandidate> candidates;
    std::vector<std::pair<unsigned, unsigned>> survivors;
};

/** Exponents f = 2^a n^b up to f_max, ascending. */
std::vector<unsigned> case_i_exponents(unsigned n, unsigned f_max);
CaseIResult case_i_search(unsigned n_max, unsigned f_max);

/** Two smallest distinct primes above n+2 dividing prod_{i<=ceil((n-2)/2)} (q^{2i}-1). */
std::optional<std::pair<BigInt, BigInt>> two_large_primes(unsigned n, const PrimePower& q,
                                                          std::uint64_t budget = kDefaultBudget);

} // namespace elusive::numth
