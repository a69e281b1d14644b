#include "elusive/errors.hpp"
#include "elusive/numth.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

using namespace elusive;
using namespace elusive::numth;

namespace {

// Independent oracle: plain trial division, no shared code with the library.
std::map<unsigned long long, unsigned> naive_factor(unsigned long long n)
{
    std::map<unsigned long long, unsigned> out;
    for (unsigned long long d = 2; d * d <= n; ++d)
        while (n % d == 0) {
            ++out[d];
            n /= d;
        }
    if (n > 1)
        ++out[n];
    return out;
}

unsigned long long ipow(unsigned long long b, unsigned e)
{
    unsigned long long r = 1;
    while (e--)
        r *= b;
    return r;
}

// Definition-level ppd oracle for q^n - 1 below 2^63.
std::set<unsigned long long> naive_ppds(unsigned long long q, unsigned n)
{
    std::set<unsigned long long> out;
    for (auto& [r, e] : naive_factor(ipow(q, n) - 1)) {
        bool primitive = true;
        for (unsigned i = 1; i < n; ++i)
            if ((ipow(q, i) - 1) % r == 0)
                primitive = false;
        if (primitive)
            out.insert(r);
    }
    return out;
}

// Emptiness oracle by stripping every prime shared with q^i - 1, i < n.
bool gcd_strip_has_ppd(const BigInt& q, unsigned n)
{
    BigInt x = pow(q, n) - 1;
    for (unsigned i = 1; i < n; ++i) {
        BigInt y = pow(q, i) - 1;
        BigInt g = gcd(x, y);
        while (g > 1) {
            x /= g;
            g = gcd(x, g);
        }
    }
    return x > 1;
}

std::vector<BigInt> bigs(std::initializer_list<unsigned long> xs)
{
    std::vector<BigInt> v;
    for (auto x : xs)
        v.emplace_back(x);
    return v;
}

} // namespace

TEST(Factor, SmallComposite)
{
    auto fm = factor(63);
    ASSERT_EQ(fm.entries.size(), 2u);
    EXPECT_EQ(fm.entries.at(3), 2u);
    EXPECT_EQ(fm.entries.at(7), 1u);
}

TEST(Factor, TwoToTwentyMinusOneMatchesTrialDivision)
{
    auto oracle = naive_factor(1048575ULL);
    auto fm = factor(1048575);
    ASSERT_EQ(fm.entries.size(), oracle.size());
    for (auto& [p, e] : oracle)
        EXPECT_EQ(fm.entries.at(BigInt(static_cast<unsigned long>(p))), e);
    EXPECT_EQ(fm.entries.at(5), 2u);
}

TEST(Factor, OneIsEmpty)
{
    auto fm = factor(1);
    EXPECT_TRUE(fm.entries.empty());
    EXPECT_EQ(fm.value, 1);
}

TEST(Factor, RemultipliesAndIsDeterministic)
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        BigInt n = BigInt(static_cast<unsigned long>(rng() >> 4)) * BigInt(static_cast<unsigned long>(rng() >> 40)) + 1;
        auto a = factor(n);
        auto b = factor(n);
        EXPECT_EQ(a.product(), n);
        EXPECT_EQ(a.entries, b.entries);
        for (auto& [p, e] : a.entries)
            EXPECT_TRUE(is_prime(p));
    }
}

TEST(Factor, RhoSplitsLargeSemiprime)
{
    BigInt p("1000000007"), q("998244353");
    auto fm = factor(p * q);
    ASSERT_EQ(fm.entries.size(), 2u);
    EXPECT_EQ(fm.entries.at(p), 1u);
}

TEST(Factor, BudgetExhaustionThrows)
{
    BigInt p("1000000000000000003"), q("1000000000000000009");
    EXPECT_THROW(factor(p * q, 10000), FactorizationTimeout);
}

TEST(Primality, AgreesWithTrialDivisionBelowOneMillion)
{
    for (unsigned long n = 0; n < 20000; ++n) {
        bool oracle = n >= 2;
        for (unsigned long d = 2; d * d <= n; ++d)
            if (n % d == 0)
                oracle = false;
        EXPECT_EQ(is_prime(BigInt(n)), oracle) << n;
    }
}

TEST(Primality, LargeKnownValues)
{
    EXPECT_TRUE(is_prime(BigInt("170141183460469231731687303715884105727"))); // 2^127-1
    EXPECT_FALSE(is_prime(BigInt("340282366920938463463374607431768211457"))); // 2^128+1
    EXPECT_TRUE(is_prime(BigInt("18446744073709551557")));                    // largest 64-bit prime
    EXPECT_FALSE(is_prime(BigInt("3825123056546413051")));                   // strong pseudoprime to 2..23
}

TEST(PrimePowerType, Decomposition)
{
    auto q = PrimePower::from_q(243);
    EXPECT_EQ(q.p, 3);
    EXPECT_EQ(q.f, 5u);
    EXPECT_FALSE(PrimePower::try_from_q(12).has_value());
    EXPECT_THROW(PrimePower::of(4, 1), PreconditionViolation);
}

TEST(PpdSet, ZsigmondyExceptions)
{
    EXPECT_TRUE(ppd_set(2, 6).empty());
    EXPECT_TRUE(ppd_set(3, 2).empty());
    EXPECT_TRUE(ppd_set(2, 1).empty());
}

TEST(PpdSet, SmallExamples)
{
    EXPECT_EQ(ppd_set(2, 4), bigs({5}));
    EXPECT_EQ(ppd_set(4, 3), bigs({7}));
}

TEST(PpdSet, MatchesDefinitionOracle)
{
    for (unsigned long q : {2ul, 3ul, 4ul, 5ul, 7ul, 8ul, 9ul, 11ul, 13ul, 16ul, 25ul, 27ul}) {
        for (unsigned n = 1; n <= 12; ++n) {
            if (ipow(q, n) > (1ULL << 50))
                continue;
            auto oracle = naive_ppds(q, n);
            auto got = ppd_set(q, n);
            std::set<unsigned long long> gs;
            for (auto& r : got)
                gs.insert(r.get_ui());
            EXPECT_EQ(gs, oracle) << "q=" << q << " n=" << n;
        }
    }
}

TEST(PpdSet, PartEmptinessMatchesGcdStripping)
{
    for (unsigned long q = 2; q <= 64; ++q) {
        if (!PrimePower::try_from_q(q))
            continue;
        for (unsigned n = 1; n <= 24; ++n)
            EXPECT_EQ(has_ppd(q, n), gcd_strip_has_ppd(q, n)) << q << " " << n;
    }
}

TEST(PpdProperties, CongruenceAndDivisibility)
{
    for (unsigned long q : {2ul, 3ul, 4ul, 5ul, 7ul, 8ul, 9ul}) {
        for (unsigned n = 2; n <= 12; ++n) {
            for (const auto& r : ppd_set(q, n)) {
                EXPECT_EQ(r % n, 1) << q << " " << n;
                for (unsigned m = 1; m <= 3 * n; ++m) {
                    bool divides = (pow(BigInt(q), m) - 1) % r == 0;
                    EXPECT_EQ(divides, m % n == 0) << q << " " << n << " " << m;
                }
            }
        }
    }
}

TEST(PpdProperties, LiftContainment)
{
    for (unsigned long b : {2ul, 3ul, 5ul, 7ul}) {
        for (unsigned c = 1; c <= 4; ++c) {
            for (unsigned n = 2; n <= 6; ++n) {
                BigInt a = pow(BigInt(b), c);
                auto small = ppd_set(b, c * n);
                auto large = ppd_set(a, n);
                for (const auto& r : small)
                    EXPECT_NE(std::find(large.begin(), large.end(), r), large.end());
            }
        }
    }
}

TEST(LiftedValuation, Examples)
{
    EXPECT_EQ(lifted_valuation(PrimePower::of(7, 1), 1, 3, 6), 2u);
    EXPECT_EQ(lifted_valuation(PrimePower::of(7, 1), 1, 2, 2), 4u);
    EXPECT_EQ(lifted_valuation(PrimePower::of(3, 1), -1, 2, 2), 1u);
    EXPECT_THROW(lifted_valuation(PrimePower::of(7, 1), 1, 5, 2), PreconditionViolation);
}

TEST(LiftedValuation, RandomizedAgainstDirectValuation)
{
    std::mt19937 rng(20240611);
    const std::vector<unsigned long> qs{2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32, 49, 64, 81, 121, 125, 127};
    int checked = 0;
    while (checked < 500) {
        unsigned long q = qs[rng() % qs.size()];
        int eps = rng() % 2 ? 1 : -1;
        unsigned n = 1 + rng() % 24;
        BigInt base = BigInt(q) - eps;
        auto primes = factor(base).primes();
        if (primes.empty())
            continue;
        BigInt r = primes[rng() % primes.size()];
        auto pp = PrimePower::from_q(q);
        BigInt direct = pow(BigInt(q), n) - eps;
        EXPECT_EQ(lifted_valuation(pp, eps, r, n), valuation(direct, r))
            << "q=" << q << " eps=" << eps << " r=" << r << " n=" << n;
        ++checked;
    }
}

TEST(LiftRelation, Examples)
{
    EXPECT_EQ(ppd_lift_relation(2, 2, 6).relation, LiftRelation::EqualI);
    auto r = ppd_lift_relation(2, 3, 4);
    EXPECT_EQ(r.relation, LiftRelation::ProperSubset);
    EXPECT_EQ(r.small_set, bigs({13}));
    EXPECT_EQ(r.large_set, bigs({5, 13}));
    EXPECT_EQ(ppd_lift_relation(2, 4, 4).relation, LiftRelation::EqualIII);
    EXPECT_EQ(ppd_lift_relation(7, 3, 2).relation, LiftRelation::EqualII);
}

TEST(LiftRelation, TagAgreesWithDirectSets)
{
    for (unsigned long b : {2ul, 3ul, 5ul, 7ul}) {
        for (unsigned c = 1; c <= 6; ++c) {
            for (unsigned n = 2; n <= 6; ++n) {
                if (std::log2(double(b)) * c * n > 60)
                    continue;
                auto rep = ppd_lift_relation(b, c, n);
                ASSERT_TRUE(rep.sets_listed);
                EXPECT_EQ(rep.sets_equal, rep.small_set == rep.large_set);
                EXPECT_EQ(rep.relation != LiftRelation::ProperSubset, rep.sets_equal);
            }
        }
    }
}

TEST(UniquePpd, Examples)
{
    auto a = unique_ppd_classify(PrimePower::of(2, 1), 8);
    EXPECT_TRUE(a.unique);
    EXPECT_EQ(a.r, 17);
    EXPECT_EQ(a.d_class, BoundClass::Exceptional);
    EXPECT_EQ(a.formula, "2nf+1");

    auto b = unique_ppd_classify(PrimePower::of(239, 1), 4);
    EXPECT_EQ(b.r, 13);
    EXPECT_EQ(b.formula, "3nf+1");

    auto c = unique_ppd_classify(PrimePower::of(23, 1), 6);
    EXPECT_EQ(c.r, 13);
    EXPECT_EQ(c.formula, "2nf+1");

    auto d = unique_ppd_classify(PrimePower::of(11, 1), 4);
    EXPECT_TRUE(d.unique);
    EXPECT_EQ(d.r, 61);
    EXPECT_EQ(d.d_class, BoundClass::GeneralBound);
}

TEST(UniquePpd, AgreesWithSetSize)
{
    for (unsigned long q = 2; q <= 40; ++q) {
        auto pp = PrimePower::try_from_q(q);
        if (!pp)
            continue;
        for (unsigned n = 2; n <= 10; ++n) {
            auto rep = unique_ppd_classify(*pp, n);
            EXPECT_EQ(rep.unique, ppd_set(q, n).size() == 1);
            if (rep.d_class == BoundClass::Exceptional || rep.d_class == BoundClass::GeneralBound)
                EXPECT_TRUE(rep.unique);
        }
    }
}

TEST(UniquePpd, OddPrimeShapeWithEvenQHasNoExceptions)
{
    for (unsigned f = 1; f <= 6; ++f) {
        for (unsigned n : {5u, 7u, 11u}) {
            auto rep = unique_ppd_classify(PrimePower::of(2, f), n);
            if (rep.unique)
                EXPECT_EQ(rep.d_class, BoundClass::GeneralBound) << n << " " << f;
        }
    }
}

TEST(UniquePpd, TwiceOddPrimeException)
{
    // P_2^{10} = {11} = 2*5*1+1.
    auto rep = unique_ppd_classify(PrimePower::of(2, 1), 10);
    EXPECT_TRUE(rep.unique);
    EXPECT_EQ(rep.r, 11);
    EXPECT_EQ(rep.d_class, BoundClass::Exceptional);
    EXPECT_EQ(rep.list_id, "2n.i");
}

TEST(UniquePpd, OpenCaseIsFlagged)
{
    auto rep = unique_ppd_classify(PrimePower::of(5, 1), 2);
    EXPECT_FALSE(rep.note.empty());
    EXPECT_NE(rep.d_class, BoundClass::Exceptional);
}

TEST(PowerPlusOne, Cases)
{
    auto a = prime_power_plus_one(2, 3);
    EXPECT_TRUE(a.prime_power);
    EXPECT_EQ(a.s, 3);
    EXPECT_EQ(a.w, 2u);
    EXPECT_EQ(a.lemma_case, 'i');

    auto b = prime_power_plus_one(2, 4);
    EXPECT_EQ(b.s, 17);
    EXPECT_EQ(b.w, 1u);
    EXPECT_EQ(b.lemma_case, 'f');

    auto c = prime_power_plus_one(7, 1);
    EXPECT_EQ(c.s, 2);
    EXPECT_EQ(c.w, 3u);
    EXPECT_EQ(c.lemma_case, 'm');

    EXPECT_FALSE(prime_power_plus_one(2, 5).prime_power);
}

TEST(PowerPlusOne, EverySolutionIsClassified)
{
    for (unsigned long r : {2ul, 3ul, 5ul, 7ul, 11ul, 13ul, 31ul, 127ul}) {
        for (unsigned v = 1; v <= 20; ++v) {
            auto res = prime_power_plus_one(r, v);
            if (res.prime_power) {
                EXPECT_NE(res.lemma_case, 0) << r << "^" << v;
                EXPECT_EQ(pow(res.s, res.w), pow(BigInt(r), v) + 1);
            }
        }
    }
}

TEST(Repunit, Examples)
{
    auto a = repunit_power_check(3, 5);
    EXPECT_TRUE(a.perfect_power);
    EXPECT_EQ(a.y, 11);
    EXPECT_EQ(a.b, 2u);
    EXPECT_TRUE(a.exceptional);

    auto b = repunit_power_check(18, 3);
    EXPECT_EQ(b.y, 7);
    EXPECT_EQ(b.b, 3u);
    EXPECT_TRUE(b.exceptional);

    EXPECT_FALSE(repunit_power_check(2, 5).perfect_power);
}

TEST(Repunit, NegativeBase)
{
    auto a = repunit_power_check(-19, 3);
    EXPECT_EQ(a.value, 343);
    EXPECT_TRUE(a.perfect_power);
    EXPECT_EQ(a.y, 7);
    EXPECT_TRUE(a.exceptional);
    auto b = repunit_power_check(7, 4);
    EXPECT_EQ(b.y, 20);
    EXPECT_TRUE(b.exceptional);
}

TEST(Congruence, MatchesEnumeration)
{
    for (long a = -8; a <= 8; ++a) {
        if (a == 0)
            continue;
        for (long c = 1; c <= 12; ++c) {
            for (long b = -5; b <= 5; ++b) {
                long count = 0;
                for (long x = 0; x < c; ++x)
                    if (((a * x - b) % c + c) % c == 0)
                        ++count;
                EXPECT_EQ(congruence_solution_count(a, b, c), count) << a << " " << b << " " << c;
            }
        }
    }
    EXPECT_EQ(congruence_solution_count(4, 2, 6), 2);
    EXPECT_EQ(congruence_solution_count(4, 3, 6), 0);
    EXPECT_EQ(congruence_solution_count(1, 0, 5), 1);
}

TEST(CaseISearch, SmallRangesAndGates)
{
    auto a = case_i_search(5, 1);
    EXPECT_TRUE(a.survivors.empty());
    ASSERT_EQ(a.candidates.size(), 1u);
    EXPECT_EQ(a.candidates[0].outcome, CaseIGate::NotDividingQPlus1);

    auto b = case_i_search(5, 2);
    ASSERT_EQ(b.candidates.size(), 2u);
    EXPECT_EQ(b.candidates[1].f, 2u);
    EXPECT_EQ(b.candidates[1].outcome, CaseIGate::RNotPrime);
}

TEST(CaseISearch, ExponentShape)
{
    EXPECT_EQ(case_i_exponents(5, 20), (std::vector<unsigned>{1, 2, 4, 5, 8, 10, 16, 20}));
}

TEST(TwoLargePrimes, Examples)
{
    auto a = two_large_primes(12, PrimePower::of(2, 1));
    ASSERT_TRUE(a.has_value());
    EXPECT_EQ(a->first, 17);
    EXPECT_EQ(a->second, 31);
    EXPECT_FALSE(two_large_primes(7, PrimePower::of(2, 1)).has_value());
}

TEST(TwoLargePrimes, ExceptionsAndPairValidity)
{
    const std::set<std::pair<unsigned, unsigned long>> none{{10, 2}, {9, 2}, {8, 3}, {8, 2}, {7, 3}, {7, 2}};
    for (unsigned long q : {2ul, 3ul, 4ul, 5ul, 7ul, 8ul, 9ul}) {
        for (unsigned n = 7; n <= 26; ++n) {
            auto res = two_large_primes(n, PrimePower::from_q(q));
            EXPECT_EQ(res.has_value(), none.count({n, q}) == 0) << n << " " << q;
            if (!res)
                continue;
            BigInt prod = 1;
            for (unsigned i = 1; i <= (n - 1) / 2; ++i)
                prod *= pow(BigInt(q), 2 * i) - 1;
            for (const auto& r : {res->first, res->second}) {
                EXPECT_TRUE(is_prime(r));
                EXPECT_GT(r, n + 2);
                EXPECT_EQ(prod % r, 0);
            }
            EXPECT_NE(res->first, res->second);
        }
    }
}
