#include "elusive/numth.hpp"

#include "elusive/errors.hpp"

#include <algorithm>
#include <array>
#include <mutex>
#include <numeric>
#include <set>

namespace elusive::numth {

namespace {

constexpr unsigned long kTrialLimit = 1'000'000;

const std::vector<unsigned long>& small_primes()
{
    static const std::vector<unsigned long> primes = [] {
        std::vector<bool> sieve(kTrialLimit + 1, true);
        std::vector<unsigned long> out;
        for (unsigned long i = 2; i <= kTrialLimit; ++i) {
            if (!sieve[i])
                continue;
            out.push_back(i);
            for (unsigned long j = i * i; j <= kTrialLimit; j += i)
                sieve[j] = false;
        }
        return out;
    }();
    return primes;
}

bool miller_rabin_round(const BigInt& n, const BigInt& a, const BigInt& d, unsigned s)
{
    BigInt x;
    mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
    const BigInt nm1 = n - 1;
    if (x == 1 || x == nm1)
        return true;
    for (unsigned i = 1; i < s; ++i) {
        x = x * x % n;
        if (x == nm1)
            return true;
        if (x == 1)
            return false;
    }
    return false;
}

void add_factor(FactorMap& fm, const BigInt& p, unsigned e)
{
    fm.entries[p] += e;
}

// Brent's variant of Pollard rho; returns a nontrivial divisor of composite n.
BigInt brent_rho(const BigInt& n, Budget& budget)
{
    if (n % 2 == 0)
        return 2;
    constexpr unsigned long batch = 128;
    for (unsigned long c = 1;; ++c) {
        BigInt y = 2, x, ys, q = 1, g = 1;
        unsigned long r = 1;
        while (g == 1) {
            x = y;
            for (unsigned long i = 0; i < r; ++i)
                y = (y * y + c) % n;
            unsigned long k = 0;
            while (k < r && g == 1) {
                ys = y;
                unsigned long lim = std::min(batch, r - k);
                for (unsigned long i = 0; i < lim; ++i) {
                    y = (y * y + c) % n;
                    q = q * abs(x - y) % n;
                }
                budget.spend(lim);
                g = gcd(q, n);
                k += lim;
            }
            r *= 2;
        }
        if (g == n) {
            do {
                ys = (ys * ys + c) % n;
                g = gcd(abs(x - ys), n);
                budget.spend(1);
            } while (g == 1);
        }
        if (g != n)
            return g;
    }
}

void split_composite(const BigInt& n, FactorMap& fm, Budget& budget)
{
    if (n == 1)
        return;
    if (is_prime(n)) {
        add_factor(fm, n, 1);
        return;
    }
    BigInt root;
    for (unsigned k = 2; k < 64; ++k) {
        if (mpz_root(root.get_mpz_t(), n.get_mpz_t(), k) != 0) {
            FactorMap sub;
            split_composite(root, sub, budget);
            for (auto& [p, e] : sub.entries)
                add_factor(fm, p, e * k);
            return;
        }
        if (root < 2)
            break;
    }
    BigInt d = brent_rho(n, budget);
    split_composite(d, fm, budget);
    split_composite(BigInt(n / d), fm, budget);
}

// Trial division by the progression 1 + step*k (step >= 2), then rho.
FactorMap factor_progression(const BigInt& n, unsigned long step, Budget& budget)
{
    FactorMap fm;
    fm.value = n;
    BigInt m = n;
    for (unsigned long d = step + 1; d <= kTrialLimit; d += step) {
        budget.spend(1);
        if (BigInt(d) * d > m)
            break;
        if (mpz_divisible_ui_p(m.get_mpz_t(), d)) {
            unsigned e = 0;
            while (mpz_divisible_ui_p(m.get_mpz_t(), d)) {
                mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), d);
                ++e;
            }
            // d is prime here: smaller prime factors of d would be 1 mod step too.
            add_factor(fm, d, e);
        }
    }
    FactorMap rest;
    split_composite(m, rest, budget);
    for (auto& [p, e] : rest.entries)
        add_factor(fm, p, e);
    return fm;
}

std::vector<unsigned> divisors(unsigned n)
{
    std::vector<unsigned> out;
    for (unsigned d = 1; d <= n; ++d)
        if (n % d == 0)
            out.push_back(d);
    return out;
}

int moebius(unsigned n)
{
    int mu = 1;
    for (unsigned p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            n /= p;
            if (n % p == 0)
                return 0;
            mu = -mu;
        }
    }
    if (n > 1)
        mu = -mu;
    return mu;
}

std::vector<unsigned> prime_support(unsigned n)
{
    std::vector<unsigned> out;
    for (unsigned p = 2; p * p <= n; ++p) {
        if (n % p == 0) {
            out.push_back(p);
            while (n % p == 0)
                n /= p;
        }
    }
    if (n > 1)
        out.push_back(n);
    return out;
}

bool is_power_of_two(const BigInt& x)
{
    return x > 0 && mpz_popcount(x.get_mpz_t()) == 1;
}

} // namespace

std::string to_string(const BigInt& x)
{
    return x.get_str();
}

BigInt pow(const BigInt& base, unsigned long e)
{
    BigInt out;
    mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), e);
    return out;
}

PrimePower PrimePower::of(const BigInt& p, unsigned f)
{
    if (f == 0 || !is_prime(p))
        throw PreconditionViolation("PrimePower requires a prime p and f >= 1");
    return PrimePower{p, f, pow(p, f)};
}

std::optional<PrimePower> PrimePower::try_from_q(const BigInt& q)
{
    if (q < 2)
        return std::nullopt;
    if (is_prime(q))
        return PrimePower{q, 1, q};
    BigInt root;
    const auto bits = mpz_sizeinbase(q.get_mpz_t(), 2);
    for (unsigned k = static_cast<unsigned>(bits); k >= 2; --k) {
        if (mpz_root(root.get_mpz_t(), q.get_mpz_t(), k) != 0 && is_prime(root))
            return PrimePower{root, k, q};
    }
    return std::nullopt;
}

PrimePower PrimePower::from_q(const BigInt& q)
{
    auto pp = try_from_q(q);
    if (!pp)
        throw PreconditionViolation("not a prime power: " + q.get_str());
    return *pp;
}

bool is_prime(const BigInt& n)
{
    if (n < 2)
        return false;
    static constexpr std::array<unsigned, 12> witnesses{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (unsigned p : witnesses) {
        if (n == p)
            return true;
        if (mpz_divisible_ui_p(n.get_mpz_t(), p))
            return false;
    }
    BigInt d = n - 1;
    unsigned s = 0;
    while (d % 2 == 0) {
        d /= 2;
        ++s;
    }
    if (mpz_sizeinbase(n.get_mpz_t(), 2) <= 64) {
        for (unsigned a : witnesses)
            if (!miller_rabin_round(n, a, d, s))
                return false;
        return true;
    }
    static std::mutex rng_mutex;
    std::lock_guard<std::mutex> lock(rng_mutex);
    gmp_randclass rng(gmp_randinit_default);
    rng.seed(0x5eedULL);
    const BigInt span = n - 3;
    for (int round = 0; round < 40; ++round) {
        BigInt a = rng.get_z_range(span) + 2;
        if (!miller_rabin_round(n, a, d, s))
            return false;
    }
    return true;
}

void Budget::spend(std::uint64_t steps)
{
    used_ += steps;
    if (used_ > limit_)
        throw FactorizationTimeout("factorization budget of " + std::to_string(limit_) +
                                   " steps exhausted");
}

BigInt FactorMap::product() const
{
    BigInt out = 1;
    for (auto& [p, e] : entries)
        out *= pow(p, e);
    return out;
}

std::vector<BigInt> FactorMap::primes() const
{
    std::vector<BigInt> out;
    for (auto& [p, e] : entries)
        out.push_back(p);
    return out;
}

FactorMap factor(const BigInt& n, std::uint64_t budget)
{
    Budget b(budget);
    return factor(n, b);
}

FactorMap factor(const BigInt& n, Budget& budget)
{
    if (n < 1)
        throw PreconditionViolation("factor requires N >= 1");
    FactorMap fm;
    fm.value = n;
    BigInt m = n;
    for (unsigned long p : small_primes()) {
        budget.spend(1);
        if (BigInt(p) * p > m)
            break;
        if (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
            unsigned e = 0;
            while (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
                mpz_divexact_ui(m.get_mpz_t(), m.get_mpz_t(), p);
                ++e;
            }
            add_factor(fm, p, e);
        }
    }
    split_composite(m, fm, budget);
    return fm;
}

unsigned valuation(const BigInt& n, const BigInt& r)
{
    if (n == 0)
        throw PreconditionViolation("valuation of zero");
    BigInt rest;
    return static_cast<unsigned>(mpz_remove(rest.get_mpz_t(), n.get_mpz_t(), r.get_mpz_t()));
}

BigInt r_part(const BigInt& n, const BigInt& r)
{
    return pow(r, valuation(n, r));
}

BigInt cyclotomic_value(const BigInt& q, unsigned n)
{
    if (n == 0)
        throw PreconditionViolation("cyclotomic index must be positive");
    BigInt num = 1, den = 1;
    for (unsigned d : divisors(n)) {
        int mu = moebius(n / d);
        if (mu == 1)
            num *= pow(q, d) - 1;
        else if (mu == -1)
            den *= pow(q, d) - 1;
    }
    BigInt out;
    mpz_divexact(out.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return out;
}

BigInt ppd_part(const BigInt& q, unsigned n)
{
    if (q < 2 || n == 0)
        throw PreconditionViolation("ppd_part requires q >= 2 and n >= 1");
    if (n == 1)
        return q - 1;
    BigInt v = cyclotomic_value(q, n);
    for (unsigned p : prime_support(n)) {
        BigInt pp = p;
        mpz_remove(v.get_mpz_t(), v.get_mpz_t(), pp.get_mpz_t());
    }
    return v;
}

bool has_ppd(const BigInt& q, unsigned n)
{
    return ppd_part(q, n) > 1;
}

std::vector<BigInt> ppd_set(const BigInt& q, unsigned n, std::uint64_t budget)
{
    Budget b(budget);
    return ppd_set(q, n, b);
}

std::vector<BigInt> ppd_set(const BigInt& q, unsigned n, Budget& budget)
{
    BigInt part = ppd_part(q, n);
    FactorMap fm = n >= 2 ? factor_progression(part, n, budget) : factor(part, budget);
    return fm.primes();
}

unsigned long mult_order(const BigInt& a, const BigInt& m)
{
    if (m < 2 || gcd(a, m) != 1)
        throw PreconditionViolation("mult_order requires gcd(a, m) = 1 and m >= 2");
    BigInt x = a % m;
    if (x < 0)
        x += m;
    unsigned long k = 1;
    BigInt y = x;
    while (y != 1) {
        y = y * x % m;
        ++k;
    }
    return k;
}

unsigned lifted_valuation(const PrimePower& q, int eps, const BigInt& r, unsigned n)
{
    if ((eps != 1 && eps != -1) || n == 0)
        throw PreconditionViolation("lifted_valuation requires eps = +-1 and n >= 1");
    const BigInt base = q.q - eps;
    if (!is_prime(r) || base % r != 0)
        throw PreconditionViolation("r must be a prime dividing q - eps");
    const bool n_odd = n % 2 == 1;
    if (n_odd || (r != 2 && eps == 1))
        return valuation(base, r) + valuation(BigInt(n), r);
    if (eps == 1) // n even, r = 2
        return valuation(q.q * q.q - 1, 2) + valuation(BigInt(n), 2) - 1;
    return r == 2 ? 1 : 0; // n even, eps = -1
}

std::string to_string(LiftRelation rel)
{
    switch (rel) {
    case LiftRelation::EqualI: return "Equal(i)";
    case LiftRelation::EqualII: return "Equal(ii)";
    case LiftRelation::EqualIII: return "Equal(iii)";
    case LiftRelation::ProperSubset: return "ProperSubset";
    }
    return "?";
}

LiftReport ppd_lift_relation(const BigInt& b, unsigned c, unsigned n, std::uint64_t budget)
{
    if (b < 2 || c == 0 || n < 2)
        throw PreconditionViolation("ppd_lift_relation requires b >= 2, c >= 1, n >= 2");
    const BigInt a = pow(b, c);
    LiftReport rep;
    rep.sets_equal = ppd_part(b, c * n) == ppd_part(a, n);

    std::optional<LiftRelation> tag;
    const bool c_prime = is_prime(BigInt(c));
    const bool b_mersenne = is_prime(b) && is_power_of_two(b + 1);
    const auto cs = prime_support(c);
    const auto ns = prime_support(n);
    const bool support_ok = std::all_of(cs.begin(), cs.end(), [&](unsigned s) {
        return std::find(ns.begin(), ns.end(), s) != ns.end();
    });
    if (n == 6 && b == 2 && c_prime)
        tag = LiftRelation::EqualI;
    else if (n == 2 && c_prime && b_mersenne)
        tag = LiftRelation::EqualII;
    else if (support_ok)
        tag = LiftRelation::EqualIII;

    if (tag.has_value() != rep.sets_equal)
        throw PreconditionViolation("direct ppd comparison disagrees with the equality cases for b=" +
                                    b.get_str() + " c=" + std::to_string(c) +
                                    " n=" + std::to_string(n));
    rep.relation = tag.value_or(LiftRelation::ProperSubset);
    try {
        Budget bud(budget);
        rep.small_set = ppd_set(b, c * n, bud);
        rep.large_set = ppd_set(a, n, bud);
        rep.sets_listed = true;
    } catch (const FactorizationTimeout&) {
        rep.small_set.clear();
        rep.large_set.clear();
    }
    return rep;
}

std::string to_string(BoundClass c)
{
    switch (c) {
    case BoundClass::GeneralBound: return "GeneralBound";
    case BoundClass::Exceptional: return "Exceptional";
    case BoundClass::Inapplicable: return "Inapplicable";
    }
    return "?";
}

const std::vector<ExceptionalPair>& exceptional_pairs_pow2()
{
    static const std::vector<ExceptionalPair> v{
        {4, 2, 1, "2^a.i"},  {4, 3, 1, "2^a.i"}, {4, 7, 1, "2^a.i"},     {4, 4, 2, "2^a.ii"},
        {8, 2, 2, "2^a.ii"}, {4, 5, 3, "2^a.iii"}, {4, 239, 3, "2^a.iii"},
    };
    return v;
}

const std::vector<ExceptionalPair>& exceptional_pairs_pow2_times3()
{
    static const std::vector<ExceptionalPair> v{
        {3, 4, 1, "2^a3.i"},  {6, 3, 1, "2^a3.i"},  {6, 4, 1, "2^a3.i"},
        {6, 5, 1, "2^a3.i"},  {6, 8, 1, "2^a3.i"},  {6, 19, 1, "2^a3.i"},
        {12, 2, 1, "2^a3.i"}, {3, 2, 2, "2^a3.ii"}, {6, 23, 2, "2^a3.ii"},
    };
    return v;
}

PpdReport unique_ppd_classify(const PrimePower& q, unsigned n, std::uint64_t budget)
{
    PpdReport rep;
    rep.q = q;
    rep.n = n;
    rep.ppds = ppd_set(q.q, n, budget);
    rep.unique = rep.ppds.size() == 1;
    if (n == 2 && q.p != 2)
        rep.note = "n=2 with q odd: unique-ppd Diophantine problem is open; partial constraints only";
    if (!rep.unique)
        return rep;
    rep.r = rep.ppds.front();
    const BigInt bound = BigInt(4) * n * q.f + 1;
    if (rep.r >= bound) {
        rep.d_class = BoundClass::GeneralBound;
        return rep;
    }
    const unsigned long qv = q.q.fits_ulong_p() ? q.q.get_ui() : 0;
    auto match = [&](const std::vector<ExceptionalPair>& list) {
        for (const auto& e : list) {
            if (e.n == n && e.q == qv && rep.r == BigInt(e.k) * n * q.f + 1) {
                rep.d_class = BoundClass::Exceptional;
                rep.list_id = e.list_id;
                rep.formula = e.k == 1 ? "nf+1" : std::to_string(e.k) + "nf+1";
                return true;
            }
        }
        return false;
    };
    if (match(exceptional_pairs_pow2()) || match(exceptional_pairs_pow2_times3()))
        return rep;
    // 2m with m an odd prime >= 5 and q even: r = 2mf+1 allowed when (m,q)=(5,2) or m | q+1.
    if (q.p == 2 && n % 2 == 0 && n / 2 >= 5 && is_prime(BigInt(n / 2))) {
        const unsigned m = n / 2;
        const bool cond = (m == 5 && q.q == 2) || (q.q + 1) % m == 0;
        if (cond && rep.r == BigInt(2) * m * q.f + 1) {
            rep.d_class = BoundClass::Exceptional;
            rep.list_id = "2n.i";
            rep.formula = "2nf+1";
            return rep;
        }
    }
    if (rep.note.empty())
        rep.note = "unique ppd below 4nf+1 outside the classified shapes";
    return rep;
}

PowerPlusOne prime_power_plus_one(const BigInt& r, unsigned v)
{
    if (!is_prime(r) || v == 0)
        throw PreconditionViolation("prime_power_plus_one requires prime r and v >= 1");
    PowerPlusOne out;
    const BigInt n = pow(r, v) + 1;
    const auto bits = static_cast<unsigned>(mpz_sizeinbase(n.get_mpz_t(), 2));
    BigInt root;
    for (unsigned w = bits; w >= 1; --w) {
        if (mpz_root(root.get_mpz_t(), n.get_mpz_t(), w) != 0 && is_prime(root)) {
            out.prime_power = true;
            out.s = root;
            out.w = w;
            break;
        }
    }
    if (!out.prime_power)
        return out;
    if (r == 2 && out.s == 3 && v == 3 && out.w == 2)
        out.lemma_case = 'i';
    else if (r == 2 && out.w == 1)
        out.lemma_case = 'f';
    else if (out.s == 2 && v == 1)
        out.lemma_case = 'm';
    return out;
}

RepunitPower repunit_power_check(const BigInt& x, unsigned a)
{
    if (abs(x) <= 1 || a <= 2)
        throw PreconditionViolation("repunit_power_check requires |x| > 1 and a > 2");
    RepunitPower out;
    BigInt num = pow(x, a) - 1;
    BigInt den = x - 1;
    mpz_divexact(out.value.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    const BigInt mag = abs(out.value);
    if (mag <= 1)
        return out;
    const auto bits = static_cast<unsigned>(mpz_sizeinbase(mag.get_mpz_t(), 2));
    BigInt root;
    for (unsigned b = bits; b >= 2; --b) {
        if (out.value < 0 && b % 2 == 0)
            continue;
        if (mpz_root(root.get_mpz_t(), mag.get_mpz_t(), b) != 0 && root > 1) {
            out.perfect_power = true;
            out.b = b;
            out.y = out.value < 0 ? BigInt(-root) : root;
            break;
        }
    }
    if (out.perfect_power) {
        struct Quad {
            long x, y;
            unsigned a, b;
        };
        static constexpr Quad known[] = {{3, 11, 5, 2}, {7, 20, 4, 2}, {18, 7, 3, 3}, {-19, 7, 3, 3}};
        for (const auto& k : known)
            if (x == k.x && out.y == k.y && a == k.a && out.b == k.b)
                out.exceptional = true;
    }
    return out;
}

BigInt congruence_solution_count(const BigInt& a, const BigInt& b, const BigInt& c)
{
    if (a == 0 || c == 0)
        throw PreconditionViolation("congruence requires nonzero a and c");
    BigInt d = gcd(a, c);
    return b % d == 0 ? d : BigInt(0);
}

std::string to_string(CaseIGate g)
{
    switch (g) {
    case CaseIGate::NotDividingQPlus1: return "n does not divide q+1";
    case CaseIGate::RNotPrime: return "r=2nf+1 not prime";
    case CaseIGate::QuotientNotPower: return "(q^n+1)/(q+1) is not (n,q+1) r^l";
    case CaseIGate::Survived: return "survived";
    }
    return "?";
}

std::vector<unsigned> case_i_exponents(unsigned n, unsigned f_max)
{
    std::vector<unsigned> out;
    for (unsigned long p2 = 1; p2 <= f_max; p2 *= 2)
        for (unsigned long f = p2; f <= f_max; f *= n)
            out.push_back(static_cast<unsigned>(f));
    std::sort(out.begin(), out.end());
    return out;
}

CaseIResult case_i_search(unsigned n_max, unsigned f_max)
{
    CaseIResult res;
    for (unsigned n = 5; n <= n_max; n += 2) {
        if (!is_prime(BigInt(n)))
            continue;
        for (unsigned f : case_i_exponents(n, f_max)) {
            CaseICandidate cand{n, f, CaseIGate::Survived, 0};
            const BigInt q = pow(BigInt(2), f);
            const BigInt r = BigInt(2) * n * f + 1;
            if ((q + 1) % n != 0) {
                cand.outcome = CaseIGate::NotDividingQPlus1;
            } else if (!is_prime(r)) {
                cand.outcome = CaseIGate::RNotPrime;
            } else {
                BigInt v = (pow(q, n) + 1) / (q + 1);
                const BigInt g = gcd(BigInt(n), q + 1);
                if (v % g != 0) {
                    cand.outcome = CaseIGate::QuotientNotPower;
                } else {
                    v /= g;
                    cand.l = static_cast<unsigned>(mpz_remove(v.get_mpz_t(), v.get_mpz_t(), r.get_mpz_t()));
                    if (v != 1)
                        cand.outcome = CaseIGate::QuotientNotPower;
                }
            }
            if (cand.outcome == CaseIGate::Survived)
                res.survivors.emplace_back(n, f);
            res.candidates.push_back(cand);
        }
    }
    return res;
}

std::optional<std::pair<BigInt, BigInt>> two_large_primes(unsigned n, const PrimePower& q,
                                                          std::uint64_t budget)
{
    if (n < 7)
        throw PreconditionViolation("two_large_primes requires n >= 7");
    const unsigned m = (n - 2 + 1) / 2;
    std::set<unsigned> exps;
    for (unsigned i = 1; i <= m; ++i)
        for (unsigned j : divisors(2 * i))
            exps.insert(j);
    const BigInt floor_prime = n + 2;
    Budget bud(budget);
    std::set<BigInt> found;
    std::vector<BigInt> leftovers;
    // Trial division finds every prime below the trial limit, so small hits are the true minima.
    for (unsigned j : exps) {
        BigInt part = ppd_part(q.q, j);
        const unsigned long step = j >= 2 ? j : 1;
        for (unsigned long d = step + 1; d <= kTrialLimit && part > 1; d += step) {
            bud.spend(1);
            if (BigInt(d) * d > part) {
                if (part > floor_prime)
                    found.insert(part);
                part = 1;
                break;
            }
            if (mpz_divisible_ui_p(part.get_mpz_t(), d)) {
                if (j == 1 && !is_prime(BigInt(d)))
                    continue;
                while (mpz_divisible_ui_p(part.get_mpz_t(), d))
                    mpz_divexact_ui(part.get_mpz_t(), part.get_mpz_t(), d);
                if (d > floor_prime)
                    found.insert(BigInt(d));
            }
        }
        if (part > 1)
            leftovers.push_back(part);
    }
    auto small = std::count_if(found.begin(), found.end(), [](const BigInt& x) { return x <= kTrialLimit; });
    if (small < 2) {
        for (const auto& rest : leftovers)
            for (const auto& p : factor(rest, bud).primes())
                if (p > floor_prime)
                    found.insert(p);
    }
    if (found.size() < 2)
        return std::nullopt;
    auto it = found.begin();
    BigInt r = *it++;
    return std::make_pair(r, *it);
}

} // namespace elusive::numth
