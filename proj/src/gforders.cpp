#include "elusive/gforders.hpp"

#include "elusive/errors.hpp"

#include <algorithm>
#include <mutex>
#include <regex>
#include <sstream>

namespace elusive::gf {

using numth::pow;

// ---------------------------------------------------------------- Factored

Factored Factored::of(const BigInt& n)
{
    if (n < 1) throw PreconditionViolation("Factored::of needs a positive integer");
    Factored r;
    for (const auto& [p, e] : numth::factor(n).entries) r.e_[p] += e;
    return r;
}

Factored Factored::prime_power(const BigInt& p, long e)
{
    Factored r;
    if (e != 0) r.e_[p] = e;
    return r;
}

Factored& Factored::operator*=(const Factored& o)
{
    for (const auto& [p, e] : o.e_) {
        long& x = e_[p];
        x += e;
        if (x == 0) e_.erase(p);
    }
    return *this;
}

Factored& Factored::operator/=(const Factored& o)
{
    for (const auto& [p, e] : o.e_) {
        long& x = e_[p];
        x -= e;
        if (x == 0) e_.erase(p);
    }
    return *this;
}

Factored Factored::pow(unsigned k) const
{
    Factored r;
    if (k == 0) return r;
    for (const auto& [p, e] : e_) r.e_[p] = e * static_cast<long>(k);
    return r;
}

bool Factored::integral() const
{
    return std::all_of(e_.begin(), e_.end(), [](const auto& kv) { return kv.second >= 0; });
}

BigInt Factored::value() const
{
    if (!integral()) throw PreconditionViolation("Factored value is not an integer");
    BigInt v = 1;
    for (const auto& [p, e] : e_) v *= numth::pow(p, static_cast<unsigned long>(e));
    return v;
}

std::vector<BigInt> Factored::primes() const
{
    std::vector<BigInt> out;
    for (const auto& [p, e] : e_)
        if (e > 0) out.push_back(p);
    return out;
}

Factored operator*(Factored a, const Factored& b) { return a *= b; }
Factored operator/(Factored a, const Factored& b) { return a /= b; }

// ---------------------------------------------------------------- names

std::string to_string(Family f)
{
    switch (f) {
    case Family::Linear: return "L";
    case Family::Unitary: return "U";
    case Family::Symplectic: return "S";
    case Family::OrthogonalPlus: return "O+";
    case Family::OrthogonalMinus: return "O-";
    case Family::OrthogonalOdd: return "O";
    }
    return "?";
}

Family family_from_string(std::string_view s)
{
    if (s == "L") return Family::Linear;
    if (s == "U") return Family::Unitary;
    if (s == "S") return Family::Symplectic;
    if (s == "O+") return Family::OrthogonalPlus;
    if (s == "O-") return Family::OrthogonalMinus;
    if (s == "O") return Family::OrthogonalOdd;
    throw InvalidParameters("unknown family tag '" + std::string(s) + "' (use L, U, S, O+, O-, O)");
}

std::string to_string(AschClass c)
{
    static const char* names[] = {"C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "N", "S"};
    return names[static_cast<int>(c)];
}

AschClass asch_class_from_string(std::string_view s)
{
    for (int i = 0; i <= static_cast<int>(AschClass::S); ++i) {
        auto c = static_cast<AschClass>(i);
        if (to_string(c) == s) return c;
    }
    throw InvalidParameters("unknown Aschbacher class '" + std::string(s) + "'");
}

std::string to_string(OrderMode m) { return m == OrderMode::Exact ? "Exact" : "DividesBound"; }

std::string to_string(VerdictTag t)
{
    switch (t) {
    case VerdictTag::EqualPi: return "EqualPi";
    case VerdictTag::DiffOne: return "DiffOne";
    case VerdictTag::DiffAtLeastTwo: return "DiffAtLeastTwo";
    case VerdictTag::Inconclusive: return "Inconclusive";
    }
    return "?";
}

std::string ScreenVerdict::to_string() const
{
    std::string s = gf::to_string(tag);
    if (tag == VerdictTag::DiffOne || tag == VerdictTag::DiffAtLeastTwo) {
        s += "(";
        for (std::size_t i = 0; i < missing.size(); ++i) {
            if (i) s += ",";
            s += numth::to_string(missing[i]);
        }
        s += ")";
    }
    return s;
}

// ---------------------------------------------------------------- GroupId

namespace {

bool excluded_duplicate(Family f, unsigned n, unsigned long q)
{
    if (f == Family::Linear) return (n == 3 && q == 2) || (n == 4 && q == 2);
    if (f == Family::Symplectic) return n == 4 && (q == 2 || q == 3);
    return false;
}

} // namespace

GroupId GroupId::make(Family family, unsigned n, const PrimePower& q, bool restricted)
{
    const bool q_big = q.q > 1000000;
    const unsigned long qv = q_big ? 0 : q.q_ul();
    auto bad = [&](const std::string& why) {
        throw InvalidParameters(to_string(family) + ":" + std::to_string(n) + ":" + numth::to_string(q.q) +
                                ": " + why);
    };
    switch (family) {
    case Family::Linear:
        if (n < 2 || (n == 2 && !q_big && qv < 4)) bad("needs n >= 2, and q >= 4 when n = 2");
        if (restricted && n < 3) bad("restricted mode needs n >= 3");
        break;
    case Family::Unitary:
        if (n < 3 || (n == 3 && qv == 2)) bad("needs n >= 3 and (n,q) != (3,2)");
        if (restricted && n < 4) bad("restricted mode needs n >= 4");
        break;
    case Family::Symplectic:
        if (n < 4 || n % 2) bad("needs even n >= 4");
        if (n == 4 && qv == 2 && !restricted) bad("PSp4(2) is not simple");
        break;
    case Family::OrthogonalOdd:
        if (n < 5 || n % 2 == 0) bad("needs odd n >= 5");
        if (restricted && (n < 7 || q.p == 2)) bad("restricted mode needs n >= 7 and q odd");
        break;
    case Family::OrthogonalPlus:
    case Family::OrthogonalMinus:
        if (n < 6 || n % 2) bad("needs even n >= 6");
        if (restricted && n < 7) bad("restricted mode needs n >= 7");
        break;
    }
    if (restricted && !q_big && excluded_duplicate(family, n, qv)) bad("excluded duplicate in restricted mode");
    GroupId g;
    g.family = family;
    g.n = n;
    g.q = q;
    return g;
}

GroupId GroupId::parse(std::string_view s, bool restricted)
{
    std::string str(s);
    auto a = str.find(':');
    auto b = a == std::string::npos ? a : str.find(':', a + 1);
    if (b == std::string::npos) throw InvalidParameters("group id must look like FAMILY:n:q, got '" + str + "'");
    Family f = family_from_string(str.substr(0, a));
    unsigned n = 0;
    BigInt q;
    try {
        n = static_cast<unsigned>(std::stoul(str.substr(a + 1, b - a - 1)));
        q = BigInt(str.substr(b + 1));
    } catch (const std::exception&) {
        throw InvalidParameters("group id must look like FAMILY:n:q, got '" + str + "'");
    }
    auto pq = PrimePower::try_from_q(q);
    if (!pq) throw InvalidParameters("q = " + numth::to_string(q) + " is not a prime power");
    return make(f, n, *pq, restricted);
}

int GroupId::eps() const
{
    if (family == Family::OrthogonalPlus) return 1;
    if (family == Family::OrthogonalMinus) return -1;
    return 0;
}

std::string GroupId::name() const
{
    const std::string nn = std::to_string(n), qq = numth::to_string(q.q);
    switch (family) {
    case Family::Linear: return "L" + nn + "(" + qq + ")";
    case Family::Unitary: return "U" + nn + "(" + qq + ")";
    case Family::Symplectic: return "PSp" + nn + "(" + qq + ")";
    case Family::OrthogonalPlus: return "POmega" + nn + "+(" + qq + ")";
    case Family::OrthogonalMinus: return "POmega" + nn + "-(" + qq + ")";
    case Family::OrthogonalOdd: return "Omega" + nn + "(" + qq + ")";
    }
    return "?";
}

std::string GroupId::key() const { return to_string(family) + ":" + std::to_string(n) + ":" + numth::to_string(q.q); }

// ---------------------------------------------------------------- order building blocks

namespace {

Factored cyclotomic_factored(const BigInt& q, unsigned d)
{
    static std::mutex mu;
    static std::map<std::pair<BigInt, unsigned>, Factored> cache;
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find({q, d});
        if (it != cache.end()) return it->second;
    }
    Factored f = Factored::of(numth::cyclotomic_value(q, d));
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(std::make_pair(q, d), f);
    return f;
}

std::vector<unsigned> divisors_of(unsigned n)
{
    std::vector<unsigned> d;
    for (unsigned i = 1; i <= n; ++i)
        if (n % i == 0) d.push_back(i);
    return d;
}

/** q^i - 1 for i >= 1. */
Factored qm(const BigInt& q, unsigned i)
{
    Factored r;
    for (unsigned d : divisors_of(i)) r *= cyclotomic_factored(q, d);
    return r;
}

/** q^i + 1 for i >= 0. */
Factored qp(const BigInt& q, unsigned i)
{
    if (i == 0) return Factored::prime_power(2, 1);
    Factored r;
    for (unsigned d : divisors_of(2 * i))
        if (i % d != 0) r *= cyclotomic_factored(q, d);
    return r;
}

/** q^i - eps. */
Factored qe(const BigInt& q, unsigned i, int eps) { return eps > 0 ? qm(q, i) : qp(q, i); }

Factored small(const BigInt& n) { return Factored::of(n); }

Factored qpow(const PrimePower& q, unsigned long e) { return Factored::prime_power(q.p, static_cast<long>(q.f * e)); }

PrimePower field_power(const PrimePower& q, unsigned k) { return PrimePower::of(q.p, q.f * k); }

PrimePower field_root(const PrimePower& q, unsigned k)
{
    if (k == 0 || q.f % k) throw UnsupportedSubgroupType("subfield q^(1/" + std::to_string(k) + ") does not exist");
    return PrimePower::of(q.p, q.f / k);
}

Factored gl(unsigned n, const PrimePower& q)
{
    Factored r = qpow(q, n * (n - 1) / 2);
    for (unsigned i = 1; i <= n; ++i) r *= qm(q.q, i);
    return r;
}

Factored gu(unsigned n, const PrimePower& q)
{
    Factored r = qpow(q, n * (n - 1) / 2);
    for (unsigned i = 1; i <= n; ++i) r *= (i % 2 ? qp(q.q, i) : qm(q.q, i));
    return r;
}

Factored sp(unsigned n, const PrimePower& q)
{
    unsigned m = n / 2;
    Factored r = qpow(q, m * m);
    for (unsigned i = 1; i <= m; ++i) r *= qm(q.q, 2 * i);
    return r;
}

/** Full isometry group GO^eps_n(q); eps = 0 for odd n. */
Factored go(int eps, unsigned n, const PrimePower& q)
{
    const bool odd_q = q.p != 2;
    if (n % 2) {
        unsigned m = (n - 1) / 2;
        Factored r = qpow(q, m * m);
        for (unsigned i = 1; i <= m; ++i) r *= qm(q.q, 2 * i);
        if (odd_q) r *= Factored::prime_power(2, 1);
        return r;
    }
    unsigned m = n / 2;
    if (m == 0) return {};
    Factored r = Factored::prime_power(2, 1) * qpow(q, m * (m - 1)) * qe(q.q, m, eps);
    for (unsigned i = 1; i < m; ++i) r *= qm(q.q, 2 * i);
    return r;
}

Factored factorial(unsigned t)
{
    Factored r;
    for (unsigned i = 2; i <= t; ++i) r *= small(i);
    return r;
}

/** Gaussian binomial [n choose m]_q. */
Factored gauss(unsigned n, unsigned m, const BigInt& q)
{
    Factored r;
    for (unsigned i = 0; i < m; ++i) {
        r *= qm(q, n - i);
        r /= qm(q, i + 1);
    }
    return r;
}

BigInt gcd(const BigInt& a, const BigInt& b)
{
    BigInt g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

/** Number of totally singular m-spaces in the polar space of g. */
Factored polar_count(const GroupId& g, unsigned m)
{
    const BigInt& q = g.q.q;
    unsigned n = g.n;
    switch (g.family) {
    case Family::Linear: return gauss(n, m, q);
    case Family::Unitary: {
        unsigned w = n / 2;
        BigInt q2 = q * q;
        Factored r = gauss(w, m, q2);
        for (unsigned i = w - m + 1; i <= w; ++i) r *= qp(q, n % 2 ? 2 * i + 1 : 2 * i - 1);
        return r;
    }
    case Family::Symplectic:
    case Family::OrthogonalOdd: {
        unsigned w = n / 2;
        Factored r = gauss(w, m, q);
        for (unsigned i = w - m + 1; i <= w; ++i) r *= qp(q, i);
        return r;
    }
    case Family::OrthogonalPlus: {
        unsigned w = n / 2;
        Factored r = gauss(w, m, q);
        for (unsigned i = w - m + 1; i <= w; ++i) r *= qp(q, i - 1);
        if (m == w) r /= Factored::prime_power(2, 1);  // one of the two families
        return r;
    }
    case Family::OrthogonalMinus: {
        unsigned w = n / 2 - 1;
        Factored r = gauss(w, m, q);
        for (unsigned i = w - m + 1; i <= w; ++i) r *= qp(q, i + 1);
        return r;
    }
    }
    return {};
}

unsigned witt_index(const GroupId& g)
{
    switch (g.family) {
    case Family::Linear: return g.n - 1;
    case Family::Unitary:
    case Family::Symplectic:
    case Family::OrthogonalPlus:
    case Family::OrthogonalOdd: return g.n / 2;
    case Family::OrthogonalMinus: return g.n / 2 - 1;
    }
    return 0;
}

/** Full isometry (or general linear) group order of the natural module. */
Factored isometry_order(const GroupId& g)
{
    switch (g.family) {
    case Family::Linear: return gl(g.n, g.q);
    case Family::Unitary: return gu(g.n, g.q);
    case Family::Symplectic: return sp(g.n, g.q);
    default: return go(g.eps(), g.n, g.q);
    }
}

} // namespace

Factored order_factored(const GroupId& g)
{
    const BigInt& q = g.q.q;
    const unsigned n = g.n;
    switch (g.family) {
    case Family::Linear: return gl(n, g.q) / qm(q, 1) / small(gcd(BigInt(n), q - 1));
    case Family::Unitary: return gu(n, g.q) / qp(q, 1) / small(gcd(BigInt(n), q + 1));
    case Family::Symplectic: return sp(n, g.q) / small(gcd(BigInt(2), q - 1));
    case Family::OrthogonalOdd: return sp(n - 1, g.q) / small(gcd(BigInt(2), q - 1));
    case Family::OrthogonalPlus:
    case Family::OrthogonalMinus: {
        unsigned m = n / 2;
        int e = g.eps();
        Factored r = qpow(g.q, m * (m - 1)) * qe(q, m, e);
        for (unsigned i = 1; i < m; ++i) r *= qm(q, 2 * i);
        BigInt top = numth::pow(q, m) - e;
        return r / small(gcd(BigInt(4), top));
    }
    }
    return {};
}

BigInt order(const GroupId& g) { return order_factored(g).value(); }

// ---------------------------------------------------------------- SubgroupSpec

namespace {

std::vector<long> integers_in(std::string_view s)
{
    std::vector<long> out;
    long cur = -1;
    for (char c : s) {
        if (c >= '0' && c <= '9') {
            cur = (cur < 0 ? 0 : cur * 10) + (c - '0');
        } else if (cur >= 0) {
            out.push_back(cur);
            cur = -1;
        }
    }
    if (cur >= 0) out.push_back(cur);
    return out;
}

AschClass guess_class(const std::string& t)
{
    if (t == "C6") return AschClass::C6;
    if (t.rfind("GL", 0) == 0 && t.find("xGL") != std::string::npos) return AschClass::N;
    if (t.find("wrS") != std::string::npos) return AschClass::C2;
    if (t.find("q^1/") != std::string::npos) return AschClass::C5;
    if (t.find("(q^") != std::string::npos) return AschClass::C3;
    if (t[0] == 'P' && t.size() > 1 && std::isdigit(static_cast<unsigned char>(t[1]))) return AschClass::C1;
    if (t.find('+') != std::string::npos && t.find("Omega") == std::string::npos) return AschClass::C1;
    return AschClass::S;
}

} // namespace

SubgroupSpec SubgroupSpec::make(AschClass c, std::string_view type_name)
{
    if (type_name.empty()) throw InvalidParameters("empty subgroup type");
    SubgroupSpec h;
    h.asch_class = c;
    h.type_name = std::string(type_name);
    h.params = integers_in(type_name);
    return h;
}

SubgroupSpec SubgroupSpec::parse(std::string_view s)
{
    std::string str(s);
    auto colon = str.find(':');
    if (colon == std::string::npos) {
        for (int i = 0; i <= static_cast<int>(AschClass::S); ++i)
            if (gf::to_string(static_cast<AschClass>(i)) == str && str != "S" && str != "N")
                return make(static_cast<AschClass>(i), str);
        return make(guess_class(str), str);
    }
    return make(asch_class_from_string(str.substr(0, colon)), str.substr(colon + 1));
}

std::string SubgroupSpec::to_string() const { return gf::to_string(asch_class) + ":" + type_name; }

// ---------------------------------------------------------------- catalog

namespace {

struct OrthoSummand {
    unsigned dim;
    int eps;  // +1, -1, 0 for odd dimension
};

OrthoSummand parse_ortho(const std::string& tok)
{
    // "1", "p6", "m2", "o7"
    if (tok == "1") return {1, 0};
    int e = tok[0] == 'p' ? 1 : tok[0] == 'm' ? -1 : 0;
    unsigned d = static_cast<unsigned>(std::stoul(tok.substr(1)));
    if ((d % 2 == 1) != (e == 0)) throw UnsupportedSubgroupType("orthogonal summand '" + tok + "' has inconsistent sign");
    return {d, e};
}

[[noreturn]] void unsupported(const GroupId& g, const SubgroupSpec& h, const std::string& why = "")
{
    std::string msg = "unsupported subgroup type " + h.to_string() + " in " + g.name();
    if (!why.empty()) msg += " (" + why + ")";
    msg += "; catalog:";
    for (const auto& t : catalog_types()) msg += " " + t;
    throw UnsupportedSubgroupType(msg);
}

SubgroupOrder exact(Factored f) { return {OrderMode::Exact, std::move(f)}; }
SubgroupOrder bound(Factored f) { return {OrderMode::DividesBound, std::move(f)}; }

bool is_prime_ul(unsigned long k) { return k >= 2 && numth::is_prime(BigInt(k)); }

/** Order of a named simple group, or nullopt when the name is not recognised. */
std::optional<Factored> named_order(const GroupId& g, const std::string& name)
{
    static const std::map<std::string, long> sporadic = {
        {"M11", 7920}, {"M12", 95040}, {"M22", 443520}, {"M23", 10200960}, {"M24", 244823040}, {"J1", 175560},
    };
    if (auto it = sporadic.find(name); it != sporadic.end()) return small(it->second);
    std::smatch m;
    static const std::regex alt(R"(^A(\d+)$)");
    if (std::regex_match(name, m, alt)) {
        unsigned k = static_cast<unsigned>(std::stoul(m[1]));
        if (k < 5) return std::nullopt;
        return factorial(k) / Factored::prime_power(2, 1);
    }
    static const std::regex classical(R"(^(L|U|PSp|Sp|Omega)(\d+)([+-]?)\((q|\d+)\)$)");
    if (std::regex_match(name, m, classical)) {
        PrimePower q = m[4] == "q" ? g.q : PrimePower::from_q(BigInt(m[4].str()));
        unsigned n = static_cast<unsigned>(std::stoul(m[2]));
        std::string fam = m[1];
        Family f = fam == "L" ? Family::Linear
                   : fam == "U" ? Family::Unitary
                   : (fam == "PSp" || fam == "Sp") ? Family::Symplectic
                   : m[3] == "+" ? Family::OrthogonalPlus
                   : m[3] == "-" ? Family::OrthogonalMinus
                                 : Family::OrthogonalOdd;
        if (fam == "Omega" && (n % 2 == 1) != m[3].str().empty()) return std::nullopt;
        if (fam != "Omega" && !m[3].str().empty()) return std::nullopt;
        // Socles of small dimension are allowed here (L2(q), U3(q)).
        if (f == Family::Linear && n == 2) {
            const BigInt& qq = q.q;
            return qpow(q, 1) * qm(qq, 2) / small(gcd(BigInt(2), qq - 1));
        }
        if (f == Family::Unitary && n == 3) return order_factored(GroupId::make(f, n, q, false));
        if (f == Family::OrthogonalOdd && q.p == 2) return order_factored(GroupId::make(Family::Symplectic, n - 1, q, false));
        return order_factored(GroupId::make(f, n, q, false));
    }
    const PrimePower& q = g.q;
    if (name == "Sz(q)") {
        if (q.p != 2 || q.f % 2 == 0 || q.f < 3) return std::nullopt;
        return qpow(q, 2) * qp(q.q, 2) * qm(q.q, 1);
    }
    if (name == "G2(q)") return qpow(q, 6) * qm(q.q, 6) * qm(q.q, 2);
    return std::nullopt;
}

/** Order of r^{1+2m}.Sp_{2m}(r) apart from small factors, as the divisor bound. */
Factored c6_bound(unsigned r, unsigned m)
{
    Factored a = small(r);
    for (unsigned i = 1; i <= m; ++i) {
        BigInt ri = numth::pow(BigInt(r), i);
        a *= small(ri + 1);
        a *= small(ri - 1);
    }
    return a;
}

/** n = r^m with r prime, else nullopt. */
std::optional<std::pair<unsigned, unsigned>> prime_power_dim(unsigned n)
{
    auto pq = PrimePower::try_from_q(BigInt(n));
    if (!pq) return std::nullopt;
    return std::make_pair(static_cast<unsigned>(pq->p_ul()), pq->f);
}

SubgroupOrder by_index(const GroupId& g, const Factored& index) { return exact(order_factored(g) / index); }

std::optional<SubgroupOrder> linear_order(const GroupId& g, const SubgroupSpec& h, const std::string& t)
{
    const unsigned n = g.n;
    const PrimePower& q = g.q;
    const BigInt d = gcd(BigInt(n), q.q - 1);
    std::smatch m;
    static const std::regex par(R"(^P(\d+)$)"), flag(R"(^P(\d+),(\d+)$)"), sum(R"(^GL(\d+)\+GL(\d+)$)"),
        wr(R"(^GL(\d+)wrS(\d+)$)"), ext(R"(^GL(\d+)\(q\^(\d+)\)$)"), sub(R"(^GL(\d+)\(q\^1/(\d+)\)$)"),
        spf(R"(^Sp(\d+)$)"), of(R"(^O([pmo])(\d+)$)"), uf(R"(^U(\d+)\(q\^1/2\)$)");
    if (std::regex_match(t, m, par)) {
        unsigned k = std::stoul(m[1]);
        if (k < 1 || k >= n) unsupported(g, h, "needs 1 <= m < n");
        return by_index(g, polar_count(g, k));
    }
    if (std::regex_match(t, m, flag)) {
        unsigned a = std::stoul(m[1]), b = std::stoul(m[2]);
        if (a + b != n || 2 * a >= n) unsupported(g, h, "needs P_{m,n-m} with m < n/2");
        return by_index(g, gauss(n, a, q.q) * gauss(n - a, a, q.q));
    }
    if (std::regex_match(t, m, sum)) {
        unsigned a = std::stoul(m[1]), b = std::stoul(m[2]);
        if (a + b != n || a == 0 || b == 0) unsupported(g, h, "dimensions must add to n");
        return by_index(g, gl(n, q) / (gl(a, q) * gl(b, q)));
    }
    if (std::regex_match(t, m, wr)) {
        unsigned a = std::stoul(m[1]), s = std::stoul(m[2]);
        if (a * s != n || s < 2) unsupported(g, h, "needs a*t = n, t >= 2");
        return by_index(g, gl(n, q) / (gl(a, q).pow(s) * factorial(s)));
    }
    if (std::regex_match(t, m, ext)) {
        unsigned a = std::stoul(m[1]), k = std::stoul(m[2]);
        if (a * k != n || !is_prime_ul(k)) unsupported(g, h, "needs m*k = n with k prime");
        return exact(gl(a, field_power(q, k)) * small(k) / qm(q.q, 1) / small(d));
    }
    if (std::regex_match(t, m, sub)) {
        unsigned a = std::stoul(m[1]), k = std::stoul(m[2]);
        if (a != n || !is_prime_ul(k)) unsupported(g, h, "needs GL_n(q0) with q = q0^k, k prime");
        PrimePower q0 = field_root(q, k);
        // SL_n(q) meets Z.GL_n(q0) in |Z.GL_n(q0)| / |det image| elements.
        Factored zgl = qm(q.q, 1) * gl(n, q0) / qm(q0.q, 1);
        BigInt image = ::lcm(BigInt((q.q - 1) / gcd(BigInt(n), q.q - 1)), BigInt(q0.q - 1));
        return exact(zgl / small(image) / small(d));
    }
    if (std::regex_match(t, m, spf)) {
        unsigned a = std::stoul(m[1]);
        if (a != n || n % 2) unsupported(g, h, "needs Sp_n with n even");
        return exact(sp(n, q) * small(gcd(q.q - 1, BigInt(n / 2))) / small(d));
    }
    if (std::regex_match(t, m, of)) {
        unsigned a = std::stoul(m[2]);
        int e = m[1] == "p" ? 1 : m[1] == "m" ? -1 : 0;
        if (a != n || q.p == 2 || (e == 0) != (n % 2 == 1)) unsupported(g, h, "needs O^eps_n with q odd");
        return bound(go(e, n, q) * qm(q.q, 1));
    }
    if (std::regex_match(t, m, uf)) {
        unsigned a = std::stoul(m[1]);
        if (a != n) unsupported(g, h, "needs U_n(q^1/2)");
        return bound(gu(n, field_root(q, 2)));
    }
    if (t == "C6") {
        auto rm = prime_power_dim(n);
        if (!rm) unsupported(g, h, "needs n a prime power");
        if (n == 2) {
            if (q.f != 1 || q.p < 5) unsupported(g, h, "needs q = p >= 5");
            unsigned long r8 = mpz_fdiv_ui(q.q.get_mpz_t(), 8);
            return exact(small(r8 == 1 || r8 == 7 ? 24 : 12));
        }
        return bound(c6_bound(rm->first, rm->second));
    }
    return std::nullopt;
}

std::optional<SubgroupOrder> unitary_order(const GroupId& g, const SubgroupSpec& h, const std::string& t)
{
    const unsigned n = g.n;
    const PrimePower& q = g.q;
    const BigInt d = gcd(BigInt(n), q.q + 1);
    std::smatch m;
    static const std::regex par(R"(^P(\d+)$)"), sum(R"(^GU(\d+)\+GU(\d+)$)"), wr(R"(^GU(\d+)wrS(\d+)$)"),
        gl2(R"(^GL(\d+)\(q\^2\)\.2$)"), ext(R"(^GU(\d+)\(q\^(\d+)\)$)"), spf(R"(^Sp(\d+)$)"),
        of(R"(^O([pmo])(\d+)$)");
    if (std::regex_match(t, m, par)) {
        unsigned k = std::stoul(m[1]);
        if (k < 1 || k > n / 2) unsupported(g, h, "needs 1 <= m <= n/2");
        return by_index(g, polar_count(g, k));
    }
    if (std::regex_match(t, m, sum)) {
        unsigned a = std::stoul(m[1]), b = std::stoul(m[2]);
        if (a + b != n || a == 0 || b == 0) unsupported(g, h, "dimensions must add to n");
        return by_index(g, gu(n, q) / (gu(a, q) * gu(b, q)));
    }
    if (std::regex_match(t, m, wr)) {
        unsigned a = std::stoul(m[1]), s = std::stoul(m[2]);
        if (a * s != n || s < 2) unsupported(g, h, "needs a*t = n, t >= 2");
        return by_index(g, gu(n, q) / (gu(a, q).pow(s) * factorial(s)));
    }
    if (std::regex_match(t, m, gl2)) {
        unsigned a = std::stoul(m[1]);
        if (2 * a != n) unsupported(g, h, "needs GL_{n/2}(q^2).2");
        return by_index(g, gu(n, q) / (gl(a, field_power(q, 2)) * small(2)));
    }
    if (std::regex_match(t, m, ext)) {
        unsigned a = std::stoul(m[1]), k = std::stoul(m[2]);
        if (a * k != n || !is_prime_ul(k) || k == 2) unsupported(g, h, "needs m*k = n with k an odd prime");
        return exact(gu(a, field_power(q, k)) * small(k) / qp(q.q, 1) / small(d));
    }
    if (std::regex_match(t, m, spf)) {
        unsigned a = std::stoul(m[1]);
        if (a != n || n % 2) unsupported(g, h, "needs Sp_n with n even");
        // Normaliser of Sp_n(q) in GU_n(q) has order |Sp_n(q)|(q+1); its determinants
        // form the image of x -> x^{n(1-q)/2} on F_{q^2}^*.
        BigInt q2m1 = q.q * q.q - 1;
        BigInt image = q2m1 / gcd(q2m1, BigInt(n) * (q.q - 1) / 2);
        return exact(sp(n, q) * qp(q.q, 1) / small(image) / small(d));
    }
    if (std::regex_match(t, m, of)) {
        unsigned a = std::stoul(m[2]);
        int e = m[1] == "p" ? 1 : m[1] == "m" ? -1 : 0;
        if (a != n || q.p == 2 || (e == 0) != (n % 2 == 1)) unsupported(g, h, "needs O^eps_n with q odd");
        return bound(go(e, n, q) * qp(q.q, 1));
    }
    if (t == "C6") {
        auto rm = prime_power_dim(n);
        if (!rm) unsupported(g, h, "needs n a prime power");
        return bound(c6_bound(rm->first, rm->second));
    }
    return std::nullopt;
}

std::optional<SubgroupOrder> symplectic_order(const GroupId& g, const SubgroupSpec& h, const std::string& t)
{
    const unsigned n = g.n;
    const PrimePower& q = g.q;
    const BigInt d = gcd(BigInt(2), q.q - 1);
    std::smatch m;
    static const std::regex par(R"(^P(\d+)$)"), sum(R"(^Sp(\d+)\+Sp(\d+)$)"), wr(R"(^Sp(\d+)wrS(\d+)$)"),
        gl2(R"(^GL(\d+)\.2$)"), ext(R"(^Sp(\d+)\(q\^(\d+)\)$)"), gu2(R"(^GU(\d+)\.2$)"),
        sub(R"(^Sp(\d+)\(q\^1/(\d+)\)$)"), of(R"(^O([pm])(\d+)$)");
    if (std::regex_match(t, m, par)) {
        unsigned k = std::stoul(m[1]);
        if (k < 1 || k > n / 2) unsupported(g, h, "needs 1 <= m <= n/2");
        return by_index(g, polar_count(g, k));
    }
    if (std::regex_match(t, m, sum)) {
        unsigned a = std::stoul(m[1]), b = std::stoul(m[2]);
        if (a + b != n || a % 2 || b % 2 || a == 0 || b == 0) unsupported(g, h, "even dimensions adding to n");
        return by_index(g, sp(n, q) / (sp(a, q) * sp(b, q)));
    }
    if (std::regex_match(t, m, wr)) {
        unsigned a = std::stoul(m[1]), s = std::stoul(m[2]);
        if (a * s != n || a % 2 || s < 2) unsupported(g, h, "needs a*t = n, a even, t >= 2");
        return by_index(g, sp(n, q) / (sp(a, q).pow(s) * factorial(s)));
    }
    if (std::regex_match(t, m, gl2)) {
        unsigned a = std::stoul(m[1]);
        if (2 * a != n) unsupported(g, h, "needs GL_{n/2}(q).2");
        return by_index(g, sp(n, q) / (gl(a, q) * small(2)));
    }
    if (std::regex_match(t, m, ext)) {
        unsigned a = std::stoul(m[1]), k = std::stoul(m[2]);
        if (a * k != n || a % 2 || !is_prime_ul(k)) unsupported(g, h, "needs m*k = n, m even, k prime");
        return exact(sp(a, field_power(q, k)) * small(k) / small(d));
    }
    if (std::regex_match(t, m, gu2)) {
        unsigned a = std::stoul(m[1]);
        if (2 * a != n) unsupported(g, h, "needs GU_{n/2}(q).2");
        return exact(gu(a, q) * small(2) / small(d));
    }
    if (std::regex_match(t, m, sub)) {
        unsigned a = std::stoul(m[1]), k = std::stoul(m[2]);
        if (a != n || !is_prime_ul(k)) unsupported(g, h, "needs Sp_n(q0) with q = q0^k, k prime");
        PrimePower q0 = field_root(q, k);
        // Scalars lambda with lambda^2 a multiplier over F_q0 extend Sp_n(q0) by 2 exactly when q is odd and k even.
        long c = (q.p != 2 && k % 2 == 0) ? 2 : 1;
        return exact(sp(n, q0) * small(c) / small(d));
    }
    if (std::regex_match(t, m, of)) {
        unsigned a = std::stoul(m[2]);
        if (a != n || q.p != 2) unsupported(g, h, "needs O^eps_n with q even");
        return exact(go(m[1] == "p" ? 1 : -1, n, q));
    }
    if (t == "C6") {
        auto rm = prime_power_dim(n);
        if (!rm || rm->first != 2 || q.f != 1 || q.p == 2) unsupported(g, h, "needs n = 2^m and q = p odd");
        unsigned mm = rm->second;
        unsigned long r8 = mpz_fdiv_ui(q.q.get_mpz_t(), 8);
        long c = (r8 == 1 || r8 == 7) ? 2 : 1;
        Factored omega_minus = go(-1, 2 * mm, PrimePower::of(2, 1)) / small(2);
        return exact(Factored::prime_power(2, 2 * mm) * omega_minus * small(c));
    }
    return std::nullopt;
}

std::optional<SubgroupOrder> orthogonal_order(const GroupId& g, const SubgroupSpec& h, const std::string& t)
{
    const unsigned n = g.n;
    const PrimePower& q = g.q;
    const int e = g.eps();
    std::smatch m;
    static const std::regex par(R"(^P(\d+)$)"), sum(R"(^O(1|[pmo]\d+)\+O([pmo]\d+)$)"),
        wr(R"(^O(1|[pm]\d+)wrS(\d+)$)"), gl2(R"(^GL(\d+)\.2$)"), ext(R"(^O([pm])(\d+)\(q\^2\)$)"),
        sub(R"(^O([pm])(\d+)\(q\^1/2\)$)"), guf(R"(^GU(\d+)$)"), spf(R"(^Sp(\d+)$)"), nov(R"(^GL(\d+)xGL(\d+)$)");
    if (std::regex_match(t, m, par)) {
        unsigned k = std::stoul(m[1]);
        if (k < 1 || k > witt_index(g)) unsupported(g, h, "needs 1 <= m <= Witt index");
        return by_index(g, polar_count(g, k));
    }
    if (std::regex_match(t, m, sum)) {
        OrthoSummand a = parse_ortho(m[1]), b = parse_ortho(m[2]);
        if (a.dim + b.dim != n) unsupported(g, h, "dimensions must add to n");
        if ((a.dim == 1 || b.dim == 1) && q.p == 2) unsupported(g, h, "O_1 summand needs q odd");
        if (a.dim % 2 == 0 && b.dim % 2 == 0 && a.eps * b.eps != e) unsupported(g, h, "summand signs do not multiply to the form type");
        return by_index(g, isometry_order(g) / (go(a.eps, a.dim, q) * go(b.eps, b.dim, q)));
    }
    if (std::regex_match(t, m, wr)) {
        OrthoSummand a = parse_ortho(m[1]);
        unsigned s = std::stoul(m[2]);
        if (a.dim * s != n || s < 2) unsupported(g, h, "needs a*t = n, t >= 2");
        if (a.dim == 1) {
            if (q.f != 1 || q.p == 2) unsupported(g, h, "O_1 wr S_n needs q = p odd");
            // Every prime divisor of |H0| divides n!.
            return bound(Factored::prime_power(2, s) * factorial(s));
        }
        return by_index(g, isometry_order(g) / (go(a.eps, a.dim, q).pow(s) * factorial(s)));
    }
    if (std::regex_match(t, m, gl2)) {
        unsigned a = std::stoul(m[1]);
        if (2 * a != n || e != 1) unsupported(g, h, "needs GL_{n/2}(q).2 in the plus type");
        return by_index(g, isometry_order(g) / (gl(a, q) * small(2)));
    }
    if (std::regex_match(t, m, ext)) {
        unsigned a = std::stoul(m[2]);
        if (2 * a != n) unsupported(g, h, "needs O_{n/2}(q^2)");
        return bound(go(m[1] == "p" ? 1 : -1, a, field_power(q, 2)) * small(2));
    }
    if (std::regex_match(t, m, sub)) {
        unsigned a = std::stoul(m[2]);
        if (a != n) unsupported(g, h, "needs O_n(q^1/2)");
        return bound(go(m[1] == "p" ? 1 : -1, n, field_root(q, 2)) * small(2));
    }
    if (std::regex_match(t, m, guf)) {
        unsigned a = std::stoul(m[1]);
        if (2 * a != n || n % 2) unsupported(g, h, "needs GU_{n/2}(q)");
        return bound(gu(a, q) * small(2));
    }
    if (std::regex_match(t, m, spf)) {
        unsigned a = std::stoul(m[1]);
        if (a + 2 != n || q.p != 2 || e == 0) unsupported(g, h, "needs Sp_{n-2}(q), q even, n even");
        // Nonsingular points: q^{n/2-1}(q^{n/2}-eps).
        return by_index(g, qpow(q, n / 2 - 1) * qe(q.q, n / 2, e));
    }
    if (std::regex_match(t, m, nov)) {
        unsigned a = std::stoul(m[1]), b = std::stoul(m[2]);
        if (n != 8 || e != 1 || a + b != 4) unsupported(g, h, "novelty GL_1 x GL_3 lives in the 8-dimensional plus type");
        return bound(small(6) * qpow(q, 1) * gl(a, q) * gl(b, q));
    }
    if (t == "C6") {
        auto rm = prime_power_dim(n);
        if (!rm || rm->first != 2 || q.f != 1 || q.p == 2 || e == 0) unsupported(g, h, "needs n = 2^m and q = p odd");
        return bound(Factored::prime_power(2, 2 * rm->second + 1) * go(1, 2 * rm->second, PrimePower::of(2, 1)));
    }
    return std::nullopt;
}

} // namespace

std::vector<std::string> catalog_types()
{
    return {"P<m>", "P<m>,<n-m>", "GL<a>+GL<b>", "GL<a>wrS<t>", "GL<m>(q^<k>)", "GL<n>(q^1/<k>)", "Sp<n>",
            "O<p|m|o><n>", "U<n>(q^1/2)", "GU<a>+GU<b>", "GU<a>wrS<t>", "GL<m>(q^2).2", "GU<m>(q^<k>)",
            "Sp<a>+Sp<b>", "Sp<a>wrS<t>", "GL<m>.2", "Sp<m>(q^<k>)", "GU<m>.2", "Sp<n>(q^1/<k>)",
            "O<1|p|m|o><a>+O<p|m|o><b>", "O<1|p|m><a>wrS<t>", "O<p|m><m>(q^2)", "O<p|m><n>(q^1/2)", "GU<m>",
            "GL1xGL3", "C6", "G2(q)", "Sz(q)", "A<m>", "M11", "M12", "M22", "L<n>(<q>|q)", "U<n>(<q>|q)",
            "PSp<n>(<q>|q)", "Omega<n>[+-](<q>|q)"};
}

SubgroupOrder subgroup_order(const GroupId& g, const SubgroupSpec& h)
{
    const std::string& t = h.type_name;
    std::optional<SubgroupOrder> out;
    if (h.asch_class != AschClass::S) {
        switch (g.family) {
        case Family::Linear: out = linear_order(g, h, t); break;
        case Family::Unitary: out = unitary_order(g, h, t); break;
        case Family::Symplectic: out = symplectic_order(g, h, t); break;
        default: out = orthogonal_order(g, h, t); break;
        }
    }
    if (!out && (h.asch_class == AschClass::S || h.asch_class == AschClass::N)) {
        auto no = named_order(g, t);
        if (!no) unsupported(g, h);
        // Socle order; the extension on top only adds primes already in {2, 3} and |G0|.
        out = exact(*no);
    }
    if (!out) unsupported(g, h);
    if (!out->factored.integral()) throw PreconditionViolation("order formula for " + h.to_string() + " in " + g.name() + " is not integral");
    return *out;
}

std::vector<BigInt> spectrum(const BigInt& n, std::uint64_t budget)
{
    if (n < 1) throw PreconditionViolation("spectrum needs a positive integer");
    return numth::factor(n, budget).primes();
}

std::size_t pi(const BigInt& n, std::uint64_t budget) { return spectrum(n, budget).size(); }

ScreenVerdict screen(const GroupId& g, const SubgroupSpec& h)
{
    SubgroupOrder ho = subgroup_order(g, h);
    std::vector<BigInt> gp = order_factored(g).primes();
    std::vector<BigInt> hp = ho.factored.primes();
    ScreenVerdict v;
    v.mode = ho.mode;
    std::set_difference(gp.begin(), gp.end(), hp.begin(), hp.end(), std::back_inserter(v.missing));
    if (v.missing.empty())
        v.tag = ho.mode == OrderMode::Exact ? VerdictTag::EqualPi : VerdictTag::Inconclusive;
    else
        v.tag = v.missing.size() == 1 ? VerdictTag::DiffOne : VerdictTag::DiffAtLeastTwo;
    return v;
}

BigInt omega_size(const GroupId& g, const SubgroupSpec& h)
{
    SubgroupOrder ho = subgroup_order(g, h);
    if (ho.mode != OrderMode::Exact) unsupported(g, h, "only a divisor bound is known, so the degree is not");
    Factored idx = order_factored(g) / ho.factored;
    if (!idx.integral()) throw PreconditionViolation("subgroup order does not divide group order");
    return idx.value();
}

// ---------------------------------------------------------------- S-collection screen

namespace {

struct SocleRow {
    std::vector<unsigned> dims;
    std::vector<unsigned> indices;
};

std::vector<SocleRow> socle_rows(const std::string& s)
{
    static const std::map<std::string, std::vector<SocleRow>> fixed = {
        {"M23", {{{22}, {22}}}},       {"M24", {{{23}, {22}}}},    {"J1", {{{20}, {18}}}},
        {"J3", {{{18}, {16, 18}}}},    {"Co3", {{{23}, {22}}}},    {"Co2", {{{23}, {22}}}},
        {"Co1", {{{24}, {22}}}},       {"Ru", {{{28}, {28}}}},     {"Sz(8)", {{{14}, {12}}}},
        {"G2(3)", {{{14}, {12}}}},     {"PSp4(4)", {{{18}, {16}}}},
    };
    if (auto it = fixed.find(s); it != fixed.end()) return it->second;

    std::smatch m;
    static const std::regex fam(R"(^(L|U|PSp)(\d+)\((\d+)\)$)");
    if (!std::regex_match(s, m, fam)) return {};
    const std::string f = m[1];
    const unsigned long d = std::stoul(m[2]);
    const unsigned long sv = std::stoul(m[3]);
    if (!PrimePower::try_from_q(BigInt(sv))) return {};
    auto u = [](const BigInt& x) { return static_cast<unsigned>(x.get_ui()); };
    std::vector<SocleRow> rows;
    BigInt sd = numth::pow(BigInt(sv), d);
    if (f == "L" && d >= 3) {
        BigInt a = (sd - 1) / (sv - 1);
        rows.push_back({{u(a - 1), u(a)}, {u(a - 1)}});
    } else if (f == "U" && d >= 3) {
        if (d % 2 == 1) {
            BigInt a = (sd + 1) / (sv + 1);
            rows.push_back({{u(a - 1), u(a)}, {u(a - 1)}});
        }
    } else if (f == "PSp" && d % 2 == 0 && sv % 2 == 1) {
        BigInt half = numth::pow(BigInt(sv), d / 2);
        rows.push_back({{u((half - 1) / 2), u((half + 1) / 2)}, {u((half - 1) / 2)}});
        if (sv == 3) rows.push_back({{u((half - 1) / 2), u((half + 1) / 2)}, {u((half - 3) / 2)}});
    } else if (f == "L" && d == 2) {
        unsigned s1 = static_cast<unsigned>(sv);
        rows.push_back({{s1 - 1, s1, s1 + 1}, {s1 - 2}});
        rows.push_back({{s1, s1 + 1}, {s1}});
        rows.push_back({{s1 - 1, s1, s1 + 1}, {s1 - 1}});
        if (s1 % 2) {
            rows.push_back({{(s1 - 1) / 2, (s1 + 1) / 2}, {(s1 - 1) / 2}});
            rows.push_back({{(s1 - 1) / 2, (s1 + 1) / 2}, {(s1 - 3) / 2}});
        }
    }
    return rows;
}

/** Smallest primitive prime divisor of q^t - 1. */
BigInt smallest_ppd(const BigInt& q, unsigned t)
{
    BigInt part = numth::ppd_part(q, t);
    if (part == 1) throw PreconditionViolation("no primitive prime divisor of q^" + std::to_string(t) + "-1");
    for (BigInt r = t + 1; r < 1000000; r += t)
        if (mpz_divisible_p(part.get_mpz_t(), r.get_mpz_t()) && numth::is_prime(r)) return r;
    return numth::factor(part).primes().front();
}

} // namespace

std::vector<unsigned> s_blocked_indices(std::string_view socle_type, unsigned n)
{
    std::vector<unsigned> out;
    for (const auto& row : socle_rows(std::string(socle_type)))
        if (std::find(row.dims.begin(), row.dims.end(), n) != row.dims.end())
            out.insert(out.end(), row.indices.begin(), row.indices.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

ScreenVerdict s_screen(const GroupId& g, std::string_view socle_type, unsigned n)
{
    if (n < 13) throw PreconditionViolation("s_screen needs n >= 13");
    ScreenVerdict v;
    v.mode = OrderMode::DividesBound;
    std::string s(socle_type);
    std::smatch m;
    static const std::regex alt(R"(^A(\d+)$)");
    if (std::regex_match(s, m, alt)) {
        unsigned k = std::stoul(m[1]);
        if (k == n + 1 || k == n + 2) {
            auto two = numth::two_large_primes(n, g.q);
            if (!two) {
                v.tag = VerdictTag::Inconclusive;
                return v;
            }
            v.tag = VerdictTag::DiffAtLeastTwo;
            v.missing = {two->first, two->second};
            return v;
        }
    }
    const unsigned j = 2 * ((n - 1) / 2), k = 2 * ((n - 3) / 2), l = 2 * ((n - 5) / 2);
    std::vector<unsigned> blocked = s_blocked_indices(s, n);
    for (unsigned t : {j, k, l}) {
        if (std::find(blocked.begin(), blocked.end(), t) != blocked.end()) continue;
        v.missing.push_back(smallest_ppd(g.q.q, t));
    }
    v.tag = v.missing.size() >= 2 ? VerdictTag::DiffAtLeastTwo : VerdictTag::Inconclusive;
    return v;
}

} // namespace elusive::gf
