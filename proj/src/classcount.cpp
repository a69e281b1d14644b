#include "elusive/classcount.hpp"

#include "elusive/errors.hpp"
#include "elusive/tables.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace elusive::cc {

namespace {

using u64 = unsigned long;

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<unsigned __int128>(a) * b % m); }

u64 powmod(u64 b, u64 e, u64 m)
{
    u64 r = 1 % m;
    b %= m;
    for (; e; e >>= 1, b = mulmod(b, b, m))
        if (e & 1) r = mulmod(r, b, m);
    return r;
}

u64 order_mod(u64 a, u64 r)
{
    if (std::gcd(a % r, r) != 1) throw PreconditionViolation("base shares a factor with r=" + std::to_string(r));
    u64 x = a % r, k = 1;
    while (x != 1 % r) {
        x = mulmod(x, a, r);
        ++k;
    }
    return k;
}

bool is_prime_ul(u64 r) { return numth::is_prime(BigInt(r)); }

u64 q_mod(const PrimePower& q, u64 r) { return mpz_fdiv_ui(q.q.get_mpz_t(), r); }

std::string trim(std::string s)
{
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

} // namespace

// ---------------------------------------------------------------- orbits

OrbitLabel OrbitLabel::of(u64 r, u64 step, u64 e)
{
    if (r < 3 || e % r == 0) throw PreconditionViolation("orbit needs r >= 3 and a nonzero exponent");
    order_mod(step, r);
    OrbitLabel o;
    o.r = r;
    o.step = step % r;
    u64 x = e % r;
    do {
        o.exps.push_back(x);
        x = mulmod(x, o.step, r);
    } while (x != e % r);
    auto it = std::min_element(o.exps.begin(), o.exps.end());
    std::rotate(o.exps.begin(), it, o.exps.end());
    return o;
}

bool OrbitLabel::contains(u64 e) const { return std::find(exps.begin(), exps.end(), e % r) != exps.end(); }

OrbitLabel OrbitLabel::inverse() const { return of(r, step, r - min()); }

std::strong_ordering OrbitLabel::operator<=>(const OrbitLabel& o) const
{
    if (auto c = r <=> o.r; c != 0) return c;
    if (auto c = step <=> o.step; c != 0) return c;
    return min() <=> o.min();
}

std::vector<OrbitLabel> sigma_orbits(u64 r, u64 base)
{
    if (r < 3 || !is_prime_ul(r)) throw PreconditionViolation("sigma_orbits needs an odd prime r");
    order_mod(base, r);
    std::vector<char> seen(r, 0);
    std::vector<OrbitLabel> out;
    for (u64 e = 1; e < r; ++e) {
        if (seen[e]) continue;
        out.push_back(OrbitLabel::of(r, base, e));
        for (u64 x : out.back().exps) seen[x] = 1;
    }
    return out;
}

u64 sigma_orbit_count(u64 r, u64 base)
{
    if (r < 3 || !is_prime_ul(r)) throw PreconditionViolation("sigma_orbits needs an odd prime r");
    return (r - 1) / order_mod(base, r);
}

std::vector<std::vector<OrbitLabel>> multiplier_orbits(const std::vector<OrbitLabel>& orbits,
                                                       const std::vector<u64>& mults)
{
    if (orbits.empty()) return {};
    const u64 r = orbits.front().r;
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(r, none);  // exponent -> orbit position
    for (std::size_t i = 0; i < orbits.size(); ++i)
        for (u64 e : orbits[i].exps) index[e] = i;
    std::vector<char> seen(orbits.size(), 0);
    std::vector<std::vector<OrbitLabel>> out;
    for (std::size_t i = 0; i < orbits.size(); ++i) {
        if (seen[i]) continue;
        std::vector<std::size_t> stack{i}, members;
        seen[i] = 1;
        while (!stack.empty()) {
            std::size_t j = stack.back();
            stack.pop_back();
            members.push_back(j);
            for (u64 m : mults) {
                std::size_t to = index[mulmod(orbits[j].min(), m % r, r)];
                if (to == none) throw PreconditionViolation("multiplier does not preserve the orbit set");
                if (!seen[to]) {
                    seen[to] = 1;
                    stack.push_back(to);
                }
            }
        }
        std::sort(members.begin(), members.end());
        std::vector<OrbitLabel> cls;
        for (auto j : members) cls.push_back(orbits[j]);
        out.push_back(std::move(cls));
    }
    return out;
}

// ---------------------------------------------------------------- labels

ClassLabel ClassLabel::semisimple(std::vector<std::pair<OrbitLabel, unsigned>> orbits, unsigned e)
{
    std::map<OrbitLabel, unsigned> merged;
    for (auto& [o, a] : orbits) {
        if (a == 0) continue;
        if (!merged.empty() && (merged.begin()->first.r != o.r || merged.begin()->first.step != o.step))
            throw PreconditionViolation("orbits of one label must share r and step");
        merged[o] += a;
    }
    if (merged.empty()) throw PreconditionViolation("semisimple label needs at least one eigenvalue orbit");
    ClassLabel l;
    l.kind = LabelKind::Semisimple;
    l.orbits.assign(merged.begin(), merged.end());
    l.e = e;
    return l;
}

ClassLabel ClassLabel::unipotent(const std::vector<unsigned>& partition, u64 p)
{
    if (!is_prime_ul(p)) throw PreconditionViolation("unipotent label needs a prime characteristic");
    std::map<unsigned, unsigned, std::greater<>> m;
    for (unsigned b : partition) {
        if (b == 0) throw PreconditionViolation("Jordan block of size 0");
        ++m[b];
    }
    if (m.empty() || (m.size() == 1 && m.begin()->first == 1))
        throw PreconditionViolation("unipotent label must be nontrivial");
    ClassLabel l;
    l.kind = LabelKind::Unipotent;
    l.blocks.assign(m.begin(), m.end());
    l.p = p;
    return l;
}

unsigned ClassLabel::dimension() const
{
    unsigned d = 0;
    if (kind == LabelKind::Semisimple) {
        for (auto& [o, a] : orbits) d += static_cast<unsigned>(o.size()) * a;
        return d + e;
    }
    for (auto [b, a] : blocks) d += b * a;
    return d;
}

u64 ClassLabel::prime() const { return kind == LabelKind::Semisimple ? orbits.front().first.r : p; }

std::vector<unsigned> ClassLabel::partition() const
{
    std::vector<unsigned> out;
    for (auto [b, a] : blocks) out.insert(out.end(), a, b);
    return out;
}

unsigned ClassLabel::multiplicity(unsigned b) const
{
    for (auto [s, a] : blocks)
        if (s == b) return a;
    return 0;
}

int ClassLabel::block_type() const
{
    int t = 1;
    for (auto& [o, a] : orbits)
        if (o.self_inverse() && a % 2 == 1) t = -t;
    return t;
}

std::string ClassLabel::to_string() const
{
    std::string s = "[";
    auto add = [&](const std::string& part) { s += (s.size() > 1 ? ", " : "") + part; };
    auto pw = [](unsigned a) { return a == 1 ? std::string() : "^" + std::to_string(a); };
    if (kind == LabelKind::Semisimple) {
        for (auto& [o, a] : orbits) add("L" + std::to_string(o.min()) + pw(a));
        if (e) add("I" + std::to_string(e));
    } else {
        for (auto [b, a] : blocks) add("J" + std::to_string(b) + pw(a));
    }
    return s + "]";
}

bool ClassLabel::operator==(const ClassLabel& o) const
{
    return kind == o.kind && orbits == o.orbits && e == o.e && blocks == o.blocks && p == o.p;
}

// ---------------------------------------------------------------- field automorphisms

FieldOrbitResult field_orbit_sizes_unchecked(u64 r, const PrimePower& q, unsigned i, unsigned m, unsigned k)
{
    if (!is_prime_ul(r) || r < 3) throw PreconditionViolation("r must be an odd prime");
    if (i % 4 != 2 || i < 10) throw PreconditionViolation("need i = 2 mod 4 and i >= 10");
    const u64 p = q.p_ul(), qq = q_mod(q, r);
    const unsigned f = q.f;
    if (order_mod(qq, r) != i) throw PreconditionViolation("r is not a ppd of q^i-1");
    if (order_mod(p, r) != m) throw PreconditionViolation("m is not ord_r(p)");
    if (k == 0 || (2 * f) % k != 0) throw PreconditionViolation("k must divide 2f");

    FieldOrbitResult res;
    res.a = std::gcd<u64>(m, f);
    res.d = std::gcd<u64>(res.a, k);
    res.t = (k / res.d) % 2 == 1 ? 2 : 1;
    const u64 b = i / 2;
    res.s = (r - 1) / b;
    if ((res.a * res.t) % k == 0 && res.a * res.t / k > 0) {
        res.formula_integral = true;
        res.formula_size = res.a * res.t / k;
    }
    // Oracle: explicit orbits of e -> p^k e on the sigma^2-orbits.
    auto orbits = sigma_orbits(r, mulmod(qq, qq, r));
    auto classes = multiplier_orbits(orbits, {powmod(p, k, r)});
    res.oracle_count = classes.size();
    res.oracle_size = classes.front().size();
    for (auto& c : classes)
        if (c.size() != res.oracle_size) throw PreconditionViolation("unequal oracle orbit sizes");
    return res;
}

FieldOrbitResult field_orbit_sizes(u64 r, const PrimePower& q, unsigned i, unsigned m, unsigned k)
{
    auto res = field_orbit_sizes_unchecked(r, q, i, m, k);
    if (!res.agree())
        throw FormulaMismatch("orbit size formula gives " + std::to_string(res.formula_size) + ", enumeration gives " +
                              std::to_string(res.oracle_size) + " (r=" + std::to_string(r) +
                              ", q=" + numth::to_string(q.q) + ", k=" + std::to_string(k) + ")");
    return res;
}

AutSpec AutSpec::full_field(unsigned f) { return AutSpec{1, f, true, true}; }

AutSpec AutSpec::inner(unsigned f, bool unitary)
{
    const unsigned k = unitary ? 2 * f : f;
    return AutSpec{k, f, k == 1, false};  // with phi trivial, projecting onto it is vacuous
}

namespace {

void check_aut(const AutSpec& aut, const PrimePower& q)
{
    if (aut.f != q.f) throw PreconditionViolation("AutSpec f differs from the field exponent");
    if (aut.k < 1 || aut.k > 2 * aut.f) throw PreconditionViolation("AutSpec needs 1 <= k <= 2f");
    if (aut.projects_onto_phi != (aut.k == 1))
        throw PreconditionViolation("projects_onto_phi must agree with k = 1");
}

} // namespace

bool unique_semisimple_class(unsigned n, const PrimePower& q, u64 r, unsigned m, const AutSpec& aut)
{
    if (n < 5 || n % 2 == 0) throw PreconditionViolation("n must be odd and at least 5");
    check_aut(aut, q);
    if (!is_prime_ul(r) || order_mod(q_mod(q, r), r) != 2 * n)
        throw PreconditionViolation("r is not a ppd of q^(2n)-1");
    if (order_mod(q.p_ul(), r) != m) throw PreconditionViolation("m is not ord_r(p)");
    const u64 a = std::gcd<u64>(m, q.f);
    return r == 2 * n * a + 1 && aut.projects_onto_phi;
}

ClassCount class_count(const gf::GroupId& g, u64 r, const AutSpec& aut)
{
    check_aut(aut, g.q);
    if (!is_prime_ul(r) || r < 3 || g.q.p_ul() == r) throw PreconditionViolation("r must be an odd prime other than p");
    const unsigned n = g.n, f = g.q.f;
    const u64 qq = q_mod(g.q, r), p = g.q.p_ul();
    ClassCount c;
    c.i = static_cast<unsigned>(order_mod(qq, r));
    const unsigned i = c.i;

    u64 step = qq;
    bool paired = false;
    bool exact_known = true;
    std::vector<u64> mults;
    u64 field_order = 0;  // order of phi on the relevant field
    auto unsupported = [&](const std::string& why) {
        return UnsupportedCountingCase(g.name() + ", r=" + std::to_string(r) + " (i=" + std::to_string(i) + "): " + why);
    };

    switch (g.family) {
    case Family::Linear:
        if (i != n) throw unsupported("linear counting needs i = n");
        c.index = 2 * f;
        c.shape = "[L]";
        field_order = f;
        if (aut.graph) mults.push_back(r - 1);
        break;
    case Family::Unitary: {
        if (i % 4 != 2) throw unsupported("unitary counting needs i = 2 mod 4");
        const unsigned b = i / 2;
        if (n < b || n >= 2 * b) throw unsupported("unitary counting needs one block, b <= n < 2b");
        step = mulmod(qq, qq, r);
        c.index = 2 * f;
        c.shape = n == b ? "[L]" : "[L, I" + std::to_string(n - b) + "]";
        field_order = 2 * f;
        break;
    }
    case Family::Symplectic:
    case Family::OrthogonalPlus:
    case Family::OrthogonalMinus:
    case Family::OrthogonalOdd: {
        const unsigned span = i % 2 == 0 ? i : 2 * i;
        if (span > n || 2 * span <= n) throw unsupported("needs one block of dimension more than n/2");
        paired = i % 2 == 1;
        const unsigned rest = n - span;
        if (g.family == Family::OrthogonalPlus || g.family == Family::OrthogonalMinus) {
            const int block = paired ? 1 : -1;
            if (rest == 0 && block != g.eps()) throw unsupported("block type does not match the form");
        }
        c.shape = std::string(paired ? "[(L,L^-1)" : "[L") + (rest ? ", I" + std::to_string(rest) : "") + "]";
        field_order = f;
        if (g.family == Family::Symplectic) {
            c.index = (n == 4 && p == 2) ? 2 * f : f;
            exact_known = !(n == 4 && p == 2);
        } else if (g.family == Family::OrthogonalOdd) {
            c.index = f;
        } else if (g.family == Family::OrthogonalPlus && n == 8) {
            c.index = 6 * f;
            exact_known = false;
        } else {
            c.index = 2 * f;
        }
        if (paired) mults.push_back(r - 1);
        break;
    }
    }

    auto orbits = sigma_orbits(r, step);
    c.inndiag = paired ? multiplier_orbits(orbits, {r - 1}).size() : orbits.size();
    c.lower_bound = (c.inndiag + c.index - 1) / c.index;
    // p^k with k >= field_order is a power of the step and acts trivially.
    if (aut.k < field_order) mults.push_back(powmod(p, aut.k, r));
    if (exact_known) c.exact = multiplier_orbits(orbits, mults).size();
    return c;
}

bool valid_jordan(Family family, const std::vector<unsigned>& partition, unsigned n, u64 p)
{
    unsigned sum = 0;
    std::map<unsigned, unsigned> mult;
    for (unsigned b : partition) {
        sum += b;
        ++mult[b];
    }
    if (sum != n)
        throw PartitionDimensionMismatch("block sizes sum to " + std::to_string(sum) + ", expected " + std::to_string(n));
    for (auto [b, a] : mult)
        if (b == 0 || b > p) return false;
    if (family == Family::Linear || family == Family::Unitary || p == 2) return true;
    const bool symplectic = family == Family::Symplectic;
    for (auto [b, a] : mult)
        if ((b % 2 == 1) == symplectic && a % 2 == 1) return false;
    return true;
}

// ---------------------------------------------------------------- expressions

namespace {

struct ExprParser {
    std::string_view s;
    long n, j;
    std::size_t pos = 0;
    bool exact = true;

    void skip()
    {
        while (pos < s.size() && s[pos] == ' ') ++pos;
    }
    long atom()
    {
        skip();
        if (pos >= s.size()) throw DataError("expression '" + std::string(s) + "' ends early");
        char c = s[pos];
        if (c == '(') {
            ++pos;
            long v = sum();
            skip();
            if (pos >= s.size() || s[pos] != ')') throw DataError("unbalanced '(' in '" + std::string(s) + "'");
            ++pos;
            return v;
        }
        if (c == '-') {
            ++pos;
            return -atom();
        }
        if (c == 'n') return ++pos, n;
        if (c == 'j') return ++pos, j;
        if (std::isdigit(static_cast<unsigned char>(c))) {
            long v = 0;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) v = 10 * v + (s[pos++] - '0');
            return v;
        }
        throw DataError("bad character '" + std::string(1, c) + "' in '" + std::string(s) + "'");
    }
    long product()
    {
        long v = atom();
        for (;;) {
            skip();
            if (pos < s.size() && (s[pos] == '*' || s[pos] == '/')) {
                char op = s[pos++];
                long w = atom();
                if (op == '*') {
                    v *= w;
                } else {
                    if (w == 0 || v % w != 0) exact = false;
                    v = w == 0 ? 0 : v / w;
                }
            } else {
                return v;
            }
        }
    }
    long sum()
    {
        long v = product();
        for (;;) {
            skip();
            if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
                char op = s[pos++];
                long w = product();
                v = op == '+' ? v + w : v - w;
            } else {
                return v;
            }
        }
    }
};

} // namespace

std::optional<long> eval_expr(std::string_view expr, long n, long j)
{
    ExprParser p{expr, n, j};
    long v = p.sum();
    p.skip();
    if (p.pos != expr.size()) throw DataError("trailing text in expression '" + std::string(expr) + "'");
    if (!p.exact) return std::nullopt;
    return v;
}

// ---------------------------------------------------------------- catalog

std::string to_string(RecordKind k)
{
    switch (k) {
    case RecordKind::Witness: return "witness";
    case RecordKind::Count: return "count";
    case RecordKind::Excluded: return "excluded";
    case RecordKind::Computed: return "computed";
    }
    return "?";
}

namespace {

RecordKind kind_from_string(const std::string& s)
{
    if (s == "witness") return RecordKind::Witness;
    if (s == "count") return RecordKind::Count;
    if (s == "excluded") return RecordKind::Excluded;
    if (s == "computed") return RecordKind::Computed;
    throw DataError("unknown record kind '" + s + "'");
}

bool is_unipotent_template(const std::string& shape) { return !shape.empty() && shape[0] == 'J'; }

// Predicates take the label plus the ambient family; sign suffixes are "+" or "-".
struct Predicate {
    std::string name;
    int arg = 0;   // k for sub:k and C3:k
    int sign = 0;  // +1, -1, or 0 when absent
    bool e0 = false;
};

int parse_sign(const std::string& s)
{
    if (s == "+") return 1;
    if (s == "-") return -1;
    throw DataError("expected '+' or '-', got '" + s + "'");
}

Predicate parse_predicate(std::string_view text)
{
    auto parts = split(std::string(text), ':');
    Predicate p;
    p.name = parts.at(0);
    static const std::set<std::string> plain{"nondeg1", "ts1", "tisSO", "tisU", "notselfdual", "e!=1", "nd2"};
    if (plain.count(p.name) && parts.size() == 1) return p;
    if (p.name == "nd2" && parts.size() == 2) return p.sign = parse_sign(parts[1]), p;
    if ((p.name == "hyperplane" || p.name == "orthtype") && parts.size() == 2) return p.sign = parse_sign(parts[1]), p;
    if (p.name == "jordan" && parts.size() == 2 && (parts[1] == "S" || parts[1] == "O")) {
        p.arg = parts[1] == "S" ? 0 : 1;
        return p;
    }
    if ((p.name == "sub" || p.name == "C3") && parts.size() >= 2) {
        p.arg = std::stoi(parts[1]);
        if (p.arg <= 0) throw DataError("predicate argument must be positive");
        if (p.name == "C3" && parts.size() == 3 && parts[2] == "e0") return p.e0 = true, p;
        if (parts.size() == 2) return p;
    }
    throw DataError("unknown predicate '" + std::string(text) + "'");
}

int ambient_sign(Family f)
{
    if (f == Family::OrthogonalPlus) return 1;
    if (f == Family::OrthogonalMinus) return -1;
    return 0;
}

bool has_small_orbit(const ClassLabel& l, std::size_t at_most)
{
    return std::any_of(l.orbits.begin(), l.orbits.end(), [&](auto& oa) { return oa.first.size() <= at_most; });
}

// Dimensions of x-invariant subspaces of a semisimple element: sums of whole
// eigenvalue blocks plus any piece of the 1-eigenspace.
std::set<unsigned> invariant_dims(const ClassLabel& l)
{
    std::set<unsigned> dims{0};
    for (auto& [o, a] : l.orbits) {
        std::set<unsigned> next;
        for (unsigned d : dims)
            for (unsigned c = 0; c <= a; ++c) next.insert(d + c * static_cast<unsigned>(o.size()));
        dims = std::move(next);
    }
    std::set<unsigned> out;
    for (unsigned d : dims)
        for (unsigned c = 0; c <= l.e; ++c) out.insert(d + c);
    return out;
}

bool eval_predicate(const Predicate& pr, const ClassLabel& l, Family family)
{
    const bool ss = l.kind == LabelKind::Semisimple;
    const unsigned n = l.dimension();
    // Type of the 1-eigenspace in an even-dimensional orthogonal space.
    auto cv_type = [&] { return ambient_sign(family) * l.block_type(); };
    const std::string& k = pr.name;
    if (k == "sub") return ss && !invariant_dims(l).count(static_cast<unsigned>(pr.arg));
    if (k == "nondeg1") return ss ? l.e == 0 && !has_small_orbit(l, 1) : l.multiplicity(1) == 0;
    if (k == "ts1") {
        if (!ss || has_small_orbit(l, 1)) return false;
        if (l.e <= 1) return true;
        return l.e == 2 && ambient_sign(family) != 0 && cv_type() == -1;
    }
    if (k == "hyperplane")
        return ss ? !has_small_orbit(l, 1) && (l.e == 0 || (l.e == 1 && l.block_type() != pr.sign))
                  : l.multiplicity(1) == 0;
    if (k == "nd2") {
        if (!ss || has_small_orbit(l, 2)) return false;
        if (l.e < 2) return true;
        return l.e == 2 && pr.sign != 0 && ambient_sign(family) != 0 && cv_type() != pr.sign;
    }
    if (k == "C3") {
        if (ss) return pr.e0 ? l.e > 0 : l.e % pr.arg != 0;
        const unsigned kk = static_cast<unsigned>(pr.arg);
        bool all_div = std::all_of(l.blocks.begin(), l.blocks.end(), [&](auto ba) { return ba.second % kk == 0; });
        bool special = kk == l.p && l.blocks.size() == 1 && l.blocks[0].first == kk;
        return !all_div && !special;
    }
    if (k == "tisSO") {
        return ss && n % 4 == 0 && l.orbits.size() == 1 && l.orbits[0].second == 1 &&
               l.orbits[0].first.size() == n / 2 && l.e == n / 2;
    }
    if (k == "tisU") {
        if (!ss || l.e != 0 || l.orbits.size() != 2) return false;
        auto [o1, a1] = l.orbits[0];
        auto [o2, a2] = l.orbits[1];
        if (n % 8 == 4)
            return o1.size() == n / 4 && o2.size() == n / 4 && ((a1 == 3 && a2 == 1) || (a1 == 1 && a2 == 3));
        if (n % 8 == 2 || n % 8 == 6) return o1.size() == n / 2 && o2.size() == n / 2 && a1 == 1 && a2 == 1;
        return false;
    }
    if (k == "jordan") {
        if (ss) return false;
        return !valid_jordan(pr.arg == 0 ? Family::Symplectic : Family::OrthogonalOdd, l.partition(), n, l.p);
    }
    if (k == "notselfdual") {
        if (!ss) return false;
        for (auto& [o, a] : l.orbits) {
            auto inv = o.inverse();
            auto it = std::find_if(l.orbits.begin(), l.orbits.end(), [&](auto& ob) { return ob.first == inv; });
            if (it == l.orbits.end() || it->second != a) return true;
        }
        return false;
    }
    if (k == "orthtype") return ss && l.e == 0 && l.block_type() != pr.sign;
    if (k == "e!=1") return ss && l.e != 1;
    throw DataError("unhandled predicate '" + k + "'");
}

} // namespace

bool predicate_holds(std::string_view predicate, const ClassLabel& label, Family family)
{
    return eval_predicate(parse_predicate(predicate), label, family);
}

std::vector<WitnessRecord> parse_witnesses(std::istream& in, const std::string& source)
{
    std::vector<WitnessRecord> out;
    std::string raw;
    int line = 0;
    auto fail = [&](const std::string& why) { return DataError(source + ":" + std::to_string(line) + ": " + why); };
    while (std::getline(in, raw)) {
        ++line;
        std::string s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        auto f = split(s, '|');
        if (f.size() != 11) throw fail("expected 11 fields, got " + std::to_string(f.size()));
        WitnessRecord r;
        r.line = line;
        r.case_id = f[0];
        try {
            r.family = gf::family_from_string(f[1]);
            for (auto& v : split(f[2], ',')) r.n_values.push_back(static_cast<unsigned>(std::stoul(v)));
            r.kind = kind_from_string(f[4]);
            if (r.kind == RecordKind::Witness) parse_predicate(f[7]);
        } catch (const DataError& e) {
            throw fail(e.what());
        } catch (const std::exception& e) {
            throw fail(std::string("bad field: ") + e.what());
        }
        r.subgroup = f[3];
        r.shape = f[5];
        r.prime = f[6];
        r.predicate = f[7];
        r.action = f[8];
        if (f[9] != "-")
            for (auto& c : split(f[9], ';')) r.conditions.push_back(c);
        r.note = f[10];
        if (r.case_id.empty() || r.shape.empty()) throw fail("empty case id or shape");
        out.push_back(std::move(r));
    }
    // One predicate per (case, label kind).
    std::map<std::pair<std::string, bool>, std::string> seen;
    for (auto& r : out) {
        if (r.kind != RecordKind::Witness) continue;
        auto key = std::make_pair(r.case_id, is_unipotent_template(r.shape));
        auto [it, fresh] = seen.emplace(key, r.predicate);
        if (!fresh && it->second != r.predicate)
            throw DataError(source + ":" + std::to_string(r.line) + ": case " + r.case_id +
                            " has two predicates for one label kind");
    }
    return out;
}

std::vector<WitnessRecord> load_witnesses(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return parse_witnesses(in, path);
}

const std::vector<WitnessRecord>& witness_catalog()
{
    static const std::vector<WitnessRecord> cat = load_witnesses(gf::data_dir() + "/witnesses.txt");
    return cat;
}

std::vector<std::string> known_case_ids()
{
    std::vector<std::string> ids;
    for (auto& r : witness_catalog())
        if (std::find(ids.begin(), ids.end(), r.case_id) == ids.end()) ids.push_back(r.case_id);
    return ids;
}

bool derangement_predicate(std::string_view case_id, const ClassLabel& label)
{
    const auto& cat = witness_catalog();
    bool known = false;
    const bool uni = label.kind == LabelKind::Unipotent;
    for (auto& r : cat) {
        if (r.case_id != case_id) continue;
        known = true;
        if (r.kind == RecordKind::Witness && is_unipotent_template(r.shape) == uni)
            return predicate_holds(r.predicate, label, r.family);
    }
    if (!known) {
        std::string ids;
        for (auto& id : known_case_ids()) ids += (ids.empty() ? "" : " ") + id;
        throw UnknownCase("unknown case '" + std::string(case_id) + "'; known: " + ids);
    }
    throw PreconditionViolation("case " + std::string(case_id) + " has no criterion for " +
                                (uni ? "unipotent" : "semisimple") + " labels");
}

// ---------------------------------------------------------------- instantiation

namespace {

std::optional<u64> choose_prime(const std::string& spec, unsigned n, const PrimePower& q)
{
    auto open = spec.find('('), close = spec.rfind(')');
    if (open == std::string::npos || close == std::string::npos) throw DataError("bad prime spec '" + spec + "'");
    auto e = eval_expr(std::string_view(spec).substr(open + 1, close - open - 1), n);
    if (!e || *e <= 0) return std::nullopt;
    const std::string head = spec.substr(0, open);
    if (head == "ppd") {
        auto ppds = numth::ppd_set(q.q, static_cast<unsigned>(*e));
        if (ppds.empty() || !ppds.front().fits_ulong_p()) return std::nullopt;
        return ppds.front().get_ui();
    }
    if (head == "odd-" || head == "odd+") {
        BigInt v = numth::pow(q.q, static_cast<unsigned long>(*e)) + (head == "odd+" ? 1 : -1);
        for (auto& pr : numth::factor(v).primes()) {
            if (pr == 2 || !pr.fits_ulong_p()) continue;
            if (mpz_divisible_p(BigInt(q.q - 1).get_mpz_t(), pr.get_mpz_t())) continue;
            return pr.get_ui();
        }
        return std::nullopt;
    }
    throw DataError("bad prime spec '" + spec + "'");
}

struct Token {
    char letter;
    std::string size;  // or Jordan block size
    std::string mult;
};

std::vector<Token> tokenize_template(const std::string& shape)
{
    std::vector<Token> out;
    std::istringstream is(shape);
    std::string w;
    while (is >> w) {
        Token t{w[0], "", "1"};
        std::string rest = w.substr(1);
        std::string body = rest, power;
        // Split off "^m" at the top level.
        int depth = 0;
        for (std::size_t i = 0; i < rest.size(); ++i) {
            if (rest[i] == '(') ++depth;
            if (rest[i] == ')') --depth;
            if (rest[i] == '^' && depth == 0) {
                body = rest.substr(0, i);
                power = rest.substr(i + 1);
                break;
            }
        }
        if (!power.empty()) t.mult = power;
        if (t.letter == 'J') {
            t.size = body;
        } else {
            if (body.size() < 2 || body.front() != '(' || body.back() != ')')
                throw DataError("bad template token '" + w + "'");
            t.size = body.substr(1, body.size() - 2);
        }
        if (std::string("LMPFIJ").find(t.letter) == std::string::npos) throw DataError("bad template token '" + w + "'");
        out.push_back(t);
    }
    return out;
}

} // namespace

std::optional<ClassLabel> instantiate(const WitnessRecord& rec, unsigned n, const PrimePower& q)
{
    if (rec.kind != RecordKind::Witness) return std::nullopt;
    for (auto& c : rec.conditions)
        if (!gf::condition_holds(c, n, q)) return std::nullopt;
    auto toks = tokenize_template(rec.shape);
    auto num = [&](const std::string& e, long j) -> std::optional<long> {
        auto v = eval_expr(e, n, j);
        if (!v || *v < 0) return std::nullopt;
        return v;
    };

    if (rec.prime == "p") {
        std::vector<unsigned> part;
        for (auto& t : toks) {
            if (t.letter != 'J') throw DataError("unipotent template mixes in '" + std::string(1, t.letter) + "'");
            auto sz = num(t.size, 0), m = num(t.mult, 0);
            if (!sz || !m || *sz == 0) return std::nullopt;
            part.insert(part.end(), static_cast<std::size_t>(*m), static_cast<unsigned>(*sz));
        }
        unsigned sum = 0;
        for (unsigned b : part) sum += b;
        if (sum != n) return std::nullopt;
        if (!valid_jordan(rec.family, part, n, q.p_ul())) return std::nullopt;
        return ClassLabel::unipotent(part, q.p_ul());
    }

    auto r = choose_prime(rec.prime, n, q);
    if (!r || *r < 3) return std::nullopt;
    const bool unitary = rec.family == Family::Unitary;
    const u64 qq = q_mod(q, *r);
    const u64 step = unitary ? mulmod(qq, qq, *r) : qq;
    const long j = static_cast<long>(order_mod(step, *r));
    auto orbits = sigma_orbits(*r, step);
    const bool form = rec.family != Family::Linear;
    // A block is usable on its own when the form allows it: self-dual under the form's duality.
    auto usable = [&](const OrbitLabel& o) {
        if (!form) return true;
        if (unitary) return o.contains(mulmod(r.value() - o.min(), qq, *r));
        return o.self_inverse();
    };

    std::vector<std::pair<OrbitLabel, unsigned>> parts;
    std::vector<OrbitLabel> used;
    unsigned e = 0;
    auto fresh = [&](const OrbitLabel& o) {
        return std::none_of(used.begin(), used.end(), [&](auto& u) { return u == o || u == o.inverse(); });
    };
    for (auto& t : toks) {
        auto sz = num(t.size, j), m = num(t.mult, j);
        if (!sz || !m) return std::nullopt;
        if (t.letter == 'I') {
            if (t.mult != "1") throw DataError("I(d) takes no multiplicity");
            e += static_cast<unsigned>(*sz);
            continue;
        }
        if (t.letter == 'J') throw DataError("semisimple template contains a Jordan block");
        if (*m == 0 || *sz == 0) continue;
        if (t.letter == 'F') {
            const auto& o = orbits.front();
            if (usable(o)) {
                if (*sz % j) return std::nullopt;
                parts.emplace_back(o, static_cast<unsigned>(*sz / j));
            } else {
                if (*sz % (2 * j) || unitary) return std::nullopt;
                parts.emplace_back(o, static_cast<unsigned>(*sz / (2 * j)));
                parts.emplace_back(o.inverse(), static_cast<unsigned>(*sz / (2 * j)));
            }
            used.push_back(o);
            continue;
        }
        if (*sz != j) return std::nullopt;
        const bool pair = t.letter == 'P';
        auto it = std::find_if(orbits.begin(), orbits.end(),
                               [&](const OrbitLabel& o) { return fresh(o) && (pair ? !o.self_inverse() : usable(o)); });
        if (it == orbits.end()) return std::nullopt;
        used.push_back(*it);
        parts.emplace_back(*it, static_cast<unsigned>(*m));
        if (pair) parts.emplace_back(it->inverse(), static_cast<unsigned>(*m));
    }
    if (parts.empty()) return std::nullopt;
    auto label = ClassLabel::semisimple(parts, e);
    if (label.dimension() != n) return std::nullopt;
    return label;
}

} // namespace elusive::cc
