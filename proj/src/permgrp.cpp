#include "elusive/permgrp.hpp"

#include "elusive/errors.hpp"
#include "elusive/matgrp.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace elusive::pg {

namespace {

std::string key_of(const std::vector<Point>& v)
{
    return std::string(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(Point));
}

bool is_prime_small(unsigned long n)
{
    if (n < 2) return false;
    for (unsigned long d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Smallest prime dividing n (n >= 2).
unsigned long least_prime(unsigned long n)
{
    for (unsigned long d = 2; d * d <= n; ++d)
        if (n % d == 0) return d;
    return n;
}

struct UnionFind {
    std::vector<std::uint32_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
    std::uint32_t find(std::uint32_t x)
    {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(std::uint32_t a, std::uint32_t b)
    {
        a = find(a), b = find(b);
        if (a == b) return false;
        parent[std::max(a, b)] = std::min(a, b);
        return true;
    }
};

} // namespace

// ---------------------------------------------------------------- Perm

Perm::Perm(std::vector<Point> images) : img_(std::move(images))
{
    std::vector<char> seen(img_.size(), 0);
    for (Point x : img_) {
        if (x >= img_.size() || seen[x]) throw PreconditionViolation("image list is not a permutation");
        seen[x] = 1;
    }
}

Perm Perm::identity(std::size_t degree)
{
    Perm p;
    p.img_.resize(degree);
    std::iota(p.img_.begin(), p.img_.end(), Point{0});
    return p;
}

void Perm::multiply(const Perm& a, const Perm& b, Perm& out)
{
    out.img_.resize(a.img_.size());
    for (std::size_t x = 0; x < a.img_.size(); ++x) out.img_[x] = b.img_[a.img_[x]];
}

Perm Perm::operator*(const Perm& o) const
{
    if (o.degree() != degree()) throw PreconditionViolation("permutation degrees differ");
    Perm out;
    multiply(*this, o, out);
    return out;
}

Perm Perm::inverse() const
{
    Perm out;
    out.img_.resize(img_.size());
    for (std::size_t x = 0; x < img_.size(); ++x) out.img_[img_[x]] = static_cast<Point>(x);
    return out;
}

Perm Perm::pow(unsigned long e) const
{
    Perm result = identity(degree()), b = *this;
    for (; e; e >>= 1, b = b * b)
        if (e & 1) result = result * b;
    return result;
}

bool Perm::is_identity() const
{
    for (std::size_t x = 0; x < img_.size(); ++x)
        if (img_[x] != x) return false;
    return true;
}

std::size_t Perm::fixed_points() const
{
    std::size_t n = 0;
    for (std::size_t x = 0; x < img_.size(); ++x) n += img_[x] == x;
    return n;
}

std::vector<std::size_t> Perm::cycle_type() const
{
    std::vector<char> seen(img_.size(), 0);
    std::vector<std::size_t> out;
    for (std::size_t x = 0; x < img_.size(); ++x) {
        if (seen[x]) continue;
        std::size_t len = 0;
        for (std::size_t y = x; !seen[y]; y = img_[y]) seen[y] = 1, ++len;
        out.push_back(len);
    }
    std::sort(out.begin(), out.end());
    return out;
}

unsigned long Perm::order() const
{
    unsigned long o = 1;
    for (std::size_t c : cycle_type()) o = std::lcm(o, static_cast<unsigned long>(c));
    return o;
}

std::string Perm::str() const
{
    std::ostringstream os;
    std::vector<char> seen(img_.size(), 0);
    for (std::size_t x = 0; x < img_.size(); ++x) {
        if (seen[x] || img_[x] == x) continue;
        os << "(";
        for (std::size_t y = x; !seen[y]; y = img_[y]) {
            seen[y] = 1;
            os << y << (img_[y] == x ? "" : ",");
        }
        os << ")";
    }
    auto s = os.str();
    return s.empty() ? "()" : s;
}

Perm conjugate(const Perm& g, const Perm& x) { return x.inverse() * g * x; }

// ---------------------------------------------------------------- BSGS

BSGS::BSGS(std::vector<Perm> gens, std::vector<Point> base_prefix) : gens_(std::move(gens))
{
    degree_ = gens_.empty() ? 0 : gens_.front().degree();
    if (degree_ > 1'000'000) throw DegreeTooLarge("degree " + std::to_string(degree_) + " exceeds 10^6");
    for (auto& g : gens_)
        if (g.degree() != degree_) throw PreconditionViolation("generators have different degrees");
    for (Point b : base_prefix) {
        if (b >= degree_) throw PreconditionViolation("base point out of range");
        if (std::find(base_.begin(), base_.end(), b) == base_.end()) base_.push_back(b);
    }
    for (auto& g : gens_)
        if (!g.is_identity()) strong_.push_back(g);
    for (auto& s : strong_) {
        bool moves = false;
        for (Point b : base_) moves = moves || s(b) != b;
        if (moves) continue;
        for (Point x = 0; x < degree_; ++x)
            if (s(x) != x) {
                base_.push_back(x);
                break;
            }
    }
    lv_.resize(base_.size());
    for (std::size_t i = 0; i < base_.size(); ++i) {
        for (std::size_t t = 0; t < strong_.size(); ++t) {
            bool fixes = true;
            for (std::size_t j = 0; j < i && fixes; ++j) fixes = strong_[t](base_[j]) == base_[j];
            if (fixes) lv_[i].gens.push_back(t);
        }
        rebuild_level(i);
    }
    schreier_sims();
    finish();
}

void BSGS::rebuild_level(std::size_t i)
{
    auto& L = lv_[i];
    L.orbit.assign(1, base_[i]);
    L.pos.assign(degree_, -1);
    L.pos[base_[i]] = 0;
    L.u.assign(1, Perm::identity(degree_));
    L.u_inv.assign(1, Perm::identity(degree_));
    for (std::size_t k = 0; k < L.orbit.size(); ++k)
        for (std::size_t t : L.gens) {
            const Perm& s = strong_[t];
            Point y = s(L.orbit[k]);
            if (L.pos[y] >= 0) continue;
            L.pos[y] = static_cast<std::int32_t>(L.orbit.size());
            L.orbit.push_back(y);
            L.u.push_back(L.u[k] * s);
            L.u_inv.push_back(L.u.back().inverse());
        }
}

std::pair<Perm, std::size_t> BSGS::sift(Perm g, std::size_t from) const
{
    Perm tmp;
    for (std::size_t l = from; l < base_.size(); ++l) {
        std::int32_t p = lv_[l].pos[g(base_[l])];
        if (p < 0) return {g, l};
        Perm::multiply(g, lv_[l].u_inv[static_cast<std::size_t>(p)], tmp);
        std::swap(g, tmp);
    }
    return {g, base_.size()};
}

void BSGS::schreier_sims()
{
    long i = static_cast<long>(base_.size()) - 1;
    while (i >= 0) {
        bool restarted = false;
        auto& L = lv_[static_cast<std::size_t>(i)];
        for (std::size_t a = 0; a < L.orbit.size() && !restarted; ++a)
            for (std::size_t gi = 0; gi < lv_[static_cast<std::size_t>(i)].gens.size() && !restarted; ++gi) {
                const auto& Li = lv_[static_cast<std::size_t>(i)];
                const Perm& s = strong_[Li.gens[gi]];
                Point img = s(Li.orbit[a]);
                Perm h = Li.u[a] * s * Li.u_inv[static_cast<std::size_t>(Li.pos[img])];
                if (h.is_identity()) continue;
                auto [res, j] = sift(std::move(h), static_cast<std::size_t>(i) + 1);
                if (res.is_identity()) continue;
                if (j == base_.size()) {
                    for (Point x = 0; x < degree_; ++x)
                        if (res(x) != x) {
                            base_.push_back(x);
                            break;
                        }
                    lv_.emplace_back();
                }
                strong_.push_back(res);
                const std::size_t t = strong_.size() - 1;
                for (std::size_t l = 0; l <= j; ++l) {
                    lv_[l].gens.push_back(t);
                    rebuild_level(l);
                }
                i = static_cast<long>(j);
                restarted = true;
            }
        if (!restarted) --i;
    }
}

void BSGS::finish()
{
    stride_.assign(base_.size(), 1);
    unsigned long long ord = 1;
    for (std::size_t l = 0; l < base_.size(); ++l) {
        stride_[l] = ord;
        if (ord > 1'000'000'000'000ULL / lv_[l].orbit.size()) throw GroupTooLarge("group order exceeds 10^12");
        ord *= lv_[l].orbit.size();
    }
}

std::vector<Perm> BSGS::stabilizer_generators(std::size_t level) const
{
    std::vector<Perm> out;
    if (level < base_.size()) {
        for (std::size_t t : lv_[level].gens) out.push_back(strong_[t]);
    }
    return out;
}

unsigned long long BSGS::order() const
{
    unsigned long long o = 1;
    for (auto& L : lv_) o *= L.orbit.size();
    return o;
}

bool BSGS::contains(const Perm& g) const
{
    if (g.degree() != degree_) return false;
    return sift(g, 0).first.is_identity();
}

std::optional<std::uint64_t> BSGS::index_of(const Perm& g) const
{
    if (g.degree() != degree_) return std::nullopt;
    Perm x = g, tmp;
    std::uint64_t idx = 0;
    for (std::size_t l = 0; l < base_.size(); ++l) {
        std::int32_t p = lv_[l].pos[x(base_[l])];
        if (p < 0) return std::nullopt;
        idx += static_cast<std::uint64_t>(p) * stride_[l];
        Perm::multiply(x, lv_[l].u_inv[static_cast<std::size_t>(p)], tmp);
        std::swap(x, tmp);
    }
    if (!x.is_identity()) return std::nullopt;
    return idx;
}

Perm BSGS::element(std::uint64_t index) const
{
    if (index >= order()) throw OutOfRange("element index out of range");
    Perm g = Perm::identity(degree_), tmp;
    for (std::size_t l = base_.size(); l-- > 0;) {
        std::size_t c = (index / stride_[l]) % lv_[l].orbit.size();
        Perm::multiply(g, lv_[l].u[c], tmp);
        std::swap(g, tmp);
    }
    return g;
}

// ---------------------------------------------------------------- random elements

RandomElements::RandomElements(const std::vector<Perm>& gens, std::uint64_t seed) : rng_(seed)
{
    if (gens.empty()) throw PreconditionViolation("random elements need generators");
    while (state_.size() < 10)
        for (auto& g : gens) state_.push_back(g);
    acc_ = Perm::identity(gens.front().degree());
    for (int i = 0; i < 60; ++i) step();
}

void RandomElements::step()
{
    std::uniform_int_distribution<std::size_t> pick(0, state_.size() - 1);
    std::size_t i = pick(rng_), j = pick(rng_);
    while (j == i) j = pick(rng_);
    const bool inv = rng_() & 1;
    state_[i] = inv ? state_[i] * state_[j].inverse() : state_[i] * state_[j];
    acc_ = acc_ * state_[i];
}

Perm RandomElements::next()
{
    step();
    return acc_;
}

Perm random_element(const BSGS& G, std::mt19937_64& rng)
{
    std::uniform_int_distribution<std::uint64_t> d(0, G.order() - 1);
    return G.element(d(rng));
}

// ---------------------------------------------------------------- actions

std::size_t SetAction::fixed_points(const Perm& x) const
{
    std::size_t fixed = 0;
    for (auto& obj : objects) {
        bool ok = true;
        for (Point p : obj)
            if (!std::binary_search(obj.begin(), obj.end(), x(p))) {
                ok = false;
                break;
            }
        fixed += ok;
    }
    return fixed;
}

Perm SetAction::induced(const Perm& x) const
{
    std::vector<Point> img(objects.size());
    std::vector<Point> buf;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        buf.clear();
        for (Point p : objects[i]) buf.push_back(x(p));
        std::sort(buf.begin(), buf.end());
        auto it = index.find(key_of(buf));
        if (it == index.end()) throw NotASubgroup("element moves an object outside the orbit");
        img[i] = it->second;
    }
    return Perm(std::move(img));
}

SetAction set_action(const std::vector<Perm>& gens, std::vector<Point> seed, std::size_t limit)
{
    SetAction act;
    std::sort(seed.begin(), seed.end());
    seed.erase(std::unique(seed.begin(), seed.end()), seed.end());
    act.index.emplace(key_of(seed), 0);
    act.objects.push_back(std::move(seed));
    std::vector<std::vector<Point>> imgs(gens.size());
    std::vector<Point> buf;
    for (std::size_t i = 0; i < act.objects.size(); ++i)
        for (std::size_t g = 0; g < gens.size(); ++g) {
            buf.clear();
            for (Point p : act.objects[i]) buf.push_back(gens[g](p));
            std::sort(buf.begin(), buf.end());
            auto [it, fresh] = act.index.emplace(key_of(buf), static_cast<std::uint32_t>(act.objects.size()));
            if (fresh) {
                act.objects.push_back(buf);
                if (act.objects.size() > limit) throw IndexTooLarge("orbit exceeds " + std::to_string(limit) + " objects");
            }
            imgs[g].push_back(it->second);
        }
    for (auto& v : imgs) act.perms.emplace_back(std::move(v));
    return act;
}

std::vector<Perm> set_stabilizer(const std::vector<Perm>& gens, const std::vector<Point>& set)
{
    if (gens.empty()) return {};
    const std::size_t n = gens.front().degree();
    auto act = set_action(gens, set);
    std::vector<Perm> combined;
    for (std::size_t g = 0; g < gens.size(); ++g) {
        std::vector<Point> img(gens[g].images());
        for (Point x : act.perms[g].images()) img.push_back(static_cast<Point>(n + x));
        combined.emplace_back(std::move(img));
    }
    BSGS chain(combined, {static_cast<Point>(n)});
    std::vector<Perm> out;
    for (auto& s : chain.stabilizer_generators(1)) {
        std::vector<Point> img(s.images().begin(), s.images().begin() + static_cast<std::ptrdiff_t>(n));
        Perm p(std::move(img));
        if (!p.is_identity()) out.push_back(std::move(p));
    }
    if (out.empty()) out.push_back(Perm::identity(n));
    return out;
}

std::vector<Perm> coset_action(const BSGS& G, const std::vector<Perm>& h_gens, std::size_t max_index)
{
    for (auto& h : h_gens)
        if (!G.contains(h)) throw NotASubgroup("a generator of H is not in G");
    BSGS H(h_gens.empty() ? std::vector<Perm>{Perm::identity(G.degree())} : h_gens, G.base());
    if (G.order() % H.order() != 0) throw NotASubgroup("|H| does not divide |G|");
    const auto index = G.order() / H.order();
    if (index > max_index) throw IndexTooLarge("index " + std::to_string(index) + " exceeds " + std::to_string(max_index));

    const auto& base = H.base();  // G's base, possibly extended
    // Canonical element of the coset Hx: minimise base images level by level.
    auto canon = [&](Perm x) {
        Perm tmp;
        for (std::size_t l = 0; l < H.levels(); ++l) {
            const auto& orb = H.orbit(l);
            std::size_t best = 0;
            for (std::size_t i = 1; i < orb.size(); ++i)
                if (x(orb[i]) < x(orb[best])) best = i;
            Perm::multiply(H.transversal(l, best), x, tmp);
            std::swap(x, tmp);
        }
        std::vector<Point> key;
        for (Point b : base) key.push_back(x(b));
        return std::make_pair(key_of(key), x);
    };
    std::unordered_map<std::string, std::uint32_t> idx;
    std::vector<Perm> reps;
    auto [k0, x0] = canon(Perm::identity(G.degree()));
    idx.emplace(k0, 0);
    reps.push_back(x0);
    std::vector<std::vector<Point>> imgs(G.generators().size());
    for (std::size_t i = 0; i < reps.size(); ++i)
        for (std::size_t g = 0; g < G.generators().size(); ++g) {
            auto [k, x] = canon(reps[i] * G.generators()[g]);
            auto [it, fresh] = idx.emplace(k, static_cast<std::uint32_t>(reps.size()));
            if (fresh) reps.push_back(std::move(x));
            imgs[g].push_back(it->second);
        }
    if (reps.size() != index) throw Error("coset enumeration found " + std::to_string(reps.size()) + " cosets, expected " + std::to_string(index));
    std::vector<Perm> out;
    for (auto& v : imgs) out.emplace_back(std::move(v));
    return out;
}

bool is_transitive(const std::vector<Perm>& gens, std::size_t degree)
{
    if (degree <= 1) return true;
    std::vector<char> seen(degree, 0);
    std::vector<Point> queue{0};
    seen[0] = 1;
    for (std::size_t i = 0; i < queue.size(); ++i)
        for (auto& g : gens) {
            Point y = g(queue[i]);
            if (!seen[y]) seen[y] = 1, queue.push_back(y);
        }
    return queue.size() == degree;
}

bool is_primitive(const std::vector<Perm>& gens, std::size_t degree)
{
    if (!is_transitive(gens, degree)) return false;
    for (Point b = 1; b < degree; ++b) {
        UnionFind uf(degree);
        uf.unite(0, b);
        std::vector<std::pair<Point, Point>> queue{{0, b}};
        for (std::size_t i = 0; i < queue.size(); ++i) {
            auto [a, c] = queue[i];
            for (auto& g : gens) {
                Point x = uf.find(g(a)), y = uf.find(g(c));
                if (x != y) {
                    uf.unite(x, y);
                    queue.push_back({x, y});
                }
            }
        }
        std::size_t block = 0;
        for (Point x = 0; x < degree; ++x) block += uf.find(x) == uf.find(0);
        if (block < degree) return false;
    }
    return true;
}

// ---------------------------------------------------------------- classes

long ClassTable::class_of(const Perm& g) const
{
    auto idx = G_->index_of(g);
    if (!idx) throw NotASubgroup("element is not in the group");
    return static_cast<long>(id_[*idx]) - 1;
}

std::uint64_t ClassTable::elements_of_order(unsigned long r) const
{
    auto it = counts_.find(r);
    return it == counts_.end() ? 0 : it->second;
}

ClassTable prime_order_classes(const BSGS& G, std::uint64_t max_order)
{
    const std::uint64_t N = G.order();
    if (N > max_order) throw GroupTooLarge("group order " + std::to_string(N) + " exceeds " + std::to_string(max_order));
    ClassTable T;
    T.G_ = &G;
    T.id_.assign(N, 0);

    const std::size_t k = G.levels();
    const auto& base = G.base();
    std::vector<std::uint64_t> stride(k, 1);
    for (std::size_t l = 1; l < k; ++l) stride[l] = stride[l - 1] * G.orbit(l - 1).size();
    std::vector<Perm> gens, gens_inv;
    for (auto& g : G.generators())
        if (!g.is_identity()) gens.push_back(g), gens_inv.push_back(g.inverse());

    // Index of y = s^-1 x s from x's coordinates, touching only base points.
    std::vector<std::size_t> cx(k), cy(k);
    auto image = [&](const std::vector<std::size_t>& c, Point p) {  // x(p) for x = u_{k-1} ... u_0
        for (std::size_t l = k; l-- > 0;) p = G.transversal(l, c[l])(p);
        return p;
    };
    std::vector<std::vector<Perm>> u_inv(k);
    for (std::size_t l = 0; l < k; ++l)
        for (std::size_t i = 0; i < G.orbit(l).size(); ++i) u_inv[l].push_back(G.transversal(l, i).inverse());
    std::vector<std::vector<std::int32_t>> pos(k, std::vector<std::int32_t>(G.degree(), -1));
    for (std::size_t l = 0; l < k; ++l)
        for (std::size_t i = 0; i < G.orbit(l).size(); ++i) pos[l][G.orbit(l)[i]] = static_cast<std::int32_t>(i);
    auto conj_index = [&](std::size_t s) {
        std::uint64_t idx = 0;
        for (std::size_t l = 0; l < k; ++l) {
            Point p = gens[s](image(cx, gens_inv[s](base[l])));
            for (std::size_t m = 0; m < l; ++m) p = u_inv[m][cy[m]](p);
            std::int32_t c = pos[l][p];
            if (c < 0) throw Error("conjugate left the group during class closure");
            cy[l] = static_cast<std::size_t>(c);
            idx += static_cast<std::uint64_t>(c) * stride[l];
        }
        return idx;
    };
    auto decode = [&](std::uint64_t idx, std::vector<std::size_t>& c) {
        for (std::size_t l = 0; l < k; ++l) c[l] = (idx / stride[l]) % G.orbit(l).size();
    };

    std::vector<char> seen;
    std::vector<std::uint32_t> stack;
    G.for_each([&](std::uint64_t idx, const Perm& x) {
        if (T.id_[idx]) return true;
        // Prime order: every cycle has length 1 or r.
        const auto& img = x.images();
        seen.assign(img.size(), 0);
        unsigned long r = 0;
        bool prime = true;
        for (std::size_t a = 0; a < img.size() && prime; ++a) {
            if (seen[a] || img[a] == a) continue;
            unsigned long len = 0;
            for (std::size_t y = a; !seen[y]; y = img[y]) seen[y] = 1, ++len;
            if (r == 0) r = len;
            prime = len == r;
        }
        if (!prime || r == 0 || !is_prime_small(r)) return true;
        if (T.classes_.size() >= 65535) throw BudgetExceeded("more than 65535 prime-order classes");
        const auto cid = static_cast<std::uint16_t>(T.classes_.size() + 1);
        ClassRec rec;
        rec.representative = x;
        rec.element_order = r;
        T.id_[idx] = cid;
        stack.assign(1, static_cast<std::uint32_t>(idx));
        std::uint64_t size = 1;
        while (!stack.empty()) {
            std::uint64_t cur = stack.back();
            stack.pop_back();
            decode(cur, cx);
            for (std::size_t s = 0; s < gens.size(); ++s) {
                std::uint64_t y = conj_index(s);
                if (T.id_[y]) continue;
                T.id_[y] = cid;
                ++size;
                stack.push_back(static_cast<std::uint32_t>(y));
            }
        }
        rec.class_size = size;
        T.counts_[r] += size;
        T.classes_.push_back(std::move(rec));
        return true;
    });
    return T;
}

std::vector<std::vector<std::size_t>> class_fusion(ClassTable& table, const std::vector<Perm>& big_gens,
                                                   const std::string& label)
{
    const BSGS& G = table.group();
    for (auto& t : big_gens)
        for (auto& g : G.generators())
            if (!G.contains(conjugate(g, t))) throw NotNormal("the group is not normal in the extension");
    auto& cls = table.classes();
    UnionFind uf(cls.size());
    for (std::size_t c = 0; c < cls.size(); ++c)
        for (auto& t : big_gens) {
            long d = table.class_of(conjugate(cls[c].representative, t));
            if (d < 0) throw Error("conjugate of a prime-order element has another order");
            uf.unite(static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(d));
        }
    std::vector<std::vector<std::size_t>> groups;
    std::vector<long> where(cls.size(), -1);
    for (std::size_t c = 0; c < cls.size(); ++c) {
        auto root = uf.find(static_cast<std::uint32_t>(c));
        if (where[root] < 0) {
            where[root] = static_cast<long>(groups.size());
            groups.emplace_back();
        }
        groups[static_cast<std::size_t>(where[root])].push_back(c);
    }
    if (!label.empty())
        for (auto& grp : groups)
            if (grp.size() > 1)
                for (std::size_t c : grp) cls[c].fused_under.push_back(label);
    return groups;
}

std::string to_string(VerdictKind k)
{
    switch (k) {
    case VerdictKind::Elusive: return "Elusive";
    case VerdictKind::AlmostElusive: return "AlmostElusive";
    case VerdictKind::Neither: return "Neither";
    }
    return "?";
}

std::string Verdict::to_string() const
{
    if (kind == VerdictKind::Elusive) return "Elusive";
    if (kind == VerdictKind::AlmostElusive) return "AlmostElusive(" + std::to_string(r) + ")";
    std::string s = "Neither(" + std::to_string(derangement_classes) + ":";
    for (std::size_t i = 0; i < primes.size(); ++i) s += (i ? "," : " ") + std::to_string(primes[i]);
    return s + ")";
}

namespace {

Verdict make_verdict(std::vector<unsigned long> primes, std::size_t total)
{
    Verdict v;
    std::sort(primes.begin(), primes.end());
    v.derangement_classes = primes.size();
    v.primes = primes;
    v.prime_order_classes = total;
    if (primes.empty()) {
        v.kind = VerdictKind::Elusive;
    } else if (primes.size() == 1) {
        v.kind = VerdictKind::AlmostElusive;
        v.r = primes.front();
    }
    return v;
}

} // namespace

Verdict derangement_verdict(ClassTable& table, const SetAction& omega, std::uint64_t seed, unsigned samples)
{
    if (!is_transitive(omega.perms, omega.degree())) throw NotTransitive("the action is not transitive");
    const auto& gens = table.group().generators();
    std::optional<RandomElements> rnd;
    if (!gens.empty()) rnd.emplace(gens, seed);
    std::vector<unsigned long> primes;
    for (auto& c : table.classes()) {
        c.fixed_points = omega.fixed_points(c.representative);
        for (unsigned i = 0; i < samples && rnd; ++i) {
            Perm y = conjugate(c.representative, rnd->next());
            if (omega.fixed_points(y) != *c.fixed_points) throw Error("fixed-point count is not constant on a class");
        }
        if (*c.fixed_points == 0) primes.push_back(c.element_order);
    }
    return make_verdict(primes, table.classes().size());
}

Verdict socle_verdict(const std::vector<Perm>& gens, const std::vector<Perm>& socle_gens, const SetAction& omega)
{
    if (!is_transitive(omega.perms, omega.degree())) throw NotTransitive("the action is not transitive");
    BSGS G0(socle_gens);
    auto table = prime_order_classes(G0);
    auto groups = class_fusion(table, gens, "G");
    std::vector<unsigned long> primes;
    for (auto& grp : groups) {
        auto& rep = table.classes()[grp.front()];
        if (omega.fixed_points(rep.representative) == 0) primes.push_back(rep.element_order);
    }
    return make_verdict(primes, groups.size());
}

std::optional<Perm> prime_power_derangement(const BSGS& G, const SetAction& omega, std::uint64_t seed)
{
    auto good = [&](const Perm& x) {
        if (x.is_identity()) return false;
        unsigned long o = x.order();
        unsigned long p = least_prime(o);
        while (o % p == 0) o /= p;
        return o == 1 && omega.fixed_points(x) == 0;
    };
    std::mt19937_64 rng(seed);
    for (int i = 0; i < 20000; ++i) {
        Perm x = random_element(G, rng);
        if (good(x)) return x;
    }
    std::optional<Perm> found;
    G.for_each([&](std::uint64_t, const Perm& x) {
        if (!good(x)) return true;
        found = x;
        return false;
    });
    return found;
}

// ---------------------------------------------------------------- witnesses

std::optional<WitnessCheck> verify_witness(const cc::WitnessRecord& rec, const gf::GroupId& g, std::size_t max_degree)
{
    if (rec.kind != cc::RecordKind::Witness || rec.action == "none" || rec.action.empty()) return std::nullopt;
    auto label = cc::instantiate(rec, g.n, g.q);
    if (!label) return std::nullopt;
    auto el = mg::element_from_label(*label, g);
    auto spec = mg::SubspaceSpec::parse(rec.action);
    auto set = mg::enumerate_subspaces(el.form, spec, max_degree);
    WitnessCheck out;
    out.label = label->to_string();
    out.degree = set.size();
    out.fixed = mg::count_fixed(set, el.m);
    out.verified = out.degree > 0 && out.fixed == 0;
    out.detail = rec.case_id + " " + g.name() + " " + spec.to_string();
    return out;
}

} // namespace elusive::pg
