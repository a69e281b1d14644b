#include "elusive/corpus.hpp"
#include "elusive/errors.hpp"
#include "elusive/matgrp.hpp"
#include "elusive/permgrp.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

using namespace elusive;
using namespace elusive::pg;

namespace {

Perm cycle_perm(std::size_t n, std::vector<Point> cyc)
{
    std::vector<Point> img(n);
    std::iota(img.begin(), img.end(), 0);
    for (std::size_t i = 0; i < cyc.size(); ++i) img[cyc[i]] = cyc[(i + 1) % cyc.size()];
    return Perm(img);
}

// Closure by breadth-first multiplication: the naive oracle for small groups.
std::vector<Perm> closure(const std::vector<Perm>& gens)
{
    std::set<std::vector<Point>> seen;
    std::vector<Perm> out{Perm::identity(gens[0].degree())};
    seen.insert(out[0].images());
    for (std::size_t i = 0; i < out.size(); ++i)
        for (auto& g : gens) {
            Perm h = out[i] * g;
            if (seen.insert(h.images()).second) out.push_back(h);
        }
    return out;
}

bool is_prime(unsigned long n)
{
    if (n < 2) return false;
    for (unsigned long d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// Derangement classes of prime order by brute force: elements listed by closure,
// classes by conjugating with the generators, fixed points read off the action.
std::multiset<unsigned long> brute_derangement_primes(const std::vector<Perm>& gens, const SetAction& omega)
{
    auto elems = closure(gens);
    std::map<std::vector<Point>, std::size_t> pos;
    for (std::size_t i = 0; i < elems.size(); ++i) pos[elems[i].images()] = i;
    std::vector<bool> done(elems.size());
    std::multiset<unsigned long> primes;
    for (std::size_t i = 0; i < elems.size(); ++i) {
        const unsigned long o = elems[i].order();
        if (done[i] || !is_prime(o)) continue;
        std::vector<std::size_t> cls{i};
        done[i] = true;
        for (std::size_t k = 0; k < cls.size(); ++k)
            for (auto& g : gens) {
                auto j = pos.at(conjugate(elems[cls[k]], g).images());
                if (!done[j]) done[j] = true, cls.push_back(j);
            }
        if (omega.fixed_points(elems[i]) == 0) primes.insert(o);
    }
    return primes;
}

std::multiset<unsigned long> as_multiset(const Verdict& v) { return {v.primes.begin(), v.primes.end()}; }

gf::GroupId gid(const std::string& s) { return gf::GroupId::parse(s, false); }

} // namespace

TEST(Perm, CompositionAppliesLeftFirst)
{
    Perm a = cycle_perm(3, {0, 1}), b = cycle_perm(3, {1, 2});
    EXPECT_EQ((a * b)(0), 2u);
    EXPECT_EQ((a * b).order(), 3u);
    EXPECT_TRUE((a * a.inverse()).is_identity());
    EXPECT_EQ(conjugate(a, b), b.inverse() * a * b);
    EXPECT_EQ(cycle_perm(6, {0, 1, 2}).cycle_type(), (std::vector<std::size_t>{1, 1, 1, 3}));
    EXPECT_THROW(Perm({0, 0, 1}), PreconditionViolation);
}

TEST(BSGS, OrdersMatchClosure)
{
    for (const char* name : {"S5", "A5", "D10inA5"}) {
        auto& g = library_group(name);
        BSGS G(g.gens);
        EXPECT_EQ(G.order(), closure(g.gens).size()) << name;
    }
    EXPECT_EQ(BSGS(library_group("M11").gens).order(), 7920u);
    EXPECT_EQ(BSGS(corpus_group("L3(4)", "1").gens).order(), 20160u);
    EXPECT_EQ(BSGS(corpus_group("U4(2)", "2").gens).order(), 51840u);
    EXPECT_EQ(BSGS(corpus_group("PSp6(2)", "1").gens).order(), 1451520u);
}

TEST(BSGS, IndexRoundTripAndMembership)
{
    BSGS G(library_group("M11").gens);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        Perm g = random_element(G, rng);
        auto idx = G.index_of(g);
        ASSERT_TRUE(idx);
        EXPECT_EQ(G.element(*idx), g);
    }
    EXPECT_FALSE(G.contains(cycle_perm(12, {0, 1})));
    std::uint64_t count = 0;
    G.for_each([&](std::uint64_t idx, const Perm& g) {
        EXPECT_EQ(G.index_of(g), idx);
        return ++count < 500;
    });
}

TEST(BSGS, BasePrefixIsHonoured)
{
    BSGS G(library_group("S5").gens, {3, 1});
    ASSERT_GE(G.base().size(), 2u);
    EXPECT_EQ(G.base()[0], 3u);
    EXPECT_EQ(G.base()[1], 1u);
    EXPECT_EQ(G.order(), 120u);
}

TEST(RandomElements, SeedReproducible)
{
    auto& g = library_group("M11");
    RandomElements a(g.gens, 42), b(g.gens, 42);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(a.next(), b.next());
}

TEST(Classes, SizesSumToElementCounts)
{
    BSGS G(library_group("M11").gens);
    auto t = prime_order_classes(G);
    std::map<unsigned long, std::uint64_t> sums;
    std::multiset<unsigned long> orders;
    for (auto& c : t.classes()) {
        sums[c.element_order] += c.class_size;
        orders.insert(c.element_order);
        EXPECT_EQ(t.class_of(c.representative), &c - t.classes().data());
    }
    EXPECT_EQ(orders, (std::multiset<unsigned long>{2, 3, 5, 11, 11}));
    for (auto& [r, s] : sums) EXPECT_EQ(s, t.elements_of_order(r)) << r;
    for (auto& c : t.classes())
        if (c.element_order == 11) EXPECT_EQ(c.class_size, 720u);
}

TEST(Classes, MatchBruteForceInS5)
{
    auto& g = library_group("S5");
    BSGS G(g.gens);
    auto t = prime_order_classes(G);
    std::multiset<std::pair<unsigned long, std::uint64_t>> got;
    for (auto& c : t.classes()) got.insert({c.element_order, c.class_size});
    // (ab), (ab)(cd), (abc), (abcde)
    EXPECT_EQ(got, (std::multiset<std::pair<unsigned long, std::uint64_t>>{{2, 10}, {2, 15}, {3, 20}, {5, 24}}));
}

TEST(Classes, Sp62SevenElements)
{
    BSGS G(corpus_group("PSp6(2)", "1").gens);
    auto t = prime_order_classes(G);
    std::size_t sevens = 0;
    for (auto& c : t.classes())
        if (c.element_order == 7) {
            ++sevens;
            EXPECT_EQ(c.class_size, 207360u);
        }
    EXPECT_EQ(sevens, 1u);
}

TEST(Classes, TooLargeThrows)
{
    BSGS G(corpus_group("PSp6(2)", "1").gens);
    EXPECT_THROW(prime_order_classes(G, 1000), GroupTooLarge);
}

TEST(Actions, CosetAndSetActions)
{
    auto& a5 = library_group("A5");
    BSGS G(a5.gens);
    auto on6 = coset_action(G, library_group("D10inA5").gens);
    ASSERT_EQ(on6.size(), a5.gens.size());
    EXPECT_EQ(on6[0].degree(), 6u);
    EXPECT_TRUE(is_primitive(on6, 6));
    EXPECT_THROW(coset_action(G, {cycle_perm(5, {0, 1})}), NotASubgroup);

    auto pts = set_action(a5.gens, {0});
    EXPECT_EQ(pts.degree(), 5u);
    auto pairs = set_action(a5.gens, {0, 1});
    EXPECT_EQ(pairs.degree(), 10u);
    EXPECT_TRUE(is_transitive(pairs.perms, 10));
    auto stab = set_stabilizer(a5.gens, {0, 1});
    EXPECT_EQ(BSGS(stab).order(), 6u);
}

TEST(Actions, ImprimitiveDetected)
{
    // <(0 1 2 3 4 5)> preserves the blocks {0,3}, {1,4}, {2,5}.
    std::vector<Perm> gens{cycle_perm(6, {0, 1, 2, 3, 4, 5})};
    EXPECT_TRUE(is_transitive(gens, 6));
    EXPECT_FALSE(is_primitive(gens, 6));
    EXPECT_TRUE(is_primitive({cycle_perm(5, {0, 1, 2, 3, 4})}, 5));
}

TEST(Actions, L34OnHyperovalCosets)
{
    auto g = corpus_group("L3(4)", "1");
    BSGS G(g.gens);
    auto obj = corpus_object(g, "hyperoval");
    auto stab = set_stabilizer(g.gens, obj);
    EXPECT_EQ(BSGS(stab).order(), 360u);
    auto on56 = coset_action(G, stab);
    EXPECT_EQ(on56[0].degree(), 56u);
    EXPECT_EQ(set_action(g.gens, obj).degree(), 56u);
}

TEST(Verdicts, SmallGroupsAgainstBruteForce)
{
    struct Case {
        std::vector<Perm> gens;
        SetAction omega;
        VerdictKind kind;
        unsigned long r;
    };
    auto& m11 = library_group("M11");
    auto& s5 = library_group("S5");
    auto& a5 = library_group("A5");
    auto on6 = coset_action(BSGS(a5.gens), library_group("D10inA5").gens);
    std::vector<Case> cases{
        {m11.gens, set_action(m11.gens, {0}), VerdictKind::Elusive, 0},
        {s5.gens, set_action(s5.gens, {0}), VerdictKind::AlmostElusive, 5},
        {on6, set_action(on6, {0}), VerdictKind::AlmostElusive, 3},
    };
    for (auto& c : cases) {
        BSGS G(c.gens);
        auto t = prime_order_classes(G);
        auto v = derangement_verdict(t, c.omega);
        EXPECT_EQ(v.kind, c.kind) << v.to_string();
        EXPECT_EQ(v.r, c.r);
        EXPECT_EQ(as_multiset(v), brute_derangement_primes(c.gens, c.omega));
    }
}

TEST(Verdicts, L34ExtensionsAgainstBruteForce)
{
    auto g = corpus_group("L3(4)", "2_3");
    auto omega = set_action(g.gens, corpus_object(g, "hyperoval"));
    BSGS G(g.gens);
    auto t = prime_order_classes(G);
    auto v = derangement_verdict(t, omega);
    EXPECT_EQ(v.to_string(), "AlmostElusive(7)");
    EXPECT_EQ(as_multiset(v), brute_derangement_primes(g.gens, omega));
}

TEST(Verdicts, SocleCountAgreesWithFullGroupOnSocleClasses)
{
    auto g = corpus_group("U4(2)", "2");
    auto omega = set_action(g.gens, corpus_object(g, "ts-point"));
    EXPECT_EQ(omega.degree(), 45u);
    BSGS G(g.gens);
    auto t = prime_order_classes(G);
    EXPECT_EQ(derangement_verdict(t, omega).to_string(), "AlmostElusive(5)");
    EXPECT_EQ(socle_verdict(g.gens, g.socle_gens, omega).to_string(), "AlmostElusive(5)");
}

TEST(Verdicts, NotTransitiveThrows)
{
    auto& s5 = library_group("S5");
    BSGS G(s5.gens);
    auto t = prime_order_classes(G);
    SetAction split = set_action(s5.gens, {0});
    split.perms = {Perm::identity(5), Perm::identity(5)};
    EXPECT_THROW(derangement_verdict(t, split), NotTransitive);
}

TEST(Verdicts, PrimePowerDerangement)
{
    auto& m11 = library_group("M11");
    BSGS G(m11.gens);
    auto omega = set_action(m11.gens, {0});
    auto d = prime_power_derangement(G, omega, 3);
    ASSERT_TRUE(d);
    EXPECT_EQ(omega.fixed_points(*d), 0u);
    EXPECT_TRUE(G.contains(*d));
    // The identity group has no derangement.
    BSGS one({Perm::identity(3)});
    EXPECT_FALSE(prime_power_derangement(one, set_action({Perm::identity(3)}, {0})));
}

TEST(Fusion, S5FusesA5Fives)
{
    // In S5 the two A5 classes of 5-cycles fuse.
    BSGS A(library_group("A5").gens);
    auto t = prime_order_classes(A);
    auto groups = class_fusion(t, library_group("S5").gens, "S5");
    std::size_t fives = 0;
    for (auto& grp : groups)
        if (t.classes()[grp[0]].element_order == 5) {
            ++fives;
            EXPECT_EQ(grp.size(), 2u);
        }
    EXPECT_EQ(fives, 1u);
    // D10 is not normal in A5.
    BSGS D(library_group("D10inA5").gens);
    auto td = prime_order_classes(D);
    EXPECT_THROW(class_fusion(td, library_group("A5").gens), NotNormal);
}

TEST(Corpus, ObjectsHaveExpectedOrbitSizes)
{
    struct Row {
        const char* socle;
        const char* object;
        std::size_t degree;
    };
    for (auto [s, o, d] : std::vector<Row>{{"L3(4)", "antiflag", 336},
                                            {"L3(4)", "baer", 120},
                                            {"U4(2)", "frame", 40},
                                            {"U4(2)", "subfield", 36},
                                            {"U5(2)", "nondeg-point", 176},
                                            {"U4(3)", "ts-line", 112},
                                            {"PSp6(2)", "nondeg-line", 336},
                                            {"PSp6(2)", "form+", 36},
                                            {"PSp6(2)", "form-", 28}}) {
        auto g = corpus_group(s, "1");
        EXPECT_EQ(set_action(g.gens, corpus_object(g, o)).degree(), d) << s << " " << o;
    }
    EXPECT_THROW(corpus_group("L3(4)", "3"), UnsupportedConstruction);
    EXPECT_THROW(corpus_group("M12", "1"), UnsupportedConstruction);
    EXPECT_EQ(BSGS(corpus_group("U4(3)", "2_2").gens).order(), 6531840u);
}

TEST(Corpus, GeneratorFileErrors)
{
    EXPECT_THROW(load_generators("/nonexistent/generators.txt"), DataError);
    EXPECT_THROW(library_group("J4"), UnsupportedConstruction);
}

TEST(Witness, SymplecticPointWitnessVerifies)
{
    const cc::WitnessRecord* s1 = nullptr;
    for (auto& rec : cc::witness_catalog())
        if (rec.case_id == "S1" && rec.action == "points") s1 = &rec;
    ASSERT_NE(s1, nullptr);
    auto check = verify_witness(*s1, gid("S:8:2"));
    ASSERT_TRUE(check);
    EXPECT_EQ(check->degree, 255u);
    EXPECT_TRUE(check->verified) << check->label << " fixes " << check->fixed;

    // Negative control: a unipotent transvection fixes points.
    auto label = cc::ClassLabel::unipotent({2, 1, 1, 1, 1, 1, 1}, 2);
    auto el = mg::element_from_label(label, gid("S:8:2"));
    auto pts = mg::enumerate_subspaces(el.form, mg::SubspaceSpec::parse("points"));
    EXPECT_GT(mg::count_fixed(pts, el.m), 0u);
}

TEST(Witness, NoneActionIsSkipped)
{
    for (auto& rec : cc::witness_catalog())
        if (rec.action == "none") {
            EXPECT_FALSE(verify_witness(rec, gid("S:4:3")));
            break;
        }
}
