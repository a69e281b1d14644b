#include "elusive/errors.hpp"
#include "elusive/matgrp.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace elusive;
using namespace elusive::mg;
using cc::ClassLabel;
using cc::OrbitLabel;

namespace {

gf::GroupId gid(const std::string& s) { return gf::GroupId::parse(s, false); }

Matrix minus_identity(const Matrix& m)
{
    Matrix d = m;
    const Field& F = m.field();
    for (unsigned i = 0; i < m.rows(); ++i) d.at(i, i) = F.sub(d.at(i, i), 1);
    return d;
}

} // namespace

TEST(Field, DefiningPolynomials)
{
    EXPECT_EQ(make_field(2, 2)->poly(), (std::vector<unsigned>{1, 1}));     // x^2+x+1
    EXPECT_EQ(make_field(3, 2)->poly(), (std::vector<unsigned>{2, 1}));     // x^2+x+2
    EXPECT_EQ(make_field(2, 3)->poly(), (std::vector<unsigned>{1, 1, 0}));  // x^3+x+1
    EXPECT_EQ(make_field(7, 1)->gen(), 3u);
    EXPECT_EQ(make_field(5, 1)->gen(), 2u);
    EXPECT_THROW(make_field(2, 21), OutOfRange);
    EXPECT_THROW(make_field(4, 1), PreconditionViolation);
}

TEST(Field, AxiomsExhaustive)
{
    for (auto [p, f] : std::vector<std::pair<unsigned long, unsigned>>{{2, 1}, {3, 1}, {2, 2}, {3, 2}, {2, 3}, {5, 2}, {7, 1}, {2, 4}}) {
        auto F = make_field(p, f);
        const Fe q = static_cast<Fe>(F->size());
        for (Fe a = 1; a < q; ++a) EXPECT_EQ(F->mul(a, F->inv(a)), 1u);
        for (Fe a = 0; a < q; ++a) {
            EXPECT_EQ(F->add(a, F->neg(a)), 0u);
            EXPECT_EQ(F->frob(a, f), a);
            for (Fe b = 0; b < q; ++b) {
                EXPECT_EQ(F->add(a, b), F->add(b, a));
                for (Fe c = 0; c < q; c += 3) ASSERT_EQ(F->mul(a, F->add(b, c)), F->add(F->mul(a, b), F->mul(a, c)));
            }
        }
        // Frobenius is additive.
        for (Fe a = 0; a < q; ++a)
            for (Fe b = 0; b < q; ++b) ASSERT_EQ(F->frob(F->add(a, b)), F->add(F->frob(a), F->frob(b)));
    }
}

TEST(Field, LargeFieldAdditionWithoutTable)
{
    auto F = make_field(3, 7);  // 2187 > 1024: digit-wise addition
    std::mt19937 rng(7);
    for (int i = 0; i < 2000; ++i) {
        Fe a = rng() % F->size(), b = rng() % F->size(), c = rng() % F->size();
        ASSERT_EQ(F->add(F->add(a, b), c), F->add(a, F->add(b, c)));
        ASSERT_EQ(F->mul(a, F->add(b, c)), F->add(F->mul(a, b), F->mul(a, c)));
    }
}

TEST(Matrix, InverseDetRref)
{
    auto F = make_field(5, 1);
    std::mt19937 rng(1);
    for (int t = 0; t < 50; ++t) {
        Matrix m(F, 4, 4);
        for (unsigned i = 0; i < 4; ++i)
            for (unsigned j = 0; j < 4; ++j) m.at(i, j) = rng() % 5;
        if (m.det() == 0) {
            EXPECT_LT(m.rank(), 4u);
            EXPECT_THROW(m.inverse(), PreconditionViolation);
            continue;
        }
        EXPECT_TRUE((m * m.inverse()).is_identity());
        EXPECT_EQ(m.rank(), 4u);
        auto rows = m.data();
        rref(*F, rows, 4, 4);
        EXPECT_TRUE(Matrix::identity(F, 4).data() == rows);
    }
    // RREF is idempotent and canonical for the row space.
    Matrix a(F, 2, 4);
    a.at(0, 0) = 2, a.at(0, 1) = 1, a.at(1, 0) = 4, a.at(1, 1) = 2, a.at(1, 3) = 3;
    auto r1 = a.data();
    EXPECT_EQ(rref(*F, r1, 2, 4), 2u);
    auto r2 = r1;
    rref(*F, r2, 2, 4);
    EXPECT_EQ(r1, r2);
}

TEST(Forms, StandardTypes)
{
    for (unsigned long p : {2ul, 3ul, 5ul})
        for (unsigned n : {2u, 4u, 6u}) {
            auto F = make_field(p, 1);
            EXPECT_EQ(FormSpec::standard(gf::Family::OrthogonalPlus, n, F).sign, 1);
            EXPECT_EQ(FormSpec::standard(gf::Family::OrthogonalMinus, n, F).sign, -1);
        }
    EXPECT_THROW(FormSpec::standard(gf::Family::Unitary, 3, make_field(2, 1)), PreconditionViolation);
}

// Characteristic 2: the Arf-invariant type agrees with counting singular vectors,
// q^{d-1} + e (q^{d/2} - q^{d/2-1}) for type e.
TEST(Forms, EvenCharacteristicTypeMatchesSingularCount)
{
    std::mt19937 rng(11);
    int checked = 0;
    for (unsigned f : {1u, 2u, 3u})
        for (unsigned d : {2u, 4u, 6u}) {
            auto F = make_field(2, f);
            const unsigned long q = F->size();
            unsigned long total = 1;
            for (unsigned i = 0; i < d; ++i) total *= q;
            if (total > (1ul << 18)) continue;
            for (int trial = 0; trial < 12; ++trial) {
                FormSpec form;
                form.kind = FormKind::Quadratic;
                form.quad = Matrix(F, d, d);
                for (unsigned i = 0; i < d; ++i)
                    for (unsigned j = i; j < d; ++j) form.quad.at(i, j) = static_cast<Fe>(rng() % q);
                form.gram = Matrix(F, d, d);
                for (unsigned i = 0; i < d; ++i)
                    for (unsigned j = 0; j < d; ++j)
                        if (i != j) form.gram.at(i, j) = F->add(form.quad.at(i, j), form.quad.at(j, i));
                if (form.gram.det() == 0) continue;
                unsigned long singular = 0;
                std::vector<Fe> v(d);
                for (unsigned long c = 0; c < total; ++c) {
                    unsigned long t = c;
                    for (unsigned i = 0; i < d; ++i, t /= q) v[i] = static_cast<Fe>(t % q);
                    singular += form.quadratic(v.data()) == 0;
                }
                unsigned long qh = 1;
                for (unsigned i = 0; i + 1 < d / 2; ++i) qh *= q;
                const long gap = static_cast<long>(singular) - static_cast<long>(qh * qh * q);
                const int counted = gap > 0 ? 1 : -1;
                EXPECT_EQ(std::labs(gap), static_cast<long>(qh * q - qh));
                EXPECT_EQ(form.type_of(Matrix::identity(F, d)), counted) << "q=" << q << " d=" << d;
                ++checked;
            }
        }
    EXPECT_GT(checked, 30);
}

TEST(Generators, PreserveFormAndActTransitively)
{
    struct Case {
        const char* group;
        const char* kind;
        std::size_t size;
    };
    // Point/subspace counts from the standard formulas.
    const std::vector<Case> cases{
        {"L:3:4", "points", 21},        {"L:4:2", "points", 15},    {"U:4:2", "tspoints", 45},
        {"U:5:2", "tspoints", 165},     {"U:4:3", "ts:2", 112},     {"S:4:3", "points", 40},
        {"S:4:3", "ts:2", 40},          {"S:6:2", "forms:+", 36},   {"S:6:2", "forms:-", 28},
        {"O+:6:2", "tspoints", 35},     {"O-:6:2", "tspoints", 27}, {"O:7:3", "tspoints", 364},
        {"O+:8:2", "tspoints", 135},    {"O-:6:3", "nonsing", 252}, {"U:3:3", "nondeg:1", 63},
        {"S:4:3", "nondeg:2", 90},      {"O:7:3", "nondeg:1:+", 378},
    };
    for (auto& c : cases) {
        SCOPED_TRACE(std::string(c.group) + " " + c.kind);
        auto G = standard_generators(gid(c.group));
        auto spec = SubspaceSpec::parse(c.kind);
        auto all = enumerate_subspaces(G.form, spec);
        EXPECT_EQ(all.size(), c.size);
        auto act = subspace_action(G.gens, G.form, spec);
        // Omega splits nonsingular points by the square class of Q.
        EXPECT_EQ(act.domain.size(), spec.kind == SubspaceKind::NonsingularPoints ? all.size() / 2 : all.size());
        for (auto& perm : act.perms) EXPECT_EQ(perm.size(), act.domain.size());
    }
}

TEST(Generators, UnsupportedRange)
{
    EXPECT_THROW(standard_generators(gid("L:7:2")), UnsupportedConstruction);
    EXPECT_THROW(standard_generators(gid("O+:8:4")), UnsupportedConstruction);
}

TEST(Subspaces, ParseRoundTrip)
{
    for (std::string s : {"points", "tspoints", "ts:3", "nondeg:2", "nondeg:3:-", "nonsing", "forms:+"})
        EXPECT_EQ(SubspaceSpec::parse(s).to_string(), s);
    EXPECT_THROW(SubspaceSpec::parse("lines"), PreconditionViolation);
    EXPECT_THROW(SubspaceSpec::parse("forms"), PreconditionViolation);
}

TEST(Subspaces, InducedPermMatchesAction)
{
    auto G = standard_generators(gid("U:4:2"));
    auto act = subspace_action(G.gens, G.form, SubspaceSpec::parse("tspoints"));
    for (std::size_t i = 0; i < G.gens.size(); ++i) EXPECT_EQ(induced_perm(act.domain, G.gens[i]), act.perms[i]);
    // A generator's fixed points match its permutation's fixed points.
    for (std::size_t i = 0; i < G.gens.size(); ++i) {
        std::size_t fix = 0;
        for (std::size_t j = 0; j < act.perms[i].size(); ++j) fix += act.perms[i][j] == j;
        EXPECT_EQ(count_fixed(act.domain, G.gens[i]), fix);
    }
}

TEST(Subspaces, TooLarge)
{
    auto G = standard_generators(gid("L:6:8"));
    EXPECT_THROW(enumerate_subspaces(G.form, SubspaceSpec::parse("points"), 1000), DomainTooLarge);
}

TEST(Elements, UnipotentJordanRank)
{
    struct Case {
        const char* group;
        std::vector<unsigned> blocks;
        unsigned long p;
    };
    const std::vector<Case> cases{
        {"L:4:2", {2, 1, 1}, 2}, {"L:3:3", {3}, 3},       {"S:4:3", {2, 1, 1}, 3}, {"S:4:3", {2, 2}, 3},
        {"S:6:2", {2, 2, 2}, 2}, {"S:4:5", {2, 1, 1}, 5},       {"U:4:2", {2, 2}, 2},    {"U:5:2", {2, 1, 1, 1}, 2},
        {"U:3:3", {3}, 3},       {"U:4:3", {3, 1}, 3},    {"O:7:3", {3, 1, 1, 1, 1}, 3},
        {"O+:8:3", {3, 3, 1, 1}, 3}, {"O-:6:3", {3, 1, 1, 1}, 3}, {"O+:6:2", {2, 2, 1, 1}, 2},
        {"O-:8:2", {2, 2, 1, 1, 1, 1}, 2}, {"O+:8:3", {2, 2, 2, 2}, 3},
    };
    for (auto& c : cases) {
        SCOPED_TRACE(std::string(c.group));
        auto g = gid(c.group);
        auto label = ClassLabel::unipotent(c.blocks, c.p);
        auto el = element_from_label(label, g);
        EXPECT_EQ(el.form.kind, FormSpec::standard(g.family, g.n, el.m.field_ptr()).kind);
        EXPECT_EQ(el.form.sign, g.eps());
        EXPECT_TRUE(el.form.preserved_by(el.m));
        EXPECT_EQ(matrix_order(el.m), c.p);
        EXPECT_EQ(minus_identity(el.m).rank(), g.n - c.blocks.size());
        // rank of (x-1)^2 counts blocks of size >= 3
        unsigned big = 0;
        for (unsigned b : c.blocks) big += b >= 3 ? b - 2 : 0;
        auto d = minus_identity(el.m);
        EXPECT_EQ((d * d).rank(), big);
    }
}

TEST(Elements, SemisimpleFixedSpace)
{
    struct Case {
        const char* group;
        unsigned long r, step;
        std::vector<std::pair<unsigned long, unsigned>> orbits;  // (min exponent, multiplicity)
        unsigned e;
    };
    const std::vector<Case> cases{
        {"L:3:4", 7, 4, {{1, 1}}, 0},      // Singer cycle power
        {"L:3:4", 3, 1, {{1, 1}}, 2},
        {"U:5:2", 11, 4, {{1, 1}}, 0},     // step q^2 = 4
        {"U:4:2", 3, 1, {{1, 1}}, 3},
        {"S:4:3", 5, 3, {{1, 1}}, 0},
        {"S:6:2", 7, 2, {{1, 1}, {3, 1}}, 0},  // inverse pair of 3-dim blocks
        {"S:6:2", 3, 2, {{1, 1}}, 4},
        {"O-:6:2", 5, 2, {{1, 1}}, 2},
        {"O+:6:2", 5, 2, {{1, 1}}, 2},
        {"O:7:3", 5, 3, {{1, 1}}, 3},
        {"O+:8:3", 13, 3, {{1, 1}, {4, 1}}, 2},
        {"O-:8:3", 41, 3, {{1, 1}}, 0},
    };
    for (auto& c : cases) {
        SCOPED_TRACE(std::string(c.group) + " r=" + std::to_string(c.r));
        auto g = gid(c.group);
        std::vector<std::pair<OrbitLabel, unsigned>> orbits;
        for (auto [m, a] : c.orbits) orbits.push_back({OrbitLabel::of(c.r, c.step, m), a});
        auto label = ClassLabel::semisimple(orbits, c.e);
        auto el = element_from_label(label, g);
        EXPECT_EQ(el.form.sign, g.eps());
        EXPECT_EQ(matrix_order(el.m), c.r);
        EXPECT_EQ(g.n - minus_identity(el.m).rank(), c.e);
    }
}

TEST(Elements, Rejections)
{
    auto g = gid("S:4:3");
    EXPECT_THROW(element_from_label(ClassLabel::unipotent({2, 1}, 3), g), PreconditionViolation);
    EXPECT_THROW(element_from_label(ClassLabel::unipotent({2, 1, 1}, 2), g), PreconditionViolation);
    // step must be q mod r
    EXPECT_THROW(element_from_label(ClassLabel::semisimple({{OrbitLabel::of(5, 2, 1), 1}}, 0), g), UnsupportedLabelShape);
}

TEST(Elements, CatalogInstancesConstruct)
{
    // Every catalog witness instantiated on a small group builds and preserves its form.
    const std::vector<std::string> groups{"L:3:4", "L:4:2", "L:5:2", "U:4:2", "U:5:2", "U:4:3", "U:6:2", "S:4:3",
                                          "S:6:2", "S:6:3", "O+:8:2", "O-:8:2", "O:7:3", "O+:8:3", "O-:6:3", "O-:8:3"};
    int built = 0, unsupported = 0;
    for (auto& rec : cc::witness_catalog()) {
        if (rec.kind != cc::RecordKind::Witness) continue;
        for (auto& gs : groups) {
            auto g = gid(gs);
            if (g.family != rec.family) continue;
            if (std::find(rec.n_values.begin(), rec.n_values.end(), g.n) == rec.n_values.end()) continue;
            std::optional<ClassLabel> label;
            try {
                label = cc::instantiate(rec, g.n, g.q);
            } catch (const Error&) {
                continue;
            }
            if (!label) continue;
            try {
                auto el = element_from_label(*label, g);
                EXPECT_TRUE(el.form.preserved_by(el.m));
                ++built;
            } catch (const UnsupportedLabelShape&) {
                ++unsupported;
            } catch (const Error& ex) {
                ADD_FAILURE() << rec.case_id << " on " << gs << " " << label->to_string() << ": " << ex.what();
            }
        }
    }
    EXPECT_GT(built, 20);
    RecordProperty("unsupported", unsupported);
}
