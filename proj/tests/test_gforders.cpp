#include "elusive/errors.hpp"
#include "elusive/gforders.hpp"
#include "elusive/tables.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace elusive;
using namespace elusive::gf;

namespace {

BigInt ipow(const BigInt& b, unsigned e)
{
    BigInt r = 1;
    while (e--)
        r *= b;
    return r;
}

BigInt igcd(const BigInt& a, const BigInt& b)
{
    BigInt g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

// Textbook product formulas written directly over integers.
BigInt naive_order(Family f, unsigned n, const BigInt& q)
{
    BigInt r = 1;
    switch (f) {
    case Family::Linear:
        r = ipow(q, n * (n - 1) / 2);
        for (unsigned i = 2; i <= n; ++i)
            r *= ipow(q, i) - 1;
        return r / igcd(BigInt(n), q - 1);
    case Family::Unitary:
        r = ipow(q, n * (n - 1) / 2);
        for (unsigned i = 2; i <= n; ++i)
            r *= ipow(q, i) - (i % 2 ? -1 : 1);
        return r / igcd(BigInt(n), q + 1);
    case Family::Symplectic: {
        unsigned m = n / 2;
        r = ipow(q, m * m);
        for (unsigned i = 1; i <= m; ++i)
            r *= ipow(q, 2 * i) - 1;
        return r / igcd(BigInt(2), q - 1);
    }
    case Family::OrthogonalOdd: {
        unsigned m = (n - 1) / 2;
        r = ipow(q, m * m);
        for (unsigned i = 1; i <= m; ++i)
            r *= ipow(q, 2 * i) - 1;
        return r / 2;
    }
    default: {
        int eps = f == Family::OrthogonalPlus ? 1 : -1;
        unsigned m = n / 2;
        BigInt top = ipow(q, m) - eps;
        r = ipow(q, m * (m - 1)) * top;
        for (unsigned i = 1; i < m; ++i)
            r *= ipow(q, 2 * i) - 1;
        return r / igcd(BigInt(4), top);
    }
    }
}

GroupId grp(const char* key, bool restricted = true) { return GroupId::parse(key, restricted); }

std::set<BigInt> as_set(const std::vector<BigInt>& v) { return {v.begin(), v.end()}; }

} // namespace

TEST(GroupId, NamesAndKeys)
{
    EXPECT_EQ(grp("U:4:2").name(), "U4(2)");
    EXPECT_EQ(grp("S:4:5").name(), "PSp4(5)");
    EXPECT_EQ(grp("O+:8:3").name(), "POmega8+(3)");
    EXPECT_EQ(grp("O:7:3").name(), "Omega7(3)");
    EXPECT_EQ(grp("L:7:2").key(), "L:7:2");
    EXPECT_EQ(grp("O-:10:2").eps(), -1);
}

TEST(GroupId, RestrictedSetRejections)
{
    EXPECT_THROW(grp("L:3:2"), InvalidParameters);
    EXPECT_THROW(grp("L:4:2"), InvalidParameters);
    EXPECT_THROW(grp("S:4:3"), InvalidParameters);
    EXPECT_THROW(grp("U:3:3"), InvalidParameters);
    EXPECT_THROW(grp("O:7:2"), InvalidParameters);
    EXPECT_THROW(grp("L:3:6"), InvalidParameters);
    EXPECT_NO_THROW(grp("U:3:3", false));
    EXPECT_NO_THROW(grp("L:2:7", false));
    EXPECT_THROW(grp("S:4:2", false), InvalidParameters);
}

TEST(Orders, QuotedFactorizations)
{
    EXPECT_EQ(order(grp("S:4:5")), BigInt(4680000));
    Factored f = order_factored(grp("L:7:2"));
    std::map<BigInt, long> want = {{2, 21}, {3, 4}, {5, 1}, {7, 2}, {31, 1}, {127, 1}};
    EXPECT_EQ(f.exponents(), want);
}

TEST(Orders, SmallKnownValues)
{
    EXPECT_EQ(order(grp("U:4:2")), BigInt(25920));
    EXPECT_EQ(order(grp("S:6:2")), BigInt(1451520));
    EXPECT_EQ(order(grp("O+:8:2")), BigInt(174182400));
    EXPECT_EQ(order(grp("L:2:7", false)), BigInt(168));
}

TEST(Orders, MatchNaiveProductFormulas)
{
    struct Case {
        Family f;
        std::vector<unsigned> ns;
    };
    std::vector<Case> cases = {{Family::Linear, {3, 4, 5, 6}},       {Family::Unitary, {4, 5, 6}},
                               {Family::Symplectic, {4, 6, 8}},      {Family::OrthogonalOdd, {7, 9}},
                               {Family::OrthogonalPlus, {8, 10}},    {Family::OrthogonalMinus, {8, 10}}};
    for (const auto& c : cases)
        for (unsigned n : c.ns)
            for (unsigned long q : {2ul, 3ul, 4ul, 5ul, 7ul, 8ul, 9ul}) {
                GroupId g;
                try {
                    g = GroupId::make(c.f, n, PrimePower::from_q(BigInt(q)));
                } catch (const InvalidParameters&) {
                    continue;
                }
                EXPECT_EQ(order(g), naive_order(c.f, n, BigInt(q))) << g.name();
            }
}

TEST(Subgroups, ParseSpec)
{
    SubgroupSpec s = SubgroupSpec::parse("C1:P1,6");
    EXPECT_EQ(s.asch_class, AschClass::C1);
    EXPECT_EQ(s.type_name, "P1,6");
    EXPECT_EQ(s.params, (std::vector<long>{1, 6}));
    EXPECT_EQ(s.to_string(), "C1:P1,6");
    EXPECT_THROW(SubgroupSpec::parse("C9:P1"), InvalidParameters);
}

TEST(Subgroups, UnitaryParabolic)
{
    GroupId g = grp("U:4:2");
    SubgroupSpec p1 = SubgroupSpec::parse("C1:P1");
    EXPECT_EQ(subgroup_order(g, p1).value(), BigInt(576));
    EXPECT_EQ(omega_size(g, p1), BigInt(45));
    EXPECT_EQ(screen(g, p1).to_string(), "DiffOne(5)");
}

TEST(Subgroups, OrthogonalP4Degree)
{
    // (q+1)(q^2+1)(q^3+1) at q = 3.
    EXPECT_EQ(omega_size(grp("O+:8:3"), SubgroupSpec::parse("C1:P4")), BigInt(1120));
}

TEST(Subgroups, SymplecticOrthogonalTypes)
{
    GroupId g = grp("S:6:2");
    // O6-(2) fixes a form counted by q^{m-1}(q^m - 1); O6+(2) = S8 has index 36.
    EXPECT_EQ(omega_size(g, SubgroupSpec::parse("C8:Om6")), BigInt(28));
    EXPECT_EQ(omega_size(g, SubgroupSpec::parse("C8:Op6")), BigInt(36));
    EXPECT_EQ(subgroup_order(g, SubgroupSpec::parse("C8:Op6")).value(), BigInt(40320));
}

TEST(Subgroups, SymplecticExtraspecialNormaliser)
{
    GroupId g = grp("S:4:5");
    SubgroupOrder h = subgroup_order(g, SubgroupSpec::parse("C6:C6"));
    EXPECT_EQ(h.mode, OrderMode::Exact);
    EXPECT_EQ(h.value(), BigInt(960));
    EXPECT_EQ(as_set(h.factored.primes()), (std::set<BigInt>{2, 3, 5}));
    EXPECT_EQ(screen(g, SubgroupSpec::parse("C6:C6")).to_string(), "DiffOne(13)");
}

TEST(Subgroups, SuzukiOrder)
{
    EXPECT_EQ(subgroup_order(grp("S:4:8"), SubgroupSpec::parse("S:Sz(q)")).value(), BigInt(29120));
    EXPECT_THROW(subgroup_order(grp("S:4:4"), SubgroupSpec::parse("S:Sz(q)")), UnsupportedSubgroupType);
}

TEST(Subgroups, UnsupportedListsCatalog)
{
    try {
        subgroup_order(grp("L:5:2"), SubgroupSpec::parse("C4:GL2xGL3"));
        FAIL() << "expected UnsupportedSubgroupType";
    } catch (const UnsupportedSubgroupType& e) {
        EXPECT_NE(std::string(e.what()).find("P<m>"), std::string::npos);
    }
}

TEST(Spectrum, Basics)
{
    EXPECT_EQ(spectrum(BigInt(7920)), (std::vector<BigInt>{2, 3, 5, 11}));
    EXPECT_TRUE(spectrum(BigInt(1)).empty());
    EXPECT_EQ(pi(BigInt(4680000)), 4u);
    EXPECT_THROW(spectrum(BigInt(0)), PreconditionViolation);
}

TEST(Screen, LinearExtraspecialAtLeastTwo)
{
    ScreenVerdict v = screen(grp("L:7:2"), SubgroupSpec::parse("C6:C6"));
    EXPECT_EQ(v.tag, VerdictTag::DiffAtLeastTwo);
    std::set<BigInt> miss = as_set(v.missing);
    bool a = miss.count(5) && miss.count(31);
    bool b = miss.count(31) && miss.count(127);
    EXPECT_TRUE(a || b) << v.to_string();
}

TEST(Screen, BoundNeverReportsEqualPi)
{
    auto rows = load_tables(data_dir() + "/tables.txt");
    unsigned bounds = 0;
    for (const auto& inst : expand(rows)) {
        auto g = GroupId::make(inst.row->family, inst.n, PrimePower::from_q(BigInt(inst.q)), false);
        SubgroupSpec h = SubgroupSpec::make(inst.row->asch_class, inst.row->type_name);
        ScreenVerdict v = screen(g, h);
        if (v.mode == OrderMode::DividesBound) {
            ++bounds;
            EXPECT_NE(v.tag, VerdictTag::EqualPi) << g.name() << " " << h.to_string();
        }
    }
    EXPECT_GT(bounds, 10u);
}

TEST(Screen, LagrangeOverCatalog)
{
    auto rows = load_tables(data_dir() + "/tables.txt");
    unsigned checked = 0;
    for (const auto& inst : expand(rows)) {
        auto g = GroupId::make(inst.row->family, inst.n, PrimePower::from_q(BigInt(inst.q)), false);
        SubgroupOrder h = subgroup_order(g, SubgroupSpec::make(inst.row->asch_class, inst.row->type_name));
        if (h.mode != OrderMode::Exact)
            continue;
        ++checked;
        BigInt G = order(g), H = h.value();
        EXPECT_TRUE(mpz_divisible_p(G.get_mpz_t(), H.get_mpz_t())) << g.name() << " " << inst.row->type_name;
    }
    EXPECT_GT(checked, 100u);
}

TEST(SScreen, TableBlocksOneIndex)
{
    EXPECT_EQ(s_blocked_indices("J1", 20), (std::vector<unsigned>{18}));
    ScreenVerdict v = s_screen(grp("L:20:2"), "J1", 20);
    EXPECT_EQ(v.tag, VerdictTag::DiffAtLeastTwo);
    // ppds of 2^16-1 and 2^14-1.
    EXPECT_EQ(v.missing, (std::vector<BigInt>{257, 43}));
}

TEST(SScreen, SocleOutsideTable)
{
    EXPECT_TRUE(s_blocked_indices("M22", 15).empty());
    ScreenVerdict v = s_screen(grp("L:15:2"), "M22", 15);
    EXPECT_EQ(v.tag, VerdictTag::DiffAtLeastTwo);
    EXPECT_EQ(v.missing, (std::vector<BigInt>{43, 13, 11}));
}

TEST(SScreen, AlternatingNearDimension)
{
    ScreenVerdict v = s_screen(grp("L:13:2"), "A14", 13);
    EXPECT_EQ(v.tag, VerdictTag::DiffAtLeastTwo);
    ASSERT_EQ(v.missing.size(), 2u);
    for (const auto& r : v.missing)
        EXPECT_GT(r, 15);
}

TEST(SScreen, ParametricRows)
{
    // L3(2) in dimensions 6 and 7 blocks i = 6.
    EXPECT_EQ(s_blocked_indices("L3(2)", 7), (std::vector<unsigned>{6}));
    // L2(13): s-1, s, s+1 rows and the halves.
    EXPECT_EQ(s_blocked_indices("L2(13)", 14), (std::vector<unsigned>{11, 12, 13}));
    EXPECT_EQ(s_blocked_indices("L2(13)", 7), (std::vector<unsigned>{5, 6}));
    EXPECT_THROW(s_screen(grp("L:12:2"), "J1", 12), PreconditionViolation);
}

TEST(Tables, ParseErrorsCarryLineNumbers)
{
    std::istringstream bad("# header\n4|I|L|6|2|C1|P1|-|-\n4|I|L|6|2|C1\n");
    try {
        parse_tables(bad, "bad.txt");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("bad.txt:3"), std::string::npos) << e.what();
    }
    std::istringstream cond("6|L1|L|3|auto3|C1|P1|q_bogus|n\n");
    EXPECT_THROW(parse_tables(cond, "c.txt"), DataError);
    std::istringstream fam("5|X|Q|3|2|C1|P1|-|7\n");
    EXPECT_THROW(parse_tables(fam, "f.txt"), DataError);
}

TEST(Tables, IndexExpressions)
{
    EXPECT_EQ(index_expr("2n-2", 6), 10u);
    EXPECT_EQ(index_expr("(n-2)/2", 8), 3u);
    EXPECT_EQ(index_expr("U3", 8), 8u);
    EXPECT_EQ(index_expr("U3", 6), 3u);
    EXPECT_EQ(index_expr("U3", 5), 10u);
    EXPECT_EQ(index_expr("3", 4), 3u);
}

TEST(Tables, AdmissibleQ)
{
    TableRow row;
    row.table_id = "5";
    row.family = Family::Linear;
    row.asch_class = AschClass::C2;
    row.type_name = "GL1wrS2";
    row.auto_q = true;
    row.conditions = {"q_mersenne"};
    EXPECT_EQ(admissible_q(row, 2), (std::vector<unsigned long>{7, 31, 127}));
    EXPECT_TRUE(condition_holds("q_2a3b", 2, PrimePower::from_q(BigInt(17))));
    EXPECT_FALSE(condition_holds("q_2a3b", 2, PrimePower::from_q(BigInt(11))));
}

TEST(Tables, SpotRows)
{
    auto reports = tables_verify(load_tables(data_dir() + "/tables.txt"));
    auto find = [&](const std::string& t, const std::string& row, const std::string& g, const std::string& h) {
        for (const auto& r : reports)
            if (r.table_id == t && r.row == row && r.group == g && r.subgroup == h)
                return r;
        ADD_FAILURE() << "missing row " << t << " " << row << " " << g << " " << h;
        return RowReport{};
    };
    auto u5 = find("5", "U(5,2,11)", "U5(2)", "C1:P2");
    EXPECT_EQ(u5.computed, "DiffOne(11)");
    EXPECT_EQ(u5.status, "agree");
    auto v = find("4", "V", "U4(2)", "C5:Sp4");
    EXPECT_EQ(v.computed, "EqualPi");
    EXPECT_EQ(v.status, "agree");
    auto l1 = find("6", "L1", "L3(8)", "C1:P1");
    EXPECT_EQ(l1.computed, "DiffOne(73)");
    EXPECT_EQ(l1.status, "agree");
}

// The rows recorded in the ledger as disagreements with the published tables.
TEST(Tables, KnownDisagreementsOnly)
{
    auto reports = tables_verify(load_tables(data_dir() + "/tables.txt"));
    std::set<std::string> bad;
    unsigned errors = 0;
    for (const auto& r : reports) {
        if (r.status == "mismatch")
            bad.insert(r.table_id + " " + r.row + " " + r.group + " " + r.subgroup);
        errors += r.status == "error";
    }
    EXPECT_EQ(errors, 0u);
    std::set<std::string> known = {
        "4 XII PSp6(2) C8:Om6",
        "5 U(4,5,13) U4(5) S:U4(2)",
        "5 O-(10,2,17) POmega10-(2) S:A10",
        "5 O-(10,2,17) POmega10-(2) S:M12",
        "6 U2 U3(5) C1:P1",
        "6 S9 PSp6(2) C8:Om6",
    };
    EXPECT_EQ(bad, known);
}

TEST(Tables, LinearUniquePpdShape)
{
    // For L1/L2 at n prime with a unique ppd r: r = 1 mod nf and r odd.
    for (const auto& r : tables_verify(load_tables(data_dir() + "/tables.txt"))) {
        if (r.table_id != "6" || (r.row != "L1" && r.row != "L2") || r.status != "agree")
            continue;
        auto open = r.computed.find('(');
        if (r.computed.rfind("DiffOne", 0) != 0)
            continue;
        BigInt rr(r.computed.substr(open + 1, r.computed.size() - open - 2));
        GroupId g = grp(("L:3:" + r.group.substr(3, r.group.size() - 4)).c_str());
        unsigned long nf = 3 * g.q.f;
        EXPECT_EQ(BigInt(rr % nf), 1) << r.group;
        EXPECT_EQ(BigInt(rr % 2), 1) << r.group;
    }
}
