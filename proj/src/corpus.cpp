#include "elusive/corpus.hpp"

#include "elusive/errors.hpp"
#include "elusive/matgrp.hpp"
#include "elusive/tables.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace elusive::pg {

namespace {

std::string trim(const std::string& s)
{
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    for (auto& x : split(s, ','))
        if (!x.empty()) out.push_back(x);
    return out;
}

using mg::Fe;
using mg::Matrix;

// A socle acting on a faithful set of subspaces, plus the outer automorphisms.
struct Model {
    std::string socle;
    mg::FieldPtr F;
    mg::FormSpec form;
    std::optional<mg::SubspaceSet> items;
    bool with_lines = false;  // L3(4): points, then lines by normal vector
    std::vector<Perm> socle_gens;
    std::map<std::string, std::vector<Perm>> outer;  // extension -> extra generators
    std::vector<std::string> extensions;

    std::size_t npts() const { return items->size(); }
    std::size_t degree() const { return with_lines ? 2 * npts() : npts(); }

    Point find(std::vector<Fe> rows) const
    {
        mg::rref(*F, rows, items->k(), items->n());
        long j = items->find(rows.data());
        if (j < 0) throw Error("image of a base subspace is outside the base domain");
        return static_cast<Point>(j);
    }

    /** Permutation induced by v -> (vM)^(p^frob); lines follow the dual action. */
    Perm perm(const Matrix& M, unsigned frob) const
    {
        const Matrix Mi = M.inverse();
        const Matrix MiT = Mi.transpose();
        std::vector<Point> img(degree());
        auto apply = [&](std::size_t i, const Matrix& A, const Matrix& Ainv) {
            auto rows = items->image(i, A, Ainv);
            for (auto& x : rows) x = F->frob(x, frob);
            return find(rows);
        };
        for (std::size_t i = 0; i < npts(); ++i) img[i] = apply(i, M, Mi);
        if (with_lines)
            for (std::size_t i = 0; i < npts(); ++i)
                img[npts() + i] = static_cast<Point>(npts() + apply(i, MiT, MiT.inverse()));
        return Perm(std::move(img));
    }

    Perm frobenius(unsigned k) const { return perm(Matrix::identity(F, items->n()), k); }
};

Model build_l34()
{
    Model m;
    m.socle = "L3(4)";
    auto G = mg::standard_generators(gf::GroupId::parse("L:3:4"));
    m.F = G.field;
    m.form = G.form;
    m.items = mg::enumerate_subspaces(m.form, mg::SubspaceSpec::parse("points"));
    m.with_lines = true;
    for (auto& g : G.gens) m.socle_gens.push_back(m.perm(g, 0));
    std::vector<Point> swap(m.degree());
    for (std::size_t i = 0; i < m.npts(); ++i) {
        swap[i] = static_cast<Point>(m.npts() + i);
        swap[m.npts() + i] = static_cast<Point>(i);
    }
    Perm gamma(swap), phi = m.frobenius(1);
    // 2_1 is the graph-field (unitary) involution, 2_3 the graph involution.
    m.outer["2_1"] = {gamma * phi};
    m.outer["2_2"] = {phi};
    m.outer["2_3"] = {gamma};
    m.outer["2^2"] = {gamma, phi};
    m.extensions = {"1", "2_1", "2_2", "2_3", "2^2"};
    return m;
}

Model build_unitary(const std::string& socle, const char* id, const char* kind)
{
    Model m;
    m.socle = socle;
    auto G = mg::standard_generators(gf::GroupId::parse(id));
    m.F = G.field;
    m.form = G.form;
    m.items = mg::enumerate_subspaces(m.form, mg::SubspaceSpec::parse(kind));
    for (auto& g : G.gens) m.socle_gens.push_back(m.perm(g, 0));
    m.outer["2"] = {m.frobenius(mg::unitary_frob_power(*m.F))};
    m.extensions = {"1", "2"};
    return m;
}

// U4(3).2_2: the outer involution centralizing PSp4(3) is the field automorphism
// in a basis where the Hermitian Gram is zeta * (symplectic Gram) with zeta^3 = -zeta.
Model build_u43()
{
    Model m;
    m.socle = "U4(3)";
    auto G = mg::standard_generators(gf::GroupId::parse("U:4:3"));
    m.F = G.field;
    const mg::Field& K = *m.F;
    Fe zeta = 0;
    for (Fe x = 1; x < K.size() && !zeta; ++x)
        if (K.frob(x, 1) == K.neg(x)) zeta = x;
    auto omega = mg::FormSpec::standard(gf::Family::Symplectic, 4, m.F).gram;
    m.form.kind = mg::FormKind::Unitary;
    m.form.gram = omega;
    for (unsigned i = 0; i < 4; ++i)
        for (unsigned j = 0; j < 4; ++j) m.form.gram.at(i, j) = K.mul(zeta, omega.at(i, j));
    m.items = mg::enumerate_subspaces(m.form, mg::SubspaceSpec::parse("ts:2"));
    // A diagonal basis change diag(1, 1, c, c) carries the standard form to a multiple of zeta*Omega.
    for (Fe c = 1; c < K.size() && m.socle_gens.empty(); ++c) {
        Matrix B = Matrix::identity(m.F, 4);
        B.at(2, 2) = B.at(3, 3) = c;
        const Matrix Bi = B.inverse();
        std::vector<Matrix> hs;
        for (auto& g : G.gens) hs.push_back(Bi * g * B);
        if (!std::all_of(hs.begin(), hs.end(), [&](const Matrix& h) { return m.form.preserved_by(h); })) continue;
        for (auto& h : hs) m.socle_gens.push_back(m.perm(h, 0));
    }
    if (m.socle_gens.empty()) throw Error("no diagonal basis change to zeta*Omega");
    m.outer["2_2"] = {m.frobenius(1)};
    m.extensions = {"1", "2_2"};
    return m;
}

Model build_sp62()
{
    Model m;
    m.socle = "PSp6(2)";
    auto G = mg::standard_generators(gf::GroupId::parse("S:6:2", false));
    m.F = G.field;
    m.form = G.form;
    m.items = mg::enumerate_subspaces(m.form, mg::SubspaceSpec::parse("points"));
    for (auto& g : G.gens) m.socle_gens.push_back(m.perm(g, 0));
    m.extensions = {"1"};
    return m;
}

const Model& model(const std::string& socle)
{
    static std::mutex mu;
    static std::map<std::string, std::unique_ptr<Model>> cache;
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(socle); it != cache.end()) return *it->second;
    Model m;
    if (socle == "L3(4)") m = build_l34();
    else if (socle == "U4(2)") m = build_unitary(socle, "U:4:2", "points");
    else if (socle == "U5(2)") m = build_unitary(socle, "U:5:2", "nondeg:1");
    else if (socle == "U4(3)") m = build_u43();
    else if (socle == "PSp6(2)") m = build_sp62();
    else throw UnsupportedConstruction("no corpus model for socle " + socle);
    auto& slot = cache[socle];
    slot = std::make_unique<Model>(std::move(m));
    return *slot;
}

// Mutually orthogonal non-isotropic points, one per dimension.
std::vector<Point> find_frame(const Model& m)
{
    const auto& set = *m.items;
    const unsigned n = set.n();
    std::vector<Point> cand;
    for (std::size_t i = 0; i < set.size(); ++i)
        if (m.form.quadratic(set.item(i)) != 0) cand.push_back(static_cast<Point>(i));
    std::vector<Point> chosen;
    auto dfs = [&](auto& self, std::size_t from) -> bool {
        if (chosen.size() == n) return true;
        for (std::size_t c = from; c < cand.size(); ++c) {
            bool ok = true;
            for (Point p : chosen) ok = ok && m.form.bilinear(set.item(p), set.item(cand[c])) == 0;
            if (!ok) continue;
            chosen.push_back(cand[c]);
            if (self(self, c + 1)) return true;
            chosen.pop_back();
        }
        return false;
    };
    if (!dfs(dfs, 0)) throw Error("no orthogonal frame");
    return chosen;
}

Point point_index(const Model& m, std::vector<Fe> v) { return m.find(std::move(v)); }

std::vector<Point> hyperoval_object(const Model& m, const std::vector<Fe>& scale)
{
    const mg::Field& K = *m.F;
    std::vector<std::vector<Fe>> pts;
    for (Fe t = 0; t < K.size(); ++t) pts.push_back({1, t, K.mul(t, t)});
    pts.push_back({0, 0, 1});
    pts.push_back({0, 1, 0});
    for (auto& v : pts)
        for (unsigned i = 0; i < 3; ++i) v[i] = K.mul(v[i], scale[i]);
    std::vector<Point> obj;
    for (auto& v : pts) obj.push_back(point_index(m, v));
    // External lines: normals w with w.x != 0 for every hyperoval point.
    for (std::size_t i = 0; i < m.npts(); ++i) {
        const Fe* w = m.items->item(i);
        bool external = true;
        for (auto& v : pts) {
            Fe dot = 0;
            for (unsigned j = 0; j < 3; ++j) dot = K.add(dot, K.mul(w[j], v[j]));
            external = external && dot != 0;
        }
        if (external) obj.push_back(static_cast<Point>(m.npts() + i));
    }
    return obj;
}

} // namespace

// ---------------------------------------------------------------- generator library

std::vector<NamedGroup> load_generators(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::vector<NamedGroup> out;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        auto f = split(s, '|');
        if (f.size() != 3) throw DataError(path + ":" + std::to_string(line) + ": expected 3 fields");
        NamedGroup g;
        g.name = f[0];
        try {
            g.degree = std::stoul(f[1]);
            for (auto& gen : split(f[2], ';')) {
                std::istringstream is(gen);
                std::vector<Point> img;
                for (unsigned long x; is >> x;) img.push_back(static_cast<Point>(x));
                if (img.size() != g.degree) throw DataError("generator has " + std::to_string(img.size()) + " images");
                g.gens.emplace_back(std::move(img));
            }
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(line) + ": " + e.what());
        } catch (const std::exception& e) {
            throw DataError(path + ":" + std::to_string(line) + ": " + e.what());
        }
        out.push_back(std::move(g));
    }
    return out;
}

const NamedGroup& library_group(const std::string& name)
{
    static const std::vector<NamedGroup> lib = load_generators(gf::data_dir() + "/generators.txt");
    for (auto& g : lib)
        if (g.name == name) return g;
    throw UnsupportedConstruction("no generators for " + name + " in generators.txt");
}

// ---------------------------------------------------------------- corpus groups

std::vector<std::string> corpus_socles() { return {"L3(4)", "U4(2)", "U5(2)", "U4(3)", "PSp6(2)"}; }

std::vector<std::string> corpus_extensions(const std::string& socle) { return model(socle).extensions; }

CorpusGroup corpus_group(const std::string& socle, const std::string& extension)
{
    const Model& m = model(socle);
    CorpusGroup g;
    g.socle = socle;
    g.extension = extension;
    g.socle_gens = m.socle_gens;
    g.gens = m.socle_gens;
    if (extension != "1") {
        auto it = m.outer.find(extension);
        if (it == m.outer.end()) throw UnsupportedConstruction("no extension " + socle + "." + extension + " in the corpus");
        for (auto& p : it->second) g.gens.push_back(p);
    }
    return g;
}

std::vector<Point> corpus_object(const CorpusGroup& g, const std::string& object)
{
    const Model& m = model(g.socle);
    const auto& set = *m.items;
    const mg::Field& K = *m.F;
    if (m.socle == "L3(4)") {
        if (object == "antiflag") return {point_index(m, {1, 0, 0}), static_cast<Point>(m.npts() + point_index(m, {1, 0, 0}))};
        if (object == "baer") {
            std::vector<Point> out;
            for (std::size_t i = 0; i < m.npts(); ++i) {
                const Fe* v = set.item(i);
                if (v[0] <= 1 && v[1] <= 1 && v[2] <= 1) {
                    out.push_back(static_cast<Point>(i));
                    out.push_back(static_cast<Point>(m.npts() + i));
                }
            }
            return out;
        }
        if (object == "hyperoval") {
            // The three L3(4)-classes of hyperovals, moved by diagonal automorphisms.
            const std::size_t socle_orbit = set_action(g.socle_gens, hyperoval_object(m, {1, 1, 1})).degree();
            for (Fe s : {Fe{1}, K.gen(), K.mul(K.gen(), K.gen())}) {
                auto obj = hyperoval_object(m, {s, 1, 1});
                if (set_action(g.gens, obj).degree() == socle_orbit) return obj;
            }
            return hyperoval_object(m, {1, 1, 1});
        }
    } else if (m.socle == "U4(2)" || m.socle == "U5(2)") {
        if (object == "ts-point")
            for (std::size_t i = 0; i < set.size(); ++i)
                if (m.form.quadratic(set.item(i)) == 0) return {static_cast<Point>(i)};
        if (object == "nondeg-point")
            for (std::size_t i = 0; i < set.size(); ++i)
                if (m.form.quadratic(set.item(i)) != 0) return {static_cast<Point>(i)};
        if (object == "frame") return find_frame(m);
        if (object == "subfield") {
            const unsigned s = mg::unitary_frob_power(K);
            std::vector<Point> out;
            for (std::size_t i = 0; i < set.size(); ++i) {
                bool rational = true;
                for (unsigned j = 0; j < set.n(); ++j) rational = rational && K.frob(set.item(i)[j], s) == set.item(i)[j];
                if (rational) out.push_back(static_cast<Point>(i));
            }
            return out;
        }
    } else if (m.socle == "U4(3)") {
        if (object == "ts-line") return {0};
    } else if (m.socle == "PSp6(2)") {
        const unsigned n = set.n();
        if (object == "nondeg-line") {
            std::vector<Fe> a(n, 0), b(n, 0), c(n, 0);
            a[0] = 1, b[n - 1] = 1, c[0] = c[n - 1] = 1;
            return {point_index(m, a), point_index(m, b), point_index(m, c)};
        }
        if (object == "form+" || object == "form-") {
            auto forms = mg::enumerate_subspaces(m.form, mg::SubspaceSpec::parse(object == "form+" ? "forms:+" : "forms:-"));
            const Fe* d = forms.item(0);
            std::vector<Point> out;
            for (std::size_t i = 0; i < set.size(); ++i) {
                const Fe* v = set.item(i);
                Fe q = 0;
                for (unsigned a = 0; a < n; ++a) {
                    q = K.add(q, K.mul(d[a], K.mul(v[a], v[a])));
                    for (unsigned b = a + 1; b < n; ++b) q = K.add(q, K.mul(m.form.gram.at(a, b), K.mul(v[a], v[b])));
                }
                if (q == 0) out.push_back(static_cast<Point>(i));
            }
            return out;
        }
    }
    throw UnsupportedConstruction("no object '" + object + "' for " + g.socle);
}

// ---------------------------------------------------------------- table 1

std::vector<Table1Row> load_table1(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::vector<Table1Row> out;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        auto s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        auto f = split(s, '|');
        if (f.size() != 7) throw DataError(path + ":" + std::to_string(line) + ": expected 7 fields");
        Table1Row r;
        r.line = line;
        r.socle = f[0];
        r.asch = f[1];
        r.type = f[2];
        r.object = f[3];
        try {
            r.r = std::stoul(f[4]);
        } catch (const std::exception&) {
            throw DataError(path + ":" + std::to_string(line) + ": bad prime '" + f[4] + "'");
        }
        r.listed = split_list(f[5]);
        r.others = split_list(f[6]);
        out.push_back(std::move(r));
    }
    return out;
}

const std::vector<Table1Row>& table1_rows()
{
    static const std::vector<Table1Row> rows = load_table1(gf::data_dir() + "/table1.txt");
    return rows;
}

namespace {

struct Cached {
    std::unique_ptr<BSGS> G;
    std::unique_ptr<ClassTable> table;
};

Cached& class_cache(const CorpusGroup& g)
{
    static std::mutex mu;
    static std::map<std::string, Cached> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& c = cache[g.name()];
    if (!c.G) {
        c.G = std::make_unique<BSGS>(g.gens);
        c.table = std::make_unique<ClassTable>(prime_order_classes(*c.G));
    }
    return c;
}

} // namespace

RowOutcome evaluate_row(const Table1Row& row, const std::string& extension, std::uint64_t seed)
{
    auto g = corpus_group(row.socle, extension);
    RowOutcome out;
    out.group = g.name();
    out.object = row.object;
    out.listed = std::find(row.listed.begin(), row.listed.end(), extension) != row.listed.end();
    auto omega = set_action(g.gens, corpus_object(g, row.object));
    out.degree = omega.degree();
    out.primitive = is_primitive(omega.perms, omega.degree());
    auto& cached = class_cache(g);
    out.order = cached.G->order();
    out.verdict = derangement_verdict(*cached.table, omega, seed);
    for (const auto& c : cached.table->classes()) out.r_classes += c.element_order == row.r;
    const bool ae = out.verdict.kind == VerdictKind::AlmostElusive;
    if (out.listed) {
        out.pass = out.primitive && ae && out.verdict.r == row.r;
    } else {
        out.pass = !(out.primitive && ae);
        out.note = !out.primitive ? "imprimitive" : "not almost elusive";
    }
    return out;
}

} // namespace elusive::pg
