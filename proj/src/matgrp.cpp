#include "elusive/matgrp.hpp"

#include "elusive/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

namespace elusive::mg {

namespace {

using u64 = unsigned long;

bool small_prime(u64 p)
{
    if (p < 2) return false;
    for (u64 d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

std::vector<u64> prime_divisors(u64 n)
{
    std::vector<u64> out;
    for (u64 d = 2; d * d <= n; ++d)
        if (n % d == 0) {
            out.push_back(d);
            while (n % d == 0) n /= d;
        }
    if (n > 1) out.push_back(n);
    return out;
}

} // namespace

// ---------------------------------------------------------------- fields

FieldPtr Field::make(u64 p, unsigned f)
{
    if (!small_prime(p) || f == 0) throw PreconditionViolation("field needs a prime p and f >= 1");
    u64 q = 1;
    for (unsigned i = 0; i < f; ++i) {
        q *= p;
        if (q > (1ul << 20)) throw OutOfRange("field size " + std::to_string(p) + "^" + std::to_string(f) + " exceeds 2^20");
    }
    static std::mutex mu;
    static std::map<std::pair<u64, unsigned>, FieldPtr> cache;
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find({p, f}); it != cache.end()) return it->second;

    std::shared_ptr<Field> F(new Field());
    F->p_ = p;
    F->f_ = f;
    F->q_ = q;
    F->exp_.assign(q - 1, 0);
    F->log_.assign(q, 0);
    const auto divs = prime_divisors(q - 1);

    auto to_digits = [&](u64 v) {
        std::vector<unsigned> d(f);
        for (unsigned i = 0; i < f; ++i, v /= p) d[i] = static_cast<unsigned>(v % p);
        return d;
    };
    auto from_digits = [&](const std::vector<unsigned>& d) {
        u64 v = 0;
        for (unsigned i = f; i-- > 0;) v = v * p + d[i];
        return static_cast<Fe>(v);
    };

    if (f == 1) {
        for (u64 g = 1; g < p || p == 2; ++g) {
            if (p == 2) {
                F->gen_ = 1;
                break;
            }
            bool prim = true;
            for (u64 l : divs) {
                u64 x = 1;
                for (u64 i = 0; i < (p - 1) / l; ++i) x = x * g % p;
                if (x == 1) prim = false;
            }
            if (prim) {
                F->gen_ = static_cast<Fe>(g);
                break;
            }
        }
        F->poly_ = {static_cast<unsigned>((p - F->gen_) % p)};
        u64 x = 1;
        for (u64 i = 0; i < q - 1; ++i) {
            F->exp_[i] = static_cast<Fe>(x);
            F->log_[x] = static_cast<std::uint32_t>(i);
            x = x * F->gen_ % p;
        }
    } else {
        // Candidates in lexicographic order of (c_{f-1}, ..., c_0).
        for (u64 code = 0; code < q; ++code) {
            auto c = to_digits(code);
            if (c[0] == 0) continue;
            // Walk the powers of x; primitive iff the first return to 1 is at q-1.
            std::vector<unsigned> y(f, 0);
            y[0] = 1;
            u64 i = 0;
            bool ok = true;
            std::vector<char> seen(q, 0);
            for (;;) {
                Fe v = from_digits(y);
                if (i > 0 && v == 1) break;
                if (i >= q - 1 || seen[v]) {
                    ok = false;
                    break;
                }
                seen[v] = 1;
                F->exp_[i] = v;
                ++i;
                // y <- x*y mod poly
                unsigned carry = y[f - 1];
                for (unsigned j = f - 1; j > 0; --j) y[j] = y[j - 1];
                y[0] = 0;
                for (unsigned j = 0; j < f; ++j) y[j] = static_cast<unsigned>((y[j] + (p - c[j]) * carry) % p);
            }
            if (!ok || i != q - 1) continue;
            F->poly_.assign(c.begin(), c.end());
            F->gen_ = static_cast<Fe>(p);
            for (u64 j = 0; j < q - 1; ++j) F->log_[F->exp_[j]] = static_cast<std::uint32_t>(j);
            break;
        }
        if (F->poly_.empty()) throw Error("no primitive polynomial found");
    }

    F->neg_.resize(q);
    for (u64 a = 0; a < q; ++a) {
        auto d = to_digits(a);
        for (auto& x : d) x = static_cast<unsigned>((p - x) % p);
        F->neg_[a] = from_digits(d);
    }
    if (p != 2 && q <= 1024) {
        F->add_.resize(q * q);
        for (u64 a = 0; a < q; ++a) {
            auto da = to_digits(a);
            for (u64 b = 0; b < q; ++b) {
                auto db = to_digits(b);
                for (unsigned j = 0; j < f; ++j) db[j] = static_cast<unsigned>((db[j] + da[j]) % p);
                F->add_[a * q + b] = from_digits(db);
            }
        }
    }
    cache[{p, f}] = F;
    return F;
}

FieldPtr make_field(u64 p, unsigned f) { return Field::make(p, f); }

Fe Field::add(Fe a, Fe b) const
{
    if (p_ == 2) return a ^ b;
    if (!add_.empty()) return add_[a * q_ + b];
    Fe out = 0, scale = 1;
    for (unsigned i = 0; i < f_; ++i, a /= static_cast<Fe>(p_), b /= static_cast<Fe>(p_), scale *= static_cast<Fe>(p_))
        out += static_cast<Fe>(((a % p_) + (b % p_)) % p_) * scale;
    return out;
}

Fe Field::neg(Fe a) const { return neg_[a]; }

Fe Field::inv(Fe a) const
{
    if (a == 0) throw PreconditionViolation("inverse of zero");
    return exp_[(q_ - 1 - log_[a]) % (q_ - 1)];
}

Fe Field::pow(Fe a, u64 e) const
{
    if (e == 0) return 1;
    if (a == 0) return 0;
    return exp_[static_cast<u64>((static_cast<unsigned __int128>(log_[a]) * e) % (q_ - 1))];
}

Fe Field::frob(Fe a, unsigned k) const
{
    u64 e = 1;
    for (unsigned i = 0; i < k % f_; ++i) e *= p_;
    return pow(a, e);
}

u64 Field::log(Fe a) const
{
    if (a == 0) throw PreconditionViolation("log of zero");
    return log_[a];
}

Fe Field::from_int(long v) const
{
    long m = v % static_cast<long>(p_);
    if (m < 0) m += static_cast<long>(p_);
    return static_cast<Fe>(m);
}

bool Field::is_square(Fe a) const { return a == 0 || p_ == 2 || log_[a] % 2 == 0; }

std::string Field::str(Fe a) const
{
    if (f_ == 1) return std::to_string(a);
    std::string s;
    for (unsigned i = f_; i-- > 0;) {
        unsigned c = static_cast<unsigned>((a / static_cast<Fe>(std::pow(p_, i))) % p_);
        if (!c) continue;
        if (!s.empty()) s += "+";
        if (c != 1 || i == 0) s += std::to_string(c);
        if (i >= 1) s += "x";
        if (i >= 2) s += "^" + std::to_string(i);
    }
    return s.empty() ? "0" : s;
}

// ---------------------------------------------------------------- matrices

Matrix::Matrix(FieldPtr field, unsigned rows, unsigned cols)
    : F_(std::move(field)), r_(rows), c_(cols), a_(static_cast<std::size_t>(rows) * cols, 0)
{
}

Matrix Matrix::identity(FieldPtr field, unsigned n)
{
    Matrix m(std::move(field), n, n);
    for (unsigned i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

Matrix Matrix::operator*(const Matrix& o) const
{
    if (c_ != o.r_) throw PreconditionViolation("matrix shapes do not match");
    Matrix out(F_, r_, o.c_);
    const Field& F = *F_;
    for (unsigned i = 0; i < r_; ++i)
        for (unsigned k = 0; k < c_; ++k) {
            Fe a = at(i, k);
            if (!a) continue;
            for (unsigned j = 0; j < o.c_; ++j) {
                Fe b = o.at(k, j);
                if (b) out.at(i, j) = F.add(out.at(i, j), F.mul(a, b));
            }
        }
    return out;
}

Matrix Matrix::transpose() const
{
    Matrix out(F_, c_, r_);
    for (unsigned i = 0; i < r_; ++i)
        for (unsigned j = 0; j < c_; ++j) out.at(j, i) = at(i, j);
    return out;
}

Matrix Matrix::frob(unsigned k) const
{
    Matrix out = *this;
    for (auto& x : out.a_) x = F_->frob(x, k);
    return out;
}

Matrix Matrix::inverse() const
{
    if (r_ != c_) throw PreconditionViolation("inverse of a non-square matrix");
    const Field& F = *F_;
    const unsigned n = r_;
    Matrix a = *this, inv = identity(F_, n);
    for (unsigned col = 0; col < n; ++col) {
        unsigned piv = col;
        while (piv < n && a.at(piv, col) == 0) ++piv;
        if (piv == n) throw PreconditionViolation("singular matrix");
        if (piv != col)
            for (unsigned j = 0; j < n; ++j) {
                std::swap(a.at(piv, j), a.at(col, j));
                std::swap(inv.at(piv, j), inv.at(col, j));
            }
        Fe s = F.inv(a.at(col, col));
        for (unsigned j = 0; j < n; ++j) {
            a.at(col, j) = F.mul(a.at(col, j), s);
            inv.at(col, j) = F.mul(inv.at(col, j), s);
        }
        for (unsigned i = 0; i < n; ++i) {
            if (i == col || a.at(i, col) == 0) continue;
            Fe t = F.neg(a.at(i, col));
            for (unsigned j = 0; j < n; ++j) {
                a.at(i, j) = F.add(a.at(i, j), F.mul(t, a.at(col, j)));
                inv.at(i, j) = F.add(inv.at(i, j), F.mul(t, inv.at(col, j)));
            }
        }
    }
    return inv;
}

Matrix Matrix::pow(u64 e) const
{
    Matrix result = identity(F_, r_), b = *this;
    for (; e; e >>= 1, b = b * b)
        if (e & 1) result = result * b;
    return result;
}

unsigned Matrix::rank() const
{
    auto rows = a_;
    return rref(*F_, rows, r_, c_);
}

Fe Matrix::det() const
{
    if (r_ != c_) throw PreconditionViolation("determinant of a non-square matrix");
    const Field& F = *F_;
    Matrix a = *this;
    Fe d = 1;
    for (unsigned col = 0; col < r_; ++col) {
        unsigned piv = col;
        while (piv < r_ && a.at(piv, col) == 0) ++piv;
        if (piv == r_) return 0;
        if (piv != col) {
            for (unsigned j = 0; j < c_; ++j) std::swap(a.at(piv, j), a.at(col, j));
            d = F.neg(d);
        }
        d = F.mul(d, a.at(col, col));
        Fe s = F.inv(a.at(col, col));
        for (unsigned i = col + 1; i < r_; ++i) {
            if (!a.at(i, col)) continue;
            Fe t = F.neg(F.mul(a.at(i, col), s));
            for (unsigned j = col; j < c_; ++j) a.at(i, j) = F.add(a.at(i, j), F.mul(t, a.at(col, j)));
        }
    }
    return d;
}

bool Matrix::is_identity() const
{
    for (unsigned i = 0; i < r_; ++i)
        for (unsigned j = 0; j < c_; ++j)
            if (at(i, j) != (i == j ? 1u : 0u)) return false;
    return true;
}

std::string Matrix::str() const
{
    std::ostringstream os;
    for (unsigned i = 0; i < r_; ++i) {
        os << "[";
        for (unsigned j = 0; j < c_; ++j) os << (j ? " " : "") << F_->str(at(i, j));
        os << "]";
    }
    return os.str();
}

u64 matrix_order(const Matrix& m, u64 limit)
{
    Matrix x = m;
    for (u64 k = 1; k <= limit; ++k) {
        if (x.is_identity()) return k;
        x = x * m;
    }
    return 0;
}

unsigned rref(const Field& F, std::vector<Fe>& a, unsigned k, unsigned n)
{
    unsigned rank = 0;
    for (unsigned col = 0; col < n && rank < k; ++col) {
        unsigned piv = rank;
        while (piv < k && a[piv * n + col] == 0) ++piv;
        if (piv == k) continue;
        if (piv != rank)
            for (unsigned j = 0; j < n; ++j) std::swap(a[piv * n + j], a[rank * n + j]);
        Fe s = F.inv(a[rank * n + col]);
        for (unsigned j = col; j < n; ++j) a[rank * n + j] = F.mul(a[rank * n + j], s);
        for (unsigned i = 0; i < k; ++i) {
            if (i == rank || a[i * n + col] == 0) continue;
            Fe t = F.neg(a[i * n + col]);
            for (unsigned j = col; j < n; ++j) a[i * n + j] = F.add(a[i * n + j], F.mul(t, a[rank * n + j]));
        }
        ++rank;
    }
    return rank;
}

// ---------------------------------------------------------------- forms

std::string to_string(FormKind k)
{
    switch (k) {
    case FormKind::None: return "none";
    case FormKind::Unitary: return "unitary";
    case FormKind::Symplectic: return "symplectic";
    case FormKind::Quadratic: return "quadratic";
    }
    return "?";
}

unsigned unitary_frob_power(const Field& F)
{
    if (F.f() % 2) throw PreconditionViolation("unitary forms need a field of square order");
    return F.f() / 2;
}

namespace {

// Least nu with t^2 + t + nu irreducible over F.
Fe elliptic_nu(const Field& F)
{
    for (Fe nu = 1; nu < F.size(); ++nu) {
        bool root = false;
        for (Fe t = 0; t < F.size() && !root; ++t) root = F.add(F.add(F.mul(t, t), t), nu) == 0;
        if (!root) return nu;
    }
    throw Error("no irreducible t^2+t+nu");
}

Matrix standard_quad(const FieldPtr& F, unsigned n, int sign)
{
    Matrix q(F, n, n);
    const unsigned m = n / 2;
    if (sign == 0) {
        for (unsigned i = 0; i < m; ++i) q.at(i, n - 1 - i) = 1;
        q.at(m, m) = 1;
    } else if (sign > 0) {
        for (unsigned i = 0; i < m; ++i) q.at(i, n - 1 - i) = 1;
    } else {
        for (unsigned i = 0; i + 1 < m; ++i) q.at(i, n - 1 - i) = 1;
        q.at(m - 1, m - 1) = 1;
        q.at(m - 1, m) = 1;
        q.at(m, m) = elliptic_nu(*F);
    }
    return q;
}

Matrix polar(const Matrix& quad)
{
    const Field& F = quad.field();
    Matrix g = quad;
    for (unsigned i = 0; i < quad.rows(); ++i)
        for (unsigned j = 0; j < quad.cols(); ++j) g.at(i, j) = F.add(quad.at(i, j), quad.at(j, i));
    return g;
}

FormSpec quadratic_form(const Matrix& quad)
{
    FormSpec f;
    f.kind = FormKind::Quadratic;
    f.quad = quad;
    f.gram = polar(quad);
    f.sign = quad.rows() % 2 == 0 ? f.computed_sign() : 0;
    return f;
}

} // namespace

FormSpec FormSpec::standard(gf::Family family, unsigned n, FieldPtr F)
{
    FormSpec f;
    switch (family) {
    case gf::Family::Linear:
        f.kind = FormKind::None;
        f.gram = Matrix(F, n, n);
        return f;
    case gf::Family::Symplectic:
        if (n % 2) throw PreconditionViolation("symplectic forms need even dimension");
        f.kind = FormKind::Symplectic;
        f.gram = Matrix(F, n, n);
        for (unsigned i = 0; i < n; ++i) f.gram.at(i, n - 1 - i) = i < n / 2 ? 1 : F->neg(1);
        return f;
    case gf::Family::Unitary:
        unitary_frob_power(*F);
        f.kind = FormKind::Unitary;
        f.gram = Matrix(F, n, n);
        for (unsigned i = 0; i < n; ++i) f.gram.at(i, n - 1 - i) = 1;
        return f;
    case gf::Family::OrthogonalPlus:
    case gf::Family::OrthogonalMinus:
    case gf::Family::OrthogonalOdd: {
        int sign = family == gf::Family::OrthogonalPlus ? 1 : family == gf::Family::OrthogonalMinus ? -1 : 0;
        if ((sign == 0) != (n % 2 == 1)) throw PreconditionViolation("orthogonal sign does not match the dimension parity");
        if (sign == 0 && F->p() == 2) throw PreconditionViolation("odd-dimensional orthogonal forms need q odd");
        auto qf = quadratic_form(standard_quad(F, n, sign));
        if (qf.sign != sign) throw Error("standard quadratic form has the wrong type");
        return qf;
    }
    }
    return f;
}

Fe FormSpec::bilinear(const Fe* u, const Fe* v) const
{
    const Field& F = gram.field();
    const unsigned n = gram.rows();
    const unsigned s = kind == FormKind::Unitary ? unitary_frob_power(F) : 0;
    Fe acc = 0;
    for (unsigned i = 0; i < n; ++i) {
        if (!u[i]) continue;
        Fe row = 0;
        for (unsigned j = 0; j < n; ++j) {
            Fe g = gram.at(i, j);
            if (g && v[j]) row = F.add(row, F.mul(g, s ? F.frob(v[j], s) : v[j]));
        }
        acc = F.add(acc, F.mul(u[i], row));
    }
    return acc;
}

Fe FormSpec::quadratic(const Fe* v) const
{
    if (kind != FormKind::Quadratic) return bilinear(v, v);
    const Field& F = quad.field();
    const unsigned n = quad.rows();
    Fe acc = 0;
    for (unsigned i = 0; i < n; ++i) {
        if (!v[i]) continue;
        for (unsigned j = i; j < n; ++j) {
            Fe c = quad.at(i, j);
            if (c && v[j]) acc = F.add(acc, F.mul(c, F.mul(v[i], v[j])));
        }
    }
    return acc;
}

bool FormSpec::preserved_by(const Matrix& m) const
{
    switch (kind) {
    case FormKind::None: return true;
    case FormKind::Symplectic: return m * gram * m.transpose() == gram;
    case FormKind::Unitary: return m * gram * m.frob(unitary_frob_power(m.field())).transpose() == gram;
    case FormKind::Quadratic:
        if (!(m * gram * m.transpose() == gram)) return false;
        for (unsigned i = 0; i < m.rows(); ++i) {
            std::vector<Fe> e(m.cols(), 0);
            e[i] = 1;
            if (quadratic(m.row(i)) != quadratic(e.data())) return false;
        }
        return true;
    }
    return false;
}

int FormSpec::type_of(const Matrix& basis) const
{
    if (kind != FormKind::Quadratic) throw PreconditionViolation("Witt type needs a quadratic form");
    const Field& F = basis.field();
    const unsigned d = basis.rows();
    if (d % 2) throw PreconditionViolation("Witt type needs even dimension");
    if (d == 0) return 1;
    if (F.p() != 2) {
        Matrix g = basis * gram * basis.transpose();
        Fe det = g.det();
        if (det == 0) throw PreconditionViolation("degenerate subspace has no Witt type");
        Fe x = (d / 2) % 2 ? F.neg(det) : det;
        return F.is_square(x) ? 1 : -1;
    }
    // Characteristic 2: symplectic basis of the polar form, then the Arf invariant.
    // The type is + exactly when Arf = sum Q(u_i)Q(w_i) has absolute trace 0.
    std::vector<std::vector<Fe>> rest;
    for (unsigned i = 0; i < d; ++i) rest.emplace_back(basis.row(i), basis.row(i) + basis.cols());
    Fe arf = 0;
    while (!rest.empty()) {
        std::vector<Fe> u = rest.back();
        rest.pop_back();
        auto it = std::find_if(rest.begin(), rest.end(), [&](const auto& x) { return bilinear(u.data(), x.data()) != 0; });
        if (it == rest.end()) throw PreconditionViolation("degenerate subspace has no Witt type");
        std::vector<Fe> w = *it;
        rest.erase(it);
        const Fe s = F.inv(bilinear(u.data(), w.data()));
        for (auto& x : w) x = F.mul(x, s);
        for (auto& x : rest) {
            const Fe a = bilinear(x.data(), w.data()), b = bilinear(x.data(), u.data());
            for (std::size_t j = 0; j < x.size(); ++j) x[j] = F.add(x[j], F.add(F.mul(a, u[j]), F.mul(b, w[j])));
        }
        arf = F.add(arf, F.mul(quadratic(u.data()), quadratic(w.data())));
    }
    Fe trace = 0, power = arf;
    for (unsigned i = 0; i < F.f(); ++i, power = F.mul(power, power)) trace = F.add(trace, power);
    return trace == 0 ? 1 : -1;
}

int FormSpec::computed_sign() const
{
    if (kind != FormKind::Quadratic || dim() % 2) return 0;
    return type_of(Matrix::identity(gram.field_ptr(), dim()));
}

// ---------------------------------------------------------------- generators

MatrixGroup standard_generators(const gf::GroupId& g)
{
    const unsigned n = g.n;
    const u64 q = g.q.q_ul(), p = g.q.p_ul();
    const unsigned f = g.q.f;
    const bool orth = g.family == gf::Family::OrthogonalPlus || g.family == gf::Family::OrthogonalMinus ||
                      g.family == gf::Family::OrthogonalOdd;
    if (!g.q.q.fits_ulong_p() || (orth ? (n > 8 || q > 3) : (n > 6 || q > 8)))
        throw UnsupportedConstruction("no generator construction for " + g.name());

    MatrixGroup G;
    G.field = make_field(p, g.family == gf::Family::Unitary ? 2 * f : f);
    const Field& F = *G.field;
    G.form = FormSpec::standard(g.family, n, G.field);
    const auto& gram = G.form.gram;
    auto I = Matrix::identity(G.field, n);
    auto unit = [&](unsigned i) {
        std::vector<Fe> v(n, 0);
        v[i] = 1;
        return v;
    };
    // x -> x + a * form(x, v) * v, as a matrix on row vectors.
    auto transvection = [&](const std::vector<Fe>& v, Fe a) {
        Matrix m = I;
        for (unsigned i = 0; i < n; ++i) {
            auto e = unit(i);
            Fe c = F.mul(a, G.form.bilinear(e.data(), v.data()));
            if (!c) continue;
            for (unsigned j = 0; j < n; ++j) m.at(i, j) = F.add(m.at(i, j), F.mul(c, v[j]));
        }
        return m;
    };

    switch (g.family) {
    case gf::Family::Linear:
        for (unsigned i = 0; i + 1 < n; ++i)
            for (unsigned t = 0; t < f; ++t) {
                Matrix a = I, b = I;
                a.at(i, i + 1) = F.exp(t);
                b.at(i + 1, i) = F.exp(t);
                G.gens.push_back(a);
                G.gens.push_back(b);
            }
        break;
    case gf::Family::Symplectic:
        for (unsigned i = 0; i < n; ++i)
            for (unsigned t = 0; t < f; ++t) {
                G.gens.push_back(transvection(unit(i), F.exp(t)));
                if (i + 1 < n) {
                    auto v = unit(i);
                    v[i + 1] = 1;
                    G.gens.push_back(transvection(v, F.exp(t)));
                }
            }
        break;
    case gf::Family::Unitary: {
        const unsigned s = unitary_frob_power(F);
        auto trace_zero = [&](Fe target) {  // c with c + c^s = target, c != 0
            for (Fe c = 1; c < F.size(); ++c)
                if (F.add(c, F.frob(c, s)) == target) return c;
            throw Error("no element with the requested trace");
        };
        const Fe a0 = trace_zero(0);
        std::vector<Fe> coeffs;  // a0 times an F_q-basis of the subfield
        for (unsigned t = 0; t < f; ++t) coeffs.push_back(F.mul(a0, F.exp(static_cast<u64>(t) * (q + 1))));
        std::vector<std::vector<Fe>> vs;
        const bool odd = n % 2 == 1;
        const unsigned mid = n / 2;
        // Coefficients 1, w, ..., w^(2f-1) span F_{q^2} over F_p.
        for (unsigned i = 0; i < n; ++i) {
            if (odd && i == mid) continue;
            vs.push_back(unit(i));
            for (unsigned j = i + 1; j < n; ++j) {
                if (odd && j == mid) continue;
                if (j == n - 1 - i) {
                    auto v = unit(i);
                    v[j] = a0;
                    vs.push_back(v);
                    continue;
                }
                for (unsigned t = 0; t < F.f(); ++t) {
                    auto v = unit(i);
                    v[j] = F.exp(t);
                    vs.push_back(v);
                }
            }
            if (odd && i < mid)
                for (unsigned t = 0; t < F.f(); ++t) {
                    Fe b = F.exp(t);
                    auto v = unit(i);
                    v[mid] = b;
                    v[n - 1 - i] = trace_zero(F.neg(F.mul(b, F.frob(b, s))));
                    vs.push_back(v);
                }
        }
        for (auto& v : vs) {
            if (G.form.quadratic(v.data()) != 0) throw Error("unitary transvection vector is not isotropic");
            for (Fe a : coeffs) G.gens.push_back(transvection(v, a));
        }
        break;
    }
    case gf::Family::OrthogonalPlus:
    case gf::Family::OrthogonalMinus:
    case gf::Family::OrthogonalOdd: {
        // Eichler transformations x -> x + B(x,u)v - B(x,v)u - Q(v)B(x,u)u, u singular, v in u^perp.
        const unsigned hyp = g.family == gf::Family::OrthogonalMinus ? n / 2 - 1 : n / 2;
        for (unsigned i = 0; i < n; ++i) {
            if (i >= hyp && i < n - hyp) continue;
            auto u = unit(i);
            for (unsigned j = 0; j < n; ++j) {
                if (j == i || j == n - 1 - i) continue;
                for (unsigned t = 0; t < f; ++t) {
                    auto v = unit(j);
                    v[j] = F.exp(t);
                    Fe qv = G.form.quadratic(v.data());
                    Matrix m = I;
                    for (unsigned r = 0; r < n; ++r) {
                        auto e = unit(r);
                        Fe bu = G.form.bilinear(e.data(), u.data());
                        Fe bv = G.form.bilinear(e.data(), v.data());
                        for (unsigned c = 0; c < n; ++c) {
                            Fe add = F.sub(F.mul(bu, v[c]), F.mul(bv, u[c]));
                            add = F.sub(add, F.mul(F.mul(qv, bu), u[c]));
                            m.at(r, c) = F.add(m.at(r, c), add);
                        }
                    }
                    G.gens.push_back(m);
                }
            }
        }
        break;
    }
    }
    for (auto& m : G.gens)
        if (!G.form.preserved_by(m)) throw Error("generator does not preserve the standard form");
    return G;
}

// ---------------------------------------------------------------- elements from labels

namespace {

// F_{Q^d} over F = F_Q with coordinates in the basis theta^0..theta^{d-1}.
struct Extension {
    FieldPtr F, E;
    unsigned d = 1;
    std::vector<Fe> emb;              // F -> E
    std::vector<std::int32_t> back;   // E -> F, or -1
    std::vector<Fe> coords;           // E element -> d coordinates

    Extension(FieldPtr small, unsigned degree) : F(std::move(small)), d(degree)
    {
        E = make_field(F->p(), F->f() * d);
        const u64 Q = F->size();
        emb.assign(Q, 0);
        // Image of the generator of F: a root of F's defining polynomial in E.
        Fe y = 0;
        if (F->f() == 1) {
            for (Fe a = 0; a < Q; ++a) emb[a] = a;
        } else {
            const auto& c = F->poly();
            for (Fe cand = 1; cand < E->size(); ++cand) {
                Fe val = E->pow(cand, F->f());
                for (unsigned i = 0; i < c.size(); ++i)
                    val = E->add(val, E->mul(static_cast<Fe>(c[i]), E->pow(cand, i)));
                if (val == 0) {
                    y = cand;
                    break;
                }
            }
            if (!y) throw Error("no embedding of the subfield");
            for (Fe a = 0; a < Q; ++a) {
                Fe v = 0, t = a, ypow = 1;
                for (unsigned i = 0; i < F->f(); ++i, t /= static_cast<Fe>(F->p())) {
                    v = E->add(v, E->mul(static_cast<Fe>(t % F->p()), ypow));
                    ypow = E->mul(ypow, y);
                }
                emb[a] = v;
            }
        }
        back.assign(E->size(), -1);
        for (Fe a = 0; a < Q; ++a) back[emb[a]] = static_cast<std::int32_t>(a);
        coords.assign(E->size() * d, 0);
        std::vector<Fe> theta(d);
        theta[0] = 1;
        for (unsigned i = 1; i < d; ++i) theta[i] = E->mul(theta[i - 1], E->gen());
        std::vector<Fe> a(d, 0);
        u64 total = E->size();
        for (u64 code = 0; code < total; ++code) {
            u64 t = code;
            Fe v = 0;
            for (unsigned i = 0; i < d; ++i, t /= Q) {
                a[i] = static_cast<Fe>(t % Q);
                v = E->add(v, E->mul(emb[a[i]], theta[i]));
            }
            std::copy(a.begin(), a.end(), coords.begin() + static_cast<std::ptrdiff_t>(v) * d);
        }
    }

    Fe down(Fe x) const
    {
        if (back[x] < 0) throw Error("element is not in the subfield");
        return static_cast<Fe>(back[x]);
    }
    Fe theta(unsigned i) const { return E->pow(E->gen(), i); }
    /** Trace from E to the subfield of size Q^m (m | d). */
    Fe trace_to(Fe x, unsigned m) const
    {
        Fe acc = 0;
        for (unsigned i = 0; i < d / m; ++i) acc = E->add(acc, E->frob(x, F->f() * m * i));
        return acc;
    }
    /** Matrix of u -> u * lambda on row coordinates. */
    Matrix mult_matrix(Fe lambda) const
    {
        Matrix m(F, d, d);
        for (unsigned i = 0; i < d; ++i) {
            Fe img = E->mul(theta(i), lambda);
            for (unsigned j = 0; j < d; ++j) m.at(i, j) = coords[static_cast<std::size_t>(img) * d + j];
        }
        return m;
    }
};

struct Piece {
    Matrix m;
    Matrix gram;  // bilinear / sesquilinear Gram (or polar)
    Matrix quad;  // quadratic only
};

Matrix block_diag(const FieldPtr& F, const std::vector<const Matrix*>& parts)
{
    unsigned n = 0;
    for (auto* p : parts) n += p->rows();
    Matrix out(F, n, n);
    unsigned off = 0;
    for (auto* p : parts) {
        for (unsigned i = 0; i < p->rows(); ++i)
            for (unsigned j = 0; j < p->cols(); ++j) out.at(off + i, off + j) = p->at(i, j);
        off += p->rows();
    }
    return out;
}

Matrix jordan(const FieldPtr& F, unsigned m)
{
    Matrix j = Matrix::identity(F, m);
    for (unsigned i = 0; i + 1 < m; ++i) j.at(i, i + 1) = 1;
    return j;
}

// A + A* with x acting as a on A and as its dual on A*.
Piece dual_pair(const FieldPtr& F, const Matrix& a, FormKind kind)
{
    const unsigned d = a.rows();
    const Field& K = *F;
    Matrix dual = a.inverse().transpose();
    if (kind == FormKind::Unitary) dual = dual.frob(unitary_frob_power(K));
    Piece p;
    p.m = block_diag(F, {&a, &dual});
    p.gram = Matrix(F, 2 * d, 2 * d);
    p.quad = Matrix(F, 2 * d, 2 * d);
    for (unsigned i = 0; i < d; ++i) {
        p.gram.at(i, d + i) = 1;
        p.gram.at(d + i, i) = kind == FormKind::Symplectic ? K.neg(1) : 1;
        p.quad.at(i, d + i) = 1;
    }
    return p;
}

Fe find_elem(const Field& F, const std::function<bool(Fe)>& pred)
{
    for (Fe c = 1; c < F.size(); ++c)
        if (pred(c)) return c;
    throw Error("no field element with the required property");
}

} // namespace

Element element_from_label(const cc::ClassLabel& label, const gf::GroupId& g)
{
    const unsigned n = g.n;
    const u64 p = g.q.p_ul();
    const unsigned f = g.q.f;
    if (label.dimension() != n)
        throw PreconditionViolation("label dimension " + std::to_string(label.dimension()) + " differs from n=" +
                                    std::to_string(n));
    const bool unitary = g.family == gf::Family::Unitary;
    const bool orth = g.family == gf::Family::OrthogonalPlus || g.family == gf::Family::OrthogonalMinus ||
                      g.family == gf::Family::OrthogonalOdd;
    const FormKind kind = g.family == gf::Family::Linear     ? FormKind::None
                          : unitary                          ? FormKind::Unitary
                          : g.family == gf::Family::Symplectic ? FormKind::Symplectic
                                                             : FormKind::Quadratic;
    FieldPtr F = make_field(p, unitary ? 2 * f : f);
    const Field& K = *F;
    const u64 Q = K.size();
    const u64 q = g.q.q_ul();
    const int target = g.eps();
    auto unsupported = [&](const std::string& why) {
        return UnsupportedLabelShape(label.to_string() + " in " + g.name() + ": " + why);
    };

    std::vector<Piece> fixed;     // pieces without a choice
    unsigned e = 0;               // identity part
    std::vector<unsigned> j3;     // orthogonal single J3 blocks (count)
    unsigned long order = label.prime();

    if (label.kind == cc::LabelKind::Unipotent) {
        if (label.p != p) throw PreconditionViolation("unipotent label characteristic differs from p");
        if (!cc::valid_jordan(g.family, label.partition(), n, p))
            throw PreconditionViolation("Jordan form is not valid for " + g.name());
        unsigned n_j3 = 0;
        for (auto [m, a] : label.blocks) {
            if (m == 1) {
                e += a;
                continue;
            }
            unsigned singles = 0, pairs = 0;
            switch (kind) {
            case FormKind::None: singles = a; break;
            case FormKind::Symplectic:
                if (m == 2) singles = a;
                else pairs = a / 2, singles = a % 2;
                break;
            case FormKind::Unitary:
                if (m <= 3) singles = a;
                else pairs = a / 2, singles = a % 2;
                break;
            case FormKind::Quadratic:
                if (m == 3 && p != 2) singles = a;
                else pairs = a / 2, singles = a % 2;
                break;
            }
            for (unsigned t = 0; t < pairs; ++t) fixed.push_back(dual_pair(F, jordan(F, m), kind));
            for (unsigned t = 0; t < singles; ++t) {
                Piece pc;
                if (kind == FormKind::None) {
                    pc.m = jordan(F, m);
                    pc.gram = Matrix(F, m, m);
                    pc.quad = Matrix(F, m, m);
                } else if (kind == FormKind::Symplectic && m == 2) {
                    pc.m = Matrix::identity(F, 2);
                    pc.m.at(1, 0) = 1;
                    pc.gram = Matrix(F, 2, 2);
                    pc.gram.at(0, 1) = 1;
                    pc.gram.at(1, 0) = K.neg(1);
                    pc.quad = Matrix(F, 2, 2);
                } else if (kind == FormKind::Unitary && m == 2) {
                    const unsigned s = unitary_frob_power(K);
                    Fe c = find_elem(K, [&](Fe x) { return K.add(x, K.frob(x, s)) == 0; });
                    pc.m = Matrix::identity(F, 2);
                    pc.m.at(1, 0) = c;
                    pc.gram = Matrix(F, 2, 2);
                    pc.gram.at(0, 1) = pc.gram.at(1, 0) = 1;
                    pc.quad = Matrix(F, 2, 2);
                } else if (kind == FormKind::Unitary && m == 3) {
                    const unsigned s = unitary_frob_power(K);
                    Fe minus1 = K.neg(1);
                    Fe c = find_elem(K, [&](Fe x) { return K.add(x, K.frob(x, s)) == minus1; });
                    pc.m = Matrix::identity(F, 3);
                    pc.m.at(1, 0) = minus1;  // w -> w - e
                    pc.m.at(2, 0) = c;       // f -> f + w + c e
                    pc.m.at(2, 1) = 1;
                    pc.gram = Matrix(F, 3, 3);
                    pc.gram.at(0, 2) = pc.gram.at(1, 1) = pc.gram.at(2, 0) = 1;
                    pc.quad = Matrix(F, 3, 3);
                } else if (kind == FormKind::Quadratic && m == 3) {
                    ++n_j3;
                    continue;
                } else {
                    throw unsupported("no single isometric block J" + std::to_string(m));
                }
                fixed.push_back(pc);
            }
        }
        j3.assign(n_j3, 3);
    } else {
        const auto& first = label.orbits.front().first;
        const u64 r = first.r;
        const u64 step = unitary ? (q % r) * (q % r) % r : q % r;
        if (first.step != step) throw unsupported("orbit step differs from " + std::string(unitary ? "q^2" : "q") + " mod r");
        const unsigned d = static_cast<unsigned>(first.size());
        e = label.e;
        Extension ext(F, d);
        const Field& E = *ext.E;
        if ((E.size() - 1) % r) throw unsupported("r does not divide |F_{Q^d}^*|");
        const Fe zeta = E.exp((E.size() - 1) / r);
        std::vector<bool> done(label.orbits.size(), false);
        for (std::size_t idx = 0; idx < label.orbits.size(); ++idx) {
            if (done[idx]) continue;
            auto [o, a] = label.orbits[idx];
            const Fe lambda = E.pow(zeta, o.min());
            Matrix ml = ext.mult_matrix(lambda);
            if (kind == FormKind::None) {
                for (unsigned t = 0; t < a; ++t) fixed.push_back({ml, Matrix(F, d, d), Matrix(F, d, d)});
                continue;
            }
            const bool self_dual = unitary ? o.contains((r - o.min()) * (q % r) % r) : o.self_inverse();
            if (!self_dual) {
                if (unitary) throw unsupported("unitary inverse pairs are not constructed");
                auto inv = o.inverse();
                auto it = std::find_if(label.orbits.begin(), label.orbits.end(), [&](auto& ob) { return ob.first == inv; });
                if (it == label.orbits.end() || it->second != a) throw PreconditionViolation("eigenvalues are not closed under inversion");
                done[static_cast<std::size_t>(it - label.orbits.begin())] = true;
                for (unsigned t = 0; t < a; ++t) fixed.push_back(dual_pair(F, ml, kind));
                continue;
            }
            if (d % 2 && !unitary) throw unsupported("self-inverse block of odd size");
            if (unitary && d % 2 == 0) throw unsupported("unitary block of even size");
            // Trace form on F_{Q^d}: Tr(c u v^conj) with conj of order 2.
            const unsigned conj_pow = unitary ? unitary_frob_power(K) * d : K.f() * d / 2;  // v -> v^(p^conj_pow)
            Piece pc;
            pc.m = ml;
            pc.gram = Matrix(F, d, d);
            pc.quad = Matrix(F, d, d);
            Fe c = 1;
            if (kind == FormKind::Symplectic && p != 2)
                c = find_elem(E, [&](Fe x) { return E.frob(x, conj_pow) == E.neg(x); });
            for (unsigned i = 0; i < d; ++i)
                for (unsigned k = 0; k < d; ++k) {
                    Fe val = E.mul(c, E.mul(ext.theta(i), E.frob(ext.theta(k), conj_pow)));
                    pc.gram.at(i, k) = ext.down(ext.trace_to(val, 1));
                }
            if (kind == FormKind::Quadratic) {
                // Q(u) = Tr_{F_{Q^{d/2}}/F}(u^{1+Q^{d/2}}); polar is the trace form above.
                for (unsigned i = 0; i < d; ++i) {
                    Fe u = ext.theta(i);
                    Fe norm = E.mul(u, E.frob(u, conj_pow));
                    Fe tr = 0;
                    for (unsigned t = 0; t < d / 2; ++t) tr = E.add(tr, E.frob(norm, K.f() * t));
                    pc.quad.at(i, i) = ext.down(tr);
                    for (unsigned k = i + 1; k < d; ++k) pc.quad.at(i, k) = pc.gram.at(i, k);
                }
            }
            for (unsigned t = 0; t < a; ++t) fixed.push_back(pc);
        }
    }

    // Identity part and single orthogonal J3 blocks: try the form variants until the type is right.
    const Fe nu = (orth && p != 2) ? find_elem(K, [&](Fe x) { return !K.is_square(x); }) : 1;
    std::vector<int> id_variants{0};
    if (kind == FormKind::Quadratic && e > 0) id_variants = e % 2 == 0 ? std::vector<int>{1, -1} : std::vector<int>{1, 2};
    std::vector<int> j3_variants{1};
    if (!j3.empty()) j3_variants = {1, 2};
    if (kind == FormKind::Symplectic && e % 2) throw PreconditionViolation("odd 1-eigenspace in a symplectic label");
    if (kind == FormKind::Quadratic && e % 2 && p == 2) throw unsupported("odd 1-eigenspace in characteristic 2");

    for (int iv : id_variants)
        for (int jv : j3_variants) {
            std::vector<Piece> pieces = fixed;
            for (std::size_t t = 0; t < j3.size(); ++t) {
                Fe mu = (t == 0 && jv == 2) ? nu : 1;
                Piece pc;
                pc.m = Matrix::identity(F, 3);
                pc.m.at(1, 0) = K.neg(K.mul(K.from_int(2), mu));  // w -> w - 2 mu e
                pc.m.at(2, 0) = K.neg(mu);                        // f -> f + w - mu e
                pc.m.at(2, 1) = 1;
                pc.quad = Matrix(F, 3, 3);
                pc.quad.at(0, 2) = 1;
                pc.quad.at(1, 1) = mu;
                pc.gram = polar(pc.quad);
                pieces.push_back(pc);
            }
            if (e > 0) {
                Piece pc;
                pc.m = Matrix::identity(F, e);
                FormSpec idf;
                switch (kind) {
                case FormKind::None:
                    pc.gram = pc.quad = Matrix(F, e, e);
                    break;
                case FormKind::Symplectic:
                    idf = FormSpec::standard(gf::Family::Symplectic, e, F);
                    pc.gram = idf.gram;
                    pc.quad = Matrix(F, e, e);
                    break;
                case FormKind::Unitary:
                    idf = FormSpec::standard(gf::Family::Unitary, e, F);
                    pc.gram = idf.gram;
                    pc.quad = Matrix(F, e, e);
                    break;
                case FormKind::Quadratic:
                    if (e % 2 == 0) {
                        pc.quad = standard_quad(F, e, iv);
                    } else {
                        pc.quad = standard_quad(F, e, 0);
                        pc.quad.at(e / 2, e / 2) = iv == 2 ? nu : 1;
                    }
                    pc.gram = polar(pc.quad);
                    break;
                }
                pieces.push_back(pc);
            }
            std::vector<const Matrix*> ms, gs, qs;
            for (auto& pc : pieces) {
                ms.push_back(&pc.m);
                gs.push_back(&pc.gram);
                qs.push_back(&pc.quad);
            }
            Element el;
            el.m = block_diag(F, ms);
            el.form.kind = kind;
            el.form.gram = block_diag(F, gs);
            if (kind == FormKind::Quadratic) {
                el.form.quad = block_diag(F, qs);
                el.form.sign = n % 2 == 0 ? el.form.computed_sign() : 0;
                if (target != 0 && el.form.sign != target) continue;
            }
            if (!el.form.preserved_by(el.m)) throw Error("constructed element does not preserve its form");
            if (el.m.is_identity() || !el.m.pow(order).is_identity()) throw Error("constructed element has the wrong order");
            return el;
        }
    throw unsupported("no block forms reach Witt type " + std::string(target > 0 ? "+" : "-"));
}

// ---------------------------------------------------------------- subspaces

SubspaceSpec SubspaceSpec::parse(std::string_view s)
{
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    auto sign_of = [&](const std::string& t) {
        if (t == "+") return 1;
        if (t == "-") return -1;
        throw PreconditionViolation("bad sign in subspace kind '" + std::string(s) + "'");
    };
    SubspaceSpec sp;
    const std::string& h = parts[0];
    if (h == "points" && parts.size() == 1) return sp;
    if (h == "tspoints" && parts.size() == 1) return sp.kind = SubspaceKind::IsotropicPoints, sp;
    if (h == "nonsing" && parts.size() == 1) return sp.kind = SubspaceKind::NonsingularPoints, sp;
    if (h == "ts" && parts.size() == 2) {
        sp.kind = SubspaceKind::TotallySingular;
        sp.k = static_cast<unsigned>(std::stoul(parts[1]));
        return sp;
    }
    if (h == "nondeg" && (parts.size() == 2 || parts.size() == 3)) {
        sp.kind = SubspaceKind::Nondegenerate;
        sp.k = static_cast<unsigned>(std::stoul(parts[1]));
        if (parts.size() == 3) sp.sign = sign_of(parts[2]);
        return sp;
    }
    if (h == "forms" && parts.size() == 2) {
        sp.kind = SubspaceKind::QuadraticForms;
        sp.k = 0;
        sp.sign = sign_of(parts[1]);
        return sp;
    }
    throw PreconditionViolation("unknown subspace kind '" + std::string(s) + "'");
}

std::string SubspaceSpec::to_string() const
{
    std::string sg = sign > 0 ? ":+" : sign < 0 ? ":-" : "";
    switch (kind) {
    case SubspaceKind::ProjectivePoints: return "points";
    case SubspaceKind::IsotropicPoints: return "tspoints";
    case SubspaceKind::NonsingularPoints: return "nonsing";
    case SubspaceKind::TotallySingular: return "ts:" + std::to_string(k);
    case SubspaceKind::Nondegenerate: return "nondeg:" + std::to_string(k) + sg;
    case SubspaceKind::QuadraticForms: return "forms" + sg;
    }
    return "?";
}

namespace {

std::string key_of(const Fe* v, unsigned w) { return std::string(reinterpret_cast<const char*>(v), w * sizeof(Fe)); }

// Row space of the vectors orthogonal to all rows (u G v^T = 0, or the unitary analogue).
Matrix perp_basis(const FormSpec& form, const Fe* rows, unsigned k)
{
    const Field& F = form.gram.field();
    const unsigned n = form.dim();
    std::vector<Fe> a(static_cast<std::size_t>(k) * n, 0);
    for (unsigned i = 0; i < k; ++i)
        for (unsigned j = 0; j < n; ++j) {
            Fe acc = 0;
            for (unsigned t = 0; t < n; ++t) acc = F.add(acc, F.mul(rows[i * n + t], form.gram.at(t, j)));
            a[i * n + j] = acc;
        }
    unsigned rk = rref(F, a, k, n);
    std::vector<int> pivot_of(n, -1);
    for (unsigned i = 0, col = 0; i < rk; ++i) {
        while (a[i * n + col] == 0) ++col;
        pivot_of[col] = static_cast<int>(i);
    }
    Matrix basis(form.gram.field_ptr(), n - rk, n);
    unsigned row = 0;
    for (unsigned free = 0; free < n; ++free) {
        if (pivot_of[free] >= 0) continue;
        basis.at(row, free) = 1;
        for (unsigned c = 0; c < n; ++c)
            if (pivot_of[c] >= 0) basis.at(row, c) = F.neg(a[static_cast<unsigned>(pivot_of[c]) * n + free]);
        ++row;
    }
    if (form.kind == FormKind::Unitary) basis = basis.frob(unitary_frob_power(F));  // solve for v^s, undo
    return basis;
}

Matrix rows_matrix(const FormSpec& form, const Fe* rows, unsigned k)
{
    Matrix m(form.gram.field_ptr(), k, form.dim());
    for (unsigned i = 0; i < k; ++i)
        for (unsigned j = 0; j < form.dim(); ++j) m.at(i, j) = rows[i * form.dim() + j];
    return m;
}

// Quadratic form with diagonal d and the symplectic polar form.
Fe forms_value(const FormSpec& form, const std::vector<Fe>& d, const Fe* v)
{
    const Field& F = form.gram.field();
    const unsigned n = form.dim();
    Fe acc = 0;
    for (unsigned i = 0; i < n; ++i) {
        if (!v[i]) continue;
        acc = F.add(acc, F.mul(d[i], F.mul(v[i], v[i])));
        for (unsigned j = i + 1; j < n; ++j)
            if (v[j] && form.gram.at(i, j)) acc = F.add(acc, F.mul(form.gram.at(i, j), F.mul(v[i], v[j])));
    }
    return acc;
}

} // namespace

SubspaceSet::SubspaceSet(const FormSpec& form, SubspaceSpec spec) : form_(form), spec_(spec), n_(form.dim())
{
    switch (spec.kind) {
    case SubspaceKind::ProjectivePoints:
    case SubspaceKind::IsotropicPoints:
    case SubspaceKind::NonsingularPoints: k_ = 1; break;
    case SubspaceKind::QuadraticForms:
        if (form.kind != FormKind::Symplectic || form.gram.field().p() != 2)
            throw PreconditionViolation("quadratic forms on a symplectic space need q even");
        k_ = 0;
        break;
    default:
        k_ = spec.k;
        if (k_ == 0 || k_ > n_) throw PreconditionViolation("subspace dimension out of range");
    }
    if (spec.kind != SubspaceKind::ProjectivePoints && form.kind == FormKind::None)
        throw PreconditionViolation("subspace kind " + spec.to_string() + " needs a form");
    if ((spec.kind == SubspaceKind::NonsingularPoints) && form.kind != FormKind::Quadratic)
        throw PreconditionViolation("nonsingular points need a quadratic form");
    spec_.k = k_;
}

long SubspaceSet::find(const Fe* item) const
{
    auto it = index_.find(key_of(item, width()));
    return it == index_.end() ? -1 : static_cast<long>(it->second);
}

std::size_t SubspaceSet::insert(const Fe* item)
{
    auto key = key_of(item, width());
    auto [it, fresh] = index_.emplace(key, static_cast<std::uint32_t>(keys_.size()));
    if (fresh) {
        keys_.push_back(std::move(key));
        data_.insert(data_.end(), item, item + width());
    }
    return it->second;
}

std::vector<Fe> SubspaceSet::image(std::size_t i, const Matrix& g, const Matrix& g_inverse) const
{
    const Field& F = form_.gram.field();
    const Fe* it = item(i);
    if (spec_.kind == SubspaceKind::QuadraticForms) {
        std::vector<Fe> d(it, it + n_), out(n_);
        for (unsigned r = 0; r < n_; ++r) out[r] = forms_value(form_, d, g_inverse.row(r));
        return out;
    }
    std::vector<Fe> rows(static_cast<std::size_t>(k_) * n_, 0);
    for (unsigned r = 0; r < k_; ++r)
        for (unsigned t = 0; t < n_; ++t) {
            Fe a = it[r * n_ + t];
            if (!a) continue;
            for (unsigned j = 0; j < n_; ++j) rows[r * n_ + j] = F.add(rows[r * n_ + j], F.mul(a, g.at(t, j)));
        }
    rref(F, rows, k_, n_);
    return rows;
}

bool SubspaceSet::admits(const Fe* item) const
{
    const Field& F = form_.gram.field();
    switch (spec_.kind) {
    case SubspaceKind::ProjectivePoints: return true;
    case SubspaceKind::IsotropicPoints: return form_.quadratic(item) == 0;
    case SubspaceKind::NonsingularPoints: return form_.quadratic(item) != 0;
    case SubspaceKind::TotallySingular:
        for (unsigned i = 0; i < k_; ++i) {
            if (form_.quadratic(item + i * n_) != 0) return false;
            for (unsigned j = i + 1; j < k_; ++j)
                if (form_.bilinear(item + i * n_, item + j * n_) != 0) return false;
        }
        return true;
    case SubspaceKind::Nondegenerate: {
        if (k_ == 1) {
            if (form_.quadratic(item) == 0) return false;
        } else {
            Matrix b = rows_matrix(form_, item, k_);
            Matrix g = form_.kind == FormKind::Unitary ? b * form_.gram * b.frob(unitary_frob_power(F)).transpose()
                                                       : b * form_.gram * b.transpose();
            if (g.det() == 0) return false;
            if (form_.kind == FormKind::Quadratic && F.p() == 2 && k_ % 2) return false;
        }
        if (spec_.sign == 0) return true;
        if (form_.kind != FormKind::Quadratic) throw PreconditionViolation("signed nondegenerate subspaces need a quadratic form");
        if (k_ % 2 == 0) return form_.type_of(rows_matrix(form_, item, k_)) == spec_.sign;
        return form_.type_of(perp_basis(form_, item, k_)) == spec_.sign;
    }
    case SubspaceKind::QuadraticForms: {
        std::vector<Fe> d(item, item + n_);
        FormSpec qf;
        qf.kind = FormKind::Quadratic;
        qf.quad = Matrix(form_.gram.field_ptr(), n_, n_);
        for (unsigned i = 0; i < n_; ++i) {
            qf.quad.at(i, i) = d[i];
            for (unsigned j = i + 1; j < n_; ++j) qf.quad.at(i, j) = form_.gram.at(i, j);
        }
        qf.gram = form_.gram;
        return qf.computed_sign() == spec_.sign;
    }
    }
    return false;
}

namespace {

// Calls emit on every k x n RREF matrix whose partial row sets pass `ok`.
// Returns false when emit asked to stop.
bool walk_rref(const Field& F, unsigned n, unsigned k, const std::function<bool(const Fe*, unsigned)>& ok,
               const std::function<bool(const Fe*)>& emit, std::uint64_t& work, std::uint64_t work_limit)
{
    const u64 q = F.size();
    std::vector<unsigned> piv(k);
    std::vector<Fe> rows(static_cast<std::size_t>(k) * n, 0);
    std::function<bool(unsigned, unsigned)> choose = [&](unsigned t, unsigned from) -> bool {
        if (t == k) {
            std::vector<char> is_piv(n, 0);
            for (unsigned c : piv) is_piv[c] = 1;
            std::function<bool(unsigned)> fill = [&](unsigned row) -> bool {
                if (row == k) return emit(rows.data());
                std::vector<unsigned> frees;
                for (unsigned c = piv[row] + 1; c < n; ++c)
                    if (!is_piv[c]) frees.push_back(c);
                Fe* r = rows.data() + static_cast<std::size_t>(row) * n;
                std::fill(r, r + n, 0);
                r[piv[row]] = 1;
                u64 combos = 1;
                for (std::size_t i = 0; i < frees.size(); ++i) combos *= q;
                for (u64 code = 0; code < combos; ++code) {
                    if (++work > work_limit) throw DomainTooLarge("subspace enumeration exceeds its work budget");
                    u64 tcode = code;
                    for (unsigned c : frees) {
                        r[c] = static_cast<Fe>(tcode % q);
                        tcode /= q;
                    }
                    if (!ok(rows.data(), row + 1)) continue;
                    if (!fill(row + 1)) return false;
                }
                return true;
            };
            return fill(0);
        }
        for (unsigned c = from; c + (k - t) <= n; ++c) {
            piv[t] = c;
            if (!choose(t + 1, c + 1)) return false;
        }
        return true;
    };
    return choose(0, 0);
}

u64 gaussian_binomial(u64 q, unsigned n, unsigned k)
{
    long double num = 1, den = 1;
    for (unsigned i = 0; i < k; ++i) {
        num *= std::pow(static_cast<long double>(q), n - i) - 1;
        den *= std::pow(static_cast<long double>(q), i + 1) - 1;
    }
    long double v = num / den;
    return v > 1e18L ? static_cast<u64>(1e18) : static_cast<u64>(v + 0.5L);
}

// Walks candidate items of the kind in canonical order; emit returns false to stop.
void walk_kind(const SubspaceSet& set, const std::function<bool(const Fe*)>& emit, std::size_t limit)
{
    const FormSpec& form = set.form();
    const Field& F = form.gram.field();
    const unsigned n = set.n(), k = set.k();
    const u64 q = F.size();
    const auto kind = set.spec().kind;
    std::uint64_t work = 0;
    const std::uint64_t budget = 400'000'000ULL;
    auto accept = [&](const Fe* item) { return set.admits(item) ? emit(item) : true; };

    if (kind == SubspaceKind::QuadraticForms) {
        u64 total = 1;
        for (unsigned i = 0; i < n; ++i) total *= q;
        if (total > (1ul << 20)) throw DomainTooLarge("too many quadratic forms to enumerate");
        std::vector<Fe> d(n);
        for (u64 code = 0; code < total; ++code) {
            u64 t = code;
            for (unsigned i = 0; i < n; ++i, t /= q) d[i] = static_cast<Fe>(t % q);
            if (!accept(d.data())) return;
        }
        return;
    }
    if (k == 1 || kind == SubspaceKind::Nondegenerate) {
        if (gaussian_binomial(q, n, k) > 50 * static_cast<u64>(limit) + 20'000'000)
            throw DomainTooLarge(std::to_string(k) + "-spaces of F_" + std::to_string(q) + "^" + std::to_string(n) +
                                 " are too many to scan");
        walk_rref(F, n, k, [](const Fe*, unsigned) { return true; }, accept, work, budget);
        return;
    }
    // Totally singular: prune on every partial row set.
    auto ok = [&](const Fe* rows, unsigned t) {
        const Fe* last = rows + static_cast<std::size_t>(t - 1) * n;
        if (form.quadratic(last) != 0) return false;
        for (unsigned i = 0; i + 1 < t; ++i)
            if (form.bilinear(rows + static_cast<std::size_t>(i) * n, last) != 0) return false;
        return true;
    };
    walk_rref(F, n, k, ok, emit, work, budget);
}

} // namespace

SubspaceSet enumerate_subspaces(const FormSpec& form, SubspaceSpec spec, std::size_t limit)
{
    SubspaceSet set(form, spec);
    walk_kind(
        set,
        [&](const Fe* item) {
            set.insert(item);
            if (set.size() > limit) throw DomainTooLarge("more than " + std::to_string(limit) + " objects of kind " + spec.to_string());
            return true;
        },
        limit);
    return set;
}

std::size_t count_fixed(const SubspaceSet& set, const Matrix& x)
{
    Matrix xi = set.spec().kind == SubspaceKind::QuadraticForms ? x.inverse() : x;
    std::size_t fixed = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        auto img = set.image(i, x, xi);
        if (std::equal(img.begin(), img.end(), set.item(i))) ++fixed;
    }
    return fixed;
}

std::vector<std::uint32_t> induced_perm(const SubspaceSet& set, const Matrix& g)
{
    Matrix gi = g.inverse();
    std::vector<std::uint32_t> perm(set.size());
    for (std::size_t i = 0; i < set.size(); ++i) {
        auto img = set.image(i, g, gi);
        long j = set.find(img.data());
        if (j < 0) throw NotASubgroup("image of a domain object lies outside the domain");
        perm[i] = static_cast<std::uint32_t>(j);
    }
    return perm;
}

PermAction subspace_action(const std::vector<Matrix>& gens, const FormSpec& form, SubspaceSpec spec, std::size_t limit)
{
    PermAction act{SubspaceSet(form, spec), {}};
    auto& set = act.domain;
    std::vector<Fe> seed;
    walk_kind(
        set,
        [&](const Fe* item) {
            seed.assign(item, item + set.width());
            return false;
        },
        limit);
    if (seed.empty()) throw PreconditionViolation("no object of kind " + spec.to_string());
    set.insert(seed.data());
    std::vector<Matrix> inverses;
    for (auto& g : gens) {
        if (!form.preserved_by(g)) throw PreconditionViolation("generator does not preserve the form");
        inverses.push_back(g.inverse());
    }
    act.perms.assign(gens.size(), {});
    for (std::size_t i = 0; i < set.size(); ++i)
        for (std::size_t gi = 0; gi < gens.size(); ++gi) {
            auto img = set.image(i, gens[gi], inverses[gi]);
            long j = set.find(img.data());
            if (j < 0) {
                j = static_cast<long>(set.insert(img.data()));
                if (set.size() > limit) throw DomainTooLarge("orbit exceeds " + std::to_string(limit) + " objects");
            }
            act.perms[gi].push_back(static_cast<std::uint32_t>(j));
        }
    return act;
}

} // namespace elusive::mg
