#pragma once

#include "elusive/classcount.hpp"
#include "elusive/gforders.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace elusive::mg {

using Fe = std::uint32_t;

/**
 * GF(p^f) with elements encoded as integers whose base-p digits are the
 * coefficients of a polynomial in the root x of the defining polynomial.
 * The defining polynomial is the lexicographically least monic primitive one
 * (coefficients compared from x^(f-1) down to x^0); for f = 1 the generator is
 * the least primitive root.
 */
class Field {
public:
    /** Shared, cached instance; throws OutOfRange when p^f > 2^20. */
    static std::shared_ptr<const Field> make(unsigned long p, unsigned f);

    unsigned long p() const { return p_; }
    unsigned f() const { return f_; }
    unsigned long size() const { return q_; }
    /** Coefficients c_0..c_{f-1} of the monic defining polynomial. */
    const std::vector<unsigned>& poly() const { return poly_; }
    Fe gen() const { return gen_; }

    Fe add(Fe a, Fe b) const;
    Fe sub(Fe a, Fe b) const { return add(a, neg(b)); }
    Fe neg(Fe a) const;
    Fe mul(Fe a, Fe b) const
    {
        if (a == 0 || b == 0) return 0;
        unsigned long s = log_[a] + log_[b];
        return exp_[s >= q_ - 1 ? s - (q_ - 1) : s];
    }
    Fe inv(Fe a) const;
    Fe div(Fe a, Fe b) const { return mul(a, inv(b)); }
    Fe pow(Fe a, unsigned long e) const;
    /** a^(p^k). */
    Fe frob(Fe a, unsigned k = 1) const;
    Fe exp(unsigned long i) const { return exp_[i % (q_ - 1)]; }
    unsigned long log(Fe a) const;
    /** Residue of an integer in the prime field. */
    Fe from_int(long v) const;
    bool is_square(Fe a) const;
    std::string str(Fe a) const;

private:
    Field() = default;
    unsigned long p_ = 0, q_ = 0;
    unsigned f_ = 0;
    std::vector<unsigned> poly_;
    Fe gen_ = 0;
    std::vector<Fe> exp_;
    std::vector<std::uint32_t> log_;
    std::vector<Fe> neg_;
    std::vector<Fe> add_;  // full table when q <= 1024
};

using FieldPtr = std::shared_ptr<const Field>;

/** make_field(p, f). */
FieldPtr make_field(unsigned long p, unsigned f);

class Matrix {
public:
    Matrix() = default;
    Matrix(FieldPtr field, unsigned rows, unsigned cols);
    static Matrix identity(FieldPtr field, unsigned n);

    unsigned rows() const { return r_; }
    unsigned cols() const { return c_; }
    const Field& field() const { return *F_; }
    const FieldPtr& field_ptr() const { return F_; }
    Fe& at(unsigned i, unsigned j) { return a_[i * c_ + j]; }
    Fe at(unsigned i, unsigned j) const { return a_[i * c_ + j]; }
    const Fe* row(unsigned i) const { return a_.data() + i * c_; }
    const std::vector<Fe>& data() const { return a_; }

    Matrix operator*(const Matrix& o) const;
    bool operator==(const Matrix& o) const { return r_ == o.r_ && c_ == o.c_ && a_ == o.a_; }
    Matrix transpose() const;
    /** Entrywise a -> a^(p^k). */
    Matrix frob(unsigned k) const;
    Matrix inverse() const;  ///< throws PreconditionViolation when singular
    Matrix pow(unsigned long e) const;
    unsigned rank() const;
    Fe det() const;
    bool is_identity() const;
    std::string str() const;

private:
    FieldPtr F_;
    unsigned r_ = 0, c_ = 0;
    std::vector<Fe> a_;
};

/** Multiplicative order, or 0 when it exceeds limit. */
unsigned long matrix_order(const Matrix& m, unsigned long limit = 1'000'000);

enum class FormKind { None, Unitary, Symplectic, Quadratic };
std::string to_string(FormKind k);

/**
 * A form on row vectors. Unitary: h(u,v) = u G (v^s)^T with s the involutory
 * field automorphism. Symplectic: B(u,v) = u G v^T. Quadratic:
 * Q(v) = sum_{i<=j} Qm_ij v_i v_j with polar Gram G = Qm + Qm^T.
 * sign is the Witt type (+1/-1) for even-dimensional quadratic forms, 0 otherwise.
 */
struct FormSpec {
    FormKind kind = FormKind::None;
    int sign = 0;
    Matrix gram;
    Matrix quad;

    /** The fixed standard forms: antidiagonal Gram; quadratic forms in hyperbolic pairs (i, n-1-i). */
    static FormSpec standard(gf::Family family, unsigned n, FieldPtr field);

    unsigned dim() const { return gram.rows(); }
    Fe bilinear(const Fe* u, const Fe* v) const;  ///< B or h
    Fe quadratic(const Fe* v) const;              ///< Q(v); B(v,v) for non-quadratic kinds
    bool preserved_by(const Matrix& m) const;
    /** Witt type of the restriction to the row space of `basis` (even dimension, nondegenerate). */
    int type_of(const Matrix& basis) const;
    /** Sign of the whole space, recomputed from the data. */
    int computed_sign() const;
};

/** Order-2 field automorphism power (f/2) for unitary forms. */
unsigned unitary_frob_power(const Field& F);

struct MatrixGroup {
    FieldPtr field;
    FormSpec form;
    std::vector<Matrix> gens;
};

/**
 * Generators of SL_n(q), SU_n(q), Sp_n(q) (n <= 6, q <= 8) and Omega^eps_n(q)
 * (n <= 8, q <= 3) preserving the standard form: root elements (elementary
 * transvections, unitary/symplectic transvections, Eichler transformations).
 * Throws UnsupportedConstruction outside that range.
 */
MatrixGroup standard_generators(const gf::GroupId& g);

/** A matrix of prime order together with the form it preserves. */
struct Element {
    Matrix m;
    FormSpec form;
};

/**
 * Builds an element with the given label as an orthogonal sum of blocks,
 * each with its own invariant form: eigenvalue blocks act on F_{q^d} by
 * multiplication with a trace form, inverse pairs and Jordan pairs act on
 * A + A* with a hyperbolic form, single J2/J3 blocks use explicit small
 * isometries, and the 1-eigenspace gets the form type that makes the total
 * type right. The form is therefore not the standard one.
 * Throws UnsupportedLabelShape when the shape has no construction here.
 */
Element element_from_label(const cc::ClassLabel& label, const gf::GroupId& g);

// ---------------------------------------------------------------- subspaces

enum class SubspaceKind { ProjectivePoints, IsotropicPoints, TotallySingular, Nondegenerate, NonsingularPoints, QuadraticForms };

/**
 * Object kind of a subspace action. sign: for Nondegenerate with even k the
 * Witt type of the subspace, with odd k the type of its perp; for
 * QuadraticForms the type of the forms polarising to a symplectic form (q even).
 */
struct SubspaceSpec {
    SubspaceKind kind = SubspaceKind::ProjectivePoints;
    unsigned k = 1;
    int sign = 0;

    /** "points", "tspoints", "ts:k", "nondeg:k", "nondeg:k:+", "nonsing", "forms:+". */
    static SubspaceSpec parse(std::string_view s);
    std::string to_string() const;
};

/** Reduced row echelon form of the row space of `rows` (k x n, flattened); returns the rank. */
unsigned rref(const Field& F, std::vector<Fe>& rows, unsigned k, unsigned n);

/** Indexed set of subspaces (canonical RREF k x n matrices) or of quadratic forms (diagonal values). */
class SubspaceSet {
public:
    SubspaceSet(const FormSpec& form, SubspaceSpec spec);

    std::size_t size() const { return keys_.size(); }
    unsigned n() const { return n_; }
    unsigned k() const { return k_; }
    const SubspaceSpec& spec() const { return spec_; }
    const FormSpec& form() const { return form_; }
    const Fe* item(std::size_t i) const { return data_.data() + i * width(); }
    unsigned width() const { return spec_.kind == SubspaceKind::QuadraticForms ? n_ : k_ * n_; }

    /** Index of a canonical item, or -1. */
    long find(const Fe* item) const;
    /** Adds a canonical item; returns its index. */
    std::size_t insert(const Fe* item);
    /** Canonical image of item i under g. */
    std::vector<Fe> image(std::size_t i, const Matrix& g, const Matrix& g_inverse) const;
    /** Whether a canonical item belongs to the kind. */
    bool admits(const Fe* item) const;

private:
    FormSpec form_;
    SubspaceSpec spec_;
    unsigned n_, k_;
    std::vector<Fe> data_;
    std::vector<std::string> keys_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

/** All subspaces (or forms) of the kind, by direct enumeration; DomainTooLarge above limit. */
SubspaceSet enumerate_subspaces(const FormSpec& form, SubspaceSpec spec, std::size_t limit = 1'000'000);

/** Number of items of the set fixed by x. */
std::size_t count_fixed(const SubspaceSet& set, const Matrix& x);

struct PermAction {
    SubspaceSet domain;
    std::vector<std::vector<std::uint32_t>> perms;  ///< perms[g][i] = image of item i
};

/**
 * Orbit of the first subspace of the kind under the generators, with the
 * induced permutations. DomainTooLarge above limit.
 */
PermAction subspace_action(const std::vector<Matrix>& gens, const FormSpec& form, SubspaceSpec spec,
                           std::size_t limit = 1'000'000);

/** Permutation induced by g on a closed set. */
std::vector<std::uint32_t> induced_perm(const SubspaceSet& set, const Matrix& g);

} // namespace elusive::mg
