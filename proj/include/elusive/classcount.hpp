#pragma once

#include "elusive/gforders.hpp"

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace elusive::cc {

using gf::Family;
using numth::BigInt;
using numth::PrimePower;

/**
 * One orbit of e -> step*e (mod r) on {1..r-1}, i.e. an eigenvalue set
 * {l, l^step, l^(step^2), ...} of r-th roots of unity written by exponents.
 * exps starts at the minimum exponent and follows the step.
 */
struct OrbitLabel {
    unsigned long r = 0;
    unsigned long step = 0;
    std::vector<unsigned long> exps;

    /** The orbit containing exponent e. */
    static OrbitLabel of(unsigned long r, unsigned long step, unsigned long e);

    unsigned long min() const { return exps.front(); }
    std::size_t size() const { return exps.size(); }
    bool contains(unsigned long e) const;
    /** The orbit of inverses e -> r-e. */
    OrbitLabel inverse() const;
    bool self_inverse() const { return contains(r - min()); }

    bool operator==(const OrbitLabel& o) const { return r == o.r && step == o.step && min() == o.min(); }
    std::strong_ordering operator<=>(const OrbitLabel& o) const;
};

std::vector<OrbitLabel> sigma_orbits(unsigned long r, unsigned long base);
/** Number of orbits, (r-1)/ord_r(base), without listing them. */
unsigned long sigma_orbit_count(unsigned long r, unsigned long base);

/** Orbits of the multiplier group generated by `mults` on a set of step-orbits. */
std::vector<std::vector<OrbitLabel>> multiplier_orbits(const std::vector<OrbitLabel>& orbits,
                                                       const std::vector<unsigned long>& mults);

enum class LabelKind { Semisimple, Unipotent };

/**
 * Class label of a prime order element. Semisimple: orbit multiset plus the
 * dimension e of the 1-eigenspace. Unipotent: Jordan blocks (size, multiplicity)
 * in decreasing size, with the characteristic p.
 */
struct ClassLabel {
    LabelKind kind = LabelKind::Semisimple;
    std::vector<std::pair<OrbitLabel, unsigned>> orbits;
    unsigned e = 0;
    std::vector<std::pair<unsigned, unsigned>> blocks;
    unsigned long p = 0;

    static ClassLabel semisimple(std::vector<std::pair<OrbitLabel, unsigned>> orbits, unsigned e);
    static ClassLabel unipotent(const std::vector<unsigned>& partition, unsigned long p);

    unsigned dimension() const;
    unsigned long prime() const;  ///< r for semisimple, p for unipotent
    std::vector<unsigned> partition() const;
    unsigned multiplicity(unsigned block_size) const;
    /** +1 or -1: product of the Witt types of the orthogonal blocks (self-inverse orbit -1, paired +1). */
    int block_type() const;
    std::string to_string() const;  ///< "[L1^2, I2]" with orbit minima, or "[J3^2, J2]"

    bool operator==(const ClassLabel& o) const;
};

struct FieldOrbitResult {
    unsigned long a = 0;  ///< (m,f)
    unsigned long d = 0;  ///< (a,k)
    unsigned t = 0;
    unsigned long s = 0;  ///< |Phi| = number of sigma^2-orbits
    bool formula_integral = false;
    unsigned long formula_size = 0;  ///< a*t/k when integral
    unsigned long oracle_size = 0;
    unsigned long oracle_count = 0;
    /** Formula agrees with the oracle; vacuously true when the formula is not a positive integer. */
    bool agree() const { return !formula_integral || formula_size == oracle_size; }
};

/**
 * Orbits of <phi^k> on the sigma^2-orbits Phi of r-th roots of unity, for
 * U_n(q) with r a ppd of q^i-1 and of p^m-1, i = 2 mod 4 and k | 2f.
 * The closed formula at/k is checked against explicit enumeration. When the
 * formula is not a positive integer the oracle answer is returned; when it is
 * an integer that differs from the oracle, FormulaMismatch is thrown.
 */
FieldOrbitResult field_orbit_sizes(unsigned long r, const PrimePower& q, unsigned i, unsigned m, unsigned k);
/** Same computation without the throw, for sweeps that log disagreements. */
FieldOrbitResult field_orbit_sizes_unchecked(unsigned long r, const PrimePower& q, unsigned i, unsigned m,
                                             unsigned k);

/**
 * Outer part of G/G0 as far as counting goes: G projects onto <phi^k> in the
 * field-automorphism quotient (k = order of phi means trivial projection),
 * plus whether a graph automorphism is present.
 */
struct AutSpec {
    unsigned k = 1;
    unsigned f = 1;
    bool projects_onto_phi = true;
    bool graph = false;

    /** G projects onto <phi> (k = 1), no separate graph part. */
    static AutSpec full_field(unsigned f);
    /** G inside Inndiag(G0). */
    static AutSpec inner(unsigned f, bool unitary);
};

/** Unique G-class of elements of order r in U_n(q), n odd: r = 2na+1 with a = (m,f), and G projects onto <phi>. */
bool unique_semisimple_class(unsigned n, const PrimePower& q, unsigned long r, unsigned m, const AutSpec& aut);

struct ClassCount {
    unsigned i = 0;              ///< ord_r(q)
    unsigned long inndiag = 0;   ///< Inndiag(G0)-classes of the single-block label
    unsigned long index = 0;     ///< |Aut(G0) : Inndiag(G0)| acting on those classes
    unsigned long lower_bound = 0;  ///< ceil(inndiag / index): classes in any G
    std::optional<unsigned long> exact;  ///< classes under the given AutSpec, when the catalog knows the action
    std::string shape;           ///< e.g. "[L]" or "[L, I2]" or "[(L,L^-1)]"
};

/**
 * Counts classes of elements of order r whose label is a single eigenvalue
 * block (plus a 1-eigenspace): linear i = n; unitary i = 2 mod 4 with n < i;
 * symplectic and orthogonal i even with a single self-inverse block, or i odd
 * with a single inverse pair. Throws UnsupportedCountingCase otherwise.
 */
ClassCount class_count(const gf::GroupId& g, unsigned long r, const AutSpec& aut);

/**
 * Jordan form of an order-p unipotent element: block sizes <= p; symplectic
 * needs even multiplicity for odd sizes, orthogonal for even sizes (p odd);
 * for p = 2 symplectic/orthogonal forms are [J2^s, J1^(n-2s)].
 * Throws PartitionDimensionMismatch when the sizes do not sum to n.
 */
bool valid_jordan(Family family, const std::vector<unsigned>& partition, unsigned n, unsigned long p);

/** Integer expression in n (and j): + - * / with parentheses; nullopt when a division is inexact. */
std::optional<long> eval_expr(std::string_view expr, long n, long j = 0);

enum class RecordKind { Witness, Count, Excluded, Computed };
std::string to_string(RecordKind k);

/** One line of data/witnesses.txt. */
struct WitnessRecord {
    int line = 0;
    std::string case_id;
    Family family = Family::Linear;
    std::vector<unsigned> n_values;
    std::string subgroup;     ///< "C1:P1" style
    RecordKind kind = RecordKind::Witness;
    std::string shape;        ///< label template, or the argument id for non-witness kinds
    std::string prime;        ///< "ppd(e)", "odd-(e)", "odd+(e)", "p" or "-"
    std::string predicate;    ///< e.g. "sub:1", "nondeg1", "C3:2"
    std::string action;       ///< subspace action for brute-force checks, or "none"
    std::vector<std::string> conditions;
    std::string note;
};

std::vector<WitnessRecord> parse_witnesses(std::istream& in, const std::string& source);
std::vector<WitnessRecord> load_witnesses(const std::string& path);
/** The shipped catalog (data_dir()/witnesses.txt), loaded once. */
const std::vector<WitnessRecord>& witness_catalog();
std::vector<std::string> known_case_ids();

/**
 * Builds the witness label at (n, q): picks the smallest admissible prime and
 * the orbits with the smallest exponents. nullopt when the record's conditions
 * fail, the prime does not exist or the template does not fit n.
 */
std::optional<ClassLabel> instantiate(const WitnessRecord& rec, unsigned n, const PrimePower& q);

/** Evaluates a predicate string on a label; family gives the ambient form type. */
bool predicate_holds(std::string_view predicate, const ClassLabel& label, Family family);

/** True when the case's criterion shows the labelled element is a derangement. Throws UnknownCase. */
bool derangement_predicate(std::string_view case_id, const ClassLabel& label);

} // namespace elusive::cc
