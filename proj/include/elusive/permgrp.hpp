#pragma once

#include "elusive/classcount.hpp"
#include "elusive/gforders.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace elusive::pg {

using Point = std::uint32_t;

/** Permutation of {0..degree-1}; products apply the left factor first. */
class Perm {
public:
    Perm() = default;
    explicit Perm(std::vector<Point> images);  ///< throws PreconditionViolation unless a bijection
    static Perm identity(std::size_t degree);

    std::size_t degree() const { return img_.size(); }
    Point operator()(Point x) const { return img_[x]; }
    const std::vector<Point>& images() const { return img_; }

    Perm operator*(const Perm& o) const;  ///< x -> o(this(x))
    /** out = a * b without reallocating out. */
    static void multiply(const Perm& a, const Perm& b, Perm& out);
    Perm inverse() const;
    Perm pow(unsigned long e) const;
    bool is_identity() const;
    bool operator==(const Perm& o) const { return img_ == o.img_; }
    std::size_t fixed_points() const;
    /** Sorted cycle lengths, fixed points included. */
    std::vector<std::size_t> cycle_type() const;
    unsigned long order() const;
    std::string str() const;  ///< cycle notation on 0-based points

private:
    std::vector<Point> img_;
};

/** Conjugate g^x = x^-1 g x. */
Perm conjugate(const Perm& g, const Perm& x);

/** Stabilizer chain from deterministic Schreier-Sims. */
class BSGS {
public:
    /**
     * Base points start with `base_prefix`, then the first point moved by
     * the current generators. Throws DegreeTooLarge above 10^6 points and
     * GroupTooLarge when the order passes 10^12.
     */
    explicit BSGS(std::vector<Perm> gens, std::vector<Point> base_prefix = {});

    std::size_t degree() const { return degree_; }
    const std::vector<Perm>& generators() const { return gens_; }
    const std::vector<Point>& base() const { return base_; }
    const std::vector<Perm>& strong_generators() const { return strong_; }
    std::size_t levels() const { return base_.size(); }
    const std::vector<Point>& orbit(std::size_t level) const { return lv_[level].orbit; }
    /** Transversal element mapping base[level] to orbit(level)[i]. */
    const Perm& transversal(std::size_t level, std::size_t i) const { return lv_[level].u[i]; }
    /** Generators of the stabilizer of base[0..level-1]. */
    std::vector<Perm> stabilizer_generators(std::size_t level) const;

    unsigned long long order() const;
    bool contains(const Perm& g) const;
    /** Position of g in [0, order) by transversal coordinates; nullopt when g is not in the group. */
    std::optional<std::uint64_t> index_of(const Perm& g) const;
    Perm element(std::uint64_t index) const;

    /** Calls f(index, element) for every element; stops when f returns false. */
    template <class F>
    void for_each(F&& f) const;

private:
    struct Level {
        std::vector<Point> orbit;
        std::vector<std::int32_t> pos;  // point -> orbit index or -1
        std::vector<Perm> u, u_inv;
        std::vector<std::size_t> gens;  // indices into strong_
    };
    std::size_t degree_ = 0;
    std::vector<Perm> gens_, strong_;
    std::vector<Point> base_;
    std::vector<Level> lv_;
    std::vector<std::uint64_t> stride_;

    void rebuild_level(std::size_t i);
    std::pair<Perm, std::size_t> sift(Perm g, std::size_t from) const;
    void schreier_sims();
    void finish();
};

/** Seeded product-replacement random elements; identical seeds give identical streams. */
class RandomElements {
public:
    RandomElements(const std::vector<Perm>& gens, std::uint64_t seed);
    Perm next();

private:
    std::vector<Perm> state_;
    Perm acc_;
    std::mt19937_64 rng_;
    void step();
};

/** Uniform random element through the stabilizer chain. */
Perm random_element(const BSGS& G, std::mt19937_64& rng);

// ---------------------------------------------------------------- actions

/**
 * Orbit of a set of points (kept sorted) under the generators, with the
 * induced permutations. A one-point seed gives the orbit of that point.
 */
struct SetAction {
    std::vector<std::vector<Point>> objects;
    std::vector<Perm> perms;  ///< one per generator, on the objects
    std::unordered_map<std::string, std::uint32_t> index;

    std::size_t degree() const { return objects.size(); }
    /** Objects mapped to themselves by x (a permutation of the base points). */
    std::size_t fixed_points(const Perm& x) const;
    /** Permutation of the objects induced by x. */
    Perm induced(const Perm& x) const;
};

SetAction set_action(const std::vector<Perm>& gens, std::vector<Point> seed, std::size_t limit = 1'000'000);

/** Stabilizer of a set of points (setwise), as generators on the base points. */
std::vector<Perm> set_stabilizer(const std::vector<Perm>& gens, const std::vector<Point>& set);

/** Action on the right cosets of H = <h_gens> in G; throws NotASubgroup or IndexTooLarge. */
std::vector<Perm> coset_action(const BSGS& G, const std::vector<Perm>& h_gens, std::size_t max_index = 1'000'000);

bool is_transitive(const std::vector<Perm>& gens, std::size_t degree);
/** Primitivity by minimal block computation for every pair {0, b}. */
bool is_primitive(const std::vector<Perm>& gens, std::size_t degree);

// ---------------------------------------------------------------- classes

struct ClassRec {
    Perm representative;
    unsigned long element_order = 0;
    std::uint64_t class_size = 0;
    std::optional<std::size_t> fixed_points;  ///< on the designated action, once computed
    std::vector<std::string> fused_under;      ///< labels of the extensions that fused this class
};

/**
 * Conjugacy classes of prime-order elements, materialized: every group
 * element is indexed through the stabilizer chain and class membership is
 * stored per index. Classes are found by a full sweep of the group, so the
 * list is complete and duplicate-free.
 */
class ClassTable {
public:
    const BSGS& group() const { return *G_; }
    const std::vector<ClassRec>& classes() const { return classes_; }
    std::vector<ClassRec>& classes() { return classes_; }
    /** Class of an element, or -1 when it is not of prime order. Throws NotASubgroup outside the group. */
    long class_of(const Perm& g) const;
    /** Number of elements of order r found by the sweep. */
    std::uint64_t elements_of_order(unsigned long r) const;

private:
    friend ClassTable prime_order_classes(const BSGS& G, std::uint64_t max_order);
    const BSGS* G_ = nullptr;
    std::vector<std::uint16_t> id_;  // 0 = not prime order, else class + 1
    std::vector<ClassRec> classes_;
    std::unordered_map<unsigned long, std::uint64_t> counts_;
};

/** Throws GroupTooLarge above max_order (default 5*10^7). The BSGS must outlive the table. */
ClassTable prime_order_classes(const BSGS& G, std::uint64_t max_order = 50'000'000);

/** Groups of class indices of `table` that are conjugate in <big_gens>; throws NotNormal. */
std::vector<std::vector<std::size_t>> class_fusion(ClassTable& table, const std::vector<Perm>& big_gens,
                                                   const std::string& label = "");

enum class VerdictKind { Elusive, AlmostElusive, Neither };
std::string to_string(VerdictKind k);

struct Verdict {
    VerdictKind kind = VerdictKind::Neither;
    unsigned long r = 0;                 ///< prime of the unique derangement class
    std::size_t derangement_classes = 0;
    std::vector<unsigned long> primes;   ///< primes of the derangement classes (with repeats)
    std::size_t prime_order_classes = 0;
    std::string to_string() const;       ///< "Elusive", "AlmostElusive(5)", "Neither(3: 2,3,7)"
};

/**
 * Derangement classes of prime order for G acting on `omega` (perms of the
 * objects induced by G's generators, in the same order). Every G-class is
 * counted, outer elements included. Fixed-point counts are checked on
 * `samples` random class members. Throws NotTransitive.
 */
Verdict derangement_verdict(ClassTable& table, const SetAction& omega, std::uint64_t seed = 1, unsigned samples = 20);

/**
 * Same verdict counted on the socle: classes of G0 = <socle_gens> are fused
 * under G's generators, and a fused class is a derangement class when its
 * representative has no fixed point. Only elements of G0 are counted.
 */
Verdict socle_verdict(const std::vector<Perm>& gens, const std::vector<Perm>& socle_gens, const SetAction& omega);

/** A derangement of prime-power order on omega, by seeded sampling then a full sweep; nullopt if none. */
std::optional<Perm> prime_power_derangement(const BSGS& G, const SetAction& omega, std::uint64_t seed = 1);

// ---------------------------------------------------------------- witnesses

struct WitnessCheck {
    bool verified = false;
    std::size_t degree = 0;
    std::size_t fixed = 0;
    std::string label;
    std::string detail;
};

/**
 * Builds the record's element at (n, q) and counts its fixed points on every
 * subspace of the record's action kind for the element's form. nullopt when
 * the record does not instantiate there. Throws DomainTooLarge above
 * max_degree and propagates construction errors.
 */
std::optional<WitnessCheck> verify_witness(const cc::WitnessRecord& rec, const gf::GroupId& g,
                                           std::size_t max_degree = 100'000);

template <class F>
void BSGS::for_each(F&& f) const
{
    const std::size_t k = levels();
    std::vector<Perm> partial(k + 1, Perm::identity(degree_));
    if (k == 0) {
        f(std::uint64_t{0}, partial[0]);
        return;
    }
    // partial[l] = u_{k-1} ... u_l, so partial[0] is the element with those coordinates.
    auto walk = [&](auto& self, std::size_t l, std::uint64_t idx) -> bool {
        const auto& lv = lv_[l];
        for (std::size_t i = 0; i < lv.orbit.size(); ++i) {
            Perm::multiply(partial[l + 1], lv.u[i], partial[l]);
            const std::uint64_t j = idx + i * stride_[l];
            if (l == 0) {
                if (!f(j, partial[0])) return false;
            } else if (!self(self, l - 1, j)) {
                return false;
            }
        }
        return true;
    };
    walk(walk, k - 1, 0);
}

} // namespace elusive::pg
