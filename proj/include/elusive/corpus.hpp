#pragma once

#include "elusive/permgrp.hpp"

#include <string>
#include <vector>

namespace elusive::pg {

/** A permutation group read from data/generators.txt. */
struct NamedGroup {
    std::string name;
    std::size_t degree = 0;
    std::vector<Perm> gens;
};

/** Lines "name | degree | images ; images ; ...". Throws DataError. */
std::vector<NamedGroup> load_generators(const std::string& path);
const NamedGroup& library_group(const std::string& name);

/**
 * Almost simple groups of the brute-force corpus as permutation groups on a
 * faithful base domain: L3(4) on points and lines of PG(2,4) (42), U4(2) on
 * all points of PG(3,4) (85), U5(2) on non-isotropic points (176), U4(3) on
 * totally isotropic lines (112), PSp6(2) on points of PG(5,2) (63).
 * Extensions use ATLAS names; "1" is the simple group.
 */
struct CorpusGroup {
    std::string socle;
    std::string extension;
    std::vector<Perm> gens;
    std::vector<Perm> socle_gens;
    std::string name() const { return extension == "1" ? socle : socle + "." + extension; }
};

std::vector<std::string> corpus_socles();
std::vector<std::string> corpus_extensions(const std::string& socle);
/** Throws UnsupportedConstruction for unknown socles or extensions. */
CorpusGroup corpus_group(const std::string& socle, const std::string& extension);

/**
 * Base points forming the object whose stabilizer is the row's subgroup:
 * antiflag, baer, hyperoval (L3(4)); ts-point, frame, subfield (U4(2));
 * nondeg-point, frame (U5(2)); ts-line (U4(3)); nondeg-line, form+, form- (PSp6(2)).
 * For the hyperoval, the class normalized by the extension is chosen when one exists.
 */
std::vector<Point> corpus_object(const CorpusGroup& g, const std::string& object);

/** One row of data/table1.txt. */
struct Table1Row {
    int line = 0;
    std::string socle;
    std::string asch;
    std::string type;
    std::string object;
    unsigned long r = 0;
    std::vector<std::string> listed;  ///< extensions in which the table says the action is almost elusive
    std::vector<std::string> others;  ///< further extensions that are checked not to be
};

std::vector<Table1Row> load_table1(const std::string& path);
const std::vector<Table1Row>& table1_rows();

struct RowOutcome {
    std::string group;
    std::string object;
    std::size_t degree = 0;
    unsigned long long order = 0;
    bool primitive = false;
    bool listed = false;
    Verdict verdict;
    std::size_t r_classes = 0;  ///< G-classes of elements of order r, derangements or not
    bool pass = false;
    std::string note;
};

/**
 * Verdict for one (row, extension): listed extensions pass on a primitive
 * AlmostElusive(r); other extensions pass unless they are primitive and
 * AlmostElusive with the same r.
 */
RowOutcome evaluate_row(const Table1Row& row, const std::string& extension, std::uint64_t seed = 1);

} // namespace elusive::pg
