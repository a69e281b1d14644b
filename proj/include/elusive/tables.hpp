#pragma once

#include "elusive/gforders.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace elusive::gf {

/** One line of data/tables.txt. */
struct TableRow {
    int line = 0;
    std::string table_id;  ///< "4", "5" or "6"
    std::string row_id;
    Family family = Family::Linear;
    std::vector<unsigned> n_values;
    std::vector<unsigned long> q_values;  ///< empty when auto_q
    bool auto_q = false;
    AschClass asch_class = AschClass::C1;
    std::string type_name;
    std::vector<std::string> conditions;
    std::string expected;

    bool has_condition(const std::string& c) const;
};

/** Directory holding the shipped data files: $ELUSIVE_DATA_DIR, else the build-time default. */
std::string data_dir();

/** Throws DataError naming the source and line on malformed input. */
std::vector<TableRow> parse_tables(std::istream& in, const std::string& source);
std::vector<TableRow> load_tables(const std::string& path);

bool condition_holds(const std::string& cond, unsigned n, const PrimePower& q);

/** Evaluates "n", "n-1", "2n-2", "n/2", "(n-2)/2", "U3", an integer, ... */
unsigned index_expr(const std::string& expr, unsigned n);

/** Smallest admissible q for an auto row: conditions hold, the group exists and the type is supported. */
std::vector<unsigned long> admissible_q(const TableRow& row, unsigned n, unsigned count = 3);

struct RowInstance {
    const TableRow* row = nullptr;
    unsigned n = 0;
    unsigned long q = 0;
};
/** Auto rows take the `auto_count` smallest admissible q. */
std::vector<RowInstance> expand(const std::vector<TableRow>& rows, unsigned auto_count = 3);

struct RowReport {
    std::string table_id;
    std::string row;
    std::string group;
    std::string subgroup;
    std::string computed;
    std::string expected;
    std::string status;  ///< agree, mismatch, no-claim, error
    std::string note;
};

/** Recomputes every instance; output follows the data file order. threads = 0 picks hardware concurrency. */
std::vector<RowReport> tables_verify(const std::vector<TableRow>& rows, unsigned threads = 0, unsigned auto_count = 3);

} // namespace elusive::gf
