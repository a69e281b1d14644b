#pragma once

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace elusive::cli {

/** Exit codes shared by every command. */
enum ExitCode : int { Ok = 0, Mismatch = 1, ParseError = 2, BudgetError = 3, Unsupported = 4, DataFailure = 5 };

inline constexpr int kFormatVersion = 1;

/**
 * Result of one command: a header (command, parameters, seed) and one record
 * per row. The structured form is JSON lines, header first.
 */
struct Report {
    std::string command;
    nlohmann::json params = nlohmann::json::object();
    std::uint64_t seed = 1;
    std::vector<nlohmann::json> records;

    std::string render_structured() const;
    std::string render_human() const;
    /** Inverse of render_structured; throws DataError on a bad header or version. */
    static Report parse_structured(const std::string& text);
    bool operator==(const Report& o) const = default;
};

/** Seed from the flag when given, else ELUSIVE_SEED, else 1. Throws InvalidParameters on junk. */
std::uint64_t resolve_seed(const std::string& flag_value);

/** Parses argv-style arguments (without the program name), runs, writes the report. */
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace elusive::cli
