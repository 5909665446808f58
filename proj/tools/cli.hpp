#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tablecount::cli {

/// Seed used when neither --seed nor TABLECOUNT_SEED is given.
inline constexpr std::uint64_t kDefaultSeed = 1729;

enum ExitCode : int { kOk = 0, kInternal = 1, kValidation = 2, kBudget = 3 };

/// Runs one command line (without the program name). Reports go to `out`;
/// errors go to `err` as a single JSON line. `env_seed` is the value of
/// TABLECOUNT_SEED, if set.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const std::optional<std::string>& env_seed = std::nullopt);

}  // namespace tablecount::cli
