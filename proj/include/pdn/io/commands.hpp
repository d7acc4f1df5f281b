#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pdn/io/case.hpp"
#include "pdn/netlist.hpp"
#include "pdn/timing/currents.hpp"

namespace pdn::io {

struct CommandOptions {
    std::string verb;   // model, ac, tran, opt, sweep-correlation, report
    std::string phase;  // opt only: freq, time, ga, da
    std::filesystem::path case_path;
    std::optional<std::filesystem::path> layout_path;
    std::optional<std::uint64_t> seed;
    std::vector<double> rho;
    std::optional<double> gamma;
    std::optional<long> budget;
    std::optional<int> profiles;
    std::filesystem::path out_dir = "runs";
    std::string timestamp;  // run-directory stamp; empty = current UTC time
};

/// Runs one verb, writing artifacts and manifest.json into a fresh run
/// directory. Returns that directory. Human-readable progress goes to `out`.
std::filesystem::path run_command(const CommandOptions& options, std::ostream& out);

/// Process exit status for an exception escaping run_command.
int exit_code_for(const std::exception& e);

/// `count` current profiles on the assembled hierarchy `base`, seeded
/// first_seed, first_seed + 1, ...
std::vector<timing::CurrentProfile> make_profiles(const Case& c, const Netlist& base, double rho,
                                                  std::uint64_t first_seed, int count);

}  // namespace pdn::io
