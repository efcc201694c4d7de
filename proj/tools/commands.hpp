#pragma once

#include "run_config.hpp"

#include <ostream>
#include <string>

namespace vwave::cli {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitNotCertified = 4;

struct Outputs {
    std::string dir = ".";
    /** SVG path for sweep; empty disables. */
    std::string plot;
};

/** Runs threshold | eigs | sweep | certify and writes its result file; returns kExitOk or kExitNotCertified. */
int run_command(const std::string& command, const RunConfig& cfg, const Outputs& out, std::ostream& log);

/** Maps an exception escaping run_command to an exit code. */
int exit_code_for(const std::exception& e);

nlohmann::json threshold_record(const RunConfig& cfg);
nlohmann::json eigs_record(const RunConfig& cfg);
nlohmann::json certify_record(const RunConfig& cfg);
SweepResult sweep_rows(const RunConfig& cfg, ThresholdStudy* study_out = nullptr);

std::string sweep_csv(const SweepResult& r, int k);
std::string sweep_svg(const SweepResult& r);

} // namespace vwave::cli
