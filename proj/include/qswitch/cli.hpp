#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qswitch/report.hpp"

namespace qswitch {

struct RunConfig {
    std::string subcommand;
    int dim = 2;
    std::uint64_t seed = 7;
    double tol_psd = 1e-9;
    double tol_cert = 1e-9;
    int samples = 100;
    std::string format = "text";  // text | json
    std::string out;              // empty writes to the output stream
    bool no_timestamp = false;
    int probe_starts = 10;
};

const std::vector<std::string>& subcommands();

/// Runs the module operations mapped to config.subcommand.
std::vector<CertificateReport> run_subcommand(const RunConfig& config);

/// {version, config, passed, certificates: [...]} with 17 significant digits.
/// runtime_ms is null and no timestamp is written when config.no_timestamp is set.
std::string render_json(const RunConfig& config, const std::vector<CertificateReport>& reports);
std::string render_text_report(const RunConfig& config, const std::vector<CertificateReport>& reports);

/// Exit status 0 when every certificate passes, 1 when one fails, 2 on usage errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qswitch
