#include "qswitch/cli.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "qswitch/probe.hpp"
#include "qswitch/uniqueness.hpp"

namespace qswitch {

namespace {

constexpr const char* kVersion = "1.0.0";

std::string number(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (const char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out + "\"";
}

bool all_passed(const std::vector<CertificateReport>& reports) {
    for (const auto& r : reports)
        if (!r.passed()) return false;
    return !reports.empty();
}

std::vector<CertificateReport> switch_reports(const RunConfig& c) {
    SwitchCertificateOptions opt;
    opt.trials = c.samples;
    opt.seed = c.seed;
    opt.probe_starts = c.probe_starts;
    opt.tol = c.tol_cert;
    std::vector<CertificateReport> out{certify_switch_uniqueness(c.dim, opt)};
    if (c.dim <= 4) out.push_back(offdiagonal_certificate(c.dim));
    return out;
}

std::vector<CertificateReport> identity_reports(const RunConfig& c) {
    return {certify_identity_uniqueness(c.dim, c.tol_cert)};
}

std::vector<CertificateReport> corollary_reports(const RunConfig& c) {
    std::vector<CertificateReport> out;
    out.push_back(verify_corollary(DerivedSpec::transpose(), c.dim, c.samples, c.seed, c.tol_cert));
    out.push_back(verify_corollary(DerivedSpec::sandwich({}, {}), c.dim, c.samples, c.seed, c.tol_cert));
    out.push_back(verify_corollary(DerivedSpec::conjugate_qubit(), 2, c.samples, c.seed, c.tol_cert));
    return out;
}

std::vector<CertificateReport> span_reports(const RunConfig& c) {
    return {verify_span_lemmas(c.dim, c.seed), group_count_certificate(c.dim)};
}

std::vector<CertificateReport> counterexample_reports(const RunConfig& c) {
    return {fig1_demo(c.samples, c.seed), cp_family_certificate(101, 50, c.seed)};
}

std::vector<CertificateReport> probe_reports(const RunConfig& c) {
    ProbeOptions opt;
    opt.starts = c.probe_starts;
    opt.seed = c.seed;
    opt.feasibility_tol = c.tol_psd;
    std::vector<CertificateReport> out;
    out.push_back(alternating_projection_probe(build_constraint_system(ProcessKind::identity, c.dim, c.seed), opt));
    if (c.dim == 2)
        out.push_back(
            alternating_projection_probe(build_constraint_system(ProcessKind::switch_process, 2, c.seed), opt));
    out.push_back(nonuniqueness_probe(build_constraint_system(ProcessKind::cp_family, 2, c.seed), opt));
    return out;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"switch-verify", "identity-verify", "corollary-verify",
                                                   "span-verify",   "counterexamples", "probe",
                                                   "all"};
    return names;
}

std::vector<CertificateReport> run_subcommand(const RunConfig& c) {
    if (c.dim < 2) throw std::invalid_argument("--dim must be at least 2");
    const auto& s = c.subcommand;
    if (s == "switch-verify") return switch_reports(c);
    if (s == "identity-verify") return identity_reports(c);
    if (s == "corollary-verify") return corollary_reports(c);
    if (s == "span-verify") return span_reports(c);
    if (s == "counterexamples") return counterexample_reports(c);
    if (s == "probe") return probe_reports(c);
    if (s == "all") {
        std::vector<CertificateReport> out;
        for (auto part : {switch_reports, identity_reports, corollary_reports, span_reports, counterexample_reports})
            for (auto& r : part(c)) out.push_back(std::move(r));
        // the switch certificate already runs the d = 2 switch probe
        RunConfig probe = c;
        probe.dim = std::min(c.dim, 3);
        for (auto& r : probe_reports(probe))
            if (r.name().rfind("probe switch", 0) != 0) out.push_back(std::move(r));
        return out;
    }
    throw std::invalid_argument("unknown subcommand: " + s);
}

std::string render_json(const RunConfig& c, const std::vector<CertificateReport>& reports) {
    std::ostringstream os;
    os << "{\n  \"version\": " << quoted(kVersion) << ",\n";
    if (!c.no_timestamp) {
        const std::time_t now = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        os << "  \"timestamp\": " << quoted(buf) << ",\n";
    }
    os << "  \"config\": {\"subcommand\": " << quoted(c.subcommand) << ", \"dim\": " << c.dim
       << ", \"seed\": " << c.seed << ", \"tol_psd\": " << number(c.tol_psd) << ", \"tol_cert\": " << number(c.tol_cert)
       << ", \"samples\": " << c.samples << ", \"probe_starts\": " << c.probe_starts << "},\n";
    os << "  \"passed\": " << (all_passed(reports) ? "true" : "false") << ",\n";
    os << "  \"certificates\": [";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        os << (i ? ",\n" : "\n") << "    {\"name\": " << quoted(r.name()) << ", \"passed\": " << (r.passed() ? "true" : "false")
           << ", \"measured\": " << r.failed_count() << ", \"target\": 0, \"tolerance\": 0, \"runtime_ms\": "
           << (c.no_timestamp || !r.runtime_ms() ? "null" : number(*r.runtime_ms())) << ",\n     \"checks\": [";
        for (std::size_t k = 0; k < r.checks().size(); ++k) {
            const auto& ch = r.checks()[k];
            os << (k ? ",\n" : "\n") << "       {\"label\": " << quoted(ch.label) << ", \"passed\": "
               << (ch.passed() ? "true" : "false") << ", \"measured\": " << number(ch.measured)
               << ", \"target\": " << number(ch.target) << ", \"tolerance\": " << number(ch.tolerance)
               << ", \"relation\": " << quoted(to_string(ch.relation)) << "}";
        }
        os << "],\n     \"notes\": [";
        for (std::size_t k = 0; k < r.notes().size(); ++k) os << (k ? ", " : "") << quoted(r.notes()[k]);
        os << "]}";
    }
    os << "\n  ]\n}\n";
    return os.str();
}

std::string render_text_report(const RunConfig& c, const std::vector<CertificateReport>& reports) {
    std::ostringstream os;
    for (const auto& r : reports) {
        if (c.no_timestamp) {
            CertificateReport copy(r.name());
            for (const auto& ch : r.checks()) copy.add(ch);
            for (const auto& n : r.notes()) copy.note(n);
            os << render_text(copy);
        } else {
            os << render_text(r);
        }
    }
    std::size_t failed = 0;
    for (const auto& r : reports) failed += r.passed() ? 0 : 1;
    os << (failed == 0 ? "ALL PASS" : "FAILED") << ": " << reports.size() - failed << "/" << reports.size()
       << " certificates passed\n";
    return os.str();
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quantum switch and one-slot supermap certificates"};
    app.fallthrough();
    app.require_subcommand(1, 1);
    RunConfig c;
    app.add_option("--dim", c.dim, "slot dimension d")->check(CLI::Range(2, 16));
    app.add_option("--seed", c.seed, "random seed");
    app.add_option("--tol-psd", c.tol_psd, "PSD / feasibility tolerance")->check(CLI::PositiveNumber);
    app.add_option("--tol-cert", c.tol_cert, "certificate tolerance")->check(CLI::PositiveNumber);
    app.add_option("--samples", c.samples, "Haar samples per check")->check(CLI::Range(1, 1000000));
    app.add_option("--format", c.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--out", c.out, "write the report to this file");
    app.add_flag("--no-timestamp", c.no_timestamp, "omit timestamps and runtimes");
    app.add_option("--probe-starts", c.probe_starts, "perturbed starts per probe")->check(CLI::Range(1, 10000));
    for (const auto& name : subcommands()) app.add_subcommand(name, "run " + name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    c.subcommand = app.get_subcommands().front()->get_name();

    std::vector<CertificateReport> reports;
    try {
        reports = run_subcommand(c);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    const std::string text = c.format == "json" ? render_json(c, reports) : render_text_report(c, reports);
    if (c.out.empty()) {
        out << text;
    } else {
        std::ofstream f(c.out, std::ios::binary);
        if (!f) {
            err << "error: cannot open " << c.out << "\n";
            return 2;
        }
        f << text;
    }
    return all_passed(reports) ? 0 : 1;
}

}  // namespace qswitch
