#include "qswitch/report.hpp"

#include <cmath>
#include <cstdio>

namespace qswitch {

std::string to_string(Relation r) {
    switch (r) {
        case Relation::within: return "within";
        case Relation::at_most: return "at_most";
        case Relation::at_least: return "at_least";
    }
    return "within";
}

bool Check::passed() const {
    if (!std::isfinite(measured)) return false;
    switch (relation) {
        case Relation::within: return std::abs(measured - target) <= tolerance;
        case Relation::at_most: return measured <= target + tolerance;
        case Relation::at_least: return measured >= target - tolerance;
    }
    return false;
}

bool CertificateReport::passed() const { return !checks_.empty() && failed_count() == 0; }

std::size_t CertificateReport::failed_count() const {
    std::size_t n = 0;
    for (const auto& c : checks_)
        if (!c.passed()) ++n;
    return n;
}

void CertificateReport::expect_near(std::string label, double measured, double target, double tol) {
    add({std::move(label), measured, target, tol, Relation::within});
}

void CertificateReport::expect_at_most(std::string label, double measured, double bound, double tol) {
    add({std::move(label), measured, bound, tol, Relation::at_most});
}

void CertificateReport::expect_at_least(std::string label, double measured, double bound, double tol) {
    add({std::move(label), measured, bound, tol, Relation::at_least});
}

void CertificateReport::expect_equal(std::string label, long long measured, long long target) {
    add({std::move(label), static_cast<double>(measured), static_cast<double>(target), 0.0, Relation::within});
}

void CertificateReport::expect_true(std::string label, bool condition) {
    add({std::move(label), condition ? 1.0 : 0.0, 1.0, 0.0, Relation::within});
}

void CertificateReport::absorb(const CertificateReport& sub) {
    for (auto c : sub.checks()) {
        c.label = sub.name() + "/" + c.label;
        checks_.push_back(std::move(c));
    }
    for (const auto& n : sub.notes()) notes_.push_back(sub.name() + ": " + n);
}

const Check* CertificateReport::find(const std::string& label) const {
    for (const auto& c : checks_)
        if (c.label == label) return &c;
    return nullptr;
}

std::string render_text(const CertificateReport& report) {
    std::string out = "[" + std::string(report.passed() ? "PASS" : "FAIL") + "] " + report.name();
    if (report.runtime_ms()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " (%.1f ms)", *report.runtime_ms());
        out += buf;
    }
    out += '\n';
    for (const auto& c : report.checks()) {
        const char* rel = c.relation == Relation::within ? "~" : c.relation == Relation::at_most ? "<=" : ">=";
        char buf[256];
        std::snprintf(buf, sizeof buf, "  %-4s %-58s %.10g %s %.10g (tol %.1e)\n", c.passed() ? "ok" : "FAIL",
                      c.label.c_str(), c.measured, rel, c.target, c.tolerance);
        out += buf;
    }
    for (const auto& n : report.notes()) out += "  note: " + n + '\n';
    return out;
}

}  // namespace qswitch
