#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace qswitch {

/// How a measured value is compared with its target.
enum class Relation {
    within,    // |measured - target| <= tolerance
    at_most,   // measured <= target + tolerance
    at_least,  // measured >= target - tolerance
};

std::string to_string(Relation r);

struct Check {
    std::string label;
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    Relation relation = Relation::within;

    bool passed() const;
};

/// Outcome of one certificate. passed() holds iff there is at least one check
/// and every check passes.
class CertificateReport {
public:
    CertificateReport() = default;
    explicit CertificateReport(std::string name) : name_(std::move(name)) {}

    const std::string& name() const { return name_; }
    const std::vector<Check>& checks() const { return checks_; }
    const std::vector<std::string>& notes() const { return notes_; }
    std::optional<double> runtime_ms() const { return runtime_ms_; }

    bool passed() const;
    std::size_t failed_count() const;

    void add(Check c) { checks_.push_back(std::move(c)); }
    void expect_near(std::string label, double measured, double target, double tol);
    void expect_at_most(std::string label, double measured, double bound, double tol = 0.0);
    void expect_at_least(std::string label, double measured, double bound, double tol = 0.0);
    /// Exact comparison; integers are carried as doubles, which is exact below 2^53.
    void expect_equal(std::string label, long long measured, long long target);
    void expect_true(std::string label, bool condition);
    void note(std::string text) { notes_.push_back(std::move(text)); }
    void set_runtime_ms(double ms) { runtime_ms_ = ms; }

    /// Appends the checks and notes of `sub`, prefixing labels with its name.
    void absorb(const CertificateReport& sub);

    const Check* find(const std::string& label) const;

private:
    std::string name_;
    std::vector<Check> checks_;
    std::vector<std::string> notes_;
    std::optional<double> runtime_ms_;
};

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

/// Plain-text rendering, one line per check.
std::string render_text(const CertificateReport& report);

}  // namespace qswitch
