#pragma once

#include <cstdint>
#include <vector>

#include "qswitch/uniqueness.hpp"

namespace qswitch {

class ProbeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class ProcessKind { identity, switch_process, derived, cp_family };

std::string to_string(ProcessKind k);

struct ProbeBuildOptions {
    DerivedSpec derived = DerivedSpec::transpose();  // used by ProcessKind::derived
    bool allow_large_switch = false;                 // permits the switch system at d = 3
};

/// Affine constraints X -> action(X) on a spanning family of slot inputs.
/// Process index (a, o) = a * n_out + o with a on the slot side.
struct ConstraintSystem {
    ProcessKind kind = ProcessKind::identity;
    int d = 0;
    Eigen::Index n_slot = 0;
    Eigen::Index n_out = 0;
    std::vector<Matrix> family;   // HS-orthonormal, n_slot x n_slot
    std::vector<Matrix> targets;  // reference action on each family member, n_out x n_out
    Matrix reference;             // (n_slot n_out) square
    Matrix family_columns;        // column m = entries (a, a') of family[m], row a * n_slot + a'
    Matrix target_columns;        // column m = entries (o, o') of targets[m], row o * n_out + o'

    Eigen::Index process_dim() const { return n_slot * n_out; }
};

/// identity: C0 at d, family = basis of span{J_U}.
/// switch_process: W0 at d = 2, family = products of two such bases.
/// derived: build_derived_one_slot(options.derived, d).
/// cp_family: C_1 at d = 2, same family as identity.
ConstraintSystem build_constraint_system(ProcessKind kind, int d, std::uint64_t seed,
                                         const ProbeBuildOptions& options = {});

/// The action of a process on every family member, as columns.
Matrix constraint_image(const ConstraintSystem& sys, const Matrix& x);
/// Frobenius norm of constraint_image(x) - target_columns.
double constraint_residual(const ConstraintSystem& sys, const Matrix& x);
/// Nearest Hermitian point of the affine set.
Matrix affine_projection(const ConstraintSystem& sys, const Matrix& x);

struct ProbeOptions {
    int starts = 10;
    int max_iter = 5000;
    double tol = 1e-6;             // pass threshold on distance to the reference
    double step_tol = 1e-12;       // stop when an iteration moves the iterate less than this
    double perturbation = 1.0;     // Frobenius norm of the start perturbation
    double feasibility_tol = 1e-9; // residual and -min eigenvalue bound for a feasible point
    std::uint64_t seed = 7;
};

struct ProbeRun {
    Matrix point;
    double distance = 0.0;  // to sys.reference
    double residual = 0.0;
    double min_eigenvalue = 0.0;
    int iterations = 0;
    bool converged = false;  // step criterion met before max_iter
};

/// Dykstra iteration between the PSD cone and the affine set from `start`.
ProbeRun run_dykstra(const ConstraintSystem& sys, const Matrix& start, int max_iter, double step_tol);

/// Random Hermitian matrix of Frobenius norm `scale`.
Matrix random_hermitian(Eigen::Index n, double scale, std::mt19937_64& rng);

/// Starts at reference + random Hermitian perturbation, projected onto the
/// affine set. Passes iff every run ends within opt.tol of the reference.
CertificateReport alternating_projection_probe(const ConstraintSystem& sys, const ProbeOptions& opt);

/// For the cp_family system: passes iff some run ends at a feasible PSD point
/// at distance >= min_distance from C_1.
CertificateReport nonuniqueness_probe(const ConstraintSystem& sys, const ProbeOptions& opt,
                                      double min_distance = 0.1);

}  // namespace qswitch
